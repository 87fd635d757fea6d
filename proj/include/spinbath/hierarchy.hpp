#ifndef SPINBATH_HIERARCHY_HPP
#define SPINBATH_HIERARCHY_HPP

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "types.hpp"

namespace spinbath
{

inline constexpr int kMaxTerms = 32;
inline constexpr int kMaxTier = 255;
inline constexpr long kDefaultDdoCap = 4194304;

/// Occupation vector (n_1, ..., n_K), one byte per term.
struct DdoKey
{
    std::array<std::uint8_t, kMaxTerms> n{};

    int tier() const;
    bool operator==(const DdoKey& other) const { return n == other.n; }
    std::string to_string(int k_terms) const;
};

struct DdoKeyHash
{
    std::size_t operator()(const DdoKey& key) const;
};

/// All occupation vectors with sum <= tier, ordered by tier and then by
/// descending occupation of the leading terms: {00, 10, 01, 20, 11, 02}.
/// Throws ValidationError if the count C(tier+K, K) exceeds `cap`.
std::vector<DdoKey> build_index_set(int k_terms, int tier, long cap = kDefaultDdoCap);

/// C(tier + K, K), saturating at the largest long.
long index_set_size(int k_terms, int tier);

/// Flat registry of DDO slots. A slot owns a key, its neighbor links and a
/// 2x2 matrix. Slots are only ever appended; a slot is either active
/// (propagated) or dormant (value held at zero).
class DdoStore
{
public:
    DdoStore(int k_terms, int tier, long cap = kDefaultDdoCap);

    int k_terms() const { return k_; }
    int tier_cap() const { return tier_; }
    long slot_count() const { return static_cast<long>(keys_.size()); }
    long active_count() const { return static_cast<long>(active_list_.size()); }

    /// Slot of `key`, creating a dormant one if absent. Returns -1 above the tier cap.
    int ensure(const DdoKey& key);
    /// Slot of `key` or -1.
    int find(const DdoKey& key) const;

    /// Neighbor n + e_k (creating it if `create`), or -1 beyond the cap.
    int plus(int slot, int k, bool create);
    /// Neighbor n - e_k (creating it if `create`), or -1 when n_k = 0.
    int minus(int slot, int k, bool create);
    int plus_link(int slot, int k) const { return plus_[static_cast<std::size_t>(slot) * k_ + k]; }
    int minus_link(int slot, int k) const { return minus_[static_cast<std::size_t>(slot) * k_ + k]; }

    const DdoKey& key(int slot) const { return keys_[slot]; }
    int tier_of(int slot) const { return tiers_[slot]; }

    bool is_active(int slot) const { return active_[slot] != 0; }
    void activate(int slot);
    /// Marks the slot dormant and zeroes its value.
    void deactivate(int slot);
    /// Rebuilds the active list in slot order after deactivations.
    void compact_active();
    const std::vector<int>& active_slots() const { return active_list_; }

    std::vector<Matrix2c>& values() { return rho_; }
    const std::vector<Matrix2c>& values() const { return rho_; }
    Matrix2c& operator[](int slot) { return rho_[slot]; }
    const Matrix2c& operator[](int slot) const { return rho_[slot]; }

    /// Highest tier among active slots.
    int max_active_tier() const;

private:
    int link(int slot, int k, int delta, bool create);

    int k_;
    int tier_;
    long cap_;
    std::vector<DdoKey> keys_;
    std::vector<int> tiers_;
    std::vector<int> plus_;
    std::vector<int> minus_;
    std::vector<std::uint8_t> active_;
    std::vector<int> active_list_;
    std::vector<Matrix2c> rho_;
    std::unordered_map<DdoKey, int, DdoKeyHash> index_;
};

} // namespace spinbath

#endif
