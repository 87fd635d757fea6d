#include "spinbath/hierarchy.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace spinbath
{

int DdoKey::tier() const
{
    int s = 0;
    for (auto v : n) {
        s += v;
    }
    return s;
}

std::string DdoKey::to_string(int k_terms) const
{
    std::ostringstream out;
    out << '(';
    for (int k = 0; k < k_terms; ++k) {
        out << (k ? "," : "") << static_cast<int>(n[k]);
    }
    out << ')';
    return out.str();
}

std::size_t DdoKeyHash::operator()(const DdoKey& key) const
{
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : key.n) {
        h ^= v;
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

long index_set_size(int k_terms, int tier)
{
    // C(tier + K, K) built incrementally; each partial product is itself a binomial.
    long double c = 1.0L;
    for (int j = 1; j <= k_terms; ++j) {
        c = c * (tier + j) / j;
        if (c > static_cast<long double>(std::numeric_limits<long>::max())) {
            return std::numeric_limits<long>::max();
        }
    }
    return static_cast<long>(c + 0.5L);
}

namespace
{

void enumerate(int k_terms, int pos, int remaining, DdoKey& key, std::vector<DdoKey>& out)
{
    if (pos == k_terms - 1) {
        key.n[pos] = static_cast<std::uint8_t>(remaining);
        out.push_back(key);
        key.n[pos] = 0;
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        key.n[pos] = static_cast<std::uint8_t>(v);
        enumerate(k_terms, pos + 1, remaining - v, key, out);
    }
    key.n[pos] = 0;
}

void check_shape(int k_terms, int tier)
{
    if (k_terms < 1 || k_terms > kMaxTerms) {
        throw ValidationError("hierarchy: number of exponential terms must be in [1, " + std::to_string(kMaxTerms) +
                              "], got " + std::to_string(k_terms));
    }
    if (tier < 0 || tier > kMaxTier) {
        throw ValidationError("hierarchy: tier must be in [0, " + std::to_string(kMaxTier) + "], got " +
                              std::to_string(tier));
    }
}

} // namespace

std::vector<DdoKey> build_index_set(int k_terms, int tier, long cap)
{
    check_shape(k_terms, tier);
    const long count = index_set_size(k_terms, tier);
    if (count > cap) {
        throw ValidationError("hierarchy: index set for K=" + std::to_string(k_terms) + ", L=" + std::to_string(tier) +
                              " has " + std::to_string(count) + " keys, above the cap of " + std::to_string(cap));
    }
    std::vector<DdoKey> keys;
    keys.reserve(static_cast<std::size_t>(count));
    DdoKey key;
    for (int level = 0; level <= tier; ++level) {
        enumerate(k_terms, 0, level, key, keys);
    }
    return keys;
}

DdoStore::DdoStore(int k_terms, int tier, long cap) : k_(k_terms), tier_(tier), cap_(cap)
{
    check_shape(k_terms, tier);
    const int root = ensure(DdoKey{});
    activate(root);
}

int DdoStore::find(const DdoKey& key) const
{
    auto it = index_.find(key);
    return it == index_.end() ? -1 : it->second;
}

int DdoStore::ensure(const DdoKey& key)
{
    const int t = key.tier();
    if (t > tier_) {
        return -1;
    }
    if (int slot = find(key); slot >= 0) {
        return slot;
    }
    if (slot_count() >= cap_) {
        throw Error("hierarchy: DDO count reached the cap of " + std::to_string(cap_) + " while adding " +
                    key.to_string(k_));
    }
    const int slot = static_cast<int>(keys_.size());
    keys_.push_back(key);
    tiers_.push_back(t);
    plus_.insert(plus_.end(), k_, -2);
    minus_.insert(minus_.end(), k_, -2);
    active_.push_back(0);
    rho_.push_back(Matrix2c::Zero());
    index_.emplace(key, slot);
    return slot;
}

// Links cache -2 for "not looked up yet" and -1 for "outside the hierarchy".
int DdoStore::link(int slot, int k, int delta, bool create)
{
    std::vector<int>& table = delta > 0 ? plus_ : minus_;
    const std::size_t at = static_cast<std::size_t>(slot) * k_ + k;
    if (table[at] != -2) {
        return table[at];
    }
    DdoKey other = keys_[slot];
    const int v = other.n[k] + delta;
    if (v < 0 || (delta > 0 && tiers_[slot] + 1 > tier_)) {
        table[at] = -1;
        return -1;
    }
    other.n[k] = static_cast<std::uint8_t>(v);
    const int target = create ? ensure(other) : find(other);
    if (target < 0) {
        return -1;
    }
    // `ensure` may have grown the tables; index again.
    std::vector<int>& fwd = delta > 0 ? plus_ : minus_;
    std::vector<int>& back = delta > 0 ? minus_ : plus_;
    fwd[at] = target;
    back[static_cast<std::size_t>(target) * k_ + k] = slot;
    return target;
}

int DdoStore::plus(int slot, int k, bool create) { return link(slot, k, +1, create); }

int DdoStore::minus(int slot, int k, bool create) { return link(slot, k, -1, create); }

void DdoStore::activate(int slot)
{
    if (!active_[slot]) {
        active_[slot] = 1;
        active_list_.push_back(slot);
    }
}

void DdoStore::deactivate(int slot)
{
    if (slot == 0) {
        return;
    }
    active_[slot] = 0;
    rho_[slot].setZero();
}

void DdoStore::compact_active()
{
    active_list_.erase(std::remove_if(active_list_.begin(), active_list_.end(), [&](int s) { return !active_[s]; }),
                       active_list_.end());
    std::sort(active_list_.begin(), active_list_.end());
}

int DdoStore::max_active_tier() const
{
    int t = 0;
    for (int s : active_list_) {
        t = std::max(t, tiers_[s]);
    }
    return t;
}

} // namespace spinbath
