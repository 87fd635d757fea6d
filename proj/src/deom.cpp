#include "spinbath/deom.hpp"

#include <cmath>
#include <sstream>

#include "spinbath/serialize.hpp"

namespace spinbath
{

Matrix2c pauli_x() { return (Matrix2c() << 0.0, 1.0, 1.0, 0.0).finished(); }

Matrix2c pauli_z() { return (Matrix2c() << 1.0, 0.0, 0.0, -1.0).finished(); }

Matrix2c SystemSpec::hamiltonian() const { return epsilon * pauli_z() + delta * pauli_x(); }

std::vector<std::string> SystemSpec::violations(const std::string& path) const
{
    std::vector<std::string> out;
    if (!std::isfinite(epsilon)) {
        out.push_back(path + ".epsilon: must be finite");
    }
    if (!std::isfinite(delta)) {
        out.push_back(path + ".delta: must be finite");
    }
    if (!q_op.allFinite() || (q_op - q_op.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        out.push_back(path + ".q_op: must be a finite Hermitian matrix");
    }
    if (!rho0.allFinite() || (rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        out.push_back(path + ".rho0: must be a finite Hermitian matrix");
    } else {
        if (std::abs(rho0.trace() - 1.0) > 1e-12) {
            out.push_back(path + ".rho0: trace must be 1");
        }
        if (hermitian_eigenvalues(rho0).first < -1e-12) {
            out.push_back(path + ".rho0: must be positive semidefinite");
        }
    }
    return out;
}

std::vector<std::string> HierarchyParams::violations(const std::string& path) const
{
    std::vector<std::string> out;
    if (tier < 1 || tier > kMaxTier) {
        out.push_back(path + ".tier: must be in [1, " + std::to_string(kMaxTier) + "]");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        out.push_back(path + ".dt: must be > 0");
    }
    if (!(filter_tol >= 0.0)) {
        out.push_back(path + ".filter_tol: must be >= 0 (0 disables filtering)");
    }
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        out.push_back(path + ".t_final: must be a finite number >= 0");
    }
    if (record_stride < 1) {
        out.push_back(path + ".record_stride: must be >= 1");
    }
    if (ddo_cap < 1) {
        out.push_back(path + ".ddo_cap: must be >= 1");
    }
    return out;
}

long HierarchyParams::total_steps() const { return std::lround(t_final / dt); }

DeomCoefficients deom_coefficients(const ExponentialSeries& series, int tier, bool scaled)
{
    const int n = series.size();
    DeomCoefficients c;
    c.eta_prime.resize(n);
    c.eta_dprime.resize(n);
    c.gamma.resize(n);
    c.up.assign(n, std::vector<Real>(tier + 1, 1.0));
    c.down.assign(n, std::vector<Real>(tier + 1, 0.0));
    const Complex two_i(0.0, 2.0);
    for (int k = 0; k < n; ++k) {
        const Complex eta = series.terms[k].eta;
        const Complex partner = std::conj(series.terms[series.conj_partner[k]].eta);
        c.eta_prime[k] = (eta + partner) / 2.0;
        c.eta_dprime[k] = (eta - partner) / two_i;
        c.gamma[k] = series.terms[k].gamma;
        const Real s = std::abs(eta) > 0.0 ? std::abs(eta) : 1.0;
        for (int m = 0; m <= tier; ++m) {
            if (scaled) {
                c.up[k][m] = std::sqrt((m + 1) * s);
                c.down[k][m] = std::sqrt(m / s);
            } else {
                c.down[k][m] = m;
            }
        }
    }
    return c;
}

namespace
{

const Complex kI(0.0, 1.0);

// Evaluates the hierarchy right-hand side. prepare() flattens the links
// between active slots into a plan with the weights folded in; the active
// set is fixed within a step, so the four RK-4 stages share one plan.
class Kernel
{
public:
    Kernel(const SystemSpec& sys, const DeomCoefficients& c) : c_(c), h_(sys.hamiltonian()), q_(sys.q_op)
    {
        diagonal_q_ = q_(0, 1) == 0.0 && q_(1, 0) == 0.0;
        q0_ = q_(0, 0).real();
        q1_ = q_(1, 1).real();
    }

    void prepare(DdoStore& store)
    {
        extend_damping(store);
        const auto& active = store.active_slots();
        nodes_.clear();
        ups_.clear();
        downs_.clear();
        nodes_.reserve(active.size());
        const Complex dq = -kI * (q0_ - q1_);
        const Real sq = q0_ + q1_;
        for (int s : active) {
            Node node;
            node.slot = s;
            node.damping = damping_[s];
            node.up_begin = static_cast<int>(ups_.size());
            node.down_begin = static_cast<int>(downs_.size());
            const DdoKey& key = store.key(s);
            for (int k = 0; k < c_.size(); ++k) {
                const int m = key.n[k];
                const int u = store.plus(s, k, false);
                if (u >= 0 && store.is_active(u)) {
                    const Real w = c_.up[k][m];
                    ups_.push_back({u, diagonal_q_ ? dq * w : Complex(w)});
                }
                if (m > 0) {
                    const int dn = store.minus(s, k, false);
                    if (dn >= 0 && store.is_active(dn)) {
                        const Real w = c_.down[k][m];
                        const Complex a = w * c_.eta_prime[k];
                        const Complex b = w * c_.eta_dprime[k];
                        Down d;
                        d.slot = dn;
                        if (diagonal_q_) {
                            // Entries of -i[Q, a rho] + {Q, b rho} for Q = diag(q0, q1).
                            d.c00 = 2.0 * q0_ * b;
                            d.c11 = 2.0 * q1_ * b;
                            d.c01 = dq * a + sq * b;
                            d.c10 = -dq * a + sq * b;
                        } else {
                            d.c00 = a;
                            d.c11 = b;
                        }
                        downs_.push_back(d);
                    }
                }
            }
            nodes_.push_back(node);
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            nodes_[i].up_end = i + 1 < nodes_.size() ? nodes_[i + 1].up_begin : static_cast<int>(ups_.size());
            nodes_[i].down_end = i + 1 < nodes_.size() ? nodes_[i + 1].down_begin : static_cast<int>(downs_.size());
        }
    }

    void evaluate(const std::vector<Matrix2c>& in, std::vector<Matrix2c>& out) const
    {
        if (out.size() < in.size()) {
            out.resize(in.size(), Matrix2c::Zero());
        }
        if (diagonal_q_) {
            for (const Node& n : nodes_) {
                out[n.slot] = diagonal_rhs(n, in);
            }
        } else {
            for (const Node& n : nodes_) {
                out[n.slot] = dense_rhs(n, in);
            }
        }
    }

    const DeomCoefficients& coefficients() const { return c_; }

private:
    struct Node
    {
        int slot = 0;
        Complex damping;
        int up_begin = 0;
        int up_end = 0;
        int down_begin = 0;
        int down_end = 0;
    };

    struct Up
    {
        int slot;
        Complex w;
    };

    // Diagonal Q: per-entry coefficients. Dense Q: c00 = w eta', c11 = w eta''.
    struct Down
    {
        int slot = 0;
        Complex c00;
        Complex c01;
        Complex c10;
        Complex c11;
    };

    void extend_damping(const DdoStore& store)
    {
        for (long s = static_cast<long>(damping_.size()); s < store.slot_count(); ++s) {
            Complex d = 0.0;
            const DdoKey& key = store.key(static_cast<int>(s));
            for (int k = 0; k < c_.size(); ++k) {
                d += static_cast<Real>(key.n[k]) * c_.gamma[k];
            }
            damping_.push_back(d);
        }
    }

    // -i[H, rho] - damping rho, written out for Hermitian H.
    Matrix2c liouvillian(const Matrix2c& rho, Complex damping) const
    {
        const Complex h01 = h_(0, 1);
        const Complex h10 = h_(1, 0);
        const Complex split = kI * (h_(0, 0) - h_(1, 1));
        const Complex pop = rho(0, 0) - rho(1, 1);
        Matrix2c d;
        d(0, 0) = -kI * (h01 * rho(1, 0) - rho(0, 1) * h10) - damping * rho(0, 0);
        d(1, 1) = -kI * (h10 * rho(0, 1) - rho(1, 0) * h01) - damping * rho(1, 1);
        d(0, 1) = -(split + damping) * rho(0, 1) + kI * h01 * pop;
        d(1, 0) = (split - damping) * rho(1, 0) - kI * h10 * pop;
        return d;
    }

    Matrix2c diagonal_rhs(const Node& n, const std::vector<Matrix2c>& in) const
    {
        const Matrix2c& rho = in[n.slot];
        Matrix2c d = liouvillian(rho, n.damping);
        // The commutator with a diagonal Q only touches the off-diagonal entries.
        Complex u01 = 0.0;
        Complex u10 = 0.0;
        for (int i = n.up_begin; i < n.up_end; ++i) {
            const Up& u = ups_[i];
            u01 += u.w * in[u.slot](0, 1);
            u10 -= u.w * in[u.slot](1, 0);
        }
        d(0, 1) += u01;
        d(1, 0) += u10;
        for (int i = n.down_begin; i < n.down_end; ++i) {
            const Down& l = downs_[i];
            const Matrix2c& r = in[l.slot];
            d(0, 0) += l.c00 * r(0, 0);
            d(0, 1) += l.c01 * r(0, 1);
            d(1, 0) += l.c10 * r(1, 0);
            d(1, 1) += l.c11 * r(1, 1);
        }
        return d;
    }

    Matrix2c dense_rhs(const Node& n, const std::vector<Matrix2c>& in) const
    {
        const Matrix2c& rho = in[n.slot];
        Matrix2c d = liouvillian(rho, n.damping);
        Matrix2c up = Matrix2c::Zero();
        Matrix2c a = Matrix2c::Zero();
        Matrix2c b = Matrix2c::Zero();
        for (int i = n.up_begin; i < n.up_end; ++i) {
            up += ups_[i].w.real() * in[ups_[i].slot];
        }
        for (int i = n.down_begin; i < n.down_end; ++i) {
            a += downs_[i].c00 * in[downs_[i].slot];
            b += downs_[i].c11 * in[downs_[i].slot];
        }
        d -= kI * (q_ * up - up * q_);
        d += (q_ * b + b * q_) - kI * (q_ * a - a * q_);
        return d;
    }

    const DeomCoefficients& c_;
    Matrix2c h_;
    Matrix2c q_;
    bool diagonal_q_ = false;
    Real q0_ = 0.0;
    Real q1_ = 0.0;
    std::vector<Complex> damping_;
    std::vector<Node> nodes_;
    std::vector<Up> ups_;
    std::vector<Down> downs_;
};

Real max_abs(const Matrix2c& m) { return m.cwiseAbs().maxCoeff(); }

// RK-4 buffers reused across steps. The kernel never reads dormant slots, so
// stale stage values there are harmless.
struct Rk4Workspace
{
    std::vector<Matrix2c> stage;
    std::vector<Matrix2c> slope;
    std::vector<Matrix2c> sum;

    void fit(std::size_t n)
    {
        stage.resize(n, Matrix2c::Zero());
        slope.resize(n, Matrix2c::Zero());
        sum.resize(n, Matrix2c::Zero());
    }
};

void rk4_advance(DdoStore& store, Kernel& kernel, Rk4Workspace& w, Real dt)
{
    std::vector<Matrix2c>& y = store.values();
    w.fit(y.size());
    const auto& active = store.active_slots();

    kernel.prepare(store);
    kernel.evaluate(y, w.slope);
    for (int s : active) {
        w.sum[s] = y[s] + (dt / 6.0) * w.slope[s];
        w.stage[s] = y[s] + (dt / 2.0) * w.slope[s];
    }
    kernel.evaluate(w.stage, w.slope);
    for (int s : active) {
        w.sum[s] += (dt / 3.0) * w.slope[s];
        w.stage[s] = y[s] + (dt / 2.0) * w.slope[s];
    }
    kernel.evaluate(w.stage, w.slope);
    for (int s : active) {
        w.sum[s] += (dt / 3.0) * w.slope[s];
        w.stage[s] = y[s] + dt * w.slope[s];
    }
    kernel.evaluate(w.stage, w.slope);
    for (int s : active) {
        y[s] = w.sum[s] + (dt / 6.0) * w.slope[s];
    }
}

// On-the-fly filter. Before each step every active DDO bounds the source it
// feeds into each neighbor; a driven DDO with damping Re(sum n_k gamma_k)
// settles near source/damping, and dormant neighbors whose estimate reaches
// tol are activated. After the step, DDOs below tol whose estimate is also
// below tol go dormant.
class Filter
{
public:
    Filter(const SystemSpec& sys, const DeomCoefficients& c, Real tol) : c_(c), tol_(tol)
    {
        const Matrix2c& q = sys.q_op;
        const Real row = std::max(std::abs(q(0, 0)) + std::abs(q(0, 1)), std::abs(q(1, 0)) + std::abs(q(1, 1)));
        q_bound_ = 2.0 * row;
        coupling_.resize(c.size());
        for (int k = 0; k < c.size(); ++k) {
            coupling_[k] = std::abs(c.eta_prime[k]) + std::abs(c.eta_dprime[k]);
        }
    }

    void activate(DdoStore& store)
    {
        const int kk = store.k_terms();
        const int cap = store.tier_cap();
        estimate_.assign(static_cast<std::size_t>(store.slot_count()), 0.0);
        const std::vector<int> active = store.active_slots();
        for (int s : active) {
            const Real norm = max_abs(store[s]);
            if (norm == 0.0) {
                continue;
            }
            const DdoKey key = store.key(s);
            const int t = store.tier_of(s);
            for (int k = 0; k < kk; ++k) {
                const int m = key.n[k];
                if (t < cap) {
                    const int u = store.plus(s, k, true);
                    add(u, c_.down[k][m + 1] * coupling_[k] * q_bound_ * norm);
                }
                if (m > 0) {
                    const int dn = store.minus(s, k, true);
                    add(dn, c_.up[k][m - 1] * q_bound_ * norm);
                }
            }
        }
        extend_damping(store);
        bool grew = false;
        for (std::size_t s = 1; s < estimate_.size(); ++s) {
            estimate_[s] /= damping_[s];
            if (!store.is_active(static_cast<int>(s)) && estimate_[s] >= tol_) {
                store.activate(static_cast<int>(s));
                grew = true;
            }
        }
        if (grew) {
            store.compact_active();
        }
    }

    void prune(DdoStore& store)
    {
        bool shrank = false;
        for (int s : store.active_slots()) {
            if (s == 0) {
                continue;
            }
            const Real source = static_cast<std::size_t>(s) < estimate_.size() ? estimate_[s] : 0.0;
            if (max_abs(store[s]) < tol_ && source < tol_) {
                store.deactivate(s);
                shrank = true;
            }
        }
        if (shrank) {
            store.compact_active();
        }
    }

private:
    void add(int slot, Real v)
    {
        if (slot < 0) {
            return;
        }
        if (static_cast<std::size_t>(slot) >= estimate_.size()) {
            estimate_.resize(static_cast<std::size_t>(slot) + 1, 0.0);
        }
        estimate_[slot] += v;
    }

    void extend_damping(const DdoStore& store)
    {
        for (long s = static_cast<long>(damping_.size()); s < store.slot_count(); ++s) {
            Real d = 0.0;
            const DdoKey& key = store.key(static_cast<int>(s));
            for (int k = 0; k < c_.size(); ++k) {
                d += key.n[k] * c_.gamma[k].real();
            }
            damping_.push_back(d > 0.0 ? d : 1.0);
        }
        estimate_.resize(damping_.size(), 0.0);
    }

    const DeomCoefficients& c_;
    Real tol_;
    Real q_bound_ = 0.0;
    std::vector<Real> coupling_;
    std::vector<Real> estimate_;
    std::vector<Real> damping_;
};

void check_finite(const DdoStore& store)
{
    for (int s : store.active_slots()) {
        if (!store[s].allFinite()) {
            throw DivergenceError("DDO " + store.key(s).to_string(store.k_terms()) +
                                  " became non-finite; increase the tier or reduce dt");
        }
    }
    const Real root = max_abs(store[0]);
    if (root > 10.0) {
        std::ostringstream msg;
        msg << "root density matrix norm " << root << " exceeds 10; increase the tier or reduce dt";
        throw DivergenceError(msg.str());
    }
}

int hierarchy_terms(const ExponentialSeries& series) { return std::max(series.size(), 1); }

Json checkpoint_json(const SystemSpec& sys, const ExponentialSeries& series, const HierarchyParams& params,
                     const DdoStore& store, long step, const Trajectory& traj)
{
    Json slots = Json::array();
    const int k = store.k_terms();
    for (int s = 0; s < store.slot_count(); ++s) {
        Json key = Json::array();
        for (int j = 0; j < k; ++j) {
            key.push_back(static_cast<int>(store.key(s).n[j]));
        }
        Json entry = {{"key", key}, {"active", store.is_active(s)}};
        if (store.is_active(s)) {
            entry["rho"] = matrix_to_json(store[s]);
        }
        slots.push_back(entry);
    }
    return {{"format", "spinbath-checkpoint"},
            {"version", 1},
            {"step", step},
            {"system", to_json(sys)},
            {"hierarchy", to_json(params)},
            {"series", series_to_json(series)},
            {"slots", slots},
            {"trajectory", trajectory_to_json(traj)}};
}

void restore_checkpoint(const Json& j, const SystemSpec& sys, const ExponentialSeries& series,
                        const HierarchyParams& params, DdoStore& store, long& step, Trajectory& traj)
{
    if (j.value("format", "") != "spinbath-checkpoint" || j.value("version", 0) != 1) {
        throw ValidationError("checkpoint: unrecognized format");
    }
    if (j.at("system") != to_json(sys)) {
        throw ValidationError("checkpoint: system differs from the current configuration");
    }
    if (j.at("hierarchy") != to_json(params)) {
        throw ValidationError("checkpoint: hierarchy parameters differ from the current configuration");
    }
    if (j.at("series") != series_to_json(series)) {
        throw ValidationError("checkpoint: exponential series differs from the current fit");
    }
    step = j.at("step").get<long>();
    traj = trajectory_from_json(j.at("trajectory"));
    const auto& slots = j.at("slots");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        DdoKey key;
        const auto occ = slots[i].at("key").get<std::vector<int>>();
        if (static_cast<int>(occ.size()) != store.k_terms()) {
            throw ValidationError("checkpoint: key length does not match the series");
        }
        for (std::size_t k = 0; k < occ.size(); ++k) {
            key.n[k] = static_cast<std::uint8_t>(occ[k]);
        }
        const int s = store.ensure(key);
        if (s != static_cast<int>(i)) {
            throw ValidationError("checkpoint: slot table is inconsistent");
        }
        if (slots[i].at("active").get<bool>()) {
            store.activate(s);
            store[s] = matrix_from_json(slots[i].at("rho"));
        }
    }
    store.compact_active();
}

} // namespace

std::vector<Matrix2c> deom_rhs(DdoStore& store, const SystemSpec& sys, const DeomCoefficients& coeffs)
{
    Kernel kernel(sys, coeffs);
    std::vector<Matrix2c> out(store.values().size(), Matrix2c::Zero());
    kernel.prepare(store);
    kernel.evaluate(store.values(), out);
    return out;
}

void rk4_step(DdoStore& store, const SystemSpec& sys, const DeomCoefficients& coeffs, Real dt)
{
    if (!(dt > 0.0)) {
        throw DomainError("rk4_step: dt must be > 0");
    }
    Kernel kernel(sys, coeffs);
    Rk4Workspace w;
    rk4_advance(store, kernel, w, dt);
    check_finite(store);
}

long filter_prune(DdoStore& store, Real tol)
{
    if (!(tol > 0.0)) {
        return 0;
    }
    long pruned = 0;
    for (int s : store.active_slots()) {
        if (s != 0 && max_abs(store[s]) < tol) {
            store.deactivate(s);
            ++pruned;
        }
    }
    store.compact_active();
    return pruned;
}

Trajectory propagate(const SystemSpec& sys, const ExponentialSeries& series, const HierarchyParams& params,
                     const PropagationControl& control)
{
    std::vector<std::string> problems = sys.violations();
    for (auto& v : params.violations()) {
        problems.push_back(v);
    }
    if (!problems.empty()) {
        std::string msg = "propagate: invalid input";
        for (const auto& p : problems) {
            msg += "\n  " + p;
        }
        throw ValidationError(msg);
    }
    series.check_invariants();

    // An empty series still gets one inert term so the store has a shape.
    const bool coupled = !series.empty();
    const int kk = hierarchy_terms(series);
    const int tier = coupled ? params.tier : 0;
    const DeomCoefficients coeffs = coupled ? deom_coefficients(series, tier, params.scaled) : DeomCoefficients{};

    DdoStore store(kk, tier, params.ddo_cap);
    const bool filtering = coupled && params.filter_tol > 0.0;
    if (coupled && !filtering) {
        for (const auto& key : build_index_set(kk, tier, params.ddo_cap)) {
            store.activate(store.ensure(key));
        }
        store.compact_active();
    }

    Trajectory traj;
    long step = 0;
    if (!control.resume_path.empty()) {
        restore_checkpoint(read_json_file(control.resume_path), sys, series, params, store, step, traj);
    } else {
        store[0] = sys.rho0;
        traj.record(0.0, store[0], store.active_count(), store.max_active_tier());
        if (control.on_record) {
            control.on_record(traj);
        }
    }

    Kernel kernel(sys, coeffs);
    Filter filter(sys, coeffs, params.filter_tol);
    Rk4Workspace work;
    const long total = params.total_steps();
    while (step < total) {
        if (filtering) {
            filter.activate(store);
        }
        rk4_advance(store, kernel, work, params.dt);
        if (filtering) {
            filter.prune(store);
        }
        ++step;
        traj.steps = step;
        const bool record = step % params.record_stride == 0 || step == total;
        if (record || filtering) {
            check_finite(store);
        }
        if (record) {
            traj.record(static_cast<Real>(step) * params.dt, store[0], store.active_count(), store.max_active_tier());
            if (control.on_record) {
                control.on_record(traj);
            }
        }
        if (control.checkpoint_every > 0 && !control.checkpoint_path.empty() && step % control.checkpoint_every == 0) {
            write_json_file(control.checkpoint_path, checkpoint_json(sys, series, params, store, step, traj));
        }
    }
    return traj;
}

} // namespace spinbath
