#pragma once

#include "hypocouette/energy.hpp"
#include "hypocouette/linear_dynamics.hpp"
#include "hypocouette/nonlinear_dynamics.hpp"

namespace hypocouette {

namespace detail {

/// Uniform spacing of the sample times; throws if the spacing varies.
inline real uniform_step(const std::vector<real>& t)
{
    if (t.size() < 3) throw DomainError("budget: at least three samples are required");
    const real dt = (t.back() - t.front()) / static_cast<real>(t.size() - 1);
    if (!(dt > 0.0)) throw DomainError("budget: sample times must increase");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > 1e-9 * std::max(dt, std::abs(t[i])))
            throw DomainError("budget: non-uniform sampling at index " + std::to_string(i));
    return dt;
}

/// Centered differences in the interior, second-order one-sided at the ends.
inline std::vector<real> time_derivative(const std::vector<real>& f, real dt)
{
    const std::size_t n = f.size();
    std::vector<real> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
    return d;
}

}  // namespace detail

/// E_k and D_k of one mode along a uniformly sampled run.
struct LinearEnergySeries {
    int k = 1;
    std::vector<real> t;
    std::vector<real> E;
    std::vector<Dissipation> D;
};

inline LinearEnergySeries energy_series(const std::vector<LinearModeState>& traj, const EnergyLedger& l,
                                        const SioBank& bank)
{
    if (traj.empty()) throw DomainError("budget: empty trajectory");
    LinearEnergySeries s;
    s.k = traj.front().k;
    for (const auto& st : traj) {
        if (st.k != s.k) throw DomainError("budget: trajectory mixes wavenumbers");
        s.t.push_back(st.t);
        s.E.push_back(energy_k(st.omega, st.k, l, bank));
        s.D.push_back(dissipation_k(st.omega, st.k, l));
    }
    return s;
}

struct BudgetSample {
    real t = 0.0;
    real E = 0.0;
    real D = 0.0;          // combined D_k
    real dEdt = 0.0;
    real bound = 0.0;      // -8 d* D_k - 8 d* nu^{1/3}|k|^{2/3} E_k
    real defect = 0.0;     // dEdt - bound, must not exceed the tolerance
    real tolerance = 0.0;  // 1e-6 D_k
    bool ok = true;
    bool endpoint = false; // one-sided stencil
};

struct LinearBudgetReport {
    int k = 1;
    std::vector<BudgetSample> samples;
    int violations = 0;
    int flagged_violations = 0;  // at an endpoint stencil
    real fraction_ok = 1.0;
    real max_relative_defect = -INFINITY;  // max defect / D_k
    real empirical_delta_star = INFINITY;  // largest d* the run supports

    std::vector<real> damping_integral;    // int_0^t e^{2 d* nu^{1/3}|k|^{2/3} s} D_tau ds
    real damping_bound = 0.0;              // 4 E_k(0) / c_tau
    bool damping_within_bound = true;
    bool integrated_ok = true;             // e^{...} E(t) + c_tau/4 I(t) <= E(0)
    real integrated_best_constant = INFINITY;  // largest c with e^{...}E(t) + c I(t) <= E(0)

    /// At least `fraction` of samples within tolerance and every violation flagged.
    bool passed(real fraction = 0.99) const
    {
        return fraction_ok >= fraction && violations == flagged_violations && integrated_ok;
    }
};

inline constexpr real kBudgetRelativeTolerance = 1e-6;

inline LinearBudgetReport verify_linear_budget(const LinearEnergySeries& s, const EnergyLedger& l)
{
    const real dt = detail::uniform_step(s.t);
    const std::size_t n = s.t.size();
    const real ak = std::abs(static_cast<real>(s.k));
    const real gain = std::cbrt(l.nu) * std::pow(ak, 2.0 / 3.0);
    const auto dE = detail::time_derivative(s.E, dt);
    LinearBudgetReport r;
    r.k = s.k;
    int ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
        BudgetSample b;
        b.t = s.t[i];
        b.E = s.E[i];
        b.D = s.D[i].combined(l);
        b.dEdt = dE[i];
        b.bound = -8.0 * l.delta_star * (b.D + gain * b.E);
        b.defect = b.dEdt - b.bound;
        b.tolerance = kBudgetRelativeTolerance * b.D;
        b.ok = b.defect <= b.tolerance;
        b.endpoint = i == 0 || i + 1 == n;
        if (b.ok) ++ok;
        else {
            ++r.violations;
            if (b.endpoint) ++r.flagged_violations;
        }
        if (b.D > 0.0) r.max_relative_defect = std::max(r.max_relative_defect, b.defect / b.D);
        const real denom = 8.0 * (b.D + gain * b.E);
        if (!b.endpoint && denom > 0.0)
            r.empirical_delta_star = std::min(r.empirical_delta_star, (b.tolerance - b.dEdt) / denom);
        r.samples.push_back(b);
    }
    r.fraction_ok = static_cast<real>(ok) / static_cast<real>(n);

    const real E0 = s.E.front();
    r.damping_bound = l.c_tau > 0.0 ? 4.0 * E0 / l.c_tau : INFINITY;
    r.damping_integral.assign(n, 0.0);
    auto weight = [&](std::size_t i) { return std::exp(2.0 * l.delta_star * gain * (s.t[i] - s.t.front())); };
    const real slack = 1e-9 * std::abs(E0);
    for (std::size_t i = 1; i < n; ++i) {
        r.damping_integral[i] = r.damping_integral[i - 1] +
                                0.5 * dt * (weight(i - 1) * s.D[i - 1].tau + weight(i) * s.D[i].tau);
        const real I = r.damping_integral[i];
        const real lhs = weight(i) * s.E[i] + 0.25 * l.c_tau * I;
        if (lhs > E0 + slack) r.integrated_ok = false;
        if (I > r.damping_bound) r.damping_within_bound = false;
        if (I > 0.0) r.integrated_best_constant = std::min(r.integrated_best_constant, (E0 - weight(i) * s.E[i]) / I);
    }
    return r;
}

inline LinearBudgetReport verify_linear_budget(const std::vector<LinearModeState>& traj, const EnergyLedger& l,
                                               const SioBank& bank)
{
    return verify_linear_budget(energy_series(traj, l, bank), l);
}

struct BootstrapSample {
    real t = 0.0;
    real E = 0.0;
    real D = 0.0;
    real dEdt = 0.0;
    real lhs = 0.0;     // dE/dt + 4 d* D
    real defect = 0.0;  // lhs - (C0 E / nu)^{1/2} D
};

struct BootstrapReport {
    std::vector<BootstrapSample> samples;
    real C0 = 0.0;                  // smallest constant that makes the differential inequality hold
    bool smallness_holds = true;    // E(0) <= d*^2 nu / C0
    bool integrated_ok = true;      // sup_t E(t) + 2 d* int_0^t D <= E(0)
    bool monotone_ok = true;        // E(t) <= E(0) for every sample after the first
    real sup_ratio = 0.0;           // max_{t > 0} E(t) / E(0)
};

/// C0 is fitted as max over samples of nu (lhs_+ / D)^2 / E.
inline BootstrapReport verify_nonlinear_bootstrap(const std::vector<EnergySnapshot>& snaps, const EnergyLedger& l)
{
    std::vector<real> t, E;
    for (const auto& s : snaps) {
        t.push_back(s.t);
        E.push_back(s.E);
    }
    const real dt = detail::uniform_step(t);
    const auto dE = detail::time_derivative(E, dt);
    BootstrapReport r;
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        BootstrapSample b{snaps[i].t, snaps[i].E, snaps[i].D, dE[i], dE[i] + 4.0 * l.delta_star * snaps[i].D, 0.0};
        if (b.lhs > 0.0) {
            if (b.D > 0.0 && b.E > 0.0) r.C0 = std::max(r.C0, l.nu * std::pow(b.lhs / b.D, 2) / b.E);
            else r.C0 = INFINITY;
        }
        r.samples.push_back(b);
    }
    for (auto& b : r.samples) b.defect = b.lhs - (std::isfinite(r.C0) ? std::sqrt(r.C0 * b.E / l.nu) * b.D : INFINITY);
    const real E0 = E.front();
    r.smallness_holds = r.C0 == 0.0 || E0 <= l.delta_star * l.delta_star * l.nu / r.C0;
    real cum = 0.0;
    const real slack = 1e-12 * std::abs(E0);
    for (std::size_t i = 1; i < snaps.size(); ++i) {
        cum += 0.5 * dt * (snaps[i - 1].D + snaps[i].D);
        if (E[i] + 2.0 * l.delta_star * cum > E0 + slack) r.integrated_ok = false;
        if (E[i] > E0 + slack) r.monotone_ok = false;
        r.sup_ratio = std::max(r.sup_ratio, E0 > 0.0 ? E[i] / E0 : 0.0);
    }
    return r;
}

inline BootstrapReport verify_nonlinear_bootstrap(const std::vector<NonlinearState>& traj, const EnergyLedger& l,
                                                  const SioBank& bank)
{
    std::vector<EnergySnapshot> snaps;
    snaps.reserve(traj.size());
    for (const auto& s : traj) snaps.push_back(snapshot(s.omega, s.t, l, bank));
    return verify_nonlinear_bootstrap(snaps, l);
}

struct RateFit {
    real rate = 0.0;  // minus the slope of log(value)
    real r2 = 1.0;
    real intercept = 0.0;
    int samples = 0;
};

/// Least-squares fit of log(values) against t over the last `window`
/// fraction of the samples.
inline RateFit fit_decay_rate(const std::vector<real>& t, const std::vector<real>& values, real window = 2.0 / 3.0)
{
    if (t.size() != values.size()) throw DomainError("fit_decay_rate: times and values differ in length");
    if (t.size() < 10) throw DomainError("fit_decay_rate: at least 10 samples are required");
    if (!(window > 0.0 && window <= 1.0)) throw DomainError("fit_decay_rate: window must lie in (0, 1]");
    const std::size_t n = t.size();
    const std::size_t used = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(window * static_cast<real>(n))));
    const std::size_t first = n - std::min(used, n);
    const real m = static_cast<real>(n - first);
    std::vector<real> y;
    real tm = 0.0, ym = 0.0;
    for (std::size_t i = first; i < n; ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw DomainError("fit_decay_rate: nonpositive value in the fit window at index " + std::to_string(i));
        y.push_back(std::log(values[i]));
        tm += t[i];
        ym += y.back();
    }
    tm /= m;
    ym /= m;
    real vt = 0.0, vy = 0.0, cty = 0.0;
    for (std::size_t i = first; i < n; ++i) {
        const real dt = t[i] - tm, dy = y[i - first] - ym;
        vt += dt * dt;
        vy += dy * dy;
        cty += dt * dy;
    }
    if (!(vt > 0.0)) throw DomainError("fit_decay_rate: sample times are degenerate");
    RateFit f;
    const real slope = cty / vt;
    f.rate = -slope;
    f.intercept = ym - slope * tm;
    f.r2 = vy > 0.0 ? cty * cty / (vt * vy) : 1.0;
    f.samples = static_cast<int>(m);
    return f;
}

}  // namespace hypocouette
