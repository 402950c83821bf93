#pragma once

#include "hypocouette/integrator.hpp"
#include "hypocouette/poisson.hpp"
#include "hypocouette/shear_profile.hpp"

namespace hypocouette {

/// Which linear terms are active. Both on is the physical system; switching
/// transport off isolates diffusion (used by exactness checks).
struct LinearOptions {
    bool transport = true;
    bool shear_coupling = true;
};

/// One x-mode of the linearised problem around the time-dependent shear.
struct LinearModeState {
    int k = 1;
    ComplexVector omega;  // sine coefficients
    real t = 0.0;
    real nu = 0.0;
    ShearProfile profile;
};

inline LinearModeState make_linear_state(int k, ComplexVector omega, const ShearProfile& profile)
{
    if (k == 0) throw DomainError("linear mode state: k must be nonzero");
    if (static_cast<int>(omega.size()) != static_cast<int>(profile.w_coeffs().size()))
        throw DomainError("linear mode state: omega length must equal n_y");
    return LinearModeState{k, std::move(omega), profile.t(), profile.nu(), profile};
}

namespace detail {

/// Sine coefficients (first n) of the product of a nodal profile with a sine
/// series, formed on the padded grid of size `m`.
inline ComplexVector multiply_project(const RealVector& profile_nodes, std::span<const cplx> sine_coeffs, int n)
{
    const int m = static_cast<int>(profile_nodes.size());
    ComplexVector v = sine_to_nodes(sine_coeffs, m);
    for (int j = 0; j < m; ++j) v[j] *= profile_nodes[j];
    return nodes_to_sine(std::span<const cplx>(v), n);
}

/// Explicit part -ik U w + ik U'' phi of the linear operator.
inline ComplexVector linear_explicit(int k, std::span<const cplx> omega, const ShearProfile& profile,
                                     const LinearOptions& opt)
{
    const int n = static_cast<int>(omega.size());
    ComplexVector out(omega.size(), 0.0);
    if (k == 0) return out;
    const cplx ik = I * static_cast<real>(k);
    if (opt.transport) {
        const auto uw = multiply_project(profile.padded().u, omega, n);
        for (int i = 0; i < n; ++i) out[i] -= ik * uw[i];
    }
    if (opt.shear_coupling) {
        const auto phi = poisson_solve(omega, k);
        const auto up = multiply_project(profile.padded().u_double_prime, phi, n);
        for (int i = 0; i < n; ++i) out[i] += ik * up[i];
    }
    return out;
}

inline RealVector diffusion_rates(int k, int n, real nu)
{
    RealVector r(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r[i] = nu * laplacian_symbol(k, i + 1);
    return r;
}

}  // namespace detail

/// -ik U w_k + ik U'' phi_k + nu Delta_k w_k with phi_k = Delta_k^{-1} w_k.
inline ComplexVector linear_rhs(const LinearModeState& s, const LinearOptions& opt = {})
{
    auto out = detail::linear_explicit(s.k, s.omega, s.profile, opt);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] -= s.nu * laplacian_symbol(s.k, static_cast<int>(i) + 1) * s.omega[i];
    return out;
}

/// dt * |k| max|U| / pi: the advective CFL number of a single mode.
inline real linear_cfl(const LinearModeState& s, real dt, const LinearOptions& opt = {})
{
    if (!opt.transport) return 0.0;
    return dt * std::abs(static_cast<real>(s.k)) * s.profile.max_abs_u() / pi;
}

/// Advance one step of integrating-factor RK4. Diffusion is exact; the shear
/// is sampled at the stage times through its heat semigroup.
inline LinearModeState step_linear(const LinearModeState& s, real dt, const LinearOptions& opt = {})
{
    if (dt < 0.0) throw DomainError("step_linear: dt must be non-negative");
    if (dt == 0.0) return s;
    const real cfl = linear_cfl(s, dt, opt);
    if (cfl > kCflLimit) throw CflViolation(cfl, kCflLimit);
    const int n = static_cast<int>(s.omega.size());
    const Rates rate{detail::diffusion_rates(s.k, n, s.nu)};
    ShearProfile mid = s.profile.at_time(s.t + 0.5 * dt), end = s.profile.at_time(s.t + dt);
    auto nonlinear = [&](real t, const Blocks& u) {
        const ShearProfile& p = t == s.t ? s.profile : (t == s.t + dt ? end : mid);
        return Blocks{detail::linear_explicit(s.k, u[0], p, opt)};
    };
    Blocks next = lawson_rk4(Blocks{s.omega}, rate, s.t, dt, nonlinear);
    return LinearModeState{s.k, std::move(next[0]), s.t + dt, s.nu, std::move(end)};
}

/// n_steps fixed steps; `observe` sees the initial state and every step.
inline LinearModeState evolve_linear(LinearModeState s, real dt, int n_steps,
                                     const std::function<void(const LinearModeState&)>& observe = {},
                                     const LinearOptions& opt = {})
{
    if (observe) observe(s);
    for (int i = 0; i < n_steps; ++i) {
        s = step_linear(s, dt, opt);
        if (observe) observe(s);
    }
    return s;
}

}  // namespace hypocouette
