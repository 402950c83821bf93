#pragma once

#include "hypocouette/linear_dynamics.hpp"

namespace hypocouette {

struct EnergyLedger;

/// Full perturbation vorticity on T x [-1, 1] together with its shear.
struct NonlinearState {
    SpectralField omega;  // sine-tagged
    ShearProfile profile;
    real t = 0.0;
    real nu = 0.0;
    std::shared_ptr<const EnergyLedger> params;
};

inline NonlinearState make_nonlinear_state(SpectralField omega, const ShearProfile& profile,
                                           std::shared_ptr<const EnergyLedger> params = {})
{
    if (omega.basis() != Basis::Sine) throw DomainError("nonlinear state: vorticity must be sine-tagged");
    if (omega.grid().ny() != static_cast<int>(profile.w_coeffs().size()))
        throw DomainError("nonlinear state: profile and field resolutions differ");
    return NonlinearState{std::move(omega), profile, profile.t(), profile.nu(), std::move(params)};
}

namespace detail {

/// Values of several per-mode fields on the padded (x, y) product grid.
/// fields[f][k + K] holds nodal values on the padded y grid.
class PhysicalGrid {
public:
    PhysicalGrid(int kmax, int mx, int my) : kmax_(kmax), mx_(mx), my_(my), data_(static_cast<std::size_t>(mx * my)) {}

    /// Scatter modes k = -K..K (y values on my nodes) and transform back in x.
    void synthesise(const std::vector<ComplexVector>& modes)
    {
        std::vector<cplx> row(static_cast<std::size_t>(mx_)), out(static_cast<std::size_t>(mx_));
        for (int j = 0; j < my_; ++j) {
            std::fill(row.begin(), row.end(), cplx{0.0, 0.0});
            for (int k = -kmax_; k <= kmax_; ++k) row[static_cast<std::size_t>((k + mx_) % mx_)] = modes[k + kmax_][j];
            dft(row.data(), out.data(), mx_, false);
            std::copy(out.begin(), out.end(), data_.begin() + static_cast<std::ptrdiff_t>(j) * mx_);
        }
    }

    /// Forward x transform retaining |k| <= K; returns per-mode y values.
    std::vector<ComplexVector> analyse() const
    {
        std::vector<ComplexVector> modes(static_cast<std::size_t>(2 * kmax_ + 1), ComplexVector(static_cast<std::size_t>(my_)));
        std::vector<cplx> out(static_cast<std::size_t>(mx_));
        for (int j = 0; j < my_; ++j) {
            dft(data_.data() + static_cast<std::ptrdiff_t>(j) * mx_, out.data(), mx_, true);
            for (int k = -kmax_; k <= kmax_; ++k) modes[k + kmax_][j] = out[static_cast<std::size_t>((k + mx_) % mx_)] / static_cast<real>(mx_);
        }
        return modes;
    }

    std::vector<cplx>& values() { return data_; }
    const std::vector<cplx>& values() const { return data_; }

private:
    int kmax_, mx_, my_;
    std::vector<cplx> data_;
};

}  // namespace detail

/// Dealiased (u . grad w)_k for every retained k, as sine coefficients.
/// u = grad^perp phi: u1 = d_y phi, u2 = -d_x phi; the product is formed on
/// the padded grid so that no quadratic alias lands on a retained mode.
inline SpectralField advection_term(const SpectralField& omega)
{
    const auto& g = omega.grid();
    const int kmax = g.kmax(), n = g.ny(), my = g.padded_ny(), mx = g.padded_nx();
    const SpectralField phi = stream_function(omega);
    std::vector<ComplexVector> u1(2 * kmax + 1), u2(2 * kmax + 1), wx(2 * kmax + 1), wy(2 * kmax + 1);
    for (int k = -kmax; k <= kmax; ++k) {
        const cplx ik = I * static_cast<real>(k);
        const auto& p = phi.mode(k);
        const auto& w = omega.mode(k);
        ComplexVector mp(p.size()), iw(w.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            mp[i] = -ik * p[i];
            iw[i] = ik * w[i];
        }
        u1[k + kmax] = to_nodes(derivative_y(ModeVector{p, Basis::Sine}), my);
        u2[k + kmax] = sine_to_nodes(std::span<const cplx>(mp), my);
        wx[k + kmax] = sine_to_nodes(std::span<const cplx>(iw), my);
        wy[k + kmax] = to_nodes(derivative_y(ModeVector{w, Basis::Sine}), my);
    }
    detail::PhysicalGrid a(kmax, mx, my), b(kmax, mx, my), c(kmax, mx, my), d(kmax, mx, my);
    a.synthesise(u1);
    b.synthesise(wx);
    c.synthesise(u2);
    d.synthesise(wy);
    for (std::size_t i = 0; i < a.values().size(); ++i)
        a.values()[i] = a.values()[i] * b.values()[i] + c.values()[i] * d.values()[i];
    const auto modes = a.analyse();
    SpectralField out(omega.grid_ptr(), Basis::Sine);
    for (int k = -kmax; k <= kmax; ++k) out.mode(k) = nodes_to_sine(std::span<const cplx>(modes[k + kmax]), n);
    return out;
}

namespace detail {

inline Blocks nonlinear_explicit(const SpectralField& omega, const ShearProfile& profile)
{
    const SpectralField adv = advection_term(omega);
    Blocks out(static_cast<std::size_t>(omega.grid().n_modes_x()));
    for (int k = -omega.kmax(); k <= omega.kmax(); ++k) {
        auto lin = linear_explicit(k, omega.mode(k), profile, {});
        const auto& a = adv.mode(k);
        for (std::size_t i = 0; i < lin.size(); ++i) lin[i] -= a[i];
        out[k + omega.kmax()] = std::move(lin);
    }
    return out;
}

inline SpectralField field_from_blocks(const std::shared_ptr<const ChannelGrid>& g, Blocks b)
{
    SpectralField f(g, Basis::Sine);
    for (int k = -g->kmax(); k <= g->kmax(); ++k) f.mode(k) = std::move(b[k + g->kmax()]);
    return f;
}

inline Blocks blocks_from_field(const SpectralField& f)
{
    Blocks b(static_cast<std::size_t>(f.grid().n_modes_x()));
    for (int k = -f.kmax(); k <= f.kmax(); ++k) b[k + f.kmax()] = f.mode(k);
    return b;
}

}  // namespace detail

/// Full right-hand side: -ik U w_k + ik U'' phi_k + nu Delta_k w_k - (u . grad w)_k.
/// The k = 0 row carries the feedback of the nonzero modes on the mean.
inline SpectralField nonlinear_rhs(const NonlinearState& s)
{
    Blocks b = detail::nonlinear_explicit(s.omega, s.profile);
    for (int k = -s.omega.kmax(); k <= s.omega.kmax(); ++k) {
        const auto& w = s.omega.mode(k);
        auto& r = b[k + s.omega.kmax()];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= s.nu * laplacian_symbol(k, static_cast<int>(i) + 1) * w[i];
    }
    return detail::field_from_blocks(s.omega.grid_ptr(), std::move(b));
}

/// Largest |u1 + U| and |u2| over the padded physical grid.
inline std::pair<real, real> velocity_extent(const NonlinearState& s)
{
    const auto& g = s.omega.grid();
    const int kmax = g.kmax(), my = g.padded_ny(), mx = g.padded_nx();
    const Velocity v = biot_savart(s.omega);
    std::vector<ComplexVector> a(2 * kmax + 1), b(2 * kmax + 1);
    for (int k = -kmax; k <= kmax; ++k) {
        a[k + kmax] = to_nodes(v.u1.mode_vector(k), my);
        b[k + kmax] = to_nodes(v.u2.mode_vector(k), my);
    }
    detail::PhysicalGrid pa(kmax, mx, my), pb(kmax, mx, my);
    pa.synthesise(a);
    pb.synthesise(b);
    real umax = 0.0, vmax = 0.0;
    const auto& u = s.profile.padded().u;
    for (int j = 0; j < my; ++j)
        for (int l = 0; l < mx; ++l) {
            umax = std::max(umax, std::abs(pa.values()[static_cast<std::size_t>(j * mx + l)].real() + u[j]));
            vmax = std::max(vmax, std::abs(pb.values()[static_cast<std::size_t>(j * mx + l)].real()));
        }
    return {umax, vmax};
}

/// dt (max|u| / dx + max|v| / dy) with dx = pi / K and dy = 2 / (n_y + 1).
inline real nonlinear_cfl(const NonlinearState& s, real dt)
{
    const auto [umax, vmax] = velocity_extent(s);
    const auto& g = s.omega.grid();
    return dt * (umax * g.kmax() / pi + vmax / g.h());
}

/// Largest step with the given CFL number.
inline real suggest_dt(const NonlinearState& s, real cfl = kDefaultCfl)
{
    const real unit = nonlinear_cfl(s, 1.0);
    return unit > 0.0 ? cfl / unit : std::numeric_limits<real>::infinity();
}

inline NonlinearState step_nonlinear(const NonlinearState& s, real dt)
{
    if (dt < 0.0) throw DomainError("step_nonlinear: dt must be non-negative");
    if (dt == 0.0) return s;
    const real cfl = nonlinear_cfl(s, dt);
    if (cfl > kCflLimit) throw CflViolation(cfl, kCflLimit);
    const auto& g = s.omega.grid_ptr();
    Rates rate(static_cast<std::size_t>(g->n_modes_x()));
    for (int k = -g->kmax(); k <= g->kmax(); ++k) rate[k + g->kmax()] = detail::diffusion_rates(k, g->ny(), s.nu);
    ShearProfile mid = s.profile.at_time(s.t + 0.5 * dt), end = s.profile.at_time(s.t + dt);
    auto explicit_part = [&](real t, const Blocks& u) {
        const ShearProfile& p = t == s.t ? s.profile : (t == s.t + dt ? end : mid);
        return detail::nonlinear_explicit(detail::field_from_blocks(g, u), p);
    };
    Blocks next = lawson_rk4(detail::blocks_from_field(s.omega), rate, s.t, dt, explicit_part);
    return NonlinearState{detail::field_from_blocks(g, std::move(next)), std::move(end), s.t + dt, s.nu, s.params};
}

}  // namespace hypocouette
