#pragma once

#include "hypocouette/spectral_field.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace hypocouette {

/// Background shear U(t, y) = y + d_y (d_yy)^{-1} W(t, y) on the collocation
/// nodes and on the padded product grid.
struct ShearValues {
    RealVector u;
    RealVector u_prime;
    RealVector u_double_prime;
};

/// Evaluate U, U', U'' on the m interior nodes of a size-m grid.
///
/// The stream correction d_y (d_yy)^{-1} W is built in coefficient space and
/// differentiated twice more, so U' - 1 = W and U'' = d_y W are produced by
/// the same differentiation path used everywhere else.
inline ShearValues reconstruct_shear(std::span<const real> w_coeffs, int m)
{
    ModeVector w{ComplexVector(w_coeffs.begin(), w_coeffs.end()), Basis::Sine};
    ModeVector inv = w;
    for (std::size_t i = 0; i < inv.coeffs.size(); ++i) {
        const real kn = ChannelGrid::mode_wavenumber(static_cast<int>(i) + 1);
        inv.coeffs[i] /= -(kn * kn);
    }
    const ModeVector corr = derivative_y(inv);   // cosine
    const ModeVector corr1 = derivative_y(corr); // sine, equals W
    const ModeVector corr2 = derivative_y(corr1);

    const RealVector y = interior_nodes(m);
    const auto c0 = to_nodes(corr, m), c1 = to_nodes(corr1, m), c2 = to_nodes(corr2, m);
    ShearValues out{RealVector(m), RealVector(m), RealVector(m)};
    for (int j = 0; j < m; ++j) {
        out.u[j] = y[j] + c0[j].real();
        out.u_prime[j] = 1.0 + c1[j].real();
        out.u_double_prime[j] = c2[j].real();
    }
    return out;
}

/// Full H^4 norm sum_{j<=4} ||d_y^j W||^2 (square-rooted) of a sine series.
inline real sobolev_norm_h4(std::span<const real> w_coeffs)
{
    real s = 0.0;
    for (std::size_t i = 0; i < w_coeffs.size(); ++i) {
        const real lam = std::pow(ChannelGrid::mode_wavenumber(static_cast<int>(i) + 1), 2);
        const real weight = 1.0 + lam + lam * lam + lam * lam * lam + lam * lam * lam * lam;
        s += weight * w_coeffs[i] * w_coeffs[i];
    }
    return std::sqrt(s);
}

/// Immutable snapshot of the shear state at time t.
class ShearProfile {
public:
    ShearProfile(const ChannelGrid& grid, RealVector w_coeffs, real nu, real t = 0.0)
        : t_(t), nu_(nu), ny_(grid.ny()), padded_ny_(grid.padded_ny()), w_(std::move(w_coeffs))
    {
        if (static_cast<int>(w_.size()) != ny_) throw DomainError("ShearProfile: coefficient count must equal n_y");
        if (!(nu > 0.0)) throw DomainError("ShearProfile: nu must be positive");
        nodes_ = reconstruct_shear(w_, ny_);
        padded_ = reconstruct_shear(w_, padded_ny_);
        max_abs_u_ = 0.0;
        for (real v : padded_.u) max_abs_u_ = std::max(max_abs_u_, std::abs(v));
        for (real v : nodes_.u) max_abs_u_ = std::max(max_abs_u_, std::abs(v));
    }

    static ShearProfile couette(const ChannelGrid& grid, real nu, real t = 0.0)
    {
        return ShearProfile(grid, RealVector(static_cast<std::size_t>(grid.ny()), 0.0), nu, t);
    }

    real t() const { return t_; }
    real nu() const { return nu_; }
    const RealVector& w_coeffs() const { return w_; }
    const RealVector& u_values() const { return nodes_.u; }
    const RealVector& u_prime() const { return nodes_.u_prime; }
    const RealVector& u_double_prime() const { return nodes_.u_double_prime; }

    /// U and U'' on the padded product grid.
    const ShearValues& padded() const { return padded_; }
    int padded_ny() const { return padded_ny_; }

    real max_abs_u() const { return max_abs_u_; }
    real h4_norm() const { return sobolev_norm_h4(w_); }

    /// exp(nu dt Delta_y) applied to W: exact per sine mode.
    ShearProfile heat_step(real dt) const
    {
        if (dt < 0.0) throw DomainError("heat_step: dt must be non-negative");
        return at_time(t_ + dt);
    }

    /// Profile advanced (or rewound within a step) to absolute time t.
    ShearProfile at_time(real t) const
    {
        RealVector w = w_;
        const real dt = t - t_;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const real kn = ChannelGrid::mode_wavenumber(static_cast<int>(i) + 1);
            w[i] *= std::exp(-nu_ * kn * kn * dt);
        }
        return ShearProfile(ny_, padded_ny_, std::move(w), nu_, t);
    }

private:
    ShearProfile(int ny, int padded_ny, RealVector w, real nu, real t)
        : t_(t), nu_(nu), ny_(ny), padded_ny_(padded_ny), w_(std::move(w))
    {
        nodes_ = reconstruct_shear(w_, ny_);
        padded_ = reconstruct_shear(w_, padded_ny_);
        max_abs_u_ = 0.0;
        for (real v : padded_.u) max_abs_u_ = std::max(max_abs_u_, std::abs(v));
        for (real v : nodes_.u) max_abs_u_ = std::max(max_abs_u_, std::abs(v));
    }

    real t_;
    real nu_;
    int ny_;
    int padded_ny_;
    RealVector w_;
    ShearValues nodes_;
    ShearValues padded_;
    real max_abs_u_ = 0.0;
};

// ---------------------------------------------------------------------------
// Initial shear perturbations W_in.

/// Largest admissible wall trace of a loaded W_in.
inline constexpr real kWallTraceTolerance = 1e-10;

inline RealVector shear_preset_zero(int ny) { return RealVector(static_cast<std::size_t>(ny), 0.0); }

inline RealVector shear_preset_single_mode(int ny, int n, real amp)
{
    if (n < 1 || n > ny) throw DomainError("shear preset single_mode: mode index out of range");
    RealVector w(static_cast<std::size_t>(ny), 0.0);
    w[n - 1] = amp;
    return w;
}

/// Random smooth W_in on the lowest `band` sine modes, scaled to ||W||_{H^4} = amp.
inline RealVector shear_preset_random_h4(int ny, std::uint64_t seed, real amp, int band = 8)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<real> normal(0.0, 1.0);
    RealVector w(static_cast<std::size_t>(ny), 0.0);
    const int top = std::min(band, ny);
    for (int n = 1; n <= top; ++n) w[n - 1] = normal(rng) / (n * n);
    const real norm = sobolev_norm_h4(w);
    if (norm > 0.0)
        for (auto& c : w) c *= amp / norm;
    return w;
}

/// Named preset: "zero", "single_mode <n> <amp>", "random_h4 <seed> <amp>".
inline RealVector shear_preset(const std::string& spec, int ny)
{
    std::istringstream in(spec);
    std::string name;
    in >> name;
    auto fail = [&]() -> RealVector { throw DomainError("unknown or malformed shear preset '" + spec + "'"); };
    RealVector w;
    if (name == "zero") {
        w = shear_preset_zero(ny);
    } else if (name == "single_mode") {
        int n = 0;
        real amp = 0.0;
        if (!(in >> n >> amp)) return fail();
        w = shear_preset_single_mode(ny, n, amp);
    } else if (name == "random_h4") {
        std::uint64_t seed = 0;
        real amp = 0.0;
        if (!(in >> seed >> amp)) return fail();
        w = shear_preset_random_h4(ny, seed, amp);
    } else {
        return fail();
    }
    std::string extra;
    if (in >> extra) return fail();
    return w;
}

/// W_in from nodal values. Accepts either n_y + 2 values on {-1, y_1..y_ny, 1},
/// whose wall entries must vanish to kWallTraceTolerance, or the n_y
/// interior-node values alone. In the latter case the wall trace is
/// estimated by cubic extrapolation from the four nearest nodes; the
/// estimate is only resolved to the extrapolation error, which is added
/// to the tolerance.
inline RealVector shear_from_values(std::span<const real> values, int ny)
{
    const int n = static_cast<int>(values.size());
    RealVector interior;
    real trace = 0.0, allowed = kWallTraceTolerance;
    if (n == ny + 2) {
        trace = std::max(std::abs(values.front()), std::abs(values.back()));
        interior.assign(values.begin() + 1, values.end() - 1);
    } else if (n == ny) {
        interior.assign(values.begin(), values.end());
        // Lagrange extrapolation to the wall (unit spacing, wall at 0); its
        // error is gauged by the fourth difference (quartic minus cubic).
        auto cubic = [](real f1, real f2, real f3, real f4) { return 4.0 * f1 - 6.0 * f2 + 4.0 * f3 - f4; };
        auto diff4 = [](real f1, real f2, real f3, real f4, real f5) { return f1 - 4.0 * f2 + 6.0 * f3 - 4.0 * f4 + f5; };
        const auto& v = interior;
        const real lo = cubic(v[0], v[1], v[2], v[3]), hi = cubic(v[n - 1], v[n - 2], v[n - 3], v[n - 4]);
        const real err = std::max(std::abs(diff4(v[0], v[1], v[2], v[3], v[4])),
                                  std::abs(diff4(v[n - 1], v[n - 2], v[n - 3], v[n - 4], v[n - 5])));
        trace = std::max(std::abs(lo), std::abs(hi));
        allowed += 10.0 * err;
    } else {
        throw DomainError("W_in file: expected " + std::to_string(ny) + " or " + std::to_string(ny + 2) +
                          " values, got " + std::to_string(n));
    }
    if (trace > allowed)
        throw DomainError("W_in violates the compatibility condition W(+-1) = 0 (trace " + std::to_string(trace) + ")");
    return nodes_to_sine(std::span<const real>(interior), ny);
}

inline RealVector shear_from_file(const std::string& path, int ny)
{
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open W_in file '" + path + "'");
    RealVector v;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        real x;
        if (ls >> x) v.push_back(x);
    }
    return shear_from_values(v, ny);
}

}  // namespace hypocouette
