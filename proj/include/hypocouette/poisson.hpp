#pragma once

#include "hypocouette/spectral_field.hpp"

namespace hypocouette {

/// Eigenvalue of -Delta_k on sine mode n: k^2 + (n pi / 2)^2.
inline real laplacian_symbol(int k, int n)
{
    const real kn = ChannelGrid::mode_wavenumber(n);
    return static_cast<real>(k) * k + kn * kn;
}

/// Delta_k = -k^2 + d_yy applied to sine coefficients.
inline ComplexVector apply_laplacian(std::span<const cplx> f, int k)
{
    ComplexVector out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = -laplacian_symbol(k, static_cast<int>(i) + 1) * f[i];
    return out;
}

/// Solve Delta_k phi = omega with phi(+-1) = 0 (sine coefficients in and out).
/// k = 0 is the Dirichlet inverse of d_yy.
inline ComplexVector poisson_solve(std::span<const cplx> omega_k, int k)
{
    ComplexVector phi(omega_k.size());
    for (std::size_t i = 0; i < omega_k.size(); ++i)
        phi[i] = -omega_k[i] / laplacian_symbol(k, static_cast<int>(i) + 1);
    return phi;
}

/// Dirichlet Green's function of Delta_k on [-1, 1], k != 0.
/// Scaled exponentials are used above |k| = 30.
inline real green_function(int k, real y, real yp)
{
    if (k == 0) throw DomainError("green_function: k = 0 is handled by the sine-basis d_yy inverse");
    const real ak = std::abs(static_cast<real>(k));
    const real lo = std::min(y, yp), hi = std::max(y, yp);
    const real a = ak * (1.0 - hi), b = ak * (1.0 + lo), c = 2.0 * ak;
    if (ak <= 30.0) return -std::sinh(a) * std::sinh(b) / (ak * std::sinh(c));
    // sinh(a) sinh(b) / sinh(c) = e^{a+b-c} (1-e^{-2a})(1-e^{-2b}) / (2 (1-e^{-2c}))
    const real num = (-std::expm1(-2.0 * a)) * (-std::expm1(-2.0 * b));
    return -std::exp(a + b - c) * num / (2.0 * (-std::expm1(-2.0 * c))) / ak;
}

/// Direct sinh evaluation of green_function for cross-checking the scaled branch.
inline real green_function_direct(int k, real y, real yp)
{
    const real ak = std::abs(static_cast<real>(k));
    const real lo = std::min(y, yp), hi = std::max(y, yp);
    return -std::sinh(ak * (1.0 - hi)) * std::sinh(ak * (1.0 + lo)) / (ak * std::sinh(2.0 * ak));
}

/// Velocity of a vorticity field: u1 = d_y phi (cosine basis), u2 = -i k phi (sine basis).
struct Velocity {
    SpectralField u1;
    SpectralField u2;
};

inline SpectralField stream_function(const SpectralField& omega)
{
    if (omega.basis() != Basis::Sine) throw DomainError("stream_function: vorticity must be sine-tagged");
    SpectralField phi(omega.grid_ptr(), Basis::Sine);
    for (int k = -omega.kmax(); k <= omega.kmax(); ++k) phi.mode(k) = poisson_solve(omega.mode(k), k);
    return phi;
}

inline Velocity biot_savart(const SpectralField& omega)
{
    const SpectralField phi = stream_function(omega);
    Velocity v{derivative_y(phi), SpectralField(omega.grid_ptr(), Basis::Sine)};
    for (int k = -omega.kmax(); k <= omega.kmax(); ++k) {
        auto& u2 = v.u2.mode(k);
        const auto& p = phi.mode(k);
        for (std::size_t n = 0; n < p.size(); ++n) u2[n] = -I * static_cast<real>(k) * p[n];
    }
    return v;
}

}  // namespace hypocouette
