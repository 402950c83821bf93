#pragma once

#include "hypocouette/spectral_field.hpp"

#include <random>

namespace hypocouette {

/// Random smooth sine coefficients on the lowest `band` modes, |c_n| ~ 1/n^2,
/// normalised to unit L2 norm.
inline ComplexVector random_mode(int ny, std::uint64_t seed, int band = 8)
{
    if (ny < 1) throw DomainError("random_mode: n_y must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<real> normal(0.0, 1.0);
    ComplexVector c(static_cast<std::size_t>(ny), 0.0);
    const int top = std::min(band, ny);
    for (int n = 1; n <= top; ++n) {
        const real re = normal(rng), im = normal(rng);
        c[n - 1] = cplx{re, im} / static_cast<real>(n * n);
    }
    real s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    for (auto& v : c) v /= std::sqrt(s);
    return c;
}

/// Size of a perturbation: ||w||_{H^m} + nu^{1/3} ||d_y w||_{H^{m-1/3}} with
/// the x-Sobolev weight (1 + k^2)^{s/2} and L2 over T x [-1,1].
inline real perturbation_norm(const SpectralField& w, real m, real nu)
{
    real a = 0.0, b = 0.0;
    for (int k = -w.kmax(); k <= w.kmax(); ++k) {
        const real wk = 1.0 + static_cast<real>(k) * k;
        const auto& c = w.mode(k);
        for (std::size_t i = 0; i < c.size(); ++i) {
            const real lam = std::pow(ChannelGrid::mode_wavenumber(static_cast<int>(i) + 1), 2);
            a += std::pow(wk, m) * std::norm(c[i]);
            b += std::pow(wk, m - 1.0 / 3.0) * lam * std::norm(c[i]);
        }
    }
    return std::sqrt(2.0 * pi * a) + std::cbrt(nu) * std::sqrt(2.0 * pi * b);
}

/// Real random vorticity on 1 <= |k| <= kband (plus k = 0 when `include_mean`),
/// lowest `yband` sine modes, scaled so that perturbation_norm = eps.
inline SpectralField random_perturbation(const std::shared_ptr<const ChannelGrid>& grid, real eps, real m, real nu,
                                         std::uint64_t seed, int kband = 4, int yband = 8, bool include_mean = true)
{
    SpectralField w(grid, Basis::Sine);
    if (eps == 0.0) return w;
    if (eps < 0.0) throw DomainError("random_perturbation: eps must be non-negative");
    const int top = std::min(kband, grid->kmax());
    for (int k = include_mean ? 0 : 1; k <= top; ++k) {
        auto c = random_mode(grid->ny(), seed * 1000003ULL + static_cast<std::uint64_t>(k), yband);
        const real amp = 1.0 / (1.0 + static_cast<real>(k) * k);
        for (auto& v : c) v *= amp;
        w.mode(k) = c;
    }
    w.enforce_reality();
    w *= eps / perturbation_norm(w, m, nu);
    return w;
}

}  // namespace hypocouette
