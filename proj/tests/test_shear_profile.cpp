#include "hypocouette/shear_profile.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace hypocouette;

namespace {

real max_abs_diff(const RealVector& a, const RealVector& b)
{
    real m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// d^j/dy^j of the sine series at y.
real sine_derivative(const RealVector& c, int j, real y)
{
    real s = 0.0;
    const real th = pi * (y + 1.0) / 2.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const real kn = (i + 1) * pi / 2;
        const real arg = (i + 1) * th;
        const real base = (j % 4 == 0) ? std::sin(arg) : (j % 4 == 1) ? std::cos(arg) : (j % 4 == 2) ? -std::sin(arg) : -std::cos(arg);
        s += c[i] * std::pow(kn, j) * base;
    }
    return s;
}

}  // namespace

TEST(HeatStep, EigenfunctionDecaysExactly)
{
    ChannelGrid g(1, 32);
    const real nu = 0.01, t = 3.7;
    ShearProfile p(g, shear_preset_single_mode(32, 1, 1.0), nu);
    const auto q = p.heat_step(t);
    EXPECT_NEAR(q.w_coeffs()[0], std::exp(-nu * pi * pi / 4 * t), 1e-15);
    for (int n = 1; n < 32; ++n) EXPECT_EQ(q.w_coeffs()[n], 0.0);
    EXPECT_DOUBLE_EQ(q.t(), t);
}

TEST(HeatStep, ZeroStepIsIdentity)
{
    ChannelGrid g(1, 32);
    ShearProfile p(g, shear_preset_random_h4(32, 5, 0.1), 0.02, 1.0);
    const auto q = p.heat_step(0.0);
    EXPECT_EQ(q.w_coeffs(), p.w_coeffs());
    EXPECT_EQ(q.u_values(), p.u_values());
    EXPECT_EQ(q.t(), p.t());
}

TEST(HeatStep, SemigroupProperty)
{
    ChannelGrid g(1, 64);
    ShearProfile p(g, shear_preset_random_h4(64, 11, 0.3), 0.05);
    const auto a = p.heat_step(0.8);
    const auto b = p.heat_step(0.4).heat_step(0.4);
    EXPECT_LE(max_abs_diff(a.w_coeffs(), b.w_coeffs()), 1e-13);
    EXPECT_LE(max_abs_diff(a.u_values(), b.u_values()), 1e-13);
}

TEST(HeatStep, NegativeStepRejected)
{
    ChannelGrid g(1, 16);
    const auto p = ShearProfile::couette(g, 0.1);
    EXPECT_THROW(p.heat_step(-1e-3), DomainError);
}

TEST(ShearProfile, ConstructorValidation)
{
    ChannelGrid g(1, 16);
    EXPECT_THROW(ShearProfile(g, RealVector(15, 0.0), 0.1), DomainError);
    EXPECT_THROW(ShearProfile(g, RealVector(16, 0.0), 0.0), DomainError);
    EXPECT_THROW(ShearProfile(g, RealVector(16, 0.0), -1.0), DomainError);
}

TEST(ReconstructShear, ZeroPerturbationIsCouette)
{
    const int n = 24;
    const auto s = reconstruct_shear(RealVector(n, 0.0), n);
    const auto y = interior_nodes(n);
    for (int j = 0; j < n; ++j) {
        EXPECT_EQ(s.u[j], y[j]);
        EXPECT_EQ(s.u_prime[j], 1.0);
        EXPECT_EQ(s.u_double_prime[j], 0.0);
    }
}

TEST(ReconstructShear, FirstModeMatchesClosedForm)
{
    // W = sin(theta), theta = pi (y+1)/2: U = y - (2/pi) cos(theta), U' = 1 + W, U'' = d_y W.
    const int n = 40;
    RealVector w(n, 0.0);
    w[0] = 1.0;
    const auto s = reconstruct_shear(w, n);
    const auto y = interior_nodes(n);
    for (int j = 0; j < n; ++j) {
        const real th = pi * (y[j] + 1.0) / 2.0;
        EXPECT_NEAR(s.u[j], y[j] - 2.0 / pi * std::cos(th), 1e-13);
        EXPECT_NEAR(s.u_prime[j] - 1.0, std::sin(th), 1e-8);
        EXPECT_NEAR(s.u_double_prime[j], pi / 2 * std::cos(th), 1e-8);
    }
}

TEST(ReconstructShear, IdentityRouteIsConsistent)
{
    // U' - 1 reproduces W and U'' reproduces d_y W on the nodes for random W.
    const int n = 64;
    const auto w = shear_preset_random_h4(n, 3, 0.5);
    const auto s = reconstruct_shear(w, n);
    const auto wn = sine_to_nodes(std::span<const real>(w), n);
    const auto y = interior_nodes(n);
    for (int j = 0; j < n; ++j) {
        EXPECT_NEAR(s.u_prime[j] - 1.0, wn[j], 1e-12);
        EXPECT_NEAR(s.u_double_prime[j], sine_derivative(w, 1, y[j]), 1e-12);
    }
}

TEST(ReconstructShear, PerturbationBoundedByData)
{
    // ||U' - 1||_inf <= C ||W|| with one constant across random small W.
    const int n = 64;
    real cmax = 0.0, cmin = 1e300;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (real amp : {1e-6, 1e-3, 1e-1}) {
            const auto w = shear_preset_random_h4(n, seed, amp);
            const auto s = reconstruct_shear(w, n);
            real dev = 0.0, l2 = 0.0;
            for (real v : s.u_prime) dev = std::max(dev, std::abs(v - 1.0));
            for (real c : w) l2 += c * c;
            const real c = dev / std::sqrt(l2);
            cmax = std::max(cmax, c);
            cmin = std::min(cmin, c);
        }
    }
    EXPECT_LT(cmax, std::sqrt(8.0));  // Cauchy-Schwarz over the 8-mode band
    EXPECT_GT(cmin, 0.0);
}

TEST(SobolevNorm, ZeroAndSingleMode)
{
    EXPECT_EQ(sobolev_norm_h4(RealVector(10, 0.0)), 0.0);
    for (int n : {1, 3, 7}) {
        const real c = -0.37;
        const auto w = shear_preset_single_mode(10, n, c);
        const real lam = std::pow(n * pi / 2, 2);
        const real full = std::abs(c) * std::sqrt(1 + lam + lam * lam + std::pow(lam, 3) + std::pow(lam, 4));
        EXPECT_NEAR(sobolev_norm_h4(w), full, 1e-12 * full);
        // Equivalent to the (1 + lambda)^2 |c| weight.
        const real alt = std::abs(c) * std::pow(1 + lam, 2);
        EXPECT_LE(sobolev_norm_h4(w), alt * (1 + 1e-14));
        EXPECT_GE(sobolev_norm_h4(w), alt / std::sqrt(6.0));
    }
}

TEST(SobolevNorm, MatchesRefinedQuadrature)
{
    const auto w = shear_preset_random_h4(32, 21, 1.0);
    const int q = 40000;
    real sum = 0.0;
    for (int i = 0; i < q; ++i) {
        const real y = -1.0 + (i + 0.5) * 2.0 / q;
        for (int j = 0; j <= 4; ++j) sum += std::pow(sine_derivative(w, j, y), 2) * 2.0 / q;
    }
    const real ref = std::sqrt(sum);
    EXPECT_NEAR(sobolev_norm_h4(w), ref, 1e-6 * ref);
}

TEST(ShearProfile, MonotoneDecayAndWallTraces)
{
    ChannelGrid g(1, 48);
    auto p = ShearProfile(g, shear_preset_random_h4(48, 7, 0.2), 0.03);
    real prev = p.h4_norm();
    for (int s = 0; s < 20; ++s) {
        p = p.heat_step(0.25);
        EXPECT_LE(p.h4_norm(), prev);
        prev = p.h4_norm();
        const ModeVector wm{ComplexVector(p.w_coeffs().begin(), p.w_coeffs().end()), Basis::Sine};
        EXPECT_NEAR(std::abs(evaluate(wm, -1.0)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(evaluate(wm, 1.0)), 0.0, 1e-14);
    }
}

TEST(ShearProfile, CouetteIsFixedPoint)
{
    ChannelGrid g(1, 16);
    auto p = ShearProfile::couette(g, 0.1);
    for (int s = 0; s < 5; ++s) p = p.heat_step(1.0);
    EXPECT_EQ(p.u_values(), g.y_nodes());
    EXPECT_EQ(p.h4_norm(), 0.0);
    EXPECT_NEAR(p.max_abs_u(), p.padded().u.back(), 1e-15);
}

TEST(ShearProfile, PaddedGridCarriesSameProfile)
{
    ChannelGrid g(1, 32);
    ShearProfile p(g, shear_preset_random_h4(32, 2, 0.4), 0.1);
    const auto yp = interior_nodes(p.padded_ny());
    const auto direct = reconstruct_shear(p.w_coeffs(), p.padded_ny());
    EXPECT_EQ(p.padded().u, direct.u);
    EXPECT_GT(p.padded_ny(), 32);
    EXPECT_EQ(yp.size(), p.padded().u.size());
}

TEST(ShearPresets, ParsingAndValidation)
{
    EXPECT_EQ(shear_preset("zero", 16), RealVector(16, 0.0));
    const auto s = shear_preset("single_mode 2 0.5", 16);
    EXPECT_EQ(s[1], 0.5);
    const auto r = shear_preset("random_h4 9 0.01", 16);
    EXPECT_NEAR(sobolev_norm_h4(r), 0.01, 1e-15);
    EXPECT_EQ(r, shear_preset_random_h4(16, 9, 0.01));
    EXPECT_THROW(shear_preset("single_mode 0 1", 16), DomainError);
    EXPECT_THROW(shear_preset("single_mode 17 1", 16), DomainError);
    EXPECT_THROW(shear_preset("single_mode x", 16), DomainError);
    EXPECT_THROW(shear_preset("gaussian 1", 16), DomainError);
    EXPECT_THROW(shear_preset("zero 1", 16), DomainError);
}

TEST(ShearFromValues, AcceptsCompatibleData)
{
    const int n = 64;
    const auto y = interior_nodes(n);
    RealVector v(n), full(n + 2, 0.0);
    for (int j = 0; j < n; ++j) {
        v[j] = std::sin(pi * (y[j] + 1.0) / 2.0) + 0.2 * std::sin(pi * (y[j] + 1.0));
        full[j + 1] = v[j];
    }
    const auto a = shear_from_values(v, n);
    EXPECT_NEAR(a[0], 1.0, 1e-13);
    EXPECT_NEAR(a[1], 0.2, 1e-13);
    EXPECT_EQ(shear_from_values(full, n), a);
}

TEST(ShearFromValues, RejectsNonvanishingTrace)
{
    const int n = 64;
    const auto y = interior_nodes(n);
    RealVector v(n), full(n + 2, 0.0);
    for (int j = 0; j < n; ++j) {
        v[j] = std::sin(pi * (y[j] + 1.0) / 2.0) + 1e-3;
        full[j + 1] = v[j];
    }
    EXPECT_THROW(shear_from_values(v, n), DomainError);
    full[0] = 2e-10;
    EXPECT_THROW(shear_from_values(full, n), DomainError);
    full[0] = 5e-11;
    EXPECT_NO_THROW(shear_from_values(full, n));
    EXPECT_THROW(shear_from_values(RealVector(10, 0.0), n), DomainError);
}

TEST(ShearFromValues, OneColumnFile)
{
    const int n = 16;
    const auto path = std::filesystem::temp_directory_path() / "hypocouette_win_test.txt";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fprintf(f, "# W_in on the n_y + 2 closed nodes\n");
        const auto y = interior_nodes(n);
        std::fprintf(f, "0\n");
        for (real yy : y) std::fprintf(f, "%.17g  # node\n", 0.1 * std::sin(pi * (yy + 1.0)));
        std::fprintf(f, "0\n");
        std::fclose(f);
    }
    const auto w = shear_from_file(path.string(), n);
    EXPECT_NEAR(w[1], 0.1, 1e-14);
    std::filesystem::remove(path);
    EXPECT_THROW(shear_from_file("/nonexistent/w.txt", n), DomainError);
}
