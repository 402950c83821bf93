#include "hypocouette/budget.hpp"
#include "hypocouette/initial_data.hpp"

#include "quadrature_oracle.hpp"

#include <gtest/gtest.h>

using namespace hypocouette;

namespace {

real coeff_norm2(std::span<const cplx> v)
{
    real s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return s;
}

std::vector<LinearModeState> linear_run(int k, real nu, int ny, real dt, real t_end, std::uint64_t seed,
                                        const RealVector& w_in = {}, const LinearOptions& opt = {})
{
    const ChannelGrid g(2, ny);
    const ShearProfile p(g, w_in.empty() ? RealVector(static_cast<std::size_t>(ny), 0.0) : w_in, nu);
    std::vector<LinearModeState> out;
    evolve_linear(make_linear_state(k, random_mode(ny, seed), p), dt, static_cast<int>(std::lround(t_end / dt)),
                  [&](const LinearModeState& s) { out.push_back(s); }, opt);
    return out;
}

}  // namespace

TEST(EnergyLedger, DefaultsSatisfyEveryConstantInequality)
{
    const auto l = EnergyLedger::defaults(1e-4);
    EXPECT_DOUBLE_EQ(l.c_tau, 1.0 / 4096.0);
    EXPECT_DOUBLE_EQ(l.c_alpha, std::pow(64.0, -9));
    EXPECT_DOUBLE_EQ(l.c_beta, std::pow(64.0, -6));
    EXPECT_LT(l.delta0, std::pow(64.0 * 64.0, -2));
    for (const auto& c : l.audit()) EXPECT_TRUE(c.holds) << c.name << ": " << c.lhs << " vs " << c.rhs;
    EXPECT_TRUE(l.admissible());
    EXPECT_TRUE(l.validate().empty());
}

TEST(EnergyLedger, AuditFlagsLargeTauAndValidationListsEveryField)
{
    auto l = EnergyLedger::defaults(1e-4);
    l.c_tau = 0.9;
    EXPECT_FALSE(l.audit().front().holds);
    EXPECT_FALSE(l.admissible());

    EnergyLedger bad;
    bad.K0 = 10;
    bad.nu = -1;
    bad.delta = -0.5;
    const auto errs = bad.validate();
    // c_alpha, c_beta, c_tau, delta_star, delta0, delta1, K0, delta, nu.
    EXPECT_EQ(errs.size(), 9u);
}

TEST(EnergyFunctional, ZeroModeAndDegenerateLedger)
{
    const int ny = 48;
    const ChannelGrid g(4, ny);
    const SioBank bank(g, {1, 3});
    const auto l = EnergyLedger::defaults(1e-3);
    const ComplexVector zero(ny, 0.0);
    EXPECT_EQ(energy_k(zero, 3, l, bank), 0.0);
    const Dissipation d = dissipation_k(zero, 3, l);
    EXPECT_EQ(d.gamma + d.alpha + d.beta + d.tau + d.tau_alpha, 0.0);

    const auto w = random_mode(ny, 5);
    EXPECT_EQ(energy_k(w, 1, EnergyLedger::degenerate(1e-3), bank), coeff_norm2(w));
}

TEST(EnergyFunctional, RequiresAssembledOperator)
{
    const ChannelGrid g(4, 32), other(4, 40);
    const SioBank bank(g, {2});
    const auto l = EnergyLedger::defaults(1e-3);
    const auto w = random_mode(32, 1);
    EXPECT_THROW(energy_k(w, 1, l, bank), DomainError);
    EXPECT_NO_THROW(energy_k(w, -2, l, bank));
    EXPECT_THROW(energy_k(random_mode(40, 1), 2, l, bank), DomainError);
    EXPECT_THROW(energy_k(w, 0, l, bank), DomainError);
    SioBank mixed(g, {1});
    EXPECT_THROW(mixed.add(assemble_sio(2, other)), DomainError);
    EXPECT_THROW(mixed.add(assemble_sio(2, g, 0.5)), DomainError);
}

TEST(EnergyFunctional, SioFormIsReal)
{
    const int ny = 96;
    const ChannelGrid g(8, ny);
    const SioBank bank(g, {1, 7});
    for (int k : {1, 7, -7}) {
        const auto v = to_nodes(ModeVector{random_mode(ny, 40 + k), Basis::Sine}, ny);
        const auto jv = bank.apply(k, v);
        const cplx form = nodal_inner(std::span<const cplx>(v), std::span<const cplx>(jv), g.h());
        EXPECT_LE(std::abs(form.imag()), 1e-14 * coeff_norm2(v) * g.h());
    }
}

TEST(EnergyFunctional, ConjugateModeHasEqualEnergy)
{
    const int ny = 64;
    const ChannelGrid g(4, ny);
    const SioBank bank(g, {3});
    auto l = EnergyLedger::defaults(1e-2);
    l.c_alpha = 0.3;  // magnify the gradient terms
    l.c_beta = 0.2;
    l.c_tau = 0.4;
    const auto w = random_mode(ny, 17);
    ComplexVector wc(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) wc[i] = std::conj(w[i]);
    EXPECT_NEAR(energy_k(w, 3, l, bank), energy_k(wc, -3, l, bank), 1e-13);
}

TEST(EnergyFunctional, CoercivityBoundsFromAuditedNorm)
{
    const int ny = 128;
    const real nu = 1e-4;
    const ChannelGrid g(16, ny);
    const auto l = EnergyLedger::defaults(nu);
    for (int k : {1, 4, 16}) {
        const SioBank bank(g, {k});
        const real nj = sio_norm(bank.at(k));
        const auto b = coercivity_bounds(l, nj);
        ASSERT_GT(b.lower, 0.0);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto w = random_mode(ny, 100 * k + seed, 1 + static_cast<int>(seed * 7));
            const ModeVector mv{w, Basis::Sine};
            const real q = norm2(mv) + l.c_alpha * std::pow(nu, 2.0 / 3.0) * std::pow(k, -2.0 / 3.0) * norm2(derivative_y(mv));
            const real e = energy_k(w, k, l, bank);
            EXPECT_GE(e, b.lower * q);
            EXPECT_LE(e, b.upper * q);
        }
    }
}

TEST(EnergyFunctional, ScalingCovariance)
{
    const int ny = 64;
    const ChannelGrid g(4, ny);
    const SioBank bank(g, {2});
    auto l = EnergyLedger::defaults(1e-3);
    l.c_alpha = 0.1;
    l.c_beta = 0.05;
    const auto w = random_mode(ny, 9);
    const cplx lambda{-1.7, 0.6};
    ComplexVector lw(w);
    for (auto& c : lw) c *= lambda;
    const real s = std::norm(lambda);
    EXPECT_NEAR(energy_k(lw, 2, l, bank), s * energy_k(w, 2, l, bank), 1e-13 * s);
    const Dissipation a = dissipation_k(w, 2, l), b = dissipation_k(lw, 2, l);
    EXPECT_NEAR(b.gamma, s * a.gamma, 1e-13 * s * a.gamma);
    EXPECT_NEAR(b.alpha, s * a.alpha, 1e-13 * s * a.alpha);
    EXPECT_NEAR(b.beta, s * a.beta, 1e-13 * s * a.beta);
    EXPECT_NEAR(b.tau, s * a.tau, 1e-13 * s * a.tau);
    EXPECT_NEAR(b.tau_alpha, s * a.tau_alpha, 1e-13 * s * a.tau_alpha);
}

TEST(Dissipation, SingleSineModeAndPositivity)
{
    const int ny = 32;
    const auto l = EnergyLedger::defaults(3e-3);
    for (int k : {1, -5}) {
        for (int n : {1, 6}) {
            ComplexVector w(ny, 0.0);
            w[n - 1] = cplx{0.3, -0.4};
            const real expect = l.nu * (k * k + std::pow(n * pi / 2, 2)) * 0.25;
            EXPECT_NEAR(dissipation_k(w, k, l).gamma, expect, 1e-15 * expect);
        }
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dissipation d = dissipation_k(random_mode(ny, seed, 32), 1 + static_cast<int>(seed), l);
        EXPECT_GT(d.gamma, 0.0);
        EXPECT_GT(d.alpha, 0.0);
        EXPECT_GT(d.beta, 0.0);
        EXPECT_GT(d.tau, 0.0);
        EXPECT_GT(d.tau_alpha, 0.0);
    }
}

TEST(Dissipation, DampingTermMatchesGreenFunctionQuadrature)
{
    // ||grad_k phi||^2 = -Re <phi, w> with phi(y) = int G_k(y, y') w(y') dy'
    // evaluated by Gauss-Legendre on both sides of the kink at y' = y.
    const int ny = 64;
    const auto gl = oracle::gauss_legendre(40);
    auto l = EnergyLedger::defaults(1e-4);
    for (int k : {1, 3, 12}) {
        for (real delta : {0.0, 0.4}) {
            l.delta = delta;
            const auto w = random_mode(ny, 60 + k, 6);
            const ModeVector mv{w, Basis::Sine};
            auto phi_at = [&](real y) {
                cplx s = 0.0;
                for (auto [a, b] : {std::pair{-1.0, y}, std::pair{y, 1.0}})
                    for (std::size_t q = 0; q < gl.x.size(); ++q) {
                        const real yp = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
                        s += 0.5 * (b - a) * gl.w[q] * green_function(k, y, yp) * evaluate(mv, yp);
                    }
                return s;
            };
            cplx form = 0.0;
            for (std::size_t q = 0; q < gl.x.size(); ++q) form += gl.w[q] * std::conj(phi_at(gl.x[q])) * evaluate(mv, gl.x[q]);
            const real oracle = std::pow(std::abs(static_cast<real>(k)), 2.0 - delta) * (-form.real());
            const real got = dissipation_k(w, k, l).tau;
            EXPECT_NEAR(got, oracle, 1e-8 * oracle) << "k=" << k << " delta=" << delta;
        }
    }
}

TEST(Aggregate, ZeroInputAndTimeZeroWeights)
{
    const auto l = EnergyLedger::defaults(1e-4);
    const ComplexVector zero(16, 0.0);
    const auto s = aggregate({ModeEnergy{1, 0.0, l.nu, 0.0, {}}}, zero, l, 0.0);
    EXPECT_EQ(s.E + s.D + s.E0 + s.Eneq + s.D0 + s.Dneq + s.DE, 0.0);

    std::vector<ModeEnergy> modes{{1, 0.0, l.nu, 2.0, {}}, {-3, 0.0, l.nu, 0.5, {}}};
    const auto t0 = aggregate(modes, zero, l, 0.0);
    EXPECT_DOUBLE_EQ(t0.Eneq, 2.0 + std::pow(3.0, 2 * l.m) * 0.5);
}

TEST(Aggregate, SingleModeHandWeights)
{
    auto l = EnergyLedger::defaults(1e-2);
    l.delta_star = 0.01;  // visible time factors
    l.c_alpha = 0.1;
    const real t = 7.0;
    Dissipation d{0.3, 0.2, 0.1, 0.05, 0.02};
    const int k = 4;
    ComplexVector w0(8, 0.0);
    w0[1] = 0.5;
    const auto s = aggregate({ModeEnergy{k, t, l.nu, 1.5, d}}, w0, l, t);
    const real wk = std::pow(4.0, 2 * l.m) * std::exp(2 * 0.01 * std::cbrt(l.nu) * t);
    EXPECT_NEAR(s.Eneq, wk * 1.5, 1e-15);
    const real Dk = 0.3 + l.c_alpha * 0.2 + l.c_beta * 0.1 + l.c_tau * 0.05 + l.c_tau * l.c_alpha * 0.02;
    EXPECT_NEAR(s.Dneq, wk * Dk, 1e-15);
    const real lam = pi * pi;  // n = 2
    const real e0 = std::exp(2 * 0.01 * l.nu * t) * 0.25 * (1 + l.c_alpha * std::pow(l.nu, 2.0 / 3.0) * lam);
    EXPECT_NEAR(s.E0, e0, 1e-15);
    EXPECT_NEAR(s.D0, std::exp(2 * 0.01 * l.nu * t) * l.nu * 0.25 * (lam + l.c_alpha * std::pow(l.nu, 2.0 / 3.0) * lam * lam),
                1e-15);
    EXPECT_NEAR(s.DE, l.nu * e0 + std::cbrt(l.nu) * wk * std::pow(4.0, 2.0 / 3.0) * 1.5, 1e-15);
    EXPECT_DOUBLE_EQ(s.D, s.D0 + s.Dneq + s.DE);
    EXPECT_DOUBLE_EQ(s.E, s.E0 + s.Eneq);
}

TEST(Aggregate, RejectsInconsistentRecords)
{
    const auto l = EnergyLedger::defaults(1e-4);
    const ComplexVector zero(4, 0.0);
    EXPECT_THROW(aggregate({ModeEnergy{1, 0.5, l.nu, 1.0, {}}}, zero, l, 0.0), DomainError);
    EXPECT_THROW(aggregate({ModeEnergy{1, 0.0, 2 * l.nu, 1.0, {}}}, zero, l, 0.0), DomainError);
    EXPECT_THROW(aggregate({ModeEnergy{0, 0.0, l.nu, 1.0, {}}}, zero, l, 0.0), DomainError);
}

TEST(Aggregate, FrozenFieldsDifferOnlyByTimeFactors)
{
    auto l = EnergyLedger::defaults(1e-3);
    l.delta_star = 0.02;
    const auto g = std::make_shared<const ChannelGrid>(3, 32);
    const SioBank bank = SioBank::all_modes(*g);
    const SpectralField w = random_perturbation(g, 1e-2, l.m, l.nu, 4, 3);
    const real dt = 11.0;
    const auto a = snapshot(w, 1.0, l, bank), b = snapshot(w, 1.0 + dt, l, bank);
    EXPECT_NEAR(b.E0 / a.E0, std::exp(2 * l.delta_star * l.nu * dt), 1e-12);
    EXPECT_NEAR(b.Eneq / a.Eneq, std::exp(2 * l.delta_star * std::cbrt(l.nu) * dt), 1e-12);
    EXPECT_NEAR(b.Dneq / a.Dneq, std::exp(2 * l.delta_star * std::cbrt(l.nu) * dt), 1e-12);
}

TEST(FitDecayRate, ExactExponentialConstantAndErrors)
{
    std::vector<real> t, v, c;
    for (int i = 0; i < 30; ++i) {
        t.push_back(0.1 * i);
        v.push_back(3.0 * std::exp(-0.7 * t.back()));
        c.push_back(2.5);
    }
    const auto f = fit_decay_rate(t, v);
    EXPECT_NEAR(f.rate, 0.7, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_NEAR(fit_decay_rate(t, c).rate, 0.0, 1e-15);

    EXPECT_THROW(fit_decay_rate(std::vector<real>(t.begin(), t.begin() + 9), std::vector<real>(v.begin(), v.begin() + 9)),
                 DomainError);
    v[25] = 0.0;
    EXPECT_THROW(fit_decay_rate(t, v), DomainError);
    v[25] = -1.0;
    EXPECT_THROW(fit_decay_rate(t, v, 0.5), DomainError);
    EXPECT_NO_THROW(fit_decay_rate(t, v, 0.1));  // index 25 outside the last three samples
}

TEST(FitDecayRate, PureDiffusionMode)
{
    const int ny = 32, k = 2, n = 3;
    const real nu = 1e-2;
    const ChannelGrid g(2, ny);
    ComplexVector w(ny, 0.0);
    w[n - 1] = 1.0;
    std::vector<real> t, amp;
    evolve_linear(make_linear_state(k, w, ShearProfile::couette(g, nu)), 0.1, 100,
                  [&](const LinearModeState& s) {
                      t.push_back(s.t);
                      amp.push_back(std::sqrt(coeff_norm2(s.omega)));
                  },
                  LinearOptions{false, false});
    const real expect = nu * (k * k + std::pow(n * pi / 2, 2));
    EXPECT_NEAR(fit_decay_rate(t, amp).rate, expect, 1e-6 * expect);
}

TEST(LinearBudget, CouetteMarginHoldsAtDefaultDeltaStar)
{
    const real nu = 1e-3;
    const auto l = EnergyLedger::defaults(nu);
    for (int k : {1, 3}) {
        const auto traj = linear_run(k, nu, 96, 0.05, 30.0, 3 + k);
        const ChannelGrid g(2, 96);
        const auto r = verify_linear_budget(traj, l, SioBank(g, {k}));
        EXPECT_EQ(r.violations, 0) << "k=" << k;
        EXPECT_TRUE(r.passed());
        EXPECT_TRUE(r.integrated_ok);
        EXPECT_TRUE(r.damping_within_bound);
        EXPECT_GT(r.empirical_delta_star, l.delta_star);
        EXPECT_GE(r.integrated_best_constant, 0.25 * l.c_tau);
    }
}

TEST(LinearBudget, ZeroDataIsTriviallySatisfied)
{
    const int ny = 32;
    const ChannelGrid g(2, ny);
    std::vector<LinearModeState> traj;
    evolve_linear(make_linear_state(1, ComplexVector(ny, 0.0), ShearProfile::couette(g, 1e-3)), 0.1, 20,
                  [&](const LinearModeState& s) { traj.push_back(s); });
    const auto r = verify_linear_budget(traj, EnergyLedger::defaults(1e-3), SioBank(g, {1}));
    EXPECT_EQ(r.violations, 0);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.damping_integral.back(), 0.0);
}

TEST(LinearBudget, RejectsNonUniformSampling)
{
    auto traj = linear_run(1, 1e-3, 32, 0.1, 1.0, 2);
    traj.erase(traj.begin() + 4);
    const ChannelGrid g(2, 32);
    EXPECT_THROW(verify_linear_budget(traj, EnergyLedger::defaults(1e-3), SioBank(g, {1})), DomainError);
}

TEST(LinearBudget, DegenerateLedgerReducesToL2Identity)
{
    // With E_k = ||w||^2 the budget defect is dE/dt itself; independently
    // d/dt ||w||^2 = 2 Re <ik U'' phi, w> - 2 nu ||grad_k w||^2.
    const int ny = 64, k = 2;
    const real nu = 1e-3, dt = 0.01;
    const auto w_in = shear_preset_single_mode(ny, 2, 0.05);
    const auto traj = linear_run(k, nu, ny, dt, 2.0, 8, w_in);
    const ChannelGrid g(2, ny);
    const auto l = EnergyLedger::degenerate(nu);
    const auto r = verify_linear_budget(traj, l, SioBank(g, {k}));
    real worst = 0.0;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        const auto& s = traj[i];
        const auto rhs = linear_rhs(s, LinearOptions{false, true});
        // rhs = ik U'' phi - nu(k^2 + lambda) w
        cplx form = 0.0;
        for (std::size_t n = 0; n < rhs.size(); ++n) form += std::conj(s.omega[n]) * rhs[n];
        const real oracle = 2.0 * form.real();
        worst = std::max(worst, std::abs(r.samples[i].defect - oracle) / std::abs(oracle));
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(LinearBudget, VerifierFlagsAnOversizedDeltaStar)
{
    const real nu = 1e-4;
    auto l = EnergyLedger::defaults(nu);
    l.delta_star = 1.0 / 64.0;
    const auto traj = linear_run(1, nu, 64, 0.05, 20.0, 5);
    const ChannelGrid g(2, 64);
    const auto r = verify_linear_budget(traj, l, SioBank(g, {1}));
    EXPECT_GT(r.violations, r.flagged_violations);
    EXPECT_FALSE(r.passed());
    EXPECT_LT(r.empirical_delta_star, l.delta_star);
}

TEST(LinearBudget, VerifierFlagsAnInadmissibleShear)
{
    // ||W||_{H^4} far above delta0: the U'' coupling outgrows the damping term.
    const int ny = 64;
    const real nu = 1e-4;
    const auto traj = linear_run(1, nu, ny, 0.05, 20.0, 6, shear_preset_single_mode(ny, 1, 0.1));
    const ChannelGrid g(2, ny);
    const auto r = verify_linear_budget(traj, EnergyLedger::defaults(nu), SioBank(g, {1}));
    EXPECT_GT(r.violations, 0);
    EXPECT_FALSE(r.passed());
}

TEST(Bootstrap, ZeroPerturbationIsTrivial)
{
    const auto g = std::make_shared<const ChannelGrid>(2, 32);
    const real nu = 1e-3;
    const auto l = EnergyLedger::defaults(nu);
    auto s = make_nonlinear_state(SpectralField(g), ShearProfile::couette(*g, nu));
    std::vector<NonlinearState> traj{s};
    for (int i = 0; i < 5; ++i) traj.push_back(s = step_nonlinear(s, 0.1));
    const auto r = verify_nonlinear_bootstrap(traj, l, SioBank::all_modes(*g));
    EXPECT_EQ(r.C0, 0.0);
    EXPECT_TRUE(r.monotone_ok);
    EXPECT_TRUE(r.integrated_ok);
    EXPECT_TRUE(r.smallness_holds);
}

TEST(Bootstrap, SmallPerturbationStaysBelowInitialEnergy)
{
    const real nu = 1e-3;
    const auto g = std::make_shared<const ChannelGrid>(4, 48);
    const auto l = EnergyLedger::defaults(nu);
    auto s = make_nonlinear_state(random_perturbation(g, 1e-3 * std::sqrt(nu), l.m, nu, 12), ShearProfile::couette(*g, nu));
    const real dt = 0.5 * suggest_dt(s);
    std::vector<NonlinearState> traj{s};
    for (int i = 0; i < 80; ++i) traj.push_back(s = step_nonlinear(s, dt));
    const auto r = verify_nonlinear_bootstrap(traj, l, SioBank::all_modes(*g));
    EXPECT_TRUE(r.monotone_ok);
    EXPECT_LE(r.sup_ratio, 1.0);
    EXPECT_TRUE(std::isfinite(r.C0));
    for (std::size_t i = 1; i + 1 < r.samples.size(); ++i) EXPECT_LE(r.samples[i].defect, 1e-12 * r.samples[i].D);
}

TEST(Bootstrap, LargePerturbationIsReportedNotThrown)
{
    const real nu = 1e-3;
    const auto g = std::make_shared<const ChannelGrid>(4, 32);
    const auto l = EnergyLedger::defaults(nu);
    auto s = make_nonlinear_state(random_perturbation(g, 10 * std::sqrt(nu), l.m, nu, 2), ShearProfile::couette(*g, nu));
    const real dt = 0.5 * suggest_dt(s);
    std::vector<NonlinearState> uniform{s};
    for (int i = 0; i < 10; ++i) uniform.push_back(s = step_nonlinear(s, dt));
    BootstrapReport r;
    EXPECT_NO_THROW(r = verify_nonlinear_bootstrap(uniform, l, SioBank::all_modes(*g)));
    EXPECT_EQ(r.samples.size(), uniform.size());
}
