#pragma once

#include "hypocouette/sio.hpp"

#include <map>

namespace hypocouette {

/// Constants of the hypocoercive energy and the smallness parameters.
struct EnergyLedger {
    real c_alpha = 0.0;
    real c_beta = 0.0;
    real c_tau = 0.0;
    real delta_star = 0.0;
    real delta0 = 0.0;
    real delta1 = 0.0;
    real K0 = 64.0;
    real m = 0.75;
    real delta = 0.0;  // exponent of the |k|^{-delta} damping weight
    real nu = 1e-4;

    /// The worked example: c_tau = 1/(64 K0), c_alpha = K0^-9, c_beta = K0^-6,
    /// delta0 = (64 K0)^-2 / 2. delta_star = c_beta / 16 is small enough for the
    /// beta-term enhanced-dissipation gain to cover 8 delta_star nu^{1/3}|k|^{2/3} E_k.
    static EnergyLedger defaults(real nu, real K0 = 64.0)
    {
        EnergyLedger l;
        l.K0 = K0;
        l.nu = nu;
        l.c_tau = 1.0 / (64.0 * K0);
        l.c_alpha = std::pow(K0, -9.0);
        l.c_beta = std::pow(K0, -6.0);
        l.delta0 = 0.5 / ((64.0 * K0) * (64.0 * K0));
        l.delta1 = 0.1;
        l.delta_star = l.c_beta / 16.0;
        return l;
    }

    /// All energy constants zero: E_k = ||w_k||^2.
    static EnergyLedger degenerate(real nu)
    {
        EnergyLedger l;
        l.nu = nu;
        l.delta_star = 0.0;
        return l;
    }

    struct Check {
        std::string name;
        real lhs;
        real rhs;
        bool holds;
    };

    /// The constant inequalities the decay argument needs, evaluated for these values.
    std::vector<Check> audit() const
    {
        auto lt = [](std::string n, real a, real b) { return Check{std::move(n), a, b, a < b}; };
        return {
            lt("c_tau < 1/(32 K0)", c_tau, 1.0 / (32.0 * K0)),
            lt("K0 delta0 < c_tau/32", K0 * delta0, c_tau / 32.0),
            lt("c_alpha < min(1/(8 K0 delta0), 1)", c_alpha, std::min(1.0 / (8.0 * K0 * delta0), 1.0)),
            lt("c_alpha/c_beta < 1/(25 K0)", c_beta > 0.0 ? c_alpha / c_beta : INFINITY, 1.0 / (25.0 * K0)),
            lt("c_beta^2/(2 c_alpha) < 1/(25 K0^2)", c_alpha > 0.0 ? c_beta * c_beta / (2.0 * c_alpha) : INFINITY,
               1.0 / (25.0 * K0 * K0)),
            Check{"c_beta^2 <= c_alpha/4 + (1 - c_tau)/4", c_beta * c_beta, c_alpha / 4.0 + (1.0 - c_tau) / 4.0,
                  c_beta * c_beta <= c_alpha / 4.0 + (1.0 - c_tau) / 4.0},
        };
    }

    bool admissible() const
    {
        for (const auto& c : audit())
            if (!c.holds) return false;
        return true;
    }

    /// Field-range violations, one message per field; empty when valid.
    std::vector<std::string> validate() const
    {
        std::vector<std::string> e;
        auto unit = [&](const char* n, real v) {
            if (!(v > 0.0 && v < 1.0)) e.push_back(std::string(n) + " must lie in (0, 1)");
        };
        unit("c_alpha", c_alpha);
        unit("c_beta", c_beta);
        unit("c_tau", c_tau);
        if (!(delta_star > 0.0)) e.emplace_back("delta_star must be > 0");
        if (!(delta0 > 0.0)) e.emplace_back("delta0 must be > 0");
        if (!(delta1 > 0.0)) e.emplace_back("delta1 must be > 0");
        if (!(K0 >= 32.0)) e.emplace_back("K0 must be >= 32");
        if (!(delta >= 0.0)) e.emplace_back("delta must be >= 0");
        if (!(nu > 0.0)) e.emplace_back("nu must be > 0");
        if (!std::isfinite(m)) e.emplace_back("m must be finite");
        return e;
    }
};

/// Assembled J_k for a set of wavenumbers on one grid.
class SioBank {
public:
    SioBank() = default;

    SioBank(const ChannelGrid& grid, const std::vector<int>& ks, real delta = 0.0,
            PvScheme scheme = PvScheme::Symmetric)
        : ny_(grid.ny()), h_(grid.h()), delta_(delta)
    {
        for (int k : ks) add(assemble_sio(k, grid, delta, scheme));
    }

    /// Every k in 1..K (J_{-k} is obtained by conjugation).
    static SioBank all_modes(const ChannelGrid& grid, real delta = 0.0)
    {
        std::vector<int> ks;
        for (int k = 1; k <= grid.kmax(); ++k) ks.push_back(k);
        return SioBank(grid, ks, delta);
    }

    void add(SioOperator op)
    {
        if (ny_ == 0) ny_ = op.ny(), h_ = 2.0 / (op.ny() + 1), delta_ = op.damping_delta;
        if (op.ny() != ny_) throw DomainError("SioBank: operator resolution differs from the bank");
        if (op.damping_delta != delta_) throw DomainError("SioBank: operator delta differs from the bank");
        ops_[op.k] = std::move(op);
    }

    bool contains(int k) const { return ops_.count(k) != 0 || ops_.count(-k) != 0; }

    /// J_k applied to interior nodal values; J_{-k} = conj(J_k).
    ComplexVector apply(int k, std::span<const cplx> v) const
    {
        auto it = ops_.find(k);
        if (it != ops_.end()) return apply_operator(it->second.matrix, v);
        it = ops_.find(-k);
        if (it == ops_.end()) throw DomainError("no singular integral operator assembled for k = " + std::to_string(k));
        ComplexVector c(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) c[i] = std::conj(v[i]);
        ComplexVector r = apply_operator(it->second.matrix, c);
        for (auto& x : r) x = std::conj(x);
        return r;
    }

    const SioOperator& at(int k) const
    {
        auto it = ops_.find(std::abs(k));
        if (it == ops_.end()) it = ops_.find(-std::abs(k));
        if (it == ops_.end()) throw DomainError("no singular integral operator assembled for k = " + std::to_string(k));
        return it->second;
    }

    int ny() const { return ny_; }
    real h() const { return h_; }
    real delta() const { return delta_; }

private:
    int ny_ = 0;
    real h_ = 0.0;
    real delta_ = 0.0;
    std::map<int, SioOperator> ops_;
};

namespace detail {

/// Re <f, J_k f> on the interior nodes with weight h.
inline real sio_form(const SioBank& bank, int k, const ModeVector& f)
{
    const ComplexVector v = to_nodes(f, bank.ny());
    const ComplexVector jv = bank.apply(k, v);
    return nodal_inner(std::span<const cplx>(v), std::span<const cplx>(jv), bank.h()).real();
}

inline void check_mode(int k, std::span<const cplx> w, const SioBank* bank)
{
    if (k == 0) throw DomainError("energy functional: k must be nonzero");
    if (bank && static_cast<int>(w.size()) != bank->ny())
        throw DomainError("energy functional: omega length does not match the assembled operators");
}

}  // namespace detail

/// The summands of E_k[w_k] before weighting by the ledger constants.
struct EnergyParts {
    real l2 = 0.0;             // ||w||^2
    real grad2 = 0.0;          // ||d_y w||^2
    real cross = 0.0;          // Re <ik w, d_y w>
    real sio = 0.0;            // Re <w, J w>
    real sio_grad = 0.0;       // Re <d_y w, J d_y w>
};

inline EnergyParts energy_parts(std::span<const cplx> omega_k, int k, const SioBank& bank, bool need_sio = true)
{
    detail::check_mode(k, omega_k, &bank);
    const ModeVector w{ComplexVector(omega_k.begin(), omega_k.end()), Basis::Sine};
    const ModeVector dw = derivative_y(w);
    ModeVector ikw = w;
    for (auto& c : ikw.coeffs) c *= I * static_cast<real>(k);
    EnergyParts p;
    p.l2 = norm2(w);
    p.grad2 = norm2(dw);
    p.cross = inner(ikw, dw).real();
    if (need_sio) {
        p.sio = detail::sio_form(bank, k, w);
        p.sio_grad = detail::sio_form(bank, k, dw);
    }
    return p;
}

/// E_k = ||w||^2 + c_tau <w, J w> + c_alpha nu^{2/3}|k|^{-2/3} (||w'||^2 + c_tau <w', J w'>)
///       - c_beta nu^{1/3}|k|^{-4/3} Re <ik w, w'>.
inline real energy_k(std::span<const cplx> omega_k, int k, const EnergyLedger& l, const SioBank& bank)
{
    const EnergyParts p = energy_parts(omega_k, k, bank, l.c_tau != 0.0);
    const real ak = std::abs(static_cast<real>(k));
    const real a = l.c_alpha * std::pow(l.nu, 2.0 / 3.0) * std::pow(ak, -2.0 / 3.0);
    const real b = l.c_beta * std::cbrt(l.nu) * std::pow(ak, -4.0 / 3.0);
    return p.l2 + l.c_tau * p.sio + a * (p.grad2 + l.c_tau * p.sio_grad) - b * p.cross;
}

struct Dissipation {
    real gamma = 0.0;
    real alpha = 0.0;
    real beta = 0.0;
    real tau = 0.0;
    real tau_alpha = 0.0;

    /// D_gamma + c_alpha D_alpha + c_beta D_beta + c_tau D_tau + c_tau c_alpha D_tau alpha.
    real combined(const EnergyLedger& l) const
    {
        return gamma + l.c_alpha * alpha + l.c_beta * beta + l.c_tau * tau + l.c_tau * l.c_alpha * tau_alpha;
    }
};

/// ||grad_k phi||^2 with phi = Delta_k^{-1} w.
inline real grad_phi_norm2(std::span<const cplx> omega_k, int k)
{
    const ComplexVector phi = poisson_solve(omega_k, k);
    real s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += laplacian_symbol(k, static_cast<int>(i) + 1) * std::norm(phi[i]);
    return s;
}

/// The five dissipation terms, each a nonnegative coefficient sum:
///   D_gamma = nu ||grad_k w||^2,  D_alpha = nu^{5/3}|k|^{-2/3} ||grad_k w'||^2,
///   D_beta = nu^{1/3}|k|^{2/3} ||w||^2,  D_tau = |k|^{2-delta} ||grad_k phi||^2,
///   D_tau alpha = nu^{2/3}|k|^{4/3-delta} ||grad_k phi'||^2.
inline Dissipation dissipation_k(std::span<const cplx> omega_k, int k, const EnergyLedger& l)
{
    detail::check_mode(k, omega_k, nullptr);
    const ComplexVector phi = poisson_solve(omega_k, k);
    const real kk = static_cast<real>(k) * k, ak = std::abs(static_cast<real>(k));
    real gw = 0.0, gdw = 0.0, w2 = 0.0, gp = 0.0, gdp = 0.0;
    for (std::size_t i = 0; i < omega_k.size(); ++i) {
        const real lam = std::pow(ChannelGrid::mode_wavenumber(static_cast<int>(i) + 1), 2);
        const real s = kk + lam;
        w2 += std::norm(omega_k[i]);
        gw += s * std::norm(omega_k[i]);
        gdw += s * lam * std::norm(omega_k[i]);
        gp += s * std::norm(phi[i]);
        gdp += s * lam * std::norm(phi[i]);
    }
    Dissipation d;
    d.gamma = l.nu * gw;
    d.alpha = std::pow(l.nu, 5.0 / 3.0) * std::pow(ak, -2.0 / 3.0) * gdw;
    d.beta = std::cbrt(l.nu) * std::pow(ak, 2.0 / 3.0) * w2;
    d.tau = std::pow(ak, 2.0 - l.delta) * gp;
    d.tau_alpha = std::pow(l.nu, 2.0 / 3.0) * std::pow(ak, 4.0 / 3.0 - l.delta) * gdp;
    return d;
}

/// Norm of J_k in the quadrature inner product (the interior weights are uniform).
inline real sio_norm(const SioOperator& op) { return operator_norm(op.matrix); }

/// E_k / Q_k in [lower, upper] with Q_k = ||w||^2 + c_alpha nu^{2/3}|k|^{-2/3} ||w'||^2.
/// From |c_tau <f, J f>| <= c_tau ||J|| ||f||^2 and Young's inequality on the
/// cross term, nu^{1/3}|k|^{-1/3} ||w|| ||w'|| <= Q_k / (2 sqrt(c_alpha)).
struct CoercivityBounds {
    real lower;
    real upper;
};

inline CoercivityBounds coercivity_bounds(const EnergyLedger& l, real norm_j)
{
    const real cross = l.c_beta == 0.0 ? 0.0 : l.c_beta / (2.0 * std::sqrt(l.c_alpha));
    return {1.0 - l.c_tau * norm_j - cross, 1.0 + l.c_tau * norm_j + cross};
}

/// Energy and dissipation of one nonzero mode at one instant.
struct ModeEnergy {
    int k = 1;
    real t = 0.0;
    real nu = 0.0;
    real E = 0.0;
    Dissipation D;
};

inline ModeEnergy mode_energy(std::span<const cplx> omega_k, int k, real t, const EnergyLedger& l,
                              const SioBank& bank)
{
    return ModeEnergy{k, t, l.nu, energy_k(omega_k, k, l, bank), dissipation_k(omega_k, k, l)};
}

struct EnergySnapshot {
    real t = 0.0;
    std::vector<ModeEnergy> modes;
    real E0 = 0.0, Eneq = 0.0, E = 0.0;
    real D0 = 0.0, Dneq = 0.0, DE = 0.0, D = 0.0;
};

/// Time-weighted totals:
///   E0 = e^{2 d nu t}(||w0||^2 + c_alpha nu^{2/3} ||w0'||^2),  Eneq = sum e^{2 d nu^{1/3} t}|k|^{2m} E_k,
///   D0 = e^{2 d nu t} nu (||w0'||^2 + c_alpha nu^{2/3} ||w0''||^2),  Dneq = sum e^{...}|k|^{2m} D_k,
///   DE = nu E0 + nu^{1/3} sum e^{...}|k|^{2m+2/3} E_k,  D = D0 + Dneq + DE, with d = delta_star.
inline EnergySnapshot aggregate(std::vector<ModeEnergy> modes, std::span<const cplx> omega0, const EnergyLedger& l,
                                real t)
{
    EnergySnapshot s;
    s.t = t;
    const real w0 = std::exp(2.0 * l.delta_star * l.nu * t);
    const real wn = std::exp(2.0 * l.delta_star * std::cbrt(l.nu) * t);
    const real nu23 = std::pow(l.nu, 2.0 / 3.0);
    const ComplexVector z(omega0.begin(), omega0.end());
    s.E0 = w0 * (weighted_norm2(z, 0) + l.c_alpha * nu23 * weighted_norm2(z, 1));
    s.D0 = w0 * l.nu * (weighted_norm2(z, 1) + l.c_alpha * nu23 * weighted_norm2(z, 2));
    real ek23 = 0.0;
    for (const auto& me : modes) {
        if (me.k == 0) throw DomainError("aggregate: per-mode records must have k != 0");
        if (me.t != t) throw DomainError("aggregate: per-mode record time differs from the snapshot time");
        if (me.nu != l.nu) throw DomainError("aggregate: per-mode record viscosity differs from the ledger");
        const real ak = std::abs(static_cast<real>(me.k));
        const real wk = wn * std::pow(ak, 2.0 * l.m);
        s.Eneq += wk * me.E;
        s.Dneq += wk * me.D.combined(l);
        ek23 += wk * std::pow(ak, 2.0 / 3.0) * me.E;
    }
    s.E = s.E0 + s.Eneq;
    s.DE = l.nu * s.E0 + std::cbrt(l.nu) * ek23;
    s.D = s.D0 + s.Dneq + s.DE;
    s.modes = std::move(modes);
    return s;
}

/// Snapshot of a full field: every k != 0 from the bank, k = 0 as the mean.
inline EnergySnapshot snapshot(const SpectralField& omega, real t, const EnergyLedger& l, const SioBank& bank)
{
    std::vector<ModeEnergy> modes;
    for (int k = -omega.kmax(); k <= omega.kmax(); ++k)
        if (k != 0) modes.push_back(mode_energy(omega.mode(k), k, t, l, bank));
    return aggregate(std::move(modes), omega.mode(0), l, t);
}

}  // namespace hypocouette
