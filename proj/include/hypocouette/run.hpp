#pragma once

#include "hypocouette/budget.hpp"
#include "hypocouette/checkpoint.hpp"
#include "hypocouette/initial_data.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <thread>

namespace hypocouette {

enum class RunStatus { Ok, Diverged };

inline const char* to_string(RunStatus s) { return s == RunStatus::Ok ? "ok" : "diverged"; }

/// Classification of a perturbed run.
enum class Outcome { Damped, Departed, Diverged };

inline const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::Damped: return "damped";
    case Outcome::Departed: return "departed";
    case Outcome::Diverged: return "diverged";
    }
    return "?";
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitBudget = 4;

/// What a run wrote and found. `json` is the on-disk record.
struct RunRecord {
    RunStatus status = RunStatus::Ok;
    std::string reason;
    std::string output_dir;
    std::map<std::string, std::string> files;  // role -> path relative to output_dir
    std::vector<std::string> checkpoints;      // relative paths
    std::map<std::string, RateFit> rates;
    std::vector<std::string> fit_notes;  // rates that could not be fitted
    bool budget_violation = false;
    Outcome outcome = Outcome::Damped;
    nlohmann::json json;

    // In-memory series used by sweeps.
    std::vector<real> t;
    std::vector<real> Eneq;
    std::vector<real> E;

    int exit_code(bool strict) const
    {
        if (status == RunStatus::Diverged) return kExitDiverged;
        if (strict && budget_violation) return kExitBudget;
        return kExitOk;
    }
};

// ---------------------------------------------------------------------------
// Helpers

namespace detail {

inline std::string fmt(real v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns) : out_(path, std::ios::trunc)
    {
        if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    template <class... Ts>
    void row(const Ts&... v)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(v), first = false), ...);
        out_ << "\n";
    }

private:
    static std::string cell(real v) { return fmt(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    std::ofstream out_;
};

/// Run fn(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn)
{
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(m);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline nlohmann::json config_json(const RunConfig& c)
{
    nlohmann::json j = nlohmann::json::object();
    std::istringstream in(canonical_text(c));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        const std::string key = line.substr(0, eq);
        const auto v = parse_value(line.substr(eq + 3));
        if (!v) continue;
        std::visit([&](const auto& x) { j[key] = x; }, *v);
    }
    return j;
}

/// Hash of everything that determines the numbers (not where they are written).
inline std::string config_hash(const RunConfig& c)
{
    RunConfig h = c;
    h.output_dir = "-";
    h.workers = 0;
    return content_hash(canonical_text(h));
}

inline nlohmann::json rate_json(const RateFit& f)
{
    return {{"rate", f.rate}, {"r2", f.r2}, {"intercept", f.intercept}, {"samples", f.samples}};
}

}  // namespace detail

/// Initial shear perturbation W_in from the configuration.
inline RealVector make_shear_coeffs(const RunConfig& c)
{
    const real amp = c.shear_amplitude * (c.shear_relative_to_delta0 ? c.ledger.delta0 : 1.0);
    if (c.shear_preset == "zero") return shear_preset_zero(c.n_y);
    if (c.shear_preset == "single_mode") return shear_preset_single_mode(c.n_y, c.shear_mode, amp);
    if (c.shear_preset == "random_h4") return shear_preset_random_h4(c.n_y, c.seed, amp);
    return shear_from_file(c.shear_path, c.n_y);
}

inline SpectralField make_perturbation(const RunConfig& c, const std::shared_ptr<const ChannelGrid>& g)
{
    if (c.perturbation_preset == "zero" || c.epsilon == 0.0) return SpectralField(g, Basis::Sine);
    if (c.perturbation_preset == "random")
        return random_perturbation(g, c.epsilon, c.ledger.m, c.nu(), c.seed, c.kband, c.yband, c.include_mean);
    SpectralField w(g, Basis::Sine);
    const int k = std::clamp(std::abs(c.k), 1, g->kmax());
    w.mode(k)[static_cast<std::size_t>(c.perturbation_mode - 1)] = 1.0;
    w.enforce_reality();
    w *= c.epsilon / perturbation_norm(w, c.ledger.m, c.nu());
    return w;
}

/// Rate fit honouring the transient cut and the window fraction. On failure
/// (too few samples, a zero in the window) the reason goes to `notes`.
inline std::optional<RateFit> fit_rate(const RunConfig& c, const std::vector<real>& t, const std::vector<real>& v,
                                       const std::string& name, std::vector<std::string>& notes)
{
    const real t_min = c.fit_transient_scale > 0.0 ? 2.0 * c.fit_transient_scale / std::cbrt(c.nu()) : -INFINITY;
    std::vector<real> tt, vv;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_min) {
            tt.push_back(t[i]);
            vv.push_back(v[i]);
        }
    try {
        return fit_decay_rate(tt, vv, c.fit_window);
    } catch (const DomainError& e) {
        notes.push_back(name + ": " + e.what());
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Linear runs

struct ModeSeries {
    int k = 1;
    std::vector<real> t, E, norm;
    std::vector<Dissipation> D;
    std::optional<LinearModeState> final_state;
    bool diverged = false;
    std::string reason;
};

struct Stepping {
    real dt;
    int steps;
};

inline Stepping linear_stepping(const RunConfig& c, real kmax_abs, real umax)
{
    const real T = c.final_time();
    if (c.dt > 0.0) return {c.dt, std::max(1, static_cast<int>(std::lround(T / c.dt)))};
    // Without transport only diffusion remains, which the integrator treats exactly.
    const real dt_cfl = c.transport && umax > 0.0 ? c.cfl * pi / (kmax_abs * umax) : 1.0;
    const int n = std::max(1, static_cast<int>(std::ceil(T / dt_cfl - 1e-9)));
    return {T / n, n};
}

inline ModeSeries run_mode_series(const RunConfig& c, LinearModeState s, const SioBank& bank, const Stepping& st,
                                  const std::function<void(const LinearModeState&, int)>& checkpoint = {})
{
    ModeSeries out;
    out.k = s.k;
    const real E0 = energy_k(s.omega, s.k, c.ledger, bank);
    auto record = [&](const LinearModeState& x) {
        out.t.push_back(x.t);
        out.E.push_back(energy_k(x.omega, x.k, c.ledger, bank));
        out.D.push_back(dissipation_k(x.omega, x.k, c.ledger));
        real n2 = 0.0;
        for (const auto& v : x.omega) n2 += std::norm(v);
        out.norm.push_back(std::sqrt(n2));
    };
    record(s);
    for (int i = 1; i <= st.steps; ++i) {
        try {
            s = step_linear(s, st.dt, LinearOptions{c.transport, c.transport});
        } catch (const CflViolation& ex) {
            out.diverged = true;
            out.reason = ex.what();
            break;
        }
        if (c.checkpoint_every > 0 && checkpoint && i % c.checkpoint_every == 0) checkpoint(s, i);
        if (i % c.sample_interval != 0) continue;
        record(s);
        const real e = out.E.back();
        if (!std::isfinite(e) || (E0 > 0.0 && e > c.divergence_factor * E0)) {
            out.diverged = true;
            out.reason = std::isfinite(e) ? "energy exceeded the divergence factor" : "non-finite energy";
            break;
        }
    }
    out.final_state = std::move(s);
    return out;
}

// ---------------------------------------------------------------------------

namespace detail {

inline void write_budget_rows(CsvWriter& w, const LinearBudgetReport& r)
{
    for (const auto& b : r.samples)
        w.row(b.t, r.k, b.E, b.D, b.dEdt, b.bound, b.defect, b.tolerance, b.ok, b.endpoint);
}

inline nlohmann::json budget_json(const LinearBudgetReport& r)
{
    return {{"k", r.k},
            {"violations", r.violations},
            {"flagged_violations", r.flagged_violations},
            {"fraction_ok", r.fraction_ok},
            {"max_relative_defect", std::isfinite(r.max_relative_defect) ? r.max_relative_defect : 0.0},
            {"empirical_delta_star", std::isfinite(r.empirical_delta_star) ? r.empirical_delta_star : -1.0},
            {"damping_integral", r.damping_integral.empty() ? 0.0 : r.damping_integral.back()},
            {"damping_bound", std::isfinite(r.damping_bound) ? r.damping_bound : -1.0},
            {"damping_within_bound", r.damping_within_bound},
            {"integrated_ok", r.integrated_ok},
            {"integrated_best_constant",
             std::isfinite(r.integrated_best_constant) ? r.integrated_best_constant : -1.0},
            {"passed", r.passed()}};
}

inline std::vector<std::string> energy_columns() { return {"t", "E0", "Eneq", "E", "D0", "Dneq", "DE", "D"}; }
inline std::vector<std::string> per_k_columns()
{
    return {"t", "k", "Ek", "Dk_gamma", "Dk_alpha", "Dk_beta", "Dk_tau", "Dk_taualpha"};
}

inline void write_snapshot(CsvWriter& w, const EnergySnapshot& s) { w.row(s.t, s.E0, s.Eneq, s.E, s.D0, s.Dneq, s.DE, s.D); }

inline void write_modes(CsvWriter& w, const EnergySnapshot& s)
{
    for (const auto& m : s.modes) w.row(s.t, m.k, m.E, m.D.gamma, m.D.alpha, m.D.beta, m.D.tau, m.D.tau_alpha);
}

inline void finish_record(RunRecord& rec, const RunConfig& c, std::chrono::steady_clock::time_point start)
{
    auto& j = rec.json;
    j["status"] = to_string(rec.status);
    if (!rec.reason.empty()) j["reason"] = rec.reason;
    j["mode"] = to_string(c.mode);
    j["config"] = config_json(c);
    j["config_hash"] = config_hash(c);
    j["files"] = rec.files;
    j["checkpoints"] = rec.checkpoints;
    for (const auto& [name, f] : rec.rates) j["rates"][name] = rate_json(f);
    if (!rec.fit_notes.empty()) j["fit_notes"] = rec.fit_notes;
    j["budget_violation"] = rec.budget_violation;
    j["warnings"] = c.warnings;
    j["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.files["record"] = "record.json";
    j["files"] = rec.files;
    std::ofstream out(std::filesystem::path(rec.output_dir) / "record.json", std::ios::trunc);
    out << j.dump(2) << "\n";
}

/// Linear evolution of every 1 <= k <= K; the mean decays by the heat semigroup.
struct AllModesResult {
    std::vector<ModeSeries> modes;
    std::vector<EnergySnapshot> snaps;
    bool diverged = false;
    std::string reason;
};

inline AllModesResult run_all_modes(const RunConfig& c, const SpectralField& w0, const ShearProfile& shear,
                                    const Stepping& st, const std::function<void(const ModeSeries&)>& per_mode = {})
{
    const auto& g = w0.grid();
    AllModesResult res;
    res.modes.resize(static_cast<std::size_t>(g.kmax()));
    parallel_for(g.kmax(), c.workers, [&](int i) {
        const int k = i + 1;
        const SioBank bank(g, {k}, c.ledger.delta);
        res.modes[i] = run_mode_series(c, make_linear_state(k, w0.mode(k), shear), bank, st);
        if (per_mode) per_mode(res.modes[i]);
    });
    std::size_t n = res.modes.front().t.size();
    for (const auto& m : res.modes) {
        n = std::min(n, m.t.size());
        if (m.diverged) {
            res.diverged = true;
            res.reason = "mode k = " + std::to_string(m.k) + ": " + m.reason;
        }
    }
    const auto mean0 = w0.mode(0);
    for (std::size_t i = 0; i < n; ++i) {
        const real t = res.modes.front().t[i];
        std::vector<ModeEnergy> me;
        for (const auto& m : res.modes) {
            me.push_back({m.k, t, c.nu(), m.E[i], m.D[i]});
            me.push_back({-m.k, t, c.nu(), m.E[i], m.D[i]});
        }
        ComplexVector mean(mean0.size());
        for (std::size_t n2 = 0; n2 < mean.size(); ++n2) {
            const real lam = std::pow(ChannelGrid::mode_wavenumber(static_cast<int>(n2) + 1), 2);
            mean[n2] = mean0[n2] * std::exp(-c.nu() * lam * (t - res.modes.front().t[0]));
        }
        res.snaps.push_back(aggregate(std::move(me), mean, c.ledger, t));
    }
    return res;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Modes

inline RunRecord run_linear_single(const RunConfig& c)
{
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.output_dir = c.output_dir;
    std::filesystem::create_directories(c.output_dir);
    const std::filesystem::path dir(c.output_dir);
    const ChannelGrid g(std::max(c.n_x, std::abs(c.k)), c.n_y, c.dealias);
    const ShearProfile shear(g, make_shear_coeffs(c), c.nu());
    ComplexVector w0 = random_mode(c.n_y, c.seed, c.yband);
    if (c.perturbation_preset == "single_mode") {
        std::fill(w0.begin(), w0.end(), cplx{0.0, 0.0});
        w0[static_cast<std::size_t>(c.perturbation_mode - 1)] = 1.0;
    } else if (c.perturbation_preset == "zero") {
        std::fill(w0.begin(), w0.end(), cplx{0.0, 0.0});
    }
    for (auto& v : w0) v *= c.epsilon;
    const SioBank bank(g, {c.k}, c.ledger.delta);
    const Stepping st = linear_stepping(c, std::abs(c.k), shear.max_abs_u());
    const ModeSeries ms = run_mode_series(c, make_linear_state(c.k, w0, shear), bank, st,
                                          [&](const LinearModeState& s, int step) {
                                              char name[40];
                                              std::snprintf(name, sizeof name, "ckpt_%08d.ckpt", step);
                                              save_checkpoint((dir / name).string(), s, c.dealias);
                                              rec.checkpoints.emplace_back(name);
                                          });
    {
        detail::CsvWriter e(dir / "energy.csv", detail::energy_columns());
        detail::CsvWriter pk(dir / "energy_per_k.csv", detail::per_k_columns());
        detail::CsvWriter nm(dir / "norms.csv", {"t", "k", "norm"});
        for (std::size_t i = 0; i < ms.t.size(); ++i) {
            const auto s = aggregate({ModeEnergy{c.k, ms.t[i], c.nu(), ms.E[i], ms.D[i]}}, ComplexVector(c.n_y, 0.0),
                                     c.ledger, ms.t[i]);
            detail::write_snapshot(e, s);
            detail::write_modes(pk, s);
            nm.row(ms.t[i], c.k, ms.norm[i]);
            rec.t.push_back(s.t);
            rec.E.push_back(s.E);
            rec.Eneq.push_back(s.Eneq);
        }
    }
    rec.files["energy_csv"] = "energy.csv";
    rec.files["per_k_csv"] = "energy_per_k.csv";
    rec.files["norms_csv"] = "norms.csv";
    save_checkpoint((dir / "final.ckpt").string(), *ms.final_state, c.dealias);
    rec.checkpoints.emplace_back("final.ckpt");
    rec.json["dt"] = st.dt;
    rec.json["steps"] = st.steps;
    if (ms.diverged) {
        rec.status = RunStatus::Diverged;
        rec.reason = ms.reason;
    } else if (const auto f = fit_rate(c, ms.t, ms.norm, "norm", rec.fit_notes)) {
        rec.rates["norm"] = *f;
    }
    if (ms.t.size() >= 3) {
        const auto r = verify_linear_budget(LinearEnergySeries{c.k, ms.t, ms.E, ms.D}, c.ledger);
        detail::CsvWriter b(dir / "budget.csv",
                            {"t", "k", "E", "D", "dEdt", "bound", "defect", "tolerance", "ok", "endpoint"});
        detail::write_budget_rows(b, r);
        rec.files["budget_csv"] = "budget.csv";
        rec.json["budget"] = nlohmann::json::array({detail::budget_json(r)});
        rec.budget_violation = r.violations > 0;
    }
    detail::finish_record(rec, c, start);
    return rec;
}

inline RunRecord run_linear_all(const RunConfig& c)
{
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.output_dir = c.output_dir;
    std::filesystem::create_directories(c.output_dir);
    const std::filesystem::path dir(c.output_dir);
    auto g = std::make_shared<const ChannelGrid>(c.n_x, c.n_y, c.dealias);
    const ShearProfile shear(*g, make_shear_coeffs(c), c.nu());
    const SpectralField w0 = make_perturbation(c, g);
    const Stepping st = linear_stepping(c, g->kmax(), shear.max_abs_u());
    auto res = detail::run_all_modes(c, w0, shear, st);
    {
        detail::CsvWriter e(dir / "energy.csv", detail::energy_columns());
        std::unique_ptr<detail::CsvWriter> pk;
        if (c.per_k) pk = std::make_unique<detail::CsvWriter>(dir / "energy_per_k.csv", detail::per_k_columns());
        for (const auto& s : res.snaps) {
            detail::write_snapshot(e, s);
            if (pk) detail::write_modes(*pk, s);
            rec.t.push_back(s.t);
            rec.E.push_back(s.E);
            rec.Eneq.push_back(s.Eneq);
        }
    }
    rec.files["energy_csv"] = "energy.csv";
    if (c.per_k) rec.files["per_k_csv"] = "energy_per_k.csv";
    detail::CsvWriter b(dir / "budget.csv", {"t", "k", "E", "D", "dEdt", "bound", "defect", "tolerance", "ok", "endpoint"});
    rec.json["budget"] = nlohmann::json::array();
    for (const auto& m : res.modes) {
        char name[40];
        std::snprintf(name, sizeof name, "final_k%03d.ckpt", m.k);
        save_checkpoint((dir / name).string(), *m.final_state, c.dealias);
        rec.checkpoints.emplace_back(name);
        if (m.t.size() < 3 || m.E.front() == 0.0) continue;
        const auto r = verify_linear_budget(LinearEnergySeries{m.k, m.t, m.E, m.D}, c.ledger);
        detail::write_budget_rows(b, r);
        rec.json["budget"].push_back(detail::budget_json(r));
        rec.budget_violation = rec.budget_violation || r.violations > 0;
    }
    rec.files["budget_csv"] = "budget.csv";
    rec.json["dt"] = st.dt;
    rec.json["steps"] = st.steps;
    if (res.diverged) {
        rec.status = RunStatus::Diverged;
        rec.reason = res.reason;
    } else if (const auto f = fit_rate(c, rec.t, rec.Eneq, "Eneq", rec.fit_notes)) {
        rec.rates["Eneq"] = *f;
    }
    detail::finish_record(rec, c, start);
    return rec;
}

inline RunRecord run_nonlinear(const RunConfig& c)
{
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.output_dir = c.output_dir;
    std::filesystem::create_directories(c.output_dir);
    const std::filesystem::path dir(c.output_dir);
    auto g = std::make_shared<const ChannelGrid>(c.n_x, c.n_y, c.dealias);
    const ShearProfile shear(*g, make_shear_coeffs(c), c.nu());
    const SpectralField w0 = make_perturbation(c, g);
    const SioBank bank = SioBank::all_modes(*g, c.ledger.delta);
    auto params = std::make_shared<const EnergyLedger>(c.ledger);
    NonlinearState s = make_nonlinear_state(w0, shear, params);

    const real T = c.final_time();
    Stepping st{c.dt, 0};
    if (c.dt > 0.0) {
        st.steps = std::max(1, static_cast<int>(std::lround(T / c.dt)));
    } else {
        const real dt_cfl = suggest_dt(s, c.cfl);
        st.steps = std::max(1, static_cast<int>(std::ceil(T / dt_cfl - 1e-9)));
        st.dt = T / st.steps;
    }

    std::vector<EnergySnapshot> snaps;
    detail::CsvWriter e(dir / "energy.csv", detail::energy_columns());
    std::unique_ptr<detail::CsvWriter> pk;
    if (c.per_k) pk = std::make_unique<detail::CsvWriter>(dir / "energy_per_k.csv", detail::per_k_columns());
    detail::CsvWriter nm(dir / "norms.csv", {"t", "norm_mean", "norm_neq"});
    auto record = [&](const NonlinearState& x) {
        snaps.push_back(snapshot(x.omega, x.t, c.ledger, bank));
        detail::write_snapshot(e, snaps.back());
        if (pk) detail::write_modes(*pk, snaps.back());
        real n0 = 0.0, nn = 0.0;
        for (int k = -g->kmax(); k <= g->kmax(); ++k)
            for (const auto& v : x.omega.mode(k)) (k == 0 ? n0 : nn) += std::norm(v);
        nm.row(x.t, std::sqrt(2.0 * pi * n0), std::sqrt(2.0 * pi * nn));
    };
    record(s);
    const real E0 = snaps.front().E;
    for (int i = 1; i <= st.steps; ++i) {
        try {
            s = step_nonlinear(s, st.dt);
        } catch (const CflViolation& ex) {
            rec.status = RunStatus::Diverged;
            rec.reason = ex.what();
            break;
        }
        if (c.checkpoint_every > 0 && i % c.checkpoint_every == 0) {
            char name[40];
            std::snprintf(name, sizeof name, "ckpt_%08d.ckpt", i);
            save_checkpoint((dir / name).string(), s);
            rec.checkpoints.emplace_back(name);
        }
        if (i % c.sample_interval != 0) continue;
        record(s);
        const real en = snaps.back().E;
        if (!std::isfinite(en) || (E0 > 0.0 && en > c.divergence_factor * E0)) {
            rec.status = RunStatus::Diverged;
            rec.reason = std::isfinite(en) ? "energy exceeded the divergence factor" : "non-finite energy";
            break;
        }
    }
    for (const auto& x : snaps) {
        rec.t.push_back(x.t);
        rec.E.push_back(x.E);
        rec.Eneq.push_back(x.Eneq);
    }
    rec.files["energy_csv"] = "energy.csv";
    rec.files["norms_csv"] = "norms.csv";
    if (c.per_k) rec.files["per_k_csv"] = "energy_per_k.csv";
    save_checkpoint((dir / "final.ckpt").string(), s);
    rec.checkpoints.emplace_back("final.ckpt");
    rec.json["dt"] = st.dt;
    rec.json["steps"] = st.steps;

    if (snaps.size() >= 3) {
        const auto r = verify_nonlinear_bootstrap(snaps, c.ledger);
        detail::CsvWriter b(dir / "bootstrap.csv", {"t", "E", "D", "dEdt", "lhs", "defect"});
        for (const auto& x : r.samples) b.row(x.t, x.E, x.D, x.dEdt, x.lhs, x.defect);
        rec.files["bootstrap_csv"] = "bootstrap.csv";
        rec.json["bootstrap"] = {{"C0", std::isfinite(r.C0) ? r.C0 : -1.0},
                                 {"smallness_holds", r.smallness_holds},
                                 {"integrated_ok", r.integrated_ok},
                                 {"monotone_ok", r.monotone_ok},
                                 {"sup_ratio", r.sup_ratio}};
        rec.budget_violation = !r.monotone_ok || (r.smallness_holds && !r.integrated_ok);
    }

    // Linear prediction from the same nonzero modes, sampled identically.
    const bool has_neq = !rec.Eneq.empty() && rec.Eneq.front() > 0.0;
    if (rec.status == RunStatus::Ok && has_neq) {
        RunConfig lc = c;
        lc.mode = RunMode::LinearAllK;
        const auto lin = detail::run_all_modes(lc, w0, shear, st);
        std::vector<real> lt, le;
        for (const auto& x : lin.snaps) {
            lt.push_back(x.t);
            le.push_back(x.Eneq);
        }
        const auto fn = fit_rate(c, rec.t, rec.Eneq, "Eneq", rec.fit_notes);
        const auto fl = fit_rate(c, lt, le, "Eneq_linear", rec.fit_notes);
        if (fn) rec.rates["Eneq"] = *fn;
        if (fl) rec.rates["Eneq_linear"] = *fl;
        // Without both fits the rate test is skipped and only growth and monotonicity classify.
        const real ratio = fn && fl ? fn->rate / fl->rate : 1.0;
        if (fn && fl) rec.json["rate_ratio"] = ratio;
        real sup = 0.0;
        for (std::size_t i = 1; i < rec.E.size(); ++i) sup = std::max(sup, rec.E[i] / rec.E.front());
        const bool monotone = sup <= 1.0;
        const std::size_t half = rec.Eneq.size() / 2;
        real late = 0.0;
        for (std::size_t i = half; i < rec.Eneq.size(); ++i) late = std::max(late, rec.Eneq[i] / rec.Eneq.front());
        rec.json["late_growth"] = late;
        if (late > c.departed_factor) rec.outcome = Outcome::Departed, rec.json["departed_because"] = "growth";
        else if (!(ratio >= 0.5 && ratio <= 2.0)) rec.outcome = Outcome::Departed, rec.json["departed_because"] = "rate";
        else if (!monotone) rec.outcome = Outcome::Departed, rec.json["departed_because"] = "non-monotone";
        else rec.outcome = Outcome::Damped;
    } else if (rec.status == RunStatus::Diverged) {
        rec.outcome = Outcome::Diverged;
    }
    rec.json["classification"] = to_string(rec.outcome);
    detail::finish_record(rec, c, start);
    return rec;
}

struct AuditRow {
    int k;
    real norm_J;
    real norm_H_over_k;
    real selfadj_residual;
    real coercivity_min_eig;
    int n_y;
};

inline std::vector<AuditRow> audit_operators(int ny, int k_max, real delta, real c_tau, int workers = 1)
{
    const ChannelGrid g(k_max, ny);
    std::vector<AuditRow> rows(static_cast<std::size_t>(k_max));
    detail::parallel_for(k_max, workers, [&](int i) {
        const int k = i + 1;
        const auto J = assemble_sio(k, g, delta);
        const auto H = assemble_commutator(k, g, delta);
        rows[i] = {k, operator_norm(J.matrix), operator_norm(H.matrix) / k, selfadjoint_residual(J.matrix),
                   coercivity_min_eigenvalue(J, c_tau), ny};
    });
    return rows;
}

inline RunRecord run_operator_audit(const RunConfig& c)
{
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.output_dir = c.output_dir;
    std::filesystem::create_directories(c.output_dir);
    const std::filesystem::path dir(c.output_dir);
    std::vector<int> resolutions{c.n_y};
    if (c.audit_resolution_check) resolutions.push_back(2 * c.n_y);
    detail::CsvWriter w(dir / "audit.csv", {"k", "norm_J", "norm_H_over_k", "selfadj_residual", "coercivity_min_eig", "n_y"});
    nlohmann::json summary = nlohmann::json::array();
    std::vector<real> maxJ, maxH;
    for (int ny : resolutions) {
        const auto rows = audit_operators(ny, c.audit_k_max, c.ledger.delta, c.ledger.c_tau, c.workers);
        real mj = 0, mh = 0, mnh = INFINITY, sr = 0, ce = INFINITY;
        for (const auto& r : rows) {
            w.row(r.k, r.norm_J, r.norm_H_over_k, r.selfadj_residual, r.coercivity_min_eig, r.n_y);
            mj = std::max(mj, r.norm_J);
            mh = std::max(mh, r.norm_H_over_k);
            mnh = std::min(mnh, r.norm_H_over_k);
            sr = std::max(sr, r.selfadj_residual);
            ce = std::min(ce, r.coercivity_min_eig);
        }
        maxJ.push_back(mj);
        maxH.push_back(mh);
        summary.push_back({{"n_y", ny},
                           {"max_norm_J", mj},
                           {"max_norm_H_over_k", mh},
                           {"spread_H_over_k", mh / mnh},
                           {"max_selfadj_residual", sr},
                           {"min_coercivity_eig", ce}});
    }
    rec.files["audit_csv"] = "audit.csv";
    rec.json["audit"] = summary;
    if (maxJ.size() == 2) {
        rec.json["norm_J_change"] = std::abs(maxJ[1] - maxJ[0]) / maxJ[0];
        rec.json["norm_H_change"] = std::abs(maxH[1] - maxH[0]) / maxH[0];
    }
    detail::finish_record(rec, c, start);
    return rec;
}

inline RunRecord run(const RunConfig& c)
{
    switch (c.mode) {
    case RunMode::LinearSingleK: return run_linear_single(c);
    case RunMode::LinearAllK: return run_linear_all(c);
    case RunMode::Nonlinear: return run_nonlinear(c);
    case RunMode::OperatorAudit: return run_operator_audit(c);
    }
    throw std::logic_error("run: unknown mode");
}

// ---------------------------------------------------------------------------
// Sweeps

struct SlopeFit {
    real slope = 0.0;
    real stderr_ = 0.0;
    real lower = 0.0;  // 95% band
    real upper = 0.0;
    int points = 0;
};

/// Least-squares slope of log y against log x with a Student-t band.
inline SlopeFit loglog_slope(const std::vector<real>& x, const std::vector<real>& y)
{
    const int n = static_cast<int>(x.size());
    if (n < 2) throw DomainError("loglog_slope: at least two points are required");
    real mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    real sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += std::pow(std::log(x[i]) - mx, 2);
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    }
    if (!(sxx > 0.0)) throw DomainError("loglog_slope: x values must differ");
    SlopeFit f;
    f.points = n;
    f.slope = sxy / sxx;
    if (n > 2) {
        real sse = 0;
        for (int i = 0; i < n; ++i) sse += std::pow(std::log(y[i]) - my - f.slope * (std::log(x[i]) - mx), 2);
        f.stderr_ = std::sqrt(sse / (n - 2) / sxx);
        static const real t975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
        const real q = n - 2 <= 10 ? t975[n - 3] : 1.96;
        f.lower = f.slope - q * f.stderr_;
        f.upper = f.slope + q * f.stderr_;
    } else {
        f.lower = f.upper = f.slope;
    }
    return f;
}

struct SweepRow {
    real parameter = 0.0;  // nu, or eps / sqrt(nu)
    RunRecord record;
    real rate = 0.0;
    real r2 = 0.0;
};

struct NuSweep {
    std::vector<SweepRow> rows;
    std::optional<SlopeFit> slope;
    bool meets_requirements = false;  // >= 3 values over >= 2 decades
    std::string note;
};

namespace detail {

inline std::string child_dir(const std::string& base, const char* prefix, std::size_t i)
{
    char name[32];
    std::snprintf(name, sizeof name, "%s_%02zu", prefix, i);
    return (std::filesystem::path(base) / name).string();
}

}  // namespace detail

/// Fitted decay rate of ||w_k|| (linear modes) or of Eneq for every viscosity.
inline NuSweep sweep_nu(const RunConfig& base, const std::vector<real>& nus)
{
    if (nus.empty()) throw ConfigError({"sweep.nu: at least one viscosity is required"});
    NuSweep out;
    out.rows.resize(nus.size());
    RunConfig b = base;
    if (b.mode == RunMode::OperatorAudit) b.mode = RunMode::LinearSingleK;
    detail::parallel_for(static_cast<int>(nus.size()), base.workers, [&](int i) {
        RunConfig c = b;
        c.workers = 1;
        c.ledger.nu = nus[i];
        c.output_dir = detail::child_dir(base.output_dir, "nu", static_cast<std::size_t>(i));
        if (c.perturbation_preset != "zero" && c.epsilon == 0.0) c.epsilon = 1.0;
        out.rows[i].parameter = nus[i];
        out.rows[i].record = run(c);
        const auto& rates = out.rows[i].record.rates;
        const char* key = c.mode == RunMode::LinearSingleK ? "norm" : "Eneq";
        if (rates.count(key)) {
            out.rows[i].rate = rates.at(key).rate;
            out.rows[i].r2 = rates.at(key).r2;
        }
    });
    const auto [lo, hi] = std::minmax_element(nus.begin(), nus.end());
    out.meets_requirements = nus.size() >= 3 && std::log10(*hi / *lo) >= 2.0 - 1e-12;
    bool any_diverged = false, all_positive = true;
    std::vector<real> x, y;
    for (const auto& r : out.rows) {
        any_diverged = any_diverged || r.record.status == RunStatus::Diverged;
        all_positive = all_positive && r.rate > 0.0;
        x.push_back(r.parameter);
        y.push_back(r.rate);
    }
    if (any_diverged) out.note = "a child run diverged; slope omitted";
    else if (nus.size() < 2) out.note = "single viscosity; no slope";
    else if (!all_positive) out.note = "non-positive fitted rate; slope omitted";
    else out.slope = loglog_slope(x, y);

    std::filesystem::create_directories(base.output_dir);
    detail::CsvWriter w(std::filesystem::path(base.output_dir) / "sweep_nu.csv", {"nu", "rate", "r2", "status", "dir"});
    for (const auto& r : out.rows) w.row(r.parameter, r.rate, r.r2, std::string(to_string(r.record.status)), r.record.output_dir);
    nlohmann::json j{{"meets_requirements", out.meets_requirements}, {"note", out.note}};
    if (out.slope)
        j["slope"] = {{"value", out.slope->slope}, {"stderr", out.slope->stderr_}, {"lower95", out.slope->lower},
                      {"upper95", out.slope->upper}, {"points", out.slope->points}};
    j["table"] = "sweep_nu.csv";
    std::ofstream(std::filesystem::path(base.output_dir) / "sweep_nu.json") << j.dump(2) << "\n";
    return out;
}

struct EpsilonSweep {
    std::vector<SweepRow> rows;
    std::optional<std::pair<real, real>> transition;  // (largest damped c, smallest non-damped c)
    std::string note;
};

/// Classify nonlinear runs with eps = c sqrt(nu).
inline EpsilonSweep sweep_epsilon(const RunConfig& base, const std::vector<real>& cs)
{
    if (cs.empty()) throw ConfigError({"sweep.epsilon: at least one value is required"});
    EpsilonSweep out;
    out.rows.resize(cs.size());
    detail::parallel_for(static_cast<int>(cs.size()), base.workers, [&](int i) {
        RunConfig c = base;
        c.mode = RunMode::Nonlinear;
        c.workers = 1;
        c.output_dir = detail::child_dir(base.output_dir, "eps", static_cast<std::size_t>(i));
        c.epsilon = cs[i] * std::sqrt(c.nu());
        if (cs[i] == 0.0) c.perturbation_preset = "zero";
        out.rows[i].parameter = cs[i];
        out.rows[i].record = run(c);
        if (out.rows[i].record.rates.count("Eneq")) out.rows[i].rate = out.rows[i].record.rates.at("Eneq").rate;
    });
    if (cs.size() < 3) out.note = "fewer than three values";
    std::vector<std::size_t> order(cs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cs[a] < cs[b]; });
    std::optional<real> last_damped, first_other;
    for (auto i : order) {
        if (out.rows[i].record.outcome == Outcome::Damped) last_damped = cs[i];
        else if (!first_other) first_other = cs[i];
    }
    if (last_damped && first_other) out.transition = std::pair{*last_damped, *first_other};

    std::filesystem::create_directories(base.output_dir);
    detail::CsvWriter w(std::filesystem::path(base.output_dir) / "sweep_epsilon.csv",
                        {"c", "epsilon", "classification", "rate", "status", "dir"});
    for (auto i : order) {
        const auto& r = out.rows[i];
        w.row(r.parameter, r.parameter * std::sqrt(base.nu()), std::string(to_string(r.record.outcome)), r.rate,
              std::string(to_string(r.record.status)), r.record.output_dir);
    }
    nlohmann::json j{{"note", out.note}, {"table", "sweep_epsilon.csv"}};
    if (out.transition) j["transition_band"] = {out.transition->first, out.transition->second};
    std::ofstream(std::filesystem::path(base.output_dir) / "sweep_epsilon.json") << j.dump(2) << "\n";
    return out;
}

// ---------------------------------------------------------------------------

/// Random data per k: E_k against the coercivity bounds, plus the ledger audit.
struct EnergyAuditRow {
    int k;
    real E, Q, lower, upper, norm_J;
    bool within;
};

inline std::vector<EnergyAuditRow> energy_audit(const RunConfig& c)
{
    const ChannelGrid g(c.n_x, c.n_y, c.dealias);
    std::vector<EnergyAuditRow> rows(static_cast<std::size_t>(c.n_x));
    detail::parallel_for(c.n_x, c.workers, [&](int i) {
        const int k = i + 1;
        const SioBank bank(g, {k}, c.ledger.delta);
        const auto w = random_mode(c.n_y, c.seed * 7919ULL + static_cast<std::uint64_t>(k), c.yband);
        const ModeVector mv{w, Basis::Sine};
        const real q = norm2(mv) + c.ledger.c_alpha * std::pow(c.nu(), 2.0 / 3.0) * std::pow(k, -2.0 / 3.0) *
                                       norm2(derivative_y(mv));
        const real nj = sio_norm(bank.at(k));
        const auto b = coercivity_bounds(c.ledger, nj);
        const real e = energy_k(w, k, c.ledger, bank);
        rows[i] = {k, e, q, b.lower * q, b.upper * q, nj, e >= b.lower * q && e <= b.upper * q};
    });
    return rows;
}

}  // namespace hypocouette
