#include "hypocouette/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace hypocouette;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::optional<long long> seed;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("-c,--config", c.config_path, "configuration file (key = value with [tables])");
    app->add_option("--set", c.overrides, "override a key, e.g. --set physics.nu=1e-5")->expected(1, -1);
    app->add_option("-o,--output-dir", c.output_dir, "output directory (overrides output.dir)");
    app->add_option("--seed", c.seed, "seed (overrides run.seed)");
    app->add_flag("-q,--quiet", c.quiet, "only report errors");
}

RunConfig load(const Common& c, const std::vector<std::string>& forced = {})
{
    ConfigDocument doc = c.config_path.empty() ? ConfigDocument{} : parse_config_file(c.config_path);
    for (const auto& s : forced) apply_override(doc, s);
    for (const auto& s : c.overrides) apply_override(doc, s);
    if (!c.output_dir.empty()) doc["output.dir"] = c.output_dir;
    if (c.seed) doc["run.seed"] = static_cast<real>(*c.seed);
    return make_config(doc);
}

void report_warnings(const RunConfig& cfg, bool quiet)
{
    if (quiet) return;
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

void summarize(const RunRecord& r, bool quiet)
{
    if (quiet) return;
    std::cout << "status: " << to_string(r.status);
    if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
    std::cout << "\nrecord: " << (std::filesystem::path(r.output_dir) / "record.json").string() << "\n";
    for (const auto& [name, f] : r.rates) std::printf("rate[%s] = %.6g (r2 %.4f, %d samples)\n", name.c_str(), f.rate, f.r2, f.samples);
    if (r.budget_violation) std::cout << "budget: violations detected (see budget.csv / bootstrap.csv)\n";
}

int cmd_fit_rates(const std::string& path, const std::string& column, std::optional<int> k, real window)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> head;
    {
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) head.push_back(cell);
    }
    auto index_of = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < head.size(); ++i)
            if (head[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int ti = index_of("t"), vi = index_of(column), ki = index_of("k");
    if (ti < 0 || vi < 0) throw std::runtime_error("columns 't' and '" + column + "' are required");
    if (k && ki < 0) throw std::runtime_error("--k needs a 'k' column");
    std::map<int, std::pair<std::vector<real>, std::vector<real>>> series;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (static_cast<int>(cells.size()) < static_cast<int>(head.size())) continue;
        const int kk = ki >= 0 ? std::stoi(cells[ki]) : 0;
        if (k && kk != *k) continue;
        series[kk].first.push_back(std::stod(cells[ti]));
        series[kk].second.push_back(std::stod(cells[vi]));
    }
    std::cout << "k,rate,r2,samples\n";
    for (const auto& [kk, s] : series) {
        const auto f = fit_decay_rate(s.first, s.second, window);
        std::printf("%d,%.12g,%.8f,%d\n", kk, f.rate, f.r2, f.samples);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hypocoercivity experiments for 2D Navier-Stokes shear flows in a channel"};
    app.require_subcommand(1);

    Common sim, audit, energy, snu, seps;
    auto* c_sim = app.add_subcommand("simulate", "run the mode selected by run.mode");
    add_common(c_sim, sim);
    auto* c_audit = app.add_subcommand("operator-audit", "norms, symmetry and coercivity of the singular integral operators");
    add_common(c_audit, audit);
    auto* c_energy = app.add_subcommand("energy-audit", "ledger inequalities and E_k against its coercivity bounds");
    add_common(c_energy, energy);
    auto* c_snu = app.add_subcommand("sweep-nu", "fitted decay rate against viscosity");
    add_common(c_snu, snu);
    auto* c_seps = app.add_subcommand("sweep-epsilon", "classify nonlinear runs with eps = c sqrt(nu)");
    add_common(c_seps, seps);

    std::string fit_path, fit_column = "Eneq";
    std::optional<int> fit_k;
    real fit_window = 2.0 / 3.0;
    auto* c_fit = app.add_subcommand("fit-rates", "fit exponential decay to a CSV column");
    c_fit->add_option("csv", fit_path, "input CSV with a 't' column")->required();
    c_fit->add_option("--column", fit_column, "column to fit (default Eneq)");
    c_fit->add_option("--k", fit_k, "only rows with this k");
    c_fit->add_option("--window", fit_window, "fraction of samples from the end");

    auto* c_schema = app.add_subcommand("show-config-schema", "print every configuration key");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (c_schema->parsed()) {
            std::cout << schema_text();
            return kExitOk;
        }
        if (c_fit->parsed()) return cmd_fit_rates(fit_path, fit_column, fit_k, fit_window);

        if (c_sim->parsed()) {
            const RunConfig cfg = load(sim);
            report_warnings(cfg, sim.quiet);
            const auto rec = run(cfg);
            summarize(rec, sim.quiet);
            return rec.exit_code(cfg.strict);
        }
        if (c_audit->parsed()) {
            const RunConfig cfg = load(audit, {"run.mode=operator-audit"});
            report_warnings(cfg, audit.quiet);
            const auto rec = run(cfg);
            if (!audit.quiet) std::cout << rec.json["audit"].dump(2) << "\n";
            return rec.exit_code(cfg.strict);
        }
        if (c_energy->parsed()) {
            const RunConfig cfg = load(energy);
            report_warnings(cfg, energy.quiet);
            std::filesystem::create_directories(cfg.output_dir);
            const auto rows = energy_audit(cfg);
            const std::filesystem::path dir(cfg.output_dir);
            {
                detail::CsvWriter w(dir / "energy_audit.csv", {"k", "E", "Q", "lower", "upper", "norm_J", "within"});
                for (const auto& r : rows) w.row(r.k, r.E, r.Q, r.lower, r.upper, r.norm_J, r.within);
            }
            detail::CsvWriter l(dir / "ledger_audit.csv", {"inequality", "lhs", "rhs", "holds"});
            bool ok = true;
            for (const auto& chk : cfg.ledger.audit()) {
                l.row(chk.name, chk.lhs, chk.rhs, chk.holds);
                ok = ok && chk.holds;
                if (!energy.quiet) std::printf("%-40s %s\n", chk.name.c_str(), chk.holds ? "holds" : "FAILS");
            }
            bool within = true;
            for (const auto& r : rows) within = within && r.within;
            if (!energy.quiet) std::printf("E_k within coercivity bounds for every k: %s\n", within ? "yes" : "no");
            return cfg.strict && !(ok && within) ? kExitBudget : kExitOk;
        }
        if (c_snu->parsed()) {
            const RunConfig cfg = load(snu);
            report_warnings(cfg, snu.quiet);
            const auto s = sweep_nu(cfg, cfg.sweep_nu);
            if (!snu.quiet) {
                for (const auto& r : s.rows) std::printf("nu = %.3g  rate = %.6g  %s\n", r.parameter, r.rate, to_string(r.record.status));
                if (s.slope)
                    std::printf("slope = %.4f  [%.4f, %.4f]\n", s.slope->slope, s.slope->lower, s.slope->upper);
                else
                    std::cout << "slope: " << s.note << "\n";
                if (!s.meets_requirements) std::cout << "note: fewer than 3 viscosities or under 2 decades\n";
            }
            bool diverged = false, violation = false;
            for (const auto& r : s.rows) {
                diverged = diverged || r.record.status == RunStatus::Diverged;
                violation = violation || r.record.budget_violation;
            }
            if (diverged) return kExitDiverged;
            return cfg.strict && violation ? kExitBudget : kExitOk;
        }
        if (c_seps->parsed()) {
            const RunConfig cfg = load(seps);
            report_warnings(cfg, seps.quiet);
            const auto s = sweep_epsilon(cfg, cfg.sweep_epsilon);
            if (!seps.quiet) {
                for (const auto& r : s.rows) std::printf("c = %-10g %s\n", r.parameter, to_string(r.record.outcome));
                if (s.transition)
                    std::printf("transition band: c in (%g, %g]\n", s.transition->first, s.transition->second);
                if (!s.note.empty()) std::cout << "note: " << s.note << "\n";
            }
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        for (const auto& m : e.errors()) std::cerr << "config error: " << m << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
