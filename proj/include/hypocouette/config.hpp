#pragma once

#include "hypocouette/energy.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

namespace hypocouette {

/// One or more configuration problems, each message naming its key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors))
    {
    }
    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& e)
    {
        std::string s;
        for (const auto& m : e) s += (s.empty() ? "" : "\n") + m;
        return s;
    }
    std::vector<std::string> errors_;
};

// ---------------------------------------------------------------------------
// Structured text: `key = value` lines grouped under `[table]` headers.
// Values are numbers, booleans, double-quoted strings, or flat arrays.

using ConfigValue = std::variant<real, bool, std::string, std::vector<real>>;
using ConfigDocument = std::map<std::string, ConfigValue>;  // dotted keys

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

inline std::optional<real> parse_number(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    try {
        const real v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline bool valid_key(const std::string& k)
{
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
    return k.front() != '.' && k.back() != '.';
}

/// Strip a trailing comment that is not inside a string.
inline std::string strip_comment(const std::string& line)
{
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline std::optional<ConfigValue> parse_value(const std::string& raw)
{
    const std::string v = trim(raw);
    if (v == "true") return ConfigValue{true};
    if (v == "false") return ConfigValue{false};
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        const std::string body = v.substr(1, v.size() - 2);
        if (body.find('"') != std::string::npos) return std::nullopt;
        return ConfigValue{body};
    }
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') {
        std::vector<real> out;
        std::stringstream in(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(in, item, ',')) {
            const std::string t = trim(item);
            if (t.empty()) continue;
            auto x = parse_number(t);
            if (!x) return std::nullopt;
            out.push_back(*x);
        }
        return ConfigValue{out};
    }
    if (auto x = parse_number(v)) return ConfigValue{*x};
    return std::nullopt;
}

}  // namespace detail

inline ConfigDocument parse_config_text(const std::string& text)
{
    ConfigDocument doc;
    std::vector<std::string> errors;
    std::string table;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::trim(detail::strip_comment(line));
        if (s.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (s.front() == '[') {
            if (s.back() != ']') {
                errors.push_back(where + "unterminated table header");
                continue;
            }
            table = detail::trim(s.substr(1, s.size() - 2));
            if (!detail::valid_key(table)) errors.push_back(where + "invalid table name '" + table + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + "expected key = value");
            continue;
        }
        const std::string key = detail::trim(s.substr(0, eq));
        if (!detail::valid_key(key)) {
            errors.push_back(where + "invalid key '" + key + "'");
            continue;
        }
        const std::string full = table.empty() ? key : table + "." + key;
        auto value = detail::parse_value(s.substr(eq + 1));
        if (!value) {
            errors.push_back(where + "cannot parse value for '" + full + "'");
            continue;
        }
        if (doc.count(full)) errors.push_back(where + "duplicate key '" + full + "'");
        doc[full] = std::move(*value);
    }
    if (!errors.empty()) throw ConfigError(errors);
    return doc;
}

inline ConfigDocument parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// `key=value` from the command line; the value uses the file syntax, with
/// bare words taken as strings.
inline void apply_override(ConfigDocument& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError({"override '" + assignment + "' must have the form key=value"});
    const std::string key = detail::trim(assignment.substr(0, eq));
    const std::string raw = detail::trim(assignment.substr(eq + 1));
    if (!detail::valid_key(key)) throw ConfigError({"invalid override key '" + key + "'"});
    auto v = detail::parse_value(raw);
    doc[key] = v ? *v : ConfigValue{raw};
}

// ---------------------------------------------------------------------------

enum class RunMode { LinearSingleK, LinearAllK, Nonlinear, OperatorAudit };

inline const char* to_string(RunMode m)
{
    switch (m) {
    case RunMode::LinearSingleK: return "linear-single-k";
    case RunMode::LinearAllK: return "linear-all-k";
    case RunMode::Nonlinear: return "nonlinear";
    case RunMode::OperatorAudit: return "operator-audit";
    }
    return "?";
}

struct SchemaEntry {
    const char* key;
    const char* type;
    const char* default_value;
    const char* description;
};

inline const std::vector<SchemaEntry>& config_schema()
{
    static const std::vector<SchemaEntry> s = {
        {"run.mode", "string", "\"nonlinear\"", "linear-single-k | linear-all-k | nonlinear | operator-audit"},
        {"run.k", "integer", "1", "x-wavenumber of a linear-single-k run"},
        {"run.seed", "integer", "1", "seed of every random preset"},
        {"run.t_end", "real", "100", "final time (> 0)"},
        {"run.t_end_scaled", "bool", "false", "if true, t_end is in units of nu^(-1/3)"},
        {"run.dt", "real", "0", "fixed time step; 0 selects dt from cfl at t = 0"},
        {"run.cfl", "real", "0.5", "CFL number used when dt = 0 (limit 0.9)"},
        {"run.sample_interval", "integer", "1", "steps between recorded samples"},
        {"run.workers", "integer", "0", "worker threads for independent runs; 0 = hardware concurrency"},
        {"grid.n_x", "integer", "16", "largest retained |k|; modes -n_x..n_x"},
        {"grid.n_y", "integer", "128", "interior y nodes / sine modes"},
        {"grid.dealias", "real", "0.6666666666666666", "retained fraction of the padded grid"},
        {"physics.nu", "real", "1e-4", "viscosity (> 0)"},
        {"physics.transport", "bool", "true", "false drops shear transport (pure diffusion; linear modes only)"},
        {"ledger.K0", "real", "64", "K0; unset ledger constants follow from it"},
        {"ledger.c_alpha", "real", "K0^-9", ""},
        {"ledger.c_beta", "real", "K0^-6", ""},
        {"ledger.c_tau", "real", "1/(64 K0)", ""},
        {"ledger.delta_star", "real", "c_beta/16", "decay-rate constant in the time weights"},
        {"ledger.delta0", "real", "(64 K0)^-2 / 2", "shear smallness ||W_in||_{H^4} threshold"},
        {"ledger.delta1", "real", "0.1", "perturbation smallness eps <= delta1 sqrt(nu)"},
        {"ledger.m", "real", "0.75", "x-Sobolev index (warned outside (2/3, 1))"},
        {"ledger.delta", "real", "0", "damping exponent |k|^(-delta)"},
        {"shear.preset", "string", "\"zero\"", "zero | single_mode | random_h4 | file"},
        {"shear.amplitude", "real", "0", "H^4 norm (random_h4) or coefficient (single_mode)"},
        {"shear.relative_to_delta0", "bool", "false", "multiply the amplitude by delta0"},
        {"shear.mode", "integer", "1", "sine index of single_mode"},
        {"shear.path", "string", "\"\"", "nodal W_in values (one per line) for preset = file"},
        {"perturbation.preset", "string", "\"random\"", "random | single_mode | zero"},
        {"perturbation.epsilon", "real", "0", "absolute size eps (> 0 unless preset = zero)"},
        {"perturbation.epsilon_over_sqrt_nu", "real", "0", "alternative: eps = value * sqrt(nu)"},
        {"perturbation.kband", "integer", "4", "largest |k| carrying random data"},
        {"perturbation.yband", "integer", "8", "number of sine modes carrying random data"},
        {"perturbation.include_mean", "bool", "true", "random data on k = 0 as well"},
        {"perturbation.mode", "integer", "1", "sine index of single_mode"},
        {"audit.k_max", "integer", "64", "operator audit over k = 1..k_max"},
        {"audit.resolution_check", "bool", "true", "repeat the audit at 2 n_y"},
        {"fit.window", "real", "0.6666666666666666", "fraction of samples (from the end) used by rate fits"},
        {"fit.transient_scale", "real", "0", "also drop t < 2 nu^(-1/3) * scale before fitting"},
        {"output.dir", "string", "\"out\"", "output directory"},
        {"output.per_k", "bool", "false", "write the long per-k energy table"},
        {"output.checkpoint_every", "integer", "0", "steps between checkpoints; 0 = final state only"},
        {"limits.divergence_factor", "real", "1e6", "abort when E > factor * E(0) or on NaN"},
        {"limits.departed_factor", "real", "2", "growth of Eneq classifying a run as departed"},
        {"limits.strict", "bool", "false", "exit code 4 when a budget violation is detected"},
        {"sweep.nu", "array", "[]", "viscosities for sweep-nu"},
        {"sweep.epsilon", "array", "[]", "eps / sqrt(nu) values for sweep-epsilon"},
    };
    return s;
}

inline std::string schema_text()
{
    std::ostringstream o;
    o << "# key | type | default | description\n";
    for (const auto& e : config_schema())
        o << e.key << " | " << e.type << " | " << e.default_value << " | " << e.description << "\n";
    return o.str();
}

struct RunConfig {
    RunMode mode = RunMode::Nonlinear;
    int k = 1;
    std::uint64_t seed = 1;
    real t_end = 100.0;
    bool t_end_scaled = false;
    real dt = 0.0;
    real cfl = kDefaultCfl;
    int sample_interval = 1;
    int workers = 0;

    int n_x = 16;
    int n_y = 128;
    real dealias = 2.0 / 3.0;

    bool transport = true;

    EnergyLedger ledger = EnergyLedger::defaults(1e-4);

    std::string shear_preset = "zero";
    real shear_amplitude = 0.0;
    bool shear_relative_to_delta0 = false;
    int shear_mode = 1;
    std::string shear_path;

    std::string perturbation_preset = "random";
    real epsilon = 0.0;
    int kband = 4;
    int yband = 8;
    bool include_mean = true;
    int perturbation_mode = 1;

    int audit_k_max = 64;
    bool audit_resolution_check = true;

    real fit_window = 2.0 / 3.0;
    real fit_transient_scale = 0.0;

    std::string output_dir = "out";
    bool per_k = false;
    int checkpoint_every = 0;

    real divergence_factor = 1e6;
    real departed_factor = 2.0;
    bool strict = false;

    std::vector<real> sweep_nu;
    std::vector<real> sweep_epsilon;

    std::vector<std::string> warnings;

    real nu() const { return ledger.nu; }
    real final_time() const { return t_end_scaled ? t_end / std::cbrt(nu()) : t_end; }

    /// Every violated field; empty when the configuration can run.
    std::vector<std::string> validate() const
    {
        std::vector<std::string> e;
        if (!(nu() > 0.0)) e.emplace_back("physics.nu: must be > 0");
        if (!(t_end > 0.0)) e.emplace_back("run.t_end: must be > 0");
        if (dt < 0.0) e.emplace_back("run.dt: must be >= 0");
        if (!(cfl > 0.0 && cfl <= kCflLimit)) e.emplace_back("run.cfl: must lie in (0, 0.9]");
        if (sample_interval < 1) e.emplace_back("run.sample_interval: must be >= 1");
        if (workers < 0) e.emplace_back("run.workers: must be >= 0");
        if (n_x < 1) e.emplace_back("grid.n_x: must be >= 1");
        if (n_y < 8) e.emplace_back("grid.n_y: must be >= 8");
        if (!(dealias > 0.0 && dealias <= 1.0)) e.emplace_back("grid.dealias: must lie in (0, 1]");
        if (!transport && mode != RunMode::LinearSingleK && mode != RunMode::LinearAllK)
            e.emplace_back("physics.transport: false is only supported by linear modes");
        if (mode == RunMode::LinearSingleK && (k == 0 || std::abs(k) > n_x))
            e.emplace_back("run.k: must satisfy 1 <= |k| <= grid.n_x");
        for (const auto& m : ledger.validate())
            if (m.rfind("nu ", 0) != 0) e.push_back("ledger." + m);
        if (shear_preset != "zero" && shear_preset != "single_mode" && shear_preset != "random_h4" &&
            shear_preset != "file")
            e.emplace_back("shear.preset: unknown preset '" + shear_preset + "'");
        if (shear_preset == "file" && shear_path.empty()) e.emplace_back("shear.path: required for preset = file");
        if (shear_preset == "single_mode" && (shear_mode < 1 || shear_mode > n_y))
            e.emplace_back("shear.mode: must lie in 1..n_y");
        if (perturbation_preset != "random" && perturbation_preset != "single_mode" && perturbation_preset != "zero")
            e.emplace_back("perturbation.preset: unknown preset '" + perturbation_preset + "'");
        if (perturbation_preset != "zero" && mode != RunMode::OperatorAudit && !(epsilon > 0.0))
            e.emplace_back("perturbation.epsilon: must be > 0");
        if (kband < 0) e.emplace_back("perturbation.kband: must be >= 0");
        if (yband < 1) e.emplace_back("perturbation.yband: must be >= 1");
        if (perturbation_preset == "single_mode" && (perturbation_mode < 1 || perturbation_mode > n_y))
            e.emplace_back("perturbation.mode: must lie in 1..n_y");
        if (audit_k_max < 1) e.emplace_back("audit.k_max: must be >= 1");
        if (!(fit_window > 0.0 && fit_window <= 1.0)) e.emplace_back("fit.window: must lie in (0, 1]");
        if (fit_transient_scale < 0.0) e.emplace_back("fit.transient_scale: must be >= 0");
        if (output_dir.empty()) e.emplace_back("output.dir: must not be empty");
        if (checkpoint_every < 0) e.emplace_back("output.checkpoint_every: must be >= 0");
        if (!(divergence_factor > 1.0)) e.emplace_back("limits.divergence_factor: must be > 1");
        if (!(departed_factor > 1.0)) e.emplace_back("limits.departed_factor: must be > 1");
        for (real v : sweep_nu)
            if (!(v > 0.0)) e.emplace_back("sweep.nu: every value must be > 0");
        for (real v : sweep_epsilon)
            if (!(v >= 0.0)) e.emplace_back("sweep.epsilon: every value must be >= 0");
        return e;
    }
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const ConfigDocument& doc) : doc_(doc) {}

    template <class T>
    void get(const std::string& key, T& out)
    {
        used_.insert(key);
        auto it = doc_.find(key);
        if (it == doc_.end()) return;
        const ConfigValue& v = it->second;
        if constexpr (std::is_same_v<T, bool>) {
            if (auto p = std::get_if<bool>(&v)) out = *p;
            else errors_.push_back(key + ": expected true or false");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (auto p = std::get_if<std::string>(&v)) out = *p;
            else errors_.push_back(key + ": expected a string");
        } else if constexpr (std::is_same_v<T, std::vector<real>>) {
            if (auto p = std::get_if<std::vector<real>>(&v)) out = *p;
            else if (auto q = std::get_if<real>(&v)) out = {*q};
            else errors_.push_back(key + ": expected an array of numbers");
        } else if constexpr (std::is_integral_v<T>) {
            auto p = std::get_if<real>(&v);
            if (!p || *p != std::floor(*p) || std::abs(*p) > 9.0e15) errors_.push_back(key + ": expected an integer");
            else out = static_cast<T>(*p);
        } else {
            if (auto p = std::get_if<real>(&v)) out = *p;
            else errors_.push_back(key + ": expected a number");
        }
    }

    bool has(const std::string& key) const { return doc_.count(key) != 0; }

    std::vector<std::string> finish()
    {
        for (const auto& [k, v] : doc_) {
            bool known = false;
            for (const auto& e : config_schema()) known = known || k == e.key;
            if (!known) errors_.push_back(k + ": unknown key");
        }
        return errors_;
    }

private:
    const ConfigDocument& doc_;
    std::set<std::string> used_;
    std::vector<std::string> errors_;
};

}  // namespace detail

/// Build and validate a RunConfig; throws ConfigError listing every problem.
inline RunConfig make_config(const ConfigDocument& doc)
{
    RunConfig c;
    detail::ConfigReader r(doc);
    std::string mode = to_string(c.mode);
    r.get("run.mode", mode);
    std::vector<std::string> errors;
    if (mode == "linear-single-k") c.mode = RunMode::LinearSingleK;
    else if (mode == "linear-all-k") c.mode = RunMode::LinearAllK;
    else if (mode == "nonlinear") c.mode = RunMode::Nonlinear;
    else if (mode == "operator-audit") c.mode = RunMode::OperatorAudit;
    else errors.push_back("run.mode: unknown mode '" + mode + "'");
    r.get("run.k", c.k);
    r.get("run.seed", c.seed);
    r.get("run.t_end", c.t_end);
    r.get("run.t_end_scaled", c.t_end_scaled);
    r.get("run.dt", c.dt);
    r.get("run.cfl", c.cfl);
    r.get("run.sample_interval", c.sample_interval);
    r.get("run.workers", c.workers);
    r.get("grid.n_x", c.n_x);
    r.get("grid.n_y", c.n_y);
    r.get("grid.dealias", c.dealias);

    real nu = 1e-4, K0 = 64.0;
    r.get("physics.nu", nu);
    r.get("physics.transport", c.transport);
    r.get("ledger.K0", K0);
    c.ledger = EnergyLedger::defaults(nu, K0);
    r.get("ledger.c_alpha", c.ledger.c_alpha);
    r.get("ledger.c_beta", c.ledger.c_beta);
    if (!r.has("ledger.delta_star")) c.ledger.delta_star = c.ledger.c_beta / 16.0;
    r.get("ledger.c_tau", c.ledger.c_tau);
    r.get("ledger.delta_star", c.ledger.delta_star);
    r.get("ledger.delta0", c.ledger.delta0);
    r.get("ledger.delta1", c.ledger.delta1);
    r.get("ledger.m", c.ledger.m);
    r.get("ledger.delta", c.ledger.delta);

    r.get("shear.preset", c.shear_preset);
    r.get("shear.amplitude", c.shear_amplitude);
    r.get("shear.relative_to_delta0", c.shear_relative_to_delta0);
    r.get("shear.mode", c.shear_mode);
    r.get("shear.path", c.shear_path);

    r.get("perturbation.preset", c.perturbation_preset);
    r.get("perturbation.epsilon", c.epsilon);
    if (r.has("perturbation.epsilon_over_sqrt_nu")) {
        if (r.has("perturbation.epsilon"))
            errors.emplace_back("perturbation.epsilon_over_sqrt_nu: conflicts with perturbation.epsilon");
        real ratio = 0.0;
        r.get("perturbation.epsilon_over_sqrt_nu", ratio);
        c.epsilon = ratio * std::sqrt(nu);
    }
    r.get("perturbation.kband", c.kband);
    r.get("perturbation.yband", c.yband);
    r.get("perturbation.include_mean", c.include_mean);
    r.get("perturbation.mode", c.perturbation_mode);

    r.get("audit.k_max", c.audit_k_max);
    r.get("audit.resolution_check", c.audit_resolution_check);
    r.get("fit.window", c.fit_window);
    r.get("fit.transient_scale", c.fit_transient_scale);
    r.get("output.dir", c.output_dir);
    r.get("output.per_k", c.per_k);
    r.get("output.checkpoint_every", c.checkpoint_every);
    r.get("limits.divergence_factor", c.divergence_factor);
    r.get("limits.departed_factor", c.departed_factor);
    r.get("limits.strict", c.strict);
    r.get("sweep.nu", c.sweep_nu);
    r.get("sweep.epsilon", c.sweep_epsilon);

    for (auto& e : r.finish()) errors.push_back(std::move(e));
    for (auto& e : c.validate()) errors.push_back(std::move(e));
    if (!errors.empty()) throw ConfigError(errors);

    if (!(c.ledger.m > 2.0 / 3.0 && c.ledger.m < 1.0))
        c.warnings.push_back("ledger.m = " + std::to_string(c.ledger.m) + " lies outside (2/3, 1)");
    if (c.mode == RunMode::Nonlinear && c.epsilon > c.ledger.delta1 * std::sqrt(nu))
        c.warnings.emplace_back("perturbation.epsilon exceeds delta1 sqrt(nu)");
    for (const auto& chk : c.ledger.audit())
        if (!chk.holds) c.warnings.push_back("ledger inequality fails: " + chk.name);
    return c;
}

/// Canonical `key = value` text of a configuration (sorted, full precision).
inline std::string canonical_text(const RunConfig& c)
{
    std::map<std::string, std::string> kv;
    auto num = [](real v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto str = [](const std::string& s) { return "\"" + s + "\""; };
    auto boolean = [](bool b) { return std::string(b ? "true" : "false"); };
    auto arr = [&](const std::vector<real>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
        return s + "]";
    };
    kv["run.mode"] = str(to_string(c.mode));
    kv["run.k"] = std::to_string(c.k);
    kv["run.seed"] = std::to_string(c.seed);
    kv["run.t_end"] = num(c.t_end);
    kv["run.t_end_scaled"] = boolean(c.t_end_scaled);
    kv["run.dt"] = num(c.dt);
    kv["run.cfl"] = num(c.cfl);
    kv["run.sample_interval"] = std::to_string(c.sample_interval);
    kv["run.workers"] = std::to_string(c.workers);
    kv["grid.n_x"] = std::to_string(c.n_x);
    kv["grid.n_y"] = std::to_string(c.n_y);
    kv["grid.dealias"] = num(c.dealias);
    kv["physics.nu"] = num(c.nu());
    kv["physics.transport"] = boolean(c.transport);
    kv["ledger.K0"] = num(c.ledger.K0);
    kv["ledger.c_alpha"] = num(c.ledger.c_alpha);
    kv["ledger.c_beta"] = num(c.ledger.c_beta);
    kv["ledger.c_tau"] = num(c.ledger.c_tau);
    kv["ledger.delta_star"] = num(c.ledger.delta_star);
    kv["ledger.delta0"] = num(c.ledger.delta0);
    kv["ledger.delta1"] = num(c.ledger.delta1);
    kv["ledger.m"] = num(c.ledger.m);
    kv["ledger.delta"] = num(c.ledger.delta);
    kv["shear.preset"] = str(c.shear_preset);
    kv["shear.amplitude"] = num(c.shear_amplitude);
    kv["shear.relative_to_delta0"] = boolean(c.shear_relative_to_delta0);
    kv["shear.mode"] = std::to_string(c.shear_mode);
    kv["shear.path"] = str(c.shear_path);
    kv["perturbation.preset"] = str(c.perturbation_preset);
    kv["perturbation.epsilon"] = num(c.epsilon);
    kv["perturbation.kband"] = std::to_string(c.kband);
    kv["perturbation.yband"] = std::to_string(c.yband);
    kv["perturbation.include_mean"] = boolean(c.include_mean);
    kv["perturbation.mode"] = std::to_string(c.perturbation_mode);
    kv["audit.k_max"] = std::to_string(c.audit_k_max);
    kv["audit.resolution_check"] = boolean(c.audit_resolution_check);
    kv["fit.window"] = num(c.fit_window);
    kv["fit.transient_scale"] = num(c.fit_transient_scale);
    kv["output.dir"] = str(c.output_dir);
    kv["output.per_k"] = boolean(c.per_k);
    kv["output.checkpoint_every"] = std::to_string(c.checkpoint_every);
    kv["limits.divergence_factor"] = num(c.divergence_factor);
    kv["limits.departed_factor"] = num(c.departed_factor);
    kv["limits.strict"] = boolean(c.strict);
    kv["sweep.nu"] = arr(c.sweep_nu);
    kv["sweep.epsilon"] = arr(c.sweep_epsilon);
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string content_hash(std::string_view data)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hypocouette
