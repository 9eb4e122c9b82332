#include "bsdelab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bsde/errors.hpp"

namespace bsdelab {

using bsde::ConfigError;

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"generator.name", "sqrt_y", "builtin driver: zero, constant, linear_y, linear_z, affine, sqrt_y, sqrt_z, lsm_example"},
        {"generator.params", "", "comma-separated driver parameters"},
        {"generator.K", "", "override of the linear-growth constant K"},
        {"generator.g", "", "override of the bound process: zero, one, or a constant value"},
        {"terminal.name", "w_T", "terminal condition: w_T, abs_w_T, bounded_call, constant"},
        {"terminal.params", "", "comma-separated terminal parameters"},
        {"generator2.name", "", "second driver for apriori-ii/comparison (defaults to the primary)"},
        {"generator2.params", "", "parameters of the second driver"},
        {"generator2.K", "", "K override of the second driver"},
        {"generator2.g", "", "g override of the second driver"},
        {"terminal2.name", "", "second terminal (defaults to the primary)"},
        {"terminal2.params", "", "parameters of the second terminal"},
        {"grid.T", "1.0", "time horizon, must be positive"},
        {"grid.N", "64", "number of uniform time steps, >= 1"},
        {"mc.d", "1", "Brownian dimension"},
        {"mc.M", "10000", "number of simulated paths"},
        {"mc.seed", "12345", "base seed of the counter RNG"},
        {"lp.p", "2.0", "integrability exponent, must exceed 1"},
        {"basis.degree", "3", "polynomial degree of the regression basis (<= 10)"},
        {"basis.ridge", "1e-8", "ridge added to the normal equations"},
        {"basis.standardize", "true", "standardize features before fitting"},
        {"picard.tol", "1e-8", "per-step fixed-point stopping tolerance"},
        {"picard.max_iter", "50", "per-step iteration cap"},
        {"envelope.q", "33", "grid points per axis of the envelope search (odd)"},
        {"envelope.r", "4", "refinement levels of the envelope search"},
        {"envelope.n", "2.0", "envelope index tabulated by the envelope subcommand"},
        {"envelope.y_min", "-2.0", "left end of the tabulated y range"},
        {"envelope.y_max", "2.0", "right end of the tabulated y range"},
        {"envelope.points", "401", "number of tabulated y points"},
        {"sweep.schedule", "2,4,8,16", "strictly increasing envelope indices, all above K"},
        {"sweep.mono_tol", "0.01", "pointwise tolerance of the ordering checks"},
        {"sweep.stat_tol", "0.01", "admissible violation fraction"},
        {"sweep.residual_tol", "0.05", "admissible mean residual of the proxy limit"},
        {"sweep.envelope_q", "21", "envelope search points per axis inside the solver"},
        {"sweep.envelope_r", "8", "envelope search levels inside the solver"},
        {"check.c", "64", "a priori constant C the ratio checks run against"},
        {"check.samples", "10000", "sample count of the lemma31 check"},
        {"check.residual_threshold", "0.05", "residual precondition of the a priori checks"},
    };
    return table;
}

namespace {

const KeySpec* find_key(const std::string& key) {
    for (const KeySpec& spec : key_table())
        if (key == spec.key) return &spec;
    return nullptr;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    for (const KeySpec& spec : key_table())
        if (spec.default_value[0] != '\0') cfg.values_[spec.key] = spec.default_value;

    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string stripped = trim(line.substr(0, line.find('#')));
            if (stripped.empty()) continue;
            const std::size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + stripped + "'");
            cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        }
    }
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + ov + "'");
        cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
}

bool RunConfig::has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

std::string RunConfig::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
        return "";
    }
    return it->second;
}

double RunConfig::get_real(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size() || !std::isfinite(v)) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: '" + raw + "'");
    }
}

std::size_t RunConfig::get_count(const std::string& key) const {
    const double v = get_real(key);
    if (v < 0.0 || v != std::floor(v))
        throw ConfigError("config key '" + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::get_seed(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an unsigned integer: '" + raw + "'");
    }
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string raw = get_string(key);
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw ConfigError("config key '" + key + "' must be true or false, got '" + raw + "'");
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<double> out;
    if (raw.empty()) return out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "' has a non-numeric entry: '" + item + "'");
        }
    }
    return out;
}

std::string RunConfig::effective_text() const {
    std::ostringstream out;
    out << "# effective configuration (bsdelab)\n";
    for (const auto& [key, value] : values_)
        if (!value.empty()) out << key << " = " << value << "\n";
    return out.str();
}

void RunConfig::validate() const {
    if (!(get_real("lp.p") > 1.0)) throw ConfigError("p must exceed 1");
    if (get_count("grid.N") < 1) throw ConfigError("grid.N must be at least 1");
    if (!(get_real("grid.T") > 0.0)) throw ConfigError("grid.T must be positive");
    if (get_count("mc.M") < 1) throw ConfigError("mc.M must be at least 1");
    if (get_count("mc.d") < 1) throw ConfigError("mc.d must be at least 1");
    const std::vector<double> schedule = get_list("sweep.schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] > schedule[i - 1]))
            throw ConfigError("schedule strictly increasing: sweep.schedule violates it at entry " +
                              std::to_string(i));
}

bsde::GeneratorSpec generator_from_config(const RunConfig& cfg, const std::string& prefix) {
    if (!cfg.has(prefix + ".name")) {
        // The second problem falls back to the primary one wholesale.
        if (prefix == "generator2") return generator_from_config(cfg, "generator");
        throw ConfigError("missing " + prefix + ".name");
    }
    bsde::GeneratorSpec spec = bsde::make_builtin_generator(cfg.get_string(prefix + ".name"),
                                                            cfg.get_list(prefix + ".params"));
    // Metadata overrides let a run deliberately mislabel a driver.
    const std::string k_key = prefix + ".K";
    if (cfg.has(k_key)) {
        const double k = cfg.get_real(k_key);
        if (k < 0.0) throw ConfigError(k_key + " must be nonnegative");
        spec.growth_K = k;
    }
    const std::string g_key = prefix + ".g";
    if (cfg.has(g_key)) {
        const std::string g = cfg.get_string(g_key);
        double value = 0.0;
        if (g == "zero") {
            value = 0.0;
        } else if (g == "one") {
            value = 1.0;
        } else {
            try {
                std::size_t used = 0;
                value = std::stod(g, &used);
                if (used != g.size()) throw std::invalid_argument(g);
            } catch (const std::exception&) {
                throw ConfigError(g_key + " must be zero, one, or a constant, got '" + g + "'");
            }
            if (value < 0.0) throw ConfigError(g_key + " must be nonnegative");
        }
        spec.bound_g = [value](double, std::span<const double>) { return value; };
    }
    return spec;
}

bsde::TerminalSpec terminal_from_config(const RunConfig& cfg, const std::string& prefix) {
    if (!cfg.has(prefix + ".name")) {
        if (prefix == "terminal2") return terminal_from_config(cfg, "terminal");
        throw ConfigError("missing " + prefix + ".name");
    }
    return bsde::make_terminal(cfg.get_string(prefix + ".name"), cfg.get_list(prefix + ".params"));
}

bsde::TimeGrid grid_from_config(const RunConfig& cfg) {
    return bsde::make_grid(cfg.get_real("grid.T"), cfg.get_count("grid.N"));
}

bsde::RegressionBasis basis_from_config(const RunConfig& cfg) {
    bsde::RegressionBasis basis;
    basis.degree = cfg.get_count("basis.degree");
    basis.ridge = cfg.get_real("basis.ridge");
    basis.standardize = cfg.get_bool("basis.standardize");
    return basis;
}

bsde::PicardConfig picard_from_config(const RunConfig& cfg) {
    bsde::PicardConfig picard;
    picard.tol = cfg.get_real("picard.tol");
    picard.max_iter = cfg.get_count("picard.max_iter");
    return picard;
}

bsde::SweepConfig sweep_from_config(const RunConfig& cfg) {
    bsde::SweepConfig sweep;
    sweep.schedule = cfg.get_list("sweep.schedule");
    sweep.p = cfg.get_real("lp.p");
    sweep.base = generator_from_config(cfg, "generator");
    sweep.terminal = terminal_from_config(cfg, "terminal");
    sweep.grid = grid_from_config(cfg);
    sweep.dimension = cfg.get_count("mc.d");
    sweep.paths = cfg.get_count("mc.M");
    sweep.seed = cfg.get_seed("mc.seed");
    sweep.basis = basis_from_config(cfg);
    sweep.picard = picard_from_config(cfg);
    sweep.envelope_search.points_per_axis = cfg.get_count("sweep.envelope_q");
    sweep.envelope_search.levels = cfg.get_count("sweep.envelope_r");
    sweep.mono_tol = cfg.get_real("sweep.mono_tol");
    sweep.stat_tol = cfg.get_real("sweep.stat_tol");
    sweep.residual_tol = cfg.get_real("sweep.residual_tol");
    sweep.threads = cfg.threads;
    return sweep;
}

} // namespace bsdelab
