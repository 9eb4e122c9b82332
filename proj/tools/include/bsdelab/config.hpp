#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsde/generator.hpp"
#include "bsde/harness.hpp"

namespace bsdelab {

/// One known configuration key with its default and help text.
struct KeySpec {
    const char* key;
    const char* default_value; // empty string = no default (optional key)
    const char* help;
};

/// The full key table, used for validation, defaults, --help and the
/// effective-config echo.
const std::vector<KeySpec>& key_table();

/// Flat dotted-key configuration: parsed from a file of `key = value` lines
/// (# comments), then overridden by --set pairs. Unknown keys are rejected.
class RunConfig {
public:
    /// Parses `path` (empty = defaults only) and applies overrides in order.
    static RunConfig load(const std::string& path, const std::vector<std::string>& overrides);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_real(const std::string& key) const;
    std::size_t get_count(const std::string& key) const; // nonnegative integer
    std::uint64_t get_seed(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_list(const std::string& key) const; // comma separated

    void set(const std::string& key, const std::string& value);

    /// All keys with their effective values, sorted; reruns from this text
    /// reproduce the run bit-identically.
    std::string effective_text() const;

    // Execution context from flags, not part of the echoed configuration.
    unsigned threads = 0;
    std::string out_dir = "out";
    std::string subcommand;
    std::string check_mode;

private:
    void validate() const;
    std::map<std::string, std::string> values_;
};

/// Problem pieces assembled from a config. `prefix` selects the generator/
/// terminal key group ("generator"/"terminal" or "generator2"/"terminal2",
/// the latter falling back to the primary keys when absent).
bsde::GeneratorSpec generator_from_config(const RunConfig& cfg, const std::string& prefix);
bsde::TerminalSpec terminal_from_config(const RunConfig& cfg, const std::string& prefix);
bsde::TimeGrid grid_from_config(const RunConfig& cfg);
bsde::RegressionBasis basis_from_config(const RunConfig& cfg);
bsde::PicardConfig picard_from_config(const RunConfig& cfg);
bsde::SweepConfig sweep_from_config(const RunConfig& cfg);

} // namespace bsdelab
