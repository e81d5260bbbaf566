#pragma once

// Experiment drivers behind the command-line tool. Each driver returns a
// report bundle (summary text plus CSV tables) and an exit code:
// 0 ok, 1 the checked condition failed, 2 invalid input.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "jscc/linear_sim.hpp"
#include "jscc/search.hpp"

namespace jscc {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kOutputDirEnv = "JSCC_OUTPUT_DIR";

enum ExitCode : int { kExitOk = 0, kExitViolated = 1, kExitInvalid = 2 };

struct ExperimentConfig {
    std::optional<nlohmann::json> source;    // mac_model source schema
    std::optional<nlohmann::json> channel;   // mac_model channel schema
    GridSpec grid;
    SimConfig sim;
    std::string output;

    /// Validates every part before returning; throws std::invalid_argument.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    bool operator==(const ExperimentConfig& other) const;
};

/// $JSCC_OUTPUT_DIR, else "jscc_out".
std::string default_output_dir();

struct CsvTable {
    std::string name;   // file stem
    std::string csv;
};

struct ReportBundle {
    std::string summary;
    std::vector<CsvTable> tables;
    std::vector<std::pair<std::string, std::string>> companions;  // file name, contents (plot data)
    nlohmann::json provenance;

    /// Writes <dir>/<name>.csv for every table, the companions, and <dir>/provenance.json.
    void write(const std::string& dir) const;
};

struct CommandOutcome {
    ReportBundle bundle;
    int exit_code = kExitOk;
};

CommandOutcome run_gamma_star(double delta);

/// Example source/channel unless `source`/`channel` overrides are given.
CommandOutcome run_check_ces(double sigma, double gamma, double delta, const GridSpec& grid,
                             const std::optional<SourceTriple>& source = std::nullopt,
                             const std::optional<MacChannel>& channel = std::nullopt);

struct Thm1CheckOptions {
    bool witness = true;          // evaluate X_i = V_i (X_1 flipped w.p. `flip`)
    double flip = 0.0;
    bool search = false;          // also run the feasibility search over the full region
    GridSpec grid{1.0 / 16, 2, 50, 1e-9, 20260101, 0};
};

CommandOutcome run_check_thm1(double sigma, double gamma, double delta, const Thm1CheckOptions& options);

CommandOutcome run_sweep(double delta, const std::vector<double>& sigmas, const std::vector<double>& gammas,
                         const SweepOptions& options);

CommandOutcome run_simulate(const SimConfig& base, const std::vector<std::size_t>& ns);

CommandOutcome run_common_parts(const SourceTriple& source, const std::vector<unsigned>& qs);

CommandOutcome run_lemma4(std::size_t n, unsigned q);

/// "0.1,0.2" -> {0.1, 0.2}; "a:b:c" -> a, a+c, ... up to b (inclusive within 1e-12).
std::vector<double> parse_real_list(const std::string& text);

}  // namespace jscc
