#pragma once

// Searches over free distributions: the threshold gamma*, the CES outer-bound
// maximization, and feasibility of the linear-code-augmented scheme.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jscc/common_parts.hpp"
#include "jscc/mac_model.hpp"
#include "jscc/region.hpp"

namespace jscc {

struct GridSpec {
    double step = 1.0 / 64;   // finest grid; 1/step must be an integer
    int restarts = 32;
    int max_iters = 500;      // coordinate-ascent sweeps per resolution level
    double tol = 1e-9;
    std::uint64_t seed = 20260101;
    unsigned workers = 0;     // 0: hardware threads; results do not depend on it

    void validate() const;
    /// Resolutions visited: 4, 8, ... (doubling while below 1/step), then 1/step.
    std::vector<unsigned> levels() const;
};

/// h^{-1}(2 - H(N_delta)) on [0, 1/2].
double gamma_star(double delta);

struct CesResult {
    double best_value = 0.0;              // bits, exact re-evaluation of x_tables
    std::array<CondPmf, 3> x_tables;      // p(X_i | S_i)
    std::vector<double> trace;            // best value per restart
};

/// max over p(x1|s1) p(x2|s2) p(x3|s3) of I(X1 X2 X3; Y). Exhaustive coarse grid,
/// then multi-resolution coordinate ascent from that point and from seeded
/// random starts. Each level starts from the previous level's optimum, so
/// halving a power-of-two step never lowers the result.
CesResult maximize_ces_outer(const SourceTriple& source, const MacChannel& channel, const GridSpec& grid);

struct FeasibilityResult {
    double best_min_slack = 0.0;          // bits, exact re-evaluation of `scheme`
    SchemeDistributions scheme;
    RegionReport report;
    std::vector<double> trace;            // best min slack per restart
};

/// Maximizes the minimum slack of the full linear-code-augmented region over
/// U and X tables (V fixed uniform). Moves are accepted on a soft-min of the
/// slacks; the reported point is the best true minimum ever evaluated.
/// Restart 0 starts from `init` when given, else from X_i = V_i (uniform when
/// |X_i| < q).
FeasibilityResult feasibility_search_thm1(const SourceTriple& source, const MacChannel& channel,
                                          const std::optional<QAdditivePart>& qpart, const SchemeShape& shape,
                                          const GridSpec& grid,
                                          const std::optional<SchemeDistributions>& init = std::nullopt);

/// X_i = V_i except X_1 flipped with probability `flip` (independently of S, V).
SvTables perturbed_copy_tables(const SourceTriple& source, const MacChannel& channel, double flip);

struct SweepRow {
    double delta = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    double lhs_sum = 0.0;          // h(gamma) + h(sigma)
    double ces_ceiling = 0.0;      // maximize_ces_outer value
    double thm1_min_slack = 0.0;   // feasibility_search_thm1 value
    bool improved = false;         // thm1 feasible and lhs_sum > ces_ceiling
};

struct SweepOptions {
    GridSpec ces_grid;
    GridSpec thm1_grid{1.0 / 16, 1, 50, 1e-9, 20260101, 0};
};

std::vector<SweepRow> improvement_sweep(double delta, const std::vector<double>& sigma_grid,
                                        const std::vector<double>& gamma_grid, const SweepOptions& options = {});

/// Columns: delta, sigma, gamma, lhs_sum_bits, ces_ceiling_bits, thm1_min_slack_bits, improved_flag.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace jscc
