#pragma once

// Finite-blocklength simulation of the dithered linear code for S3 = S1 + S2
// over F_q, with a MAP decoder, plus exact and empirical checks of the code's
// distributional properties.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jscc/mac_model.hpp"
#include "jscc/region.hpp"
#include "jscc/rng.hpp"

namespace jscc {

using Symbols = std::vector<unsigned>;

/// v_i = s_i G + b_i over F_q; b3 = b1 + b2.
struct LinearEncoder {
    unsigned q = 2;
    std::size_t n = 0;
    std::vector<unsigned> G;       // row-major n x n
    std::array<Symbols, 3> b;

    void validate() const;
    /// Uniform G, b1, b2; b3 = b1 + b2.
    static LinearEncoder random(unsigned q, std::size_t n, SplitMix64& rng);
};

/// Throws on length mismatch or a symbol outside F_q. `user` in {1, 2, 3}.
Symbols encode(const LinearEncoder& enc, std::span<const unsigned> s, int user);

/// Per-letter source law: S1 and S3 independent, each 0 with probability
/// 1 - p and otherwise uniform over the q - 1 nonzero symbols (p = sigma for
/// S1, gamma for S3); S2 = S3 - S1. For q = 2 this is the example source.
struct LinearSource {
    unsigned q = 2;
    double sigma = 0.0;
    double gamma = 0.0;

    void validate() const;
    double prob1(unsigned s) const;  // P(S1 = s)
    double prob3(unsigned s) const;  // P(S3 = s)
    /// Row-major joint over (S1, S2, S3) on F_q^3.
    JointPmf joint() const;
};

/// Realized per-position symbol maps x = phi_t(s, v), drawn once per block from
/// p(x | s, v) and shared by encoder and decoder. Without a table, x = v.
struct SymbolMaps {
    std::size_t n = 0;
    std::size_t ns = 0;
    std::size_t nv = 0;
    std::vector<unsigned> table;   // [t][s][v], empty for the copy map

    unsigned operator()(std::size_t t, unsigned s, unsigned v) const {
        return table.empty() ? v : table[(t * ns + s) * nv + v];
    }
};

/// x_table: given (S_i, V_i), target X_i. Throws on shape mismatch.
SymbolMaps draw_symbol_maps(const std::optional<CondPmf>& x_table, unsigned q, std::size_t n, SplitMix64& rng);

/// Componentwise draw x_t ~ p(x | s_t, v_t); the copy map when no table is given.
Symbols channel_map(std::span<const unsigned> s, std::span<const unsigned> v, const std::optional<CondPmf>& x_table,
                    unsigned q, SplitMix64& rng);
Symbols apply_symbol_maps(const SymbolMaps& maps, std::span<const unsigned> s, std::span<const unsigned> v);

struct DecodedTriple {
    std::array<Symbols, 3> s;
    double score = 0.0;           // log-likelihood plus log-prior, natural log
    std::uint64_t candidate = 0;  // idx(s1) * q^n + idx(s3), most significant letter first
};

inline constexpr std::uint64_t kDefaultCandidateCap = std::uint64_t{1} << 24;

/// argmax over (s1, s3) with s2 = s3 - s1 of
///   sum_t [log p(y_t | x_t) + log P(s1_t) + log P(s3_t)],
/// x recomputed through `enc` and `maps`. Ties go to the smallest candidate index.
DecodedTriple map_decode(std::span<const unsigned> y, const LinearEncoder& enc,
                         const std::array<SymbolMaps, 3>& maps, const LinearSource& source,
                         const MacChannel& channel, std::uint64_t candidate_cap = kDefaultCandidateCap);

struct SimConfig {
    std::size_t n = 4;
    unsigned q = 2;
    double delta = 0.0;
    double sigma = 0.0;
    double gamma = 0.11;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::string decoder = "map";
    std::optional<SvTables> x_table;         // p(x_i | s_i, v_i); default X_i = V_i
    std::optional<MacChannel> channel;       // default: example channel at delta
    bool fixed_code = false;                 // one (G, b) for all trials
    std::uint64_t candidate_cap = kDefaultCandidateCap;
    unsigned workers = 0;

    void validate() const;           // sampling checks plus the decoder's candidate cap
    void validate_sampling() const;
    MacChannel resolved_channel() const;
};

struct SimResult {
    std::size_t n = 0;
    unsigned q = 2;
    double delta = 0.0, sigma = 0.0, gamma = 0.0;
    std::size_t trials = 0;
    std::size_t errors = 0;
    double p_e_hat = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;          // Wilson 95%
    std::array<std::size_t, 4> cases{};       // {s1 wrong only}, {s2 wrong only}, {s1, s2 wrong, s3 right}, {all wrong}
    std::size_t linearity_holds = 0;          // trials with v3 = v1 + v2
    std::uint64_t seed = 0;
};

/// Wilson score interval at z = 1.959963984540054.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

SimResult monte_carlo(const SimConfig& cfg);

/// Columns: n, q, delta, sigma, gamma, trials, errors, p_e_hat, ci_lo, ci_hi, case1..case4, seed.
std::string sim_csv_header();
std::string sim_csv_row(const SimResult& r);

struct Lemma4Report {
    std::size_t n = 0;
    unsigned q = 2;
    std::uint64_t matrices = 0;
    std::uint64_t classes = 0;        // (s1, s2) != (0, 0) times all (v1, v2)
    std::uint64_t mismatches = 0;
    bool passed() const { return mismatches == 0; }
};

inline constexpr std::uint64_t kLemma4WorkCap = std::uint64_t{1} << 26;

/// Enumerates every G in F_q^{n x n} and compares P(s1 G = v1, s2 G = v2)
/// with the three-case formula as exact rationals.
Lemma4Report lemma4_verify(std::size_t n, unsigned q);

/// Counts of tuples over a finite product alphabet.
class EmpiricalType {
public:
    explicit EmpiricalType(std::vector<std::size_t> dims);
    void add(std::span<const std::size_t> symbols);
    std::size_t total() const noexcept { return total_; }
    std::span<const std::size_t> counts() const noexcept { return counts_; }
    /// max_a |count(a)/total - ref(a)|; ref is row-major over dims.
    double distance(std::span<const double> ref) const;

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> counts_;
    std::size_t total_ = 0;
};

struct Lemma3Report {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t within = 0;
    double fraction = 0.0;
    double mean_distance = 0.0;
};

/// Reference law of (S1,S2,S3,V1,V2,V3,X1,X2,X3): P_S (1/q^2) 1{v3 = v1 + v2} prod_i p(x_i | s_i, v_i).
JointPmf lemma3_reference(const SimConfig& cfg);

/// Fraction of trials whose empirical type is within `tol` (L-infinity) of the reference.
Lemma3Report lemma3_check(const SimConfig& cfg, double tol);

}  // namespace jscc
