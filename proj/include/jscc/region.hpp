#pragma once

// Scheme joint assembly and the sufficient-condition inequality families:
// two-user CES, three-user CES, and the linear-code-augmented conditions.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "jscc/common_parts.hpp"
#include "jscc/mac_model.hpp"
#include "jscc/prob.hpp"

namespace jscc {

inline constexpr double kSlackTolerance = 1e-9;

/// Axis names used in every assembled joint.
namespace axis {
std::string S(int i);
std::string X(int i);
std::string V(int i);
std::string T(int i);
/// Pair-indexed axes, order-insensitive: W(1,3) == W(3,1) == "W13".
std::string W(int i, int j);
std::string U(int i, int j);
inline constexpr const char* kW123 = "W123";
inline constexpr const char* kU123 = "U123";
inline constexpr const char* kY = "Y";
}  // namespace axis

/// Alphabet sizes of the auxiliary variables.
struct SchemeShape {
    std::size_t u123 = 1;
    std::array<std::size_t, 3> u_pair{1, 1, 1};  // U12, U13, U23
    unsigned q = 2;                               // V alphabet; 1 makes V degenerate
};

/// Free conditional tables of a scheme. The V block is not stored: it is
/// always (V1, V2) uniform on F_q^2 with V3 = V1 + V2, independent of (S, U).
struct SchemeDistributions {
    unsigned q = 2;
    CondPmf u123;                  // p(U123)
    std::array<CondPmf, 3> u_pair;  // p(U_b | W_b, U123) for b = 12, 13, 23
    std::array<CondPmf, 3> x;       // p(X_i | S_i, U123, U_ij, U_ik, V_i), j < k

    SchemeShape shape() const;
};

/// Every table uniform; sizes from `shape`, W alphabets from `parts`.
SchemeDistributions uniform_scheme(const SourceTriple& source, const MacChannel& channel,
                                   const CommonPartDecomposition& parts, const SchemeShape& shape);

/// p(X_i | S_i, V_i) tables; given axes (S_i, V_i), target X_i.
using SvTables = std::array<CondPmf, 3>;

/// X_i = V_i. Requires |X_i| >= q.
SvTables copy_v_tables(const SourceTriple& source, const MacChannel& channel, unsigned q);

/// Scheme with singleton U alphabets and the given p(x_i | s_i, v_i).
SchemeDistributions scheme_from_sv(const SourceTriple& source, const CommonPartDecomposition& parts,
                                   unsigned q, const SvTables& sv);

struct AssembledJoint {
    JointPmf joint;
};

/// p(s) -> W's, T's -> p(u123) -> p(u_b | w_b, u123) -> uniform (v1, v2), v3 = v1 + v2
///      -> p(x_i | s_i, u123, u_ij, u_ik, v_i) -> p(y | x).
/// With no q-additive part the T axes are constant singletons.
AssembledJoint assemble_joint(const SourceTriple& source, const MacChannel& channel,
                              const CommonPartDecomposition& parts, const std::optional<QAdditivePart>& qpart,
                              const SchemeDistributions& scheme);

struct RegionEntry {
    std::string family;
    std::string roles;
    std::string a_set;  // subset of {1,2,3}, e.g. "{1,3}"
    std::string b_set;  // subset of {12,13,23}, e.g. "{12,23}"
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool satisfied = false;
};

struct RegionReport {
    std::vector<RegionEntry> entries;

    double min_slack() const;
    bool all_satisfied() const;
    /// Throws std::out_of_range when absent.
    const RegionEntry& find(std::string_view family, std::string_view roles, std::string_view a_set = "{}",
                            std::string_view b_set = "{}") const;
    /// Columns: family, roles, A, B, lhs_bits, rhs_bits, slack_bits, satisfied.
    std::string to_csv() const;
};

/// Set formatting helpers shared with reports.
std::string user_subset_name(unsigned mask);  // bit u-1 set <=> user u in A
std::string pair_subset_name(unsigned mask);  // bits: 12, 13, 23

/// Two-user CES: p(s1,s2) p(u) p(x1|s1,u) p(x2|s2,u) p(y|x1,x2).
struct TwoUserScheme {
    CondPmf u;   // p(U)
    CondPmf x1;  // p(X1 | S1, U)
    CondPmf x2;  // p(X2 | S2, U)
};

/// `source` over (S1, S2); `channel` is p(Y | X1, X2).
RegionReport eval_two_user_ces(const JointPmf& source, const CondPmf& channel, const TwoUserScheme& scheme);

/// 36 entries: 3 + 3 x 8 + 8 + 1.
RegionReport eval_prop1(const AssembledJoint& assembled);

/// 267 entries: 3 + 3 x 8 x 8 + 8 x 8 + 8.
RegionReport eval_thm1(const AssembledJoint& assembled);

/// The four binding conditions for the example source/channel with T_i = S_i,
/// q = 2 and singleton U's. Left sides in closed form; right sides computed.
RegionReport reduced_example2_report(double sigma, double gamma, double delta, const SvTables& sv);

/// I(X1 X2 X3; Y) under p(s) prod_i p(x_i | s_i) p(y | x). Tables: given S_i, target X_i.
double ces_outer_objective(const SourceTriple& source, const MacChannel& channel,
                           const std::array<CondPmf, 3>& x_tables);

struct UniformOutputWitness {
    bool is_uniform = false;
    std::array<double, 3> q_vector{};  // P(X1 xor X2 + X3 = i), i = 0, 1, 2
    double violation = 0.0;           // L-infinity distance of P_Y from uniform
};

/// For the example channel: q(1) = 0 and q(0) = q(2) = 1/2 <=> Y uniform.
/// `joint` must carry binary X1, X2, X3; a Y axis is used when present,
/// otherwise P_Y is formed from q and the noise law.
UniformOutputWitness uniform_output_witness(const JointPmf& joint, const NoiseSpec& noise,
                                            double tol = kSlackTolerance);

}  // namespace jscc
