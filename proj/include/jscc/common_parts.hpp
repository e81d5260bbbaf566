#pragma once

// Univariate (Gacs-Korner / Witsenhausen) common parts and q-additive common
// parts of a source triple.

#include <array>
#include <string>
#include <vector>

#include "jscc/mac_model.hpp"
#include "jscc/prob.hpp"

namespace jscc {

/// Maximal common part of a set of sources. maps[m][s] is the label in [0, k)
/// assigned to symbol s of member m. Zero-probability symbols map to label 0.
struct CommonPart {
    std::vector<std::string> members;
    std::vector<std::vector<std::size_t>> maps;
    std::size_t k = 1;

    /// Label computed from member `name`'s symbol.
    std::size_t label(std::string_view name, std::size_t symbol) const;
};

/// Connected components of the support hypergraph over the members' symbols.
CommonPart univariate_common_part(const JointPmf& source, const VarSet& members);

struct CommonPartDecomposition {
    CommonPart w12;
    CommonPart w13;
    CommonPart w23;
    CommonPart w123;

    /// Pair part for users i != j in {1,2,3}, order-insensitive.
    const CommonPart& pair(int i, int j) const;
};

CommonPartDecomposition decompose_common_parts(const SourceTriple& source);

/// (T1, T2, T3) with T_i = maps[i](S_i) in F_q and T3 = T1 + T2 (mod q) almost surely.
struct QAdditivePart {
    unsigned q = 2;
    std::array<std::vector<unsigned>, 3> maps;

    bool operator==(const QAdditivePart&) const = default;
};

bool is_prime(unsigned q) noexcept;

/// Probability that t3(S3) != t1(S1) + t2(S2) (mod q).
double additive_violation(const QAdditivePart& part, const JointPmf& source);

/// T_i = S_i. Requires every source alphabet to fit in F_q. The identity need
/// not be nontrivial; the explicit construction is used when S3 = S1 + S2 holds
/// by design even for degenerate parameters.
QAdditivePart identity_additive_part(unsigned q, const SourceTriple& source);

/// Exhaustive search over (t1, t2) on the support; t3 is forced. Returns every
/// nontrivial solution up to affine equivalence
///   t_i -> a t_i + c_i,  a a unit,  c3 = c1 + c2,
/// one canonical representative per class in lexicographic order.
std::vector<QAdditivePart> find_q_additive_parts(const SourceTriple& source, unsigned q,
                                                 std::size_t alphabet_cap = 6);

}  // namespace jscc
