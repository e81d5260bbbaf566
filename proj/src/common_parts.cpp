#include "jscc/common_parts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace jscc {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

std::vector<double> symbol_marginal(const JointPmf& j, std::string_view name) {
    const auto m = marginalize(j, VarSet{name});
    return {m.values().begin(), m.values().end()};
}

}  // namespace

std::size_t CommonPart::label(std::string_view name, std::size_t symbol) const {
    for (std::size_t m = 0; m < members.size(); ++m)
        if (members[m] == name) return maps[m].at(symbol);
    throw std::invalid_argument("CommonPart: '" + std::string(name) + "' is not a member");
}

CommonPart univariate_common_part(const JointPmf& source, const VarSet& members) {
    if (members.size() < 2) throw std::invalid_argument("univariate_common_part: need at least two members");
    const auto marg = marginalize(source, members);
    const auto& axes = marg.axes();

    // Node id of (member m, symbol s).
    std::vector<std::size_t> offset(axes.size() + 1, 0);
    for (std::size_t m = 0; m < axes.size(); ++m) offset[m + 1] = offset[m] + axes[m].size();
    DisjointSets sets(offset.back());
    std::vector<bool> positive(offset.back(), false);

    const auto vals = marg.values();
    std::vector<std::size_t> idx(axes.size(), 0);
    bool any = false;
    for (std::size_t flat = 0; flat < vals.size(); ++flat) {
        if (vals[flat] > 0.0) {
            any = true;
            for (std::size_t m = 0; m < axes.size(); ++m) {
                positive[offset[m] + idx[m]] = true;
                sets.unite(offset[0] + idx[0], offset[m] + idx[m]);
            }
        }
        for (std::size_t d = axes.size(); d-- > 0;) {
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
        }
    }
    if (!any) throw std::invalid_argument("univariate_common_part: empty support");

    // Labels in order of first appearance over (member 0 symbols, member 1 symbols, ...).
    std::map<std::size_t, std::size_t> label_of_root;
    CommonPart part;
    for (std::size_t m = 0; m < axes.size(); ++m) {
        part.members.push_back(axes[m].name());
        std::vector<std::size_t> map(axes[m].size(), 0);
        for (std::size_t s = 0; s < axes[m].size(); ++s) {
            const auto node = offset[m] + s;
            if (!positive[node]) continue;
            const auto root = sets.find(node);
            auto [it, inserted] = label_of_root.try_emplace(root, label_of_root.size());
            map[s] = it->second;
        }
        part.maps.push_back(std::move(map));
    }
    part.k = label_of_root.size();
    return part;
}

const CommonPart& CommonPartDecomposition::pair(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i == 1 && j == 2) return w12;
    if (i == 1 && j == 3) return w13;
    if (i == 2 && j == 3) return w23;
    throw std::invalid_argument("CommonPartDecomposition::pair: invalid users");
}

CommonPartDecomposition decompose_common_parts(const SourceTriple& source) {
    const auto& j = source.joint();
    return {univariate_common_part(j, {"S1", "S2"}), univariate_common_part(j, {"S1", "S3"}),
            univariate_common_part(j, {"S2", "S3"}), univariate_common_part(j, {"S1", "S2", "S3"})};
}

bool is_prime(unsigned q) noexcept {
    if (q < 2) return false;
    for (unsigned d = 2; d * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

double additive_violation(const QAdditivePart& part, const JointPmf& source) {
    const auto vals = source.values();
    const auto& ax = source.axes();
    double bad = 0.0;
    for (std::size_t s1 = 0; s1 < ax[0].size(); ++s1)
        for (std::size_t s2 = 0; s2 < ax[1].size(); ++s2)
            for (std::size_t s3 = 0; s3 < ax[2].size(); ++s3) {
                const double p = vals[(s1 * ax[1].size() + s2) * ax[2].size() + s3];
                if (p <= 0.0) continue;
                if ((part.maps[0][s1] + part.maps[1][s2]) % part.q != part.maps[2][s3]) bad += p;
            }
    return bad;
}

QAdditivePart identity_additive_part(unsigned q, const SourceTriple& source) {
    if (!is_prime(q)) throw std::invalid_argument("identity_additive_part: q must be prime");
    QAdditivePart part{q, {}};
    for (int i = 0; i < 3; ++i) {
        const auto n = source.alphabet_size(i + 1);
        if (n > q) throw std::invalid_argument("identity_additive_part: alphabet larger than q");
        part.maps[static_cast<std::size_t>(i)].resize(n);
        std::iota(part.maps[static_cast<std::size_t>(i)].begin(), part.maps[static_cast<std::size_t>(i)].end(), 0U);
    }
    if (additive_violation(part, source.joint()) > 0.0)
        throw std::invalid_argument("identity_additive_part: S3 != S1 + S2 (mod q) on the support");
    return part;
}

std::vector<QAdditivePart> find_q_additive_parts(const SourceTriple& source, unsigned q,
                                                 std::size_t alphabet_cap) {
    if (!is_prime(q)) throw std::invalid_argument("find_q_additive_parts: q must be prime");
    const auto& j = source.joint();
    std::array<std::size_t, 3> n{};
    std::array<std::vector<double>, 3> marg;
    for (std::size_t i = 0; i < 3; ++i) {
        n[i] = j.axes()[i].size();
        if (n[i] > alphabet_cap) throw std::invalid_argument("find_q_additive_parts: alphabet exceeds search cap");
        marg[i] = symbol_marginal(j, j.axes()[i].name());
    }

    // Free coordinates: positive-probability symbols of S1 and S2.
    std::array<std::vector<std::size_t>, 3> support;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t s = 0; s < n[i]; ++s)
            if (marg[i][s] > 0.0) support[i].push_back(s);

    const std::size_t free_count = support[0].size() + support[1].size();
    const double space = std::pow(static_cast<double>(q), static_cast<double>(free_count));
    if (space > static_cast<double>(std::size_t{1} << 26))
        throw std::invalid_argument("find_q_additive_parts: search space exceeds cap");

    struct Cell {
        std::size_t s1, s2, s3;
    };
    std::vector<Cell> cells;
    const auto vals = j.values();
    for (std::size_t a = 0; a < n[0]; ++a)
        for (std::size_t b = 0; b < n[1]; ++b)
            for (std::size_t c = 0; c < n[2]; ++c)
                if (vals[(a * n[1] + b) * n[2] + c] > 0.0) cells.push_back({a, b, c});

    auto takes_two_values = [&](const std::vector<unsigned>& t, std::size_t i) {
        for (auto s : support[i])
            if (t[s] != t[support[i].front()]) return true;
        return false;
    };

    std::set<std::vector<unsigned>> classes;
    std::vector<unsigned> digits(free_count, 0);
    const auto total = static_cast<std::size_t>(space);
    std::array<std::vector<unsigned>, 3> t;
    for (std::size_t i = 0; i < 3; ++i) t[i].assign(n[i], 0);
    std::vector<int> t3(n[2]);

    for (std::size_t code = 0; code < total; ++code) {
        for (std::size_t k = 0; k < support[0].size(); ++k) t[0][support[0][k]] = digits[k];
        for (std::size_t k = 0; k < support[1].size(); ++k) t[1][support[1][k]] = digits[support[0].size() + k];

        std::fill(t3.begin(), t3.end(), -1);
        bool ok = true;
        for (const auto& c : cells) {
            const int v = static_cast<int>((t[0][c.s1] + t[1][c.s2]) % q);
            if (t3[c.s3] < 0)
                t3[c.s3] = v;
            else if (t3[c.s3] != v) {
                ok = false;
                break;
            }
        }
        if (ok) {
            for (std::size_t s = 0; s < n[2]; ++s) t[2][s] = t3[s] < 0 ? 0U : static_cast<unsigned>(t3[s]);
            if (takes_two_values(t[0], 0) && takes_two_values(t[1], 1) && takes_two_values(t[2], 2)) {
                // Canonical representative: lexicographic minimum over the affine orbit.
                std::vector<unsigned> best;
                for (unsigned a = 1; a < q; ++a)
                    for (unsigned c1 = 0; c1 < q; ++c1)
                        for (unsigned c2 = 0; c2 < q; ++c2) {
                            std::vector<unsigned> enc;
                            const std::array<unsigned, 3> shift{c1, c2, (c1 + c2) % q};
                            for (std::size_t i = 0; i < 3; ++i)
                                for (std::size_t s = 0; s < n[i]; ++s)
                                    enc.push_back(marg[i][s] > 0.0 ? (a * t[i][s] + shift[i]) % q : 0U);
                            if (best.empty() || enc < best) best = std::move(enc);
                        }
                classes.insert(std::move(best));
            }
        }
        for (std::size_t d = free_count; d-- > 0;) {
            if (++digits[d] < q) break;
            digits[d] = 0;
        }
    }

    std::vector<QAdditivePart> out;
    for (const auto& enc : classes) {
        QAdditivePart part{q, {}};
        std::size_t pos = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            part.maps[i].assign(enc.begin() + static_cast<std::ptrdiff_t>(pos),
                                enc.begin() + static_cast<std::ptrdiff_t>(pos + n[i]));
            pos += n[i];
        }
        out.push_back(std::move(part));
    }
    return out;
}

}  // namespace jscc
