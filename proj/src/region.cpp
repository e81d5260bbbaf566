#include "jscc/region.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace jscc {

namespace axis {

std::string S(int i) { return "S" + std::to_string(i); }
std::string X(int i) { return "X" + std::to_string(i); }
std::string V(int i) { return "V" + std::to_string(i); }
std::string T(int i) { return "T" + std::to_string(i); }
std::string W(int i, int j) { return "W" + std::to_string(std::min(i, j)) + std::to_string(std::max(i, j)); }
std::string U(int i, int j) { return "U" + std::to_string(std::min(i, j)) + std::to_string(std::max(i, j)); }

}  // namespace axis

namespace {

// Pair index b: 0 -> {1,2}, 1 -> {1,3}, 2 -> {2,3}.
constexpr std::array<std::array<int, 2>, 3> kPairs{{{1, 2}, {1, 3}, {2, 3}}};

std::size_t pair_index(int i, int j) {
    if (i > j) std::swap(i, j);
    for (std::size_t b = 0; b < 3; ++b)
        if (kPairs[b][0] == i && kPairs[b][1] == j) return b;
    throw std::invalid_argument("pair_index: invalid users");
}

// The two other users of i, ascending.
std::array<int, 2> others(int i) {
    std::array<int, 2> o{};
    std::size_t n = 0;
    for (int u = 1; u <= 3; ++u)
        if (u != i) o[n++] = u;
    return o;
}

const CommonPart& part_for(const CommonPartDecomposition& parts, std::size_t b) {
    return parts.pair(kPairs[b][0], kPairs[b][1]);
}

std::vector<Alphabet> x_given_axes(int i, const SourceTriple& source, const SchemeShape& shape) {
    const auto o = others(i);
    return {Alphabet(axis::S(i), source.alphabet_size(i)), Alphabet(axis::kU123, shape.u123),
            Alphabet(axis::U(i, o[0]), shape.u_pair[pair_index(i, o[0])]),
            Alphabet(axis::U(i, o[1]), shape.u_pair[pair_index(i, o[1])]), Alphabet(axis::V(i), shape.q)};
}

std::vector<double> uniform_values(std::size_t rows, std::size_t width) {
    return std::vector<double>(rows * width, 1.0 / static_cast<double>(width));
}

void push(RegionReport& r, std::string family, std::string roles, std::string a, std::string b, double lhs,
          double rhs) {
    const double slack = rhs - lhs;
    r.entries.push_back({std::move(family), std::move(roles), std::move(a), std::move(b), lhs, rhs, slack,
                         slack >= -kSlackTolerance});
}

std::string pair_roles(int i, int j, int k) {
    return "i=" + std::to_string(i) + ",j=" + std::to_string(j) + ",k=" + std::to_string(k);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

VarSet all_x() { return VarSet{"X1", "X2", "X3"}; }
VarSet all_s() { return VarSet{"S1", "S2", "S3"}; }

}  // namespace

SchemeShape SchemeDistributions::shape() const {
    SchemeShape s;
    s.u123 = u123.target_size();
    for (std::size_t b = 0; b < 3; ++b) s.u_pair[b] = u_pair[b].target_size();
    s.q = q;
    return s;
}

SchemeDistributions uniform_scheme(const SourceTriple& source, const MacChannel& channel,
                                   const CommonPartDecomposition& parts, const SchemeShape& shape) {
    if (shape.q < 1) throw std::invalid_argument("uniform_scheme: q must be >= 1");
    auto u123 = CondPmf({}, {Alphabet(axis::kU123, shape.u123)}, uniform_values(1, shape.u123));
    auto make_pair_table = [&](std::size_t b) {
        const int i = kPairs[b][0], j = kPairs[b][1];
        const auto k = part_for(parts, b).k;
        return CondPmf({Alphabet(axis::W(i, j), k), Alphabet(axis::kU123, shape.u123)},
                       {Alphabet(axis::U(i, j), shape.u_pair[b])},
                       uniform_values(k * shape.u123, shape.u_pair[b]));
    };
    auto make_x_table = [&](int i) {
        auto given = x_given_axes(i, source, shape);
        std::size_t rows = 1;
        for (const auto& a : given) rows *= a.size();
        const auto nx = channel.input_size(i);
        return CondPmf(std::move(given), {Alphabet(axis::X(i), nx)}, uniform_values(rows, nx));
    };
    return SchemeDistributions{shape.q,
                               std::move(u123),
                               {make_pair_table(0), make_pair_table(1), make_pair_table(2)},
                               {make_x_table(1), make_x_table(2), make_x_table(3)}};
}

SvTables copy_v_tables(const SourceTriple& source, const MacChannel& channel, unsigned q) {
    auto make = [&](int i) {
        if (channel.input_size(i) < q) throw std::invalid_argument("copy_v_tables: |X_i| < q");
        return CondPmf::deterministic({Alphabet(axis::S(i), source.alphabet_size(i)), Alphabet(axis::V(i), q)},
                                      {Alphabet(axis::X(i), channel.input_size(i))},
                                      [](std::span<const std::size_t> g) { return g[1]; });
    };
    return {make(1), make(2), make(3)};
}

SchemeDistributions scheme_from_sv(const SourceTriple& source, const CommonPartDecomposition& parts,
                                   unsigned q, const SvTables& sv) {
    SchemeShape shape;
    shape.q = q;
    auto u123 = CondPmf({}, {Alphabet(axis::kU123, 1)}, {1.0});
    auto pair_table = [&](std::size_t b) {
        const int i = kPairs[b][0], j = kPairs[b][1];
        const auto k = part_for(parts, b).k;
        return CondPmf({Alphabet(axis::W(i, j), k), Alphabet(axis::kU123, 1)}, {Alphabet(axis::U(i, j), 1)},
                       std::vector<double>(k, 1.0));
    };
    auto lift = [&](int i) {
        const auto& t = sv[static_cast<std::size_t>(i - 1)];
        if (t.given_axes().size() != 2 || t.given_axes()[0].name() != axis::S(i) ||
            t.given_axes()[1].name() != axis::V(i) || t.target_axes().size() != 1 ||
            t.target_axes()[0].name() != axis::X(i))
            throw std::invalid_argument("scheme_from_sv: table " + std::to_string(i) + " must be p(X_i | S_i, V_i)");
        if (t.given_axes()[0].size() != source.alphabet_size(i) || t.given_axes()[1].size() != q)
            throw std::invalid_argument("scheme_from_sv: table " + std::to_string(i) + " has wrong given sizes");
        const auto ns = source.alphabet_size(i);
        const auto nx = t.target_size();
        std::vector<double> v;
        v.reserve(ns * q * nx);
        // Singleton U axes leave the (S_i, V_i) row order unchanged.
        for (std::size_t g = 0; g < ns * q; ++g) {
            const auto r = t.row(g);
            v.insert(v.end(), r.begin(), r.end());
        }
        return CondPmf(x_given_axes(i, source, shape), t.target_axes(), std::move(v));
    };
    return SchemeDistributions{q, std::move(u123), {pair_table(0), pair_table(1), pair_table(2)},
                               {lift(1), lift(2), lift(3)}};
}

AssembledJoint assemble_joint(const SourceTriple& source, const MacChannel& channel,
                              const CommonPartDecomposition& parts, const std::optional<QAdditivePart>& qpart,
                              const SchemeDistributions& scheme) {
    const auto shape = scheme.shape();
    if (scheme.q < 1) throw std::invalid_argument("assemble_joint: q must be >= 1");
    if (qpart && qpart->q != scheme.q)
        throw std::invalid_argument("assemble_joint: q-additive part and V use different fields");

    for (int i = 1; i <= 3; ++i) {
        const auto& t = scheme.x[static_cast<std::size_t>(i - 1)];
        const auto expected = x_given_axes(i, source, shape);
        if (t.given_axes() != expected || t.target_axes().size() != 1 || t.target_axes()[0].name() != axis::X(i) ||
            t.target_axes()[0].size() != channel.input_size(i))
            throw std::invalid_argument("assemble_joint: alphabet mismatch in p(X" + std::to_string(i) + " | ...)");
    }
    for (std::size_t b = 0; b < 3; ++b) {
        const auto& t = scheme.u_pair[b];
        const int i = kPairs[b][0], j = kPairs[b][1];
        if (t.given_axes().size() != 2 || t.given_axes()[0].name() != axis::W(i, j) ||
            t.given_axes()[0].size() != part_for(parts, b).k || t.given_axes()[1].name() != axis::kU123)
            throw std::invalid_argument("assemble_joint: alphabet mismatch in p(" + axis::U(i, j) + " | ...)");
    }

    JointPmf j = source.joint();
    auto attach_part = [&](const CommonPart& part, const std::string& name) {
        const auto& member = part.members.front();
        const auto& map = part.maps.front();
        j = attach_function(
            j, VarSet{member}, [&](std::span<const std::size_t> s) { return map.at(s[0]); }, Alphabet(name, part.k));
    };
    attach_part(parts.w12, axis::W(1, 2));
    attach_part(parts.w13, axis::W(1, 3));
    attach_part(parts.w23, axis::W(2, 3));
    attach_part(parts.w123, axis::kW123);

    for (int i = 1; i <= 3; ++i) {
        if (qpart) {
            const auto& map = qpart->maps[static_cast<std::size_t>(i - 1)];
            j = attach_function(
                j, VarSet{axis::S(i)}, [&](std::span<const std::size_t> s) { return std::size_t{map.at(s[0])}; },
                Alphabet(axis::T(i), qpart->q));
        } else {
            j = attach_function(
                j, VarSet{axis::S(i)}, [](std::span<const std::size_t>) { return std::size_t{0}; },
                Alphabet(axis::T(i), 1));
        }
    }

    j = compose(j, scheme.u123);
    for (const auto& t : scheme.u_pair) j = compose(j, t);

    const unsigned q = scheme.q;
    j = compose(j, CondPmf({}, {Alphabet(axis::V(1), q), Alphabet(axis::V(2), q)},
                           uniform_values(1, static_cast<std::size_t>(q) * q)));
    j = attach_function(
        j, VarSet{axis::V(1), axis::V(2)}, [q](std::span<const std::size_t> v) { return (v[0] + v[1]) % q; },
        Alphabet(axis::V(3), q));

    for (const auto& t : scheme.x) j = compose(j, t);
    j = compose(j, channel.kernel());

    const auto vals = j.values();
    const double total = std::accumulate(vals.begin(), vals.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-10) throw std::logic_error("assemble_joint: result not normalized");
    return AssembledJoint{std::move(j)};
}

// ---------------------------------------------------------------- reports

double RegionReport::min_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) m = std::min(m, e.slack);
    return m;
}

bool RegionReport::all_satisfied() const {
    return std::all_of(entries.begin(), entries.end(), [](const RegionEntry& e) { return e.satisfied; });
}

const RegionEntry& RegionReport::find(std::string_view family, std::string_view roles, std::string_view a_set,
                                      std::string_view b_set) const {
    for (const auto& e : entries)
        if (e.family == family && e.roles == roles && e.a_set == a_set && e.b_set == b_set) return e;
    throw std::out_of_range("RegionReport::find: no entry " + std::string(family) + " " + std::string(roles));
}

std::string RegionReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "family,roles,A,B,lhs_bits,rhs_bits,slack_bits,satisfied\n";
    for (const auto& e : entries) {
        out << csv_field(e.family) << ',' << csv_field(e.roles) << ',' << csv_field(e.a_set) << ','
            << csv_field(e.b_set) << ',' << e.lhs << ',' << e.rhs << ',' << e.slack << ','
            << (e.satisfied ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string user_subset_name(unsigned mask) {
    std::string s = "{";
    bool first = true;
    for (int u = 1; u <= 3; ++u) {
        if (mask >> (u - 1) & 1U) {
            if (!first) s += ',';
            s += std::to_string(u);
            first = false;
        }
    }
    return s + "}";
}

std::string pair_subset_name(unsigned mask) {
    std::string s = "{";
    bool first = true;
    for (std::size_t b = 0; b < 3; ++b) {
        if (mask >> b & 1U) {
            if (!first) s += ',';
            s += std::to_string(kPairs[b][0]) + std::to_string(kPairs[b][1]);
            first = false;
        }
    }
    return s + "}";
}

RegionReport eval_two_user_ces(const JointPmf& source, const CondPmf& channel, const TwoUserScheme& scheme) {
    const auto& ax = source.axes();
    if (ax.size() != 2 || ax[0].name() != "S1" || ax[1].name() != "S2")
        throw std::invalid_argument("eval_two_user_ces: source must be over (S1, S2)");
    if (channel.given_axes().size() != 2 || channel.target_axes().size() != 1)
        throw std::invalid_argument("eval_two_user_ces: channel must be p(Y | X1, X2)");

    const auto w = univariate_common_part(source, {"S1", "S2"});
    JointPmf j = attach_function(
        source, VarSet{"S1"}, [&](std::span<const std::size_t> s) { return w.maps[0].at(s[0]); },
        Alphabet("W", w.k));
    j = compose(j, scheme.u);
    j = compose(j, scheme.x1);
    j = compose(j, scheme.x2);
    j = compose(j, channel);

    EntropyCache c(j);
    RegionReport r;
    push(r, "ces2", "i=1", "{}", "{}", c.conditional_entropy({"S1"}, {"S2"}),
         c.mutual_information({"X1"}, {"Y"}, {"X2", "S2", "U"}));
    push(r, "ces2", "i=2", "{}", "{}", c.conditional_entropy({"S2"}, {"S1"}),
         c.mutual_information({"X2"}, {"Y"}, {"X1", "S1", "U"}));
    push(r, "ces2", "common", "{}", "{}", c.conditional_entropy({"S1", "S2"}, {"W"}),
         c.mutual_information({"X1", "X2"}, {"Y"}, {"W", "U"}));
    push(r, "ces2", "total", "{}", "{}", c.entropy({"S1", "S2"}), c.mutual_information({"X1", "X2"}, {"Y"}, {}));
    return r;
}

namespace {

VarSet w_of(unsigned b_mask) {
    VarSet v;
    for (std::size_t b = 0; b < 3; ++b)
        if (b_mask >> b & 1U) v.add(axis::W(kPairs[b][0], kPairs[b][1]));
    return v;
}

VarSet u_of(unsigned b_mask) {
    VarSet v;
    for (std::size_t b = 0; b < 3; ++b)
        if (b_mask >> b & 1U) v.add(axis::U(kPairs[b][0], kPairs[b][1]));
    return v;
}

VarSet t_of(unsigned a_mask) {
    VarSet v;
    for (int u = 1; u <= 3; ++u)
        if (a_mask >> (u - 1) & 1U) v.add(axis::T(u));
    return v;
}

VarSet v_of(unsigned a_mask) {
    VarSet v;
    for (int u = 1; u <= 3; ++u)
        if (a_mask >> (u - 1) & 1U) v.add(axis::V(u));
    return v;
}

void require_axes(const JointPmf& j, std::initializer_list<std::string_view> names) {
    for (auto n : names)
        if (!j.has_axis(n)) throw std::invalid_argument("assembled joint lacks axis '" + std::string(n) + "'");
}

const VarSet kAllU{"U123", "U12", "U13", "U23"};

}  // namespace

RegionReport eval_prop1(const AssembledJoint& assembled) {
    const auto& j = assembled.joint;
    require_axes(j, {"S1", "S2", "S3", "W12", "W13", "W23", "W123", "U123", "U12", "U13", "U23", "X1", "X2", "X3",
                     "Y"});
    EntropyCache c(j);
    RegionReport r;

    for (int i = 1; i <= 3; ++i) {
        const auto o = others(i);
        const VarSet s_jk{axis::S(o[0]), axis::S(o[1])};
        push(r, "prop1.private", "i=" + std::to_string(i), "{}", "{}", c.conditional_entropy({axis::S(i)}, s_jk),
             c.mutual_information({axis::X(i)}, {axis::kY}, s_jk | VarSet{axis::X(o[0]), axis::X(o[1])} | kAllU));
    }
    for (const auto& pr : kPairs) {
        const int i = pr[0], jj = pr[1], k = 6 - i - jj;
        for (unsigned b = 0; b < 8; ++b) {
            const VarSet given = VarSet{axis::S(k)} | w_of(b);
            const VarSet cond = given | VarSet{axis::kU123, axis::U(i, k), axis::U(jj, k)} | u_of(b) |
                                VarSet{axis::X(k)};
            push(r, "prop1.pair", pair_roles(i, jj, k), "{}", pair_subset_name(b),
                 c.conditional_entropy({axis::S(i), axis::S(jj)}, given),
                 c.mutual_information({axis::X(i), axis::X(jj)}, {axis::kY}, cond));
        }
    }
    for (unsigned b = 0; b < 8; ++b) {
        const VarSet given = VarSet{axis::kW123} | w_of(b);
        push(r, "prop1.common", "", "{}", pair_subset_name(b), c.conditional_entropy(all_s(), given),
             c.mutual_information(all_x(), {axis::kY}, given | VarSet{axis::kU123} | u_of(b)));
    }
    push(r, "prop1.total", "", "{}", "{}", c.entropy(all_s()), c.mutual_information(all_x(), {axis::kY}, {}));
    return r;
}

RegionReport eval_thm1(const AssembledJoint& assembled) {
    const auto& j = assembled.joint;
    require_axes(j, {"S1", "S2", "S3", "W12", "W13", "W23", "W123", "T1", "T2", "T3", "U123", "U12", "U13", "U23",
                     "V1", "V2", "V3", "X1", "X2", "X3", "Y"});
    EntropyCache c(j);
    RegionReport r;
    const VarSet all_v{"V1", "V2", "V3"};

    for (int i = 1; i <= 3; ++i) {
        const auto o = others(i);
        const VarSet s_jk{axis::S(o[0]), axis::S(o[1])};
        push(r, "thm1.private", "i=" + std::to_string(i), "{}", "{}", c.conditional_entropy({axis::S(i)}, s_jk),
             c.mutual_information({axis::X(i)}, {axis::kY},
                                  s_jk | kAllU | all_v | VarSet{axis::X(o[0]), axis::X(o[1])}));
    }
    for (const auto& pr : kPairs) {
        const int i = pr[0], jj = pr[1], k = 6 - i - jj;
        for (unsigned b = 0; b < 8; ++b) {
            for (unsigned a = 0; a < 8; ++a) {
                const VarSet given = VarSet{axis::S(k)} | w_of(b) | t_of(a);
                const VarSet cond = VarSet{axis::S(k)} | w_of(b) | VarSet{axis::kU123, axis::U(i, k), axis::U(jj, k)} |
                                    u_of(b) | t_of(a) | VarSet{axis::V(k)} | v_of(a) | VarSet{axis::X(k)};
                push(r, "thm1.pair", pair_roles(i, jj, k), user_subset_name(a), pair_subset_name(b),
                     c.conditional_entropy({axis::S(i), axis::S(jj)}, given),
                     c.mutual_information({axis::X(i), axis::X(jj)}, {axis::kY}, cond));
            }
        }
    }
    for (unsigned b = 0; b < 8; ++b) {
        for (unsigned a = 0; a < 8; ++a) {
            const VarSet given = VarSet{axis::kW123} | w_of(b) | t_of(a);
            const VarSet cond = VarSet{axis::kW123} | w_of(b) | VarSet{axis::kU123} | u_of(b) | t_of(a) | v_of(a);
            push(r, "thm1.common", "", user_subset_name(a), pair_subset_name(b), c.conditional_entropy(all_s(), given),
                 c.mutual_information(all_x(), {axis::kY}, cond));
        }
    }
    for (unsigned a = 0; a < 8; ++a) {
        push(r, "thm1.total", "", user_subset_name(a), "{}", c.conditional_entropy(all_s(), t_of(a)),
             c.mutual_information(all_x(), {axis::kY}, t_of(a) | v_of(a)));
    }
    return r;
}

RegionReport reduced_example2_report(double sigma, double gamma, double delta, const SvTables& sv) {
    const auto source = example2_source(sigma, gamma);
    const auto channel = example2_channel(NoiseSpec(delta));
    const auto parts = decompose_common_parts(source);
    const auto qpart = identity_additive_part(2, source);
    const auto assembled = assemble_joint(source, channel, parts, qpart, scheme_from_sv(source, parts, 2, sv));
    EntropyCache c(assembled.joint);

    const double hs = binary_entropy(sigma);
    const double hg = binary_entropy(gamma);
    const double hsg = binary_entropy(binary_convolution(sigma, gamma));
    RegionReport r;
    push(r, "reduced.pair", pair_roles(2, 3, 1), "{}", "{}", hg,
         c.mutual_information({"X2", "X3"}, {"Y"}, {"X1", "S1", "V1"}));
    push(r, "reduced.pair", pair_roles(1, 2, 3), "{}", "{}", hs,
         c.mutual_information({"X1", "X2"}, {"Y"}, {"X3", "S3", "V3"}));
    push(r, "reduced.pair", pair_roles(1, 3, 2), "{}", "{}", hg + hs - hsg,
         c.mutual_information({"X1", "X3"}, {"Y"}, {"X2", "S2", "V2"}));
    push(r, "reduced.total", "", "{}", "{}", hg + hs, c.mutual_information(all_x(), {"Y"}, {}));
    return r;
}

double ces_outer_objective(const SourceTriple& source, const MacChannel& channel,
                           const std::array<CondPmf, 3>& x_tables) {
    JointPmf j = source.joint();
    for (int i = 1; i <= 3; ++i) {
        const auto& t = x_tables[static_cast<std::size_t>(i - 1)];
        if (t.given_axes().size() != 1 || t.given_axes()[0].name() != axis::S(i) ||
            t.given_axes()[0].size() != source.alphabet_size(i) || t.target_axes().size() != 1 ||
            t.target_axes()[0].name() != axis::X(i) || t.target_size() != channel.input_size(i))
            throw std::invalid_argument("ces_outer_objective: table " + std::to_string(i) +
                                        " must be p(X_i | S_i) with matching alphabets");
        j = compose(j, t);
    }
    j = compose(j, channel.kernel());
    return mutual_information(j, all_x(), {"Y"});
}

UniformOutputWitness uniform_output_witness(const JointPmf& joint, const NoiseSpec& noise, double tol) {
    for (const char* n : {"X1", "X2", "X3"})
        if (joint.axis(n).size() != 2) throw std::invalid_argument("uniform_output_witness: inputs must be binary");
    const auto xm = marginalize(joint, {"X1", "X2", "X3"});
    UniformOutputWitness w;
    const auto xv = xm.values();
    for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t x2 = 0; x2 < 2; ++x2)
            for (std::size_t x3 = 0; x3 < 2; ++x3) w.q_vector[(x1 ^ x2) + x3] += xv[x1 * 4 + x2 * 2 + x3];

    std::array<double, 4> py{};
    if (joint.has_axis("Y")) {
        const auto ym = marginalize(joint, {"Y"});
        if (ym.size() != 4) throw std::invalid_argument("uniform_output_witness: Y must have 4 symbols");
        std::copy(ym.values().begin(), ym.values().end(), py.begin());
    } else {
        const auto n = noise.pmf();
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t z = 0; z < 4; ++z) py[(c + z) % 4] += w.q_vector[c] * n[z];
    }
    for (double p : py) w.violation = std::max(w.violation, std::abs(p - 0.25));
    w.is_uniform = w.q_vector[1] <= tol && std::abs(w.q_vector[0] - 0.5) <= tol && std::abs(w.q_vector[2] - 0.5) <= tol;
    return w;
}

}  // namespace jscc
