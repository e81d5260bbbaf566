#include "jscc/search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jscc/parallel.hpp"
#include "jscc/rng.hpp"

namespace jscc {

void GridSpec::validate() const {
    if (!(step > 0.0 && step <= 0.5)) throw std::invalid_argument("GridSpec: step must be in (0, 1/2]");
    const double inv = 1.0 / step;
    if (std::abs(inv - std::round(inv)) > 1e-9) throw std::invalid_argument("GridSpec: 1/step must be an integer");
    if (restarts < 1 || max_iters < 1) throw std::invalid_argument("GridSpec: counts must be positive");
    if (!(tol >= 0.0)) throw std::invalid_argument("GridSpec: tol must be nonnegative");
}

std::vector<unsigned> GridSpec::levels() const {
    const auto top = static_cast<unsigned>(std::lround(1.0 / step));
    std::vector<unsigned> out;
    for (unsigned m = 4; m < top; m *= 2) out.push_back(m);
    out.push_back(top);
    return out;
}

double gamma_star(double delta) {
    const NoiseSpec noise(delta);
    const double target = 2.0 - noise.entropy();
    assert(target >= -1e-12 && target <= 1.0 + 1e-12);
    return inverse_binary_entropy(std::clamp(target, 0.0, 1.0));
}

namespace {

using Row = std::vector<double>;

// Compositions of m into k parts, as PMFs; lexicographic in (c[1], ..., c[k-1]).
std::vector<Row> simplex_grid(std::size_t k, unsigned m) {
    std::vector<Row> out;
    std::vector<unsigned> c(k, 0);
    auto rec = [&](auto&& self, std::size_t pos, unsigned left) -> void {
        if (pos == k) {
            c[0] = left;
            Row r(k);
            for (std::size_t t = 0; t < k; ++t) r[t] = static_cast<double>(c[t]) / m;
            out.push_back(std::move(r));
            return;
        }
        for (unsigned v = 0; v <= left; ++v) {
            c[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    rec(rec, 1, m);
    return out;
}

constexpr std::size_t kMaxRowCandidates = 1U << 16;
constexpr std::size_t kCoarseCap = 1U << 18;

// ---------------------------------------------------------------- CES

class CesEvaluator {
public:
    CesEvaluator(const SourceTriple& source, const MacChannel& channel) {
        const auto& j = source.joint();
        for (int i = 0; i < 3; ++i) {
            ns_[i] = source.alphabet_size(i + 1);
            nx_[i] = channel.input_size(i + 1);
        }
        ny_ = channel.output_size();
        const auto v = j.values();
        for (std::size_t a = 0; a < ns_[0]; ++a)
            for (std::size_t b = 0; b < ns_[1]; ++b)
                for (std::size_t c = 0; c < ns_[2]; ++c) {
                    const double p = v[(a * ns_[1] + b) * ns_[2] + c];
                    if (p > 0.0) cells_.push_back({a, b, c, p});
                }
        const auto& k = channel.kernel();
        const auto kv = k.values();
        w_.assign(kv.begin(), kv.end());
        hyx_.resize(k.given_size());
        for (std::size_t x = 0; x < k.given_size(); ++x) hyx_[x] = entropy_of(k.row(x));
        px_.resize(k.given_size());
        py_.resize(ny_);
    }

    std::size_t ns(int i) const { return ns_[static_cast<std::size_t>(i)]; }
    std::size_t nx(int i) const { return nx_[static_cast<std::size_t>(i)]; }

    // rows[i][s] = p(X_i | S_i = s).
    double operator()(const std::array<std::vector<Row>, 3>& rows) {
        std::fill(px_.begin(), px_.end(), 0.0);
        for (const auto& c : cells_) {
            const auto& r1 = rows[0][c.s1];
            const auto& r2 = rows[1][c.s2];
            const auto& r3 = rows[2][c.s3];
            for (std::size_t x1 = 0; x1 < nx_[0]; ++x1) {
                const double p1 = c.p * r1[x1];
                if (p1 == 0.0) continue;
                for (std::size_t x2 = 0; x2 < nx_[1]; ++x2) {
                    const double p12 = p1 * r2[x2];
                    if (p12 == 0.0) continue;
                    const std::size_t base = (x1 * nx_[1] + x2) * nx_[2];
                    for (std::size_t x3 = 0; x3 < nx_[2]; ++x3) px_[base + x3] += p12 * r3[x3];
                }
            }
        }
        std::fill(py_.begin(), py_.end(), 0.0);
        double cond = 0.0;
        for (std::size_t x = 0; x < px_.size(); ++x) {
            if (px_[x] == 0.0) continue;
            cond += px_[x] * hyx_[x];
            for (std::size_t y = 0; y < ny_; ++y) py_[y] += px_[x] * w_[x * ny_ + y];
        }
        return std::max(0.0, entropy_of(py_) - cond);
    }

private:
    struct Cell {
        std::size_t s1, s2, s3;
        double p;
    };
    std::array<std::size_t, 3> ns_{}, nx_{};
    std::size_t ny_ = 0;
    std::vector<Cell> cells_;
    std::vector<double> w_, hyx_, px_, py_;
};

struct CesState {
    std::array<std::vector<Row>, 3> rows;
    double value = -1.0;
};

// Coordinate ascent at one resolution; rows visited in (user, symbol) order.
void ces_ascend(CesEvaluator& eval, CesState& st, unsigned m, int max_iters) {
    std::array<std::vector<Row>, 3> cand;
    for (int i = 0; i < 3; ++i) cand[static_cast<std::size_t>(i)] = simplex_grid(eval.nx(i), m);
    for (int it = 0; it < max_iters; ++it) {
        bool improved = false;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t s = 0; s < st.rows[i].size(); ++s) {
                const Row keep = st.rows[i][s];
                double best = st.value;
                const Row* arg = nullptr;
                for (const auto& c : cand[i]) {
                    st.rows[i][s] = c;
                    const double v = eval(st.rows);
                    if (v > best + 1e-15) {
                        best = v;
                        arg = &c;
                    }
                }
                st.rows[i][s] = arg ? *arg : keep;
                if (arg) {
                    st.value = best;
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }
}

std::array<CondPmf, 3> ces_tables(const CesEvaluator& eval, const std::array<std::vector<Row>, 3>& rows) {
    auto make = [&](int i) {
        std::vector<double> v;
        for (const auto& r : rows[static_cast<std::size_t>(i)]) v.insert(v.end(), r.begin(), r.end());
        return CondPmf({Alphabet(axis::S(i + 1), eval.ns(i))}, {Alphabet(axis::X(i + 1), eval.nx(i))}, std::move(v));
    };
    return {make(0), make(1), make(2)};
}

}  // namespace

CesResult maximize_ces_outer(const SourceTriple& source, const MacChannel& channel, const GridSpec& grid) {
    grid.validate();
    CesEvaluator proto(source, channel);
    const auto levels = grid.levels();
    for (int i = 0; i < 3; ++i) {
        // Candidate count per row at the finest level.
        double c = 1.0;
        const auto k = proto.nx(i);
        for (std::size_t t = 1; t < k; ++t) c = c * (levels.back() + t) / static_cast<double>(t);
        if (c > static_cast<double>(kMaxRowCandidates))
            throw std::invalid_argument("maximize_ces_outer: row grid exceeds cap; coarsen step or shrink |X|");
    }

    // Exhaustive coarse grid over all rows, last row fastest.
    unsigned coarse = std::min(levels.front(), 4U);
    std::array<std::vector<Row>, 3> cand;
    auto coarse_count = [&](unsigned m) {
        double total = 1.0;
        for (int i = 0; i < 3; ++i)
            total *= std::pow(static_cast<double>(simplex_grid(proto.nx(i), m).size()), static_cast<double>(proto.ns(i)));
        return total;
    };
    while (coarse > 1 && coarse_count(coarse) > static_cast<double>(kCoarseCap)) coarse /= 2;
    for (int i = 0; i < 3; ++i) cand[static_cast<std::size_t>(i)] = simplex_grid(proto.nx(i), coarse);

    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (user, symbol)
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t s = 0; s < proto.ns(static_cast<int>(i)); ++s) slots.emplace_back(i, s);

    CesState start;
    for (std::size_t i = 0; i < 3; ++i) start.rows[i].assign(proto.ns(static_cast<int>(i)), cand[i][0]);
    {
        CesEvaluator eval = proto;
        std::vector<std::size_t> digit(slots.size(), 0);
        CesState cur = start;
        double best = -1.0;
        for (;;) {
            for (std::size_t k = 0; k < slots.size(); ++k)
                cur.rows[slots[k].first][slots[k].second] = cand[slots[k].first][digit[k]];
            const double v = eval(cur.rows);
            if (v > best + 1e-15) {
                best = v;
                start.rows = cur.rows;
            }
            std::size_t d = slots.size();
            while (d-- > 0) {
                if (++digit[d] < cand[slots[d].first].size()) break;
                digit[d] = 0;
            }
            if (d == static_cast<std::size_t>(-1)) break;
        }
        start.value = best;
    }

    std::vector<CesState> finals(static_cast<std::size_t>(grid.restarts));
    parallel_for(finals.size(), grid.workers, [&](std::size_t r) {
        CesEvaluator eval = proto;
        CesState st = start;
        if (r > 0) {
            auto rng = SplitMix64::substream(grid.seed, 1, r);
            for (const auto& [i, s] : slots) st.rows[i][s] = cand[i][rng.below(cand[i].size())];
        }
        st.value = eval(st.rows);
        for (unsigned m : levels) ces_ascend(eval, st, m, grid.max_iters);
        finals[r] = std::move(st);
    });

    std::size_t arg = 0;
    std::vector<double> trace;
    for (std::size_t r = 0; r < finals.size(); ++r) {
        trace.push_back(finals[r].value);
        if (finals[r].value > finals[arg].value) arg = r;
    }
    auto tables = ces_tables(proto, finals[arg].rows);
    const double exact = ces_outer_objective(source, channel, tables);
    return CesResult{exact, std::move(tables), std::move(trace)};
}

// ---------------------------------------------------------------- region feasibility

namespace {

constexpr double kSoftMinTemperature = 1e-3;

CondPmf& table_ref(SchemeDistributions& s, std::size_t id) {
    if (id == 0) return s.u123;
    if (id <= 3) return s.u_pair[id - 1];
    return s.x[id - 4];
}

struct FreeRow {
    std::size_t table;
    std::size_t row;
};

std::vector<FreeRow> free_rows(SchemeDistributions& s) {
    std::vector<FreeRow> out;
    for (std::size_t id = 0; id < 7; ++id) {
        const auto& t = table_ref(s, id);
        if (t.target_size() < 2) continue;
        for (std::size_t g = 0; g < t.given_size(); ++g) out.push_back({id, g});
    }
    return out;
}

std::vector<Row> feasibility_candidates(std::size_t k, unsigned m) {
    auto rows = simplex_grid(k, m);
    if (k != 2) return rows;
    // Small perturbations off the vertices.
    for (double e : {1.0 / 1024, 2.0 / 1024, 4.0 / 1024, 8.0 / 1024, 16.0 / 1024}) {
        rows.push_back({1.0 - e, e});
        rows.push_back({e, 1.0 - e});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a[1] < b[1]; });
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

double soft_min(const RegionReport& r) {
    const double lo = r.min_slack();
    double acc = 0.0;
    for (const auto& e : r.entries) acc += std::exp(-(e.slack - lo) / kSoftMinTemperature);
    return lo - kSoftMinTemperature * std::log(acc);
}

SchemeDistributions default_witness(const SourceTriple& source, const MacChannel& channel,
                                    const CommonPartDecomposition& parts, const SchemeShape& shape) {
    auto s = uniform_scheme(source, channel, parts, shape);
    for (int i = 1; i <= 3; ++i) {
        auto& t = s.x[static_cast<std::size_t>(i - 1)];
        if (channel.input_size(i) < shape.q) continue;
        const auto& given = t.given_axes();
        // V_i is the last given axis, so it cycles fastest.
        const auto nv = given.back().size();
        for (std::size_t g = 0; g < t.given_size(); ++g) {
            Row r(t.target_size(), 0.0);
            r[g % nv] = 1.0;
            t.set_row(g, r);
        }
    }
    return s;
}

struct Evaluated {
    RegionReport report;
    double soft = 0.0;
};

}  // namespace

FeasibilityResult feasibility_search_thm1(const SourceTriple& source, const MacChannel& channel,
                                          const std::optional<QAdditivePart>& qpart, const SchemeShape& shape,
                                          const GridSpec& grid, const std::optional<SchemeDistributions>& init) {
    grid.validate();
    if (shape.u123 > 4 || std::any_of(shape.u_pair.begin(), shape.u_pair.end(), [](auto k) { return k > 4; }))
        throw std::invalid_argument("feasibility_search_thm1: U alphabets above cap 4");
    if (shape.q != 1 && (!is_prime(shape.q) || shape.q > 7))
        throw std::invalid_argument("feasibility_search_thm1: q must be 1 or a prime <= 7");
    if (qpart && qpart->q != shape.q) throw std::invalid_argument("feasibility_search_thm1: q mismatch");

    const auto parts = decompose_common_parts(source);
    const auto levels = grid.levels();
    const auto base = init ? *init : default_witness(source, channel, parts, shape);
    if (base.shape().u123 != shape.u123 || base.shape().u_pair != shape.u_pair || base.q != shape.q)
        throw std::invalid_argument("feasibility_search_thm1: initial scheme does not match shape");

    auto evaluate = [&](const SchemeDistributions& s) {
        auto rep = eval_thm1(assemble_joint(source, channel, parts, qpart, s));
        const double soft = soft_min(rep);
        return Evaluated{std::move(rep), soft};
    };

    struct Outcome {
        double best = -std::numeric_limits<double>::infinity();
        std::optional<SchemeDistributions> scheme;
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(grid.restarts));

    parallel_for(outcomes.size(), grid.workers, [&](std::size_t r) {
        SchemeDistributions cur = base;
        auto rows = free_rows(cur);
        for (const auto& fr : rows) {
            const auto k = table_ref(cur, fr.table).target_size();
            if (feasibility_candidates(k, levels.back()).size() > kMaxRowCandidates)
                throw std::invalid_argument("feasibility_search_thm1: row grid exceeds cap");
        }
        if (r > 0) {
            auto rng = SplitMix64::substream(grid.seed, 2, r);
            for (const auto& fr : rows) {
                auto& t = table_ref(cur, fr.table);
                const auto c = simplex_grid(t.target_size(), levels.front());
                t.set_row(fr.row, c[rng.below(c.size())]);
            }
        }
        Outcome out;
        auto ev = evaluate(cur);
        auto track = [&](const Evaluated& e, const SchemeDistributions& s) {
            const double m = e.report.min_slack();
            if (m > out.best) {
                out.best = m;
                out.scheme = s;
            }
        };
        track(ev, cur);
        for (unsigned m : levels) {
            for (int it = 0; it < grid.max_iters; ++it) {
                bool improved = false;
                for (const auto& fr : rows) {
                    auto& t = table_ref(cur, fr.table);
                    const auto cand = feasibility_candidates(t.target_size(), m);
                    const Row keep(t.row(fr.row).begin(), t.row(fr.row).end());
                    const Row* arg = nullptr;
                    double best_soft = ev.soft;
                    for (const auto& c : cand) {
                        if (c == keep) continue;
                        t.set_row(fr.row, c);
                        const auto e = evaluate(cur);
                        track(e, cur);
                        if (e.soft > best_soft + 1e-12) {
                            best_soft = e.soft;
                            arg = &c;
                        }
                    }
                    t.set_row(fr.row, arg ? *arg : keep);
                    if (arg) {
                        ev = evaluate(cur);
                        improved = true;
                    }
                }
                if (!improved) break;
            }
        }
        outcomes[r] = std::move(out);
    });

    std::size_t arg = 0;
    std::vector<double> trace;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        trace.push_back(outcomes[r].best);
        if (outcomes[r].best > outcomes[arg].best) arg = r;
    }
    auto scheme = std::move(*outcomes[arg].scheme);
    auto report = eval_thm1(assemble_joint(source, channel, parts, qpart, scheme));
    const double exact = report.min_slack();
    return FeasibilityResult{exact, std::move(scheme), std::move(report), std::move(trace)};
}

SvTables perturbed_copy_tables(const SourceTriple& source, const MacChannel& channel, double flip) {
    if (!(flip >= 0.0 && flip <= 1.0)) throw std::invalid_argument("perturbed_copy_tables: flip outside [0, 1]");
    auto sv = copy_v_tables(source, channel, 2);
    auto& t = sv[0];
    for (std::size_t g = 0; g < t.given_size(); ++g) {
        const std::size_t v = g % 2;
        Row r(t.target_size(), 0.0);
        r[v] = 1.0 - flip;
        r[1 - v] = flip;
        t.set_row(g, r);
    }
    return sv;
}

std::vector<SweepRow> improvement_sweep(double delta, const std::vector<double>& sigma_grid,
                                        const std::vector<double>& gamma_grid, const SweepOptions& options) {
    options.ces_grid.validate();
    options.thm1_grid.validate();
    const NoiseSpec noise(delta);
    for (double v : sigma_grid)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("improvement_sweep: sigma outside [0, 1]");
    for (double v : gamma_grid)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("improvement_sweep: gamma outside [0, 1]");

    const auto channel = example2_channel(noise);
    std::vector<SweepRow> rows(sigma_grid.size() * gamma_grid.size());
    auto ces = options.ces_grid;
    auto thm = options.thm1_grid;
    ces.workers = 1;
    thm.workers = 1;
    parallel_for(rows.size(), options.ces_grid.workers, [&](std::size_t k) {
        const double sigma = sigma_grid[k / gamma_grid.size()];
        const double gamma = gamma_grid[k % gamma_grid.size()];
        const auto source = example2_source(sigma, gamma);
        SweepRow row;
        row.delta = delta;
        row.sigma = sigma;
        row.gamma = gamma;
        row.lhs_sum = binary_entropy(gamma) + binary_entropy(sigma);
        row.ces_ceiling = maximize_ces_outer(source, channel, ces).best_value;
        SchemeShape shape;
        row.thm1_min_slack =
            feasibility_search_thm1(source, channel, identity_additive_part(2, source), shape, thm).best_min_slack;
        row.improved = row.thm1_min_slack >= -thm.tol && row.lhs_sum > row.ces_ceiling + ces.tol;
        rows[k] = row;
    });
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    out << "delta,sigma,gamma,lhs_sum_bits,ces_ceiling_bits,thm1_min_slack_bits,improved_flag\n";
    for (const auto& r : rows)
        out << r.delta << ',' << r.sigma << ',' << r.gamma << ',' << r.lhs_sum << ',' << r.ces_ceiling << ','
            << r.thm1_min_slack << ',' << (r.improved ? 1 : 0) << '\n';
    return out.str();
}

}  // namespace jscc
