#include "jscc/linear_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "jscc/common_parts.hpp"
#include "jscc/parallel.hpp"

namespace jscc {

namespace {

std::uint64_t ipow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
    std::uint64_t r = 1;
    for (std::uint64_t k = 0; k < exp; ++k) {
        if (r > cap / base) return cap + 1;
        r *= base;
    }
    return r;
}

// Digits of idx in base q, most significant first.
void to_digits(std::uint64_t idx, unsigned q, Symbols& out) {
    for (std::size_t t = out.size(); t-- > 0;) {
        out[t] = static_cast<unsigned>(idx % q);
        idx /= q;
    }
}

unsigned draw_letter(double p, unsigned q, SplitMix64& rng) {
    if (rng.uniform01() >= p) return 0;
    return 1 + static_cast<unsigned>(rng.below(q - 1));
}

std::size_t draw_from(std::span<const double> pmf, SplitMix64& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        if (pmf[k] <= 0.0) continue;
        acc += pmf[k];
        last = k;
        if (u < acc) return k;
    }
    return last;
}

void check_x_table(const CondPmf& t, unsigned q, int user) {
    const auto& g = t.given_axes();
    if (g.size() != 2 || g[0].size() != q || g[1].size() != q || t.target_axes().size() != 1)
        throw std::invalid_argument("x_table " + std::to_string(user) + ": expected p(X_i | S_i, V_i) with |S_i| = |V_i| = q");
}

std::size_t x_flat(const MacChannel& ch, unsigned x1, unsigned x2, unsigned x3) {
    return (static_cast<std::size_t>(x1) * ch.input_size(2) + x2) * ch.input_size(3) + x3;
}

}  // namespace

// ---------------------------------------------------------------- encoder

void LinearEncoder::validate() const {
    if (!is_prime(q)) throw std::invalid_argument("LinearEncoder: q must be prime");
    if (n == 0) throw std::invalid_argument("LinearEncoder: n must be positive");
    if (G.size() != n * n) throw std::invalid_argument("LinearEncoder: G must be n x n");
    for (auto g : G)
        if (g >= q) throw std::invalid_argument("LinearEncoder: G entry outside F_q");
    for (const auto& bi : b) {
        if (bi.size() != n) throw std::invalid_argument("LinearEncoder: dither length must be n");
        for (auto x : bi)
            if (x >= q) throw std::invalid_argument("LinearEncoder: dither entry outside F_q");
    }
    for (std::size_t t = 0; t < n; ++t)
        if (b[2][t] != (b[0][t] + b[1][t]) % q) throw std::invalid_argument("LinearEncoder: b3 != b1 + b2");
}

LinearEncoder LinearEncoder::random(unsigned q, std::size_t n, SplitMix64& rng) {
    LinearEncoder e;
    e.q = q;
    e.n = n;
    e.G.resize(n * n);
    for (auto& g : e.G) g = static_cast<unsigned>(rng.below(q));
    for (int i = 0; i < 2; ++i) {
        e.b[static_cast<std::size_t>(i)].resize(n);
        for (auto& x : e.b[static_cast<std::size_t>(i)]) x = static_cast<unsigned>(rng.below(q));
    }
    e.b[2].resize(n);
    for (std::size_t t = 0; t < n; ++t) e.b[2][t] = (e.b[0][t] + e.b[1][t]) % q;
    return e;
}

Symbols encode(const LinearEncoder& enc, std::span<const unsigned> s, int user) {
    if (user < 1 || user > 3) throw std::invalid_argument("encode: user must be 1, 2 or 3");
    if (s.size() != enc.n) throw std::invalid_argument("encode: source length != n");
    for (auto x : s)
        if (x >= enc.q) throw std::invalid_argument("encode: symbol outside F_q");
    const auto& b = enc.b[static_cast<std::size_t>(user - 1)];
    Symbols v(b.begin(), b.end());
    for (std::size_t r = 0; r < enc.n; ++r) {
        if (s[r] == 0) continue;
        for (std::size_t c = 0; c < enc.n; ++c) v[c] = (v[c] + s[r] * enc.G[r * enc.n + c]) % enc.q;
    }
    return v;
}

// ---------------------------------------------------------------- source

void LinearSource::validate() const {
    if (!is_prime(q) || q > kMaxAlphabetSize) throw std::invalid_argument("LinearSource: q must be a prime <= 16");
    if (!(sigma >= 0.0 && sigma <= 1.0) || !(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("LinearSource: sigma and gamma must lie in [0, 1]");
}

double LinearSource::prob1(unsigned s) const { return s == 0 ? 1.0 - sigma : sigma / (q - 1); }
double LinearSource::prob3(unsigned s) const { return s == 0 ? 1.0 - gamma : gamma / (q - 1); }

JointPmf LinearSource::joint() const {
    validate();
    std::vector<double> v(static_cast<std::size_t>(q) * q * q, 0.0);
    for (unsigned s1 = 0; s1 < q; ++s1)
        for (unsigned s3 = 0; s3 < q; ++s3) {
            const unsigned s2 = (s3 + q - s1) % q;
            v[(s1 * q + s2) * q + s3] = prob1(s1) * prob3(s3);
        }
    return JointPmf({Alphabet("S1", q), Alphabet("S2", q), Alphabet("S3", q)}, std::move(v));
}

// ---------------------------------------------------------------- symbol maps

SymbolMaps draw_symbol_maps(const std::optional<CondPmf>& x_table, unsigned q, std::size_t n, SplitMix64& rng) {
    SymbolMaps m{n, q, q, {}};
    if (!x_table) return m;
    check_x_table(*x_table, q, 0);
    m.table.resize(n * q * q);
    for (std::size_t t = 0; t < n; ++t)
        for (unsigned s = 0; s < q; ++s)
            for (unsigned v = 0; v < q; ++v)
                m.table[(t * q + s) * q + v] = static_cast<unsigned>(draw_from(x_table->row(s * q + v), rng));
    return m;
}

Symbols apply_symbol_maps(const SymbolMaps& maps, std::span<const unsigned> s, std::span<const unsigned> v) {
    if (s.size() != v.size() || s.size() != maps.n) throw std::invalid_argument("channel_map: length mismatch");
    Symbols x(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) x[t] = maps(t, s[t], v[t]);
    return x;
}

Symbols channel_map(std::span<const unsigned> s, std::span<const unsigned> v, const std::optional<CondPmf>& x_table,
                    unsigned q, SplitMix64& rng) {
    if (s.size() != v.size()) throw std::invalid_argument("channel_map: length mismatch");
    return apply_symbol_maps(draw_symbol_maps(x_table, q, s.size(), rng), s, v);
}

// ---------------------------------------------------------------- decoder

DecodedTriple map_decode(std::span<const unsigned> y, const LinearEncoder& enc,
                         const std::array<SymbolMaps, 3>& maps, const LinearSource& source,
                         const MacChannel& channel, std::uint64_t candidate_cap) {
    enc.validate();
    source.validate();
    if (source.q != enc.q) throw std::invalid_argument("map_decode: source and code fields differ");
    const unsigned q = enc.q;
    const std::size_t n = enc.n;
    if (y.size() != n) throw std::invalid_argument("map_decode: received length != n");
    const std::uint64_t qn = ipow(q, n, candidate_cap);
    if (qn > candidate_cap || qn * qn > candidate_cap)
        throw std::invalid_argument("map_decode: q^(2n) candidates exceed cap");

    // log p(y | x) by flat input index.
    const auto ny = channel.output_size();
    const auto& k = channel.kernel();
    std::vector<double> logw(k.values().size());
    for (std::size_t i = 0; i < logw.size(); ++i)
        logw[i] = k.values()[i] > 0.0 ? std::log(k.values()[i]) : -std::numeric_limits<double>::infinity();
    for (auto yt : y)
        if (yt >= ny) throw std::invalid_argument("map_decode: output symbol out of range");

    struct Side {
        std::vector<std::uint64_t> idx;
        std::vector<double> logp;
        std::vector<Symbols> s, v, x;
    };
    auto build = [&](int user) {
        Side side;
        Symbols s(n);
        for (std::uint64_t i = 0; i < qn; ++i) {
            to_digits(i, q, s);
            double lp = 0.0;
            bool ok = true;
            for (auto a : s) {
                const double p = user == 1 ? source.prob1(a) : source.prob3(a);
                if (p <= 0.0) {
                    ok = false;
                    break;
                }
                lp += std::log(p);
            }
            if (!ok) continue;
            auto v = encode(enc, s, user);
            auto x = apply_symbol_maps(maps[static_cast<std::size_t>(user - 1)], s, v);
            side.idx.push_back(i);
            side.logp.push_back(lp);
            side.s.push_back(s);
            side.v.push_back(std::move(v));
            side.x.push_back(std::move(x));
        }
        return side;
    };
    const Side one = build(1);
    const Side three = build(3);

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best1 = 0, best3 = 0;
    bool found = false;
    Symbols x2(n);
    for (std::size_t a = 0; a < one.idx.size(); ++a) {
        for (std::size_t c = 0; c < three.idx.size(); ++c) {
            double partial = one.logp[a] + three.logp[c];
            if (!(partial > best)) continue;
            std::size_t t = 0;
            for (; t < n; ++t) {
                const unsigned s2 = (three.s[c][t] + q - one.s[a][t]) % q;
                const unsigned v2 = (three.v[c][t] + q - one.v[a][t]) % q;
                const unsigned xx2 = maps[1](t, s2, v2);
                partial += logw[x_flat(channel, one.x[a][t], xx2, three.x[c][t]) * ny + y[t]];
                if (!(partial > best)) break;
            }
            if (t == n) {
                best = partial;
                best1 = a;
                best3 = c;
                found = true;
            }
        }
    }
    if (!found) throw std::runtime_error("map_decode: no candidate has positive posterior");

    DecodedTriple d;
    d.s[0] = one.s[best1];
    d.s[2] = three.s[best3];
    d.s[1].resize(n);
    for (std::size_t t = 0; t < n; ++t) d.s[1][t] = (d.s[2][t] + q - d.s[0][t]) % q;
    d.score = best;
    d.candidate = one.idx[best1] * qn + three.idx[best3];
    return d;
}

// ---------------------------------------------------------------- Monte Carlo

void SimConfig::validate() const {
    validate_sampling();
    const auto qn = ipow(q, n, candidate_cap);
    if (qn > candidate_cap || qn * qn > candidate_cap)
        throw std::invalid_argument("SimConfig: q^(2n) candidates exceed cap");
}

void SimConfig::validate_sampling() const {
    if (n == 0) throw std::invalid_argument("SimConfig: n must be positive");
    if (trials == 0) throw std::invalid_argument("SimConfig: trials must be positive");
    if (decoder != "map") throw std::invalid_argument("SimConfig: decoder must be 'map'");
    LinearSource{q, sigma, gamma}.validate();
    const auto ch = resolved_channel();
    for (int i = 1; i <= 3; ++i) {
        const std::size_t nx = x_table ? x_table->at(static_cast<std::size_t>(i - 1)).target_size() : q;
        if (x_table) check_x_table(x_table->at(static_cast<std::size_t>(i - 1)), q, i);
        if (nx != ch.input_size(i))
            throw std::invalid_argument("SimConfig: X_" + std::to_string(i) +
                                        " alphabet does not match the channel (an x_table is required when q != 2)");
    }
}

MacChannel SimConfig::resolved_channel() const { return channel ? *channel : example2_channel(NoiseSpec(delta)); }

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

namespace {

struct TrialDraw {
    LinearEncoder enc;
    std::array<Symbols, 3> s, v, x;
    std::array<SymbolMaps, 3> maps;
};

TrialDraw draw_trial(const SimConfig& cfg, const LinearSource& src, const std::optional<LinearEncoder>& fixed,
                     std::size_t trial) {
    auto rng = SplitMix64::substream(cfg.seed, 3, trial);
    TrialDraw d;
    d.enc = fixed ? *fixed : LinearEncoder::random(cfg.q, cfg.n, rng);
    const unsigned q = cfg.q;
    for (auto& s : d.s) s.resize(cfg.n);
    for (std::size_t t = 0; t < cfg.n; ++t) {
        d.s[0][t] = draw_letter(src.sigma, q, rng);
        d.s[2][t] = draw_letter(src.gamma, q, rng);
        d.s[1][t] = (d.s[2][t] + q - d.s[0][t]) % q;
    }
    for (int i = 1; i <= 3; ++i) {
        const auto k = static_cast<std::size_t>(i - 1);
        d.v[k] = encode(d.enc, d.s[k], i);
        d.maps[k] = draw_symbol_maps(cfg.x_table ? std::optional<CondPmf>(cfg.x_table->at(k)) : std::nullopt, q,
                                     cfg.n, rng);
        d.x[k] = apply_symbol_maps(d.maps[k], d.s[k], d.v[k]);
    }
    return d;
}

std::optional<LinearEncoder> fixed_encoder(const SimConfig& cfg) {
    if (!cfg.fixed_code) return std::nullopt;
    auto rng = SplitMix64::substream(cfg.seed, 4, 0);
    return LinearEncoder::random(cfg.q, cfg.n, rng);
}

}  // namespace

SimResult monte_carlo(const SimConfig& cfg) {
    cfg.validate();
    const LinearSource src{cfg.q, cfg.sigma, cfg.gamma};
    const auto channel = cfg.resolved_channel();
    const auto fixed = fixed_encoder(cfg);

    struct Outcome {
        int error_case = 0;  // 0: correct, 1..4
        bool linear = false;
    };
    std::vector<Outcome> out(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t trial) {
        auto d = draw_trial(cfg, src, fixed, trial);
        auto rng = SplitMix64::substream(cfg.seed, 5, trial);
        Symbols y(cfg.n);
        for (std::size_t t = 0; t < cfg.n; ++t)
            y[t] = static_cast<unsigned>(
                draw_from(channel.kernel().row(x_flat(channel, d.x[0][t], d.x[1][t], d.x[2][t])), rng));
        Outcome o;
        o.linear = true;
        for (std::size_t t = 0; t < cfg.n; ++t)
            if (d.v[2][t] != (d.v[0][t] + d.v[1][t]) % cfg.q) o.linear = false;
        const auto dec = map_decode(y, d.enc, d.maps, src, channel, cfg.candidate_cap);
        const bool e1 = dec.s[0] != d.s[0], e2 = dec.s[1] != d.s[1], e3 = dec.s[2] != d.s[2];
        if (e1 && !e2)
            o.error_case = 1;
        else if (!e1 && e2)
            o.error_case = 2;
        else if (e1 && e2)
            o.error_case = e3 ? 4 : 3;
        out[trial] = o;
    });

    SimResult r;
    r.n = cfg.n;
    r.q = cfg.q;
    r.delta = cfg.delta;
    r.sigma = cfg.sigma;
    r.gamma = cfg.gamma;
    r.trials = cfg.trials;
    r.seed = cfg.seed;
    for (const auto& o : out) {
        if (o.error_case) {
            ++r.errors;
            ++r.cases[static_cast<std::size_t>(o.error_case - 1)];
        }
        if (o.linear) ++r.linearity_holds;
    }
    r.p_e_hat = static_cast<double>(r.errors) / static_cast<double>(r.trials);
    std::tie(r.ci_lo, r.ci_hi) = wilson_interval(r.errors, r.trials);
    return r;
}

std::string sim_csv_header() {
    return "n,q,delta,sigma,gamma,trials,errors,p_e_hat,ci_lo,ci_hi,case1,case2,case3,case4,seed\n";
}

std::string sim_csv_row(const SimResult& r) {
    std::ostringstream out;
    out.precision(17);
    out << r.n << ',' << r.q << ',' << r.delta << ',' << r.sigma << ',' << r.gamma << ',' << r.trials << ','
        << r.errors << ',' << r.p_e_hat << ',' << r.ci_lo << ',' << r.ci_hi << ',' << r.cases[0] << ','
        << r.cases[1] << ',' << r.cases[2] << ',' << r.cases[3] << ',' << r.seed << '\n';
    return out.str();
}

// ---------------------------------------------------------------- exact code statistics

Lemma4Report lemma4_verify(std::size_t n, unsigned q) {
    if (!is_prime(q)) throw std::invalid_argument("lemma4_verify: q must be prime");
    if (n == 0) throw std::invalid_argument("lemma4_verify: n must be positive");
    const std::uint64_t cap = kLemma4WorkCap;
    const std::uint64_t matrices = ipow(q, n * n, cap);
    const std::uint64_t Q = ipow(q, n, cap);
    if (matrices > cap || Q > cap || Q * Q > cap || matrices * Q * Q > cap || Q * Q * Q * Q > (std::uint64_t{1} << 22))
        throw std::invalid_argument("lemma4_verify: enumeration exceeds cap");

    // counts[((s1 * Q + s2) * Q + v1) * Q + v2]
    std::vector<std::uint32_t> counts(Q * Q * Q * Q, 0);
    std::vector<unsigned> g(n * n, 0);
    std::vector<std::uint64_t> image(Q);
    Symbols s(n);
    for (std::uint64_t m = 0; m < matrices; ++m) {
        for (std::uint64_t si = 0; si < Q; ++si) {
            to_digits(si, q, s);
            std::uint64_t v = 0;
            for (std::size_t c = 0; c < n; ++c) {
                unsigned acc = 0;
                for (std::size_t r = 0; r < n; ++r) acc = (acc + s[r] * g[r * n + c]) % q;
                v = v * q + acc;
            }
            image[si] = v;
        }
        for (std::uint64_t s1 = 0; s1 < Q; ++s1)
            for (std::uint64_t s2 = 0; s2 < Q; ++s2) ++counts[((s1 * Q + s2) * Q + image[s1]) * Q + image[s2]];
        for (std::size_t d = g.size(); d-- > 0;) {
            if (++g[d] < q) break;
            g[d] = 0;
        }
    }

    Lemma4Report rep;
    rep.n = n;
    rep.q = q;
    rep.matrices = matrices;
    const std::uint64_t qn = Q, q2n = Q * Q;
    for (std::uint64_t s1 = 0; s1 < Q; ++s1)
        for (std::uint64_t s2 = 0; s2 < Q; ++s2) {
            if (s1 == 0 && s2 == 0) continue;
            for (std::uint64_t v1 = 0; v1 < Q; ++v1)
                for (std::uint64_t v2 = 0; v2 < Q; ++v2) {
                    ++rep.classes;
                    // P = count / matrices; formula P = ind * q^{-k}. Compare count * q^k == ind * matrices.
                    std::uint64_t scale;
                    bool ind;
                    if (s1 == 0) {
                        scale = qn;
                        ind = v1 == 0;
                    } else if (s2 == 0) {
                        scale = qn;
                        ind = v2 == 0;
                    } else if (s1 == s2) {
                        scale = qn;
                        ind = v1 == v2;
                    } else {
                        scale = q2n;
                        ind = true;
                    }
                    const std::uint64_t c = counts[((s1 * Q + s2) * Q + v1) * Q + v2];
                    if (c * scale != (ind ? matrices : 0)) ++rep.mismatches;
                }
        }
    return rep;
}

EmpiricalType::EmpiricalType(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    std::size_t size = 1;
    for (auto d : dims_) {
        if (d == 0) throw std::invalid_argument("EmpiricalType: empty alphabet");
        size *= d;
    }
    counts_.assign(size, 0);
}

void EmpiricalType::add(std::span<const std::size_t> symbols) {
    if (symbols.size() != dims_.size()) throw std::invalid_argument("EmpiricalType: tuple arity mismatch");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (symbols[k] >= dims_[k]) throw std::invalid_argument("EmpiricalType: symbol out of range");
        flat = flat * dims_[k] + symbols[k];
    }
    ++counts_[flat];
    ++total_;
}

double EmpiricalType::distance(std::span<const double> ref) const {
    if (ref.size() != counts_.size()) throw std::invalid_argument("EmpiricalType: reference size mismatch");
    if (total_ == 0) throw std::invalid_argument("EmpiricalType: no observations");
    double d = 0.0;
    for (std::size_t a = 0; a < ref.size(); ++a)
        d = std::max(d, std::abs(static_cast<double>(counts_[a]) / static_cast<double>(total_) - ref[a]));
    return d;
}

JointPmf lemma3_reference(const SimConfig& cfg) {
    cfg.validate_sampling();
    const unsigned q = cfg.q;
    JointPmf j = LinearSource{q, cfg.sigma, cfg.gamma}.joint();
    j = compose(j, CondPmf({}, {Alphabet("V1", q), Alphabet("V2", q)},
                           std::vector<double>(static_cast<std::size_t>(q) * q, 1.0 / (q * q))));
    j = attach_function(
        j, VarSet{"V1", "V2"}, [q](std::span<const std::size_t> v) { return (v[0] + v[1]) % q; },
        Alphabet("V3", q));
    for (int i = 1; i <= 3; ++i) {
        const auto k = static_cast<std::size_t>(i - 1);
        const std::vector<Alphabet> given{Alphabet("S" + std::to_string(i), q), Alphabet("V" + std::to_string(i), q)};
        const auto nx = cfg.x_table ? cfg.x_table->at(k).target_size() : q;
        const std::vector<Alphabet> target{Alphabet("X" + std::to_string(i), nx)};
        if (cfg.x_table) {
            const auto vals = cfg.x_table->at(k).values();
            j = compose(j, CondPmf(given, target, std::vector<double>(vals.begin(), vals.end())));
        } else {
            j = compose(j, CondPmf::deterministic(given, target, [](std::span<const std::size_t> g) { return g[1]; }));
        }
    }
    return j;
}

Lemma3Report lemma3_check(const SimConfig& cfg, double tol) {
    const auto ref = lemma3_reference(cfg);
    const LinearSource src{cfg.q, cfg.sigma, cfg.gamma};
    const auto fixed = fixed_encoder(cfg);
    std::vector<std::size_t> dims;
    for (const auto& a : ref.axes()) dims.push_back(a.size());

    std::vector<double> dist(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t trial) {
        const auto d = draw_trial(cfg, src, fixed, trial);
        EmpiricalType type(dims);
        std::array<std::size_t, 9> tuple{};
        for (std::size_t t = 0; t < cfg.n; ++t) {
            for (std::size_t k = 0; k < 3; ++k) {
                tuple[k] = d.s[k][t];
                tuple[3 + k] = d.v[k][t];
                tuple[6 + k] = d.x[k][t];
            }
            type.add(tuple);
        }
        dist[trial] = type.distance(ref.values());
    });

    Lemma3Report r;
    r.n = cfg.n;
    r.trials = cfg.trials;
    double sum = 0.0;
    for (double x : dist) {
        if (x <= tol) ++r.within;
        sum += x;
    }
    r.fraction = static_cast<double>(r.within) / static_cast<double>(r.trials);
    r.mean_distance = sum / static_cast<double>(r.trials);
    return r;
}

}  // namespace jscc
