// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "jscc/experiments.hpp"
#include "jscc/linear_sim.hpp"
#include "jscc/search.hpp"

using namespace jscc;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string f(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

int failures = 0;

void run(int id, double limit_s, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_s) {
        v.pass = false;
        v.detail += "; runtime over limit";
    }
    if (!v.pass) ++failures;
    std::printf("%s criterion %d (%.2fs, limit %gs): %s\n", v.pass ? "PASS" : "FAIL", id, secs, limit_s,
                v.detail.c_str());
    std::fflush(stdout);
}

double noise_entropy(double d) {
    double h = 0.0;
    for (double p : {0.5 - d, 0.5, d})
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

Verdict c1() {
    bool ok = std::abs(gamma_star(0.0) - 0.5) <= 1e-12;
    double worst = 0.0;
    for (double d : {0.0, 1.0 / 16, 1.0 / 8, 3.0 / 16, 3.0 / 8})
        worst = std::max(worst, std::abs(binary_entropy(gamma_star(d)) - (2.0 - noise_entropy(d))));
    ok = ok && worst <= 1e-10;
    return {ok, "gamma*(0)=" + f(gamma_star(0.0), 15) + ", max |h(gamma*)-(2-H(N))|=" + f(worst, 3)};
}

Verdict c2() {
    bool ok = true;
    double worst_witness = 0.0, max_h = 0.0;
    int accepted = 0;
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<Alphabet> xs{Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("X3", 2)};
    for (double d : {0.0, 1.0 / 8, 3.0 / 8}) {
        const auto ch = example2_channel(NoiseSpec(d));
        JointPmf parity(xs, {0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0});
        worst_witness = std::max(worst_witness, std::abs(entropy(compose(parity, ch.kernel()), {"Y"}) - 2.0));

        int n = 0;
        while (n < 1000) {
            const auto src = example2_source(u(g), u(g));
            JointPmf j = src.joint();
            for (int i = 1; i <= 3; ++i) {
                const double a = u(g), b = u(g);
                j = compose(j, CondPmf({Alphabet("S" + std::to_string(i), 2)}, {Alphabet("X" + std::to_string(i), 2)},
                                       {1 - a, a, 1 - b, b}));
            }
            const auto px = marginalize(j, {"X1", "X2", "X3"});
            double viol = 0.0;
            for (std::size_t k = 0; k < 8; ++k)
                if (((k >> 2) ^ (k >> 1)) % 2 != (k & 1)) viol += px.values()[k];
            if (viol < 0.01) continue;
            ++n;
            ++accepted;
            const double h = entropy(compose(j, ch.kernel()), {"Y"});
            max_h = std::max(max_h, h);
            if (h > 2.0 - 1e-6) ok = false;
        }
    }
    ok = ok && worst_witness <= 1e-10;
    return {ok, "witness |H(Y)-2|=" + f(worst_witness, 3) + "; " + std::to_string(accepted) +
                    " random product conditionals, max H(Y)=" + f(max_h, 10)};
}

Verdict c3() {
    const double d = 0.125;
    const auto src = example2_source(0.05, gamma_star(d));
    const auto ch = example2_channel(NoiseSpec(d));
    const double cap = 2.0 - NoiseSpec(d).entropy();
    GridSpec g;
    g.step = 1.0 / 64;
    g.restarts = 32;
    const auto r64 = maximize_ces_outer(src, ch, g);
    g.step = 1.0 / 128;
    const auto r128 = maximize_ces_outer(src, ch, g);
    const double gap = cap - r64.best_value;
    const bool ok = r64.best_value < cap && gap > 0.0 && r128.best_value >= r64.best_value && r128.best_value < cap;
    return {ok, "2-H(N)=" + f(cap, 10) + ", value(1/64)=" + f(r64.best_value, 10) + ", gap=" + f(gap, 4) +
                    ", value(1/128)=" + f(r128.best_value, 10)};
}

std::array<double, 4> reduced_slacks(double sigma, double gamma, double d, double flip) {
    const auto src = example2_source(sigma, gamma);
    const auto ch = example2_channel(NoiseSpec(d));
    const auto r = reduced_example2_report(sigma, gamma, d, perturbed_copy_tables(src, ch, flip));
    return {r.entries[0].slack, r.entries[1].slack, r.entries[2].slack, r.entries[3].slack};
}

std::string fmt4(const std::array<double, 4>& s) {
    return "(" + f(s[0], 4) + ", " + f(s[1], 4) + ", " + f(s[2], 4) + ", " + f(s[3], 4) + ")";
}

Verdict c4() {
    bool ok = true;
    std::string detail;
    for (double d : {0.0, 0.125}) {
        const auto b = reduced_slacks(0.0, gamma_star(d), d, 0.0);
        const bool bok = *std::min_element(b.begin(), b.end()) >= -kSlackTolerance && std::abs(b[0]) <= 1e-9 &&
                         std::abs(b[3]) <= 1e-9;
        ok = ok && bok;
        detail += "delta=" + f(d, 3) + " boundary slacks " + fmt4(b) + (bok ? " ok" : " BAD") + "; ";
    }
    // Interior point. With X_i = V_i the second slack is -h(sigma); also try X1 flipped.
    for (double d : {0.0, 0.125}) {
        const double sg = 1e-3, gm = gamma_star(d) - 1e-2;
        const auto copy = reduced_slacks(sg, gm, d, 0.0);
        double best_min = -std::numeric_limits<double>::infinity(), best_flip = 0.0;
        std::array<double, 4> best{};
        for (int k = 0; k <= 100; ++k) {
            const double flip = 0.001 * k;
            const auto s = reduced_slacks(sg, gm, d, flip);
            const double m = *std::min_element(s.begin(), s.end());
            if (m > best_min) best_min = m, best_flip = flip, best = s;
        }
        const bool iok = best_min > 0.0;
        ok = ok && iok;
        detail += "delta=" + f(d, 3) + " interior X=V slacks " + fmt4(copy) + ", best X1-flip " + f(best_flip, 3) +
                  " slacks " + fmt4(best) + (iok ? " ok" : " NOT all positive");
        if (d == 0.0 && !iok) {
            const double sum = binary_entropy(sg) + binary_entropy(gm);
            detail += " [h(sigma)+h(gamma)=" + f(sum, 6) + " > 2-H(N)=" + f(2.0 - NoiseSpec(d).entropy(), 6) +
                      ", which bounds every total right side, so no scheme makes the last slack positive]";
        }
        detail += "; ";
    }
    return {ok, detail};
}

Verdict c5() {
    std::string detail;
    bool ok = true;
    for (std::size_t n : {2u, 3u}) {
        const auto r = lemma4_verify(n, 2);
        ok = ok && r.passed() && r.matrices == (std::uint64_t{1} << (n * n));
        detail += "n=" + std::to_string(n) + ": " + std::to_string(r.matrices) + " matrices, " +
                  std::to_string(r.classes) + " classes, " + std::to_string(r.mismatches) + " mismatches; ";
    }
    return {ok, detail};
}

void randomize(CondPmf& t, std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t r = 0; r < t.given_size(); ++r) {
        std::vector<double> p(t.target_size());
        double z = 0.0;
        for (auto& v : p) z += v = u(g) < 0.2 ? 0.0 : -std::log(1.0 - u(g));
        if (z == 0.0) p[0] = z = 1.0;
        for (auto& v : p) v /= z;
        t.set_row(r, p);
    }
}

Verdict c6() {
    std::mt19937_64 g(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_prop = 0.0, worst_reduced = 0.0;
    std::size_t compared = 0;
    for (double d : {0.0, 0.125, 0.375}) {
        const auto ch = example2_channel(NoiseSpec(d));
        for (int rep = 0; rep < 4; ++rep) {
            const auto src = example2_source(rep == 0 ? 0.0 : u(g) * 0.5, u(g) * 0.5);
            const auto parts = decompose_common_parts(src);
            auto s = uniform_scheme(src, ch, parts, SchemeShape{2, {2, 2, 2}, 1});
            randomize(s.u123, g);
            for (auto& t : s.u_pair) randomize(t, g);
            for (auto& t : s.x) randomize(t, g);
            const auto a = assemble_joint(src, ch, parts, std::nullopt, s);
            const auto p = eval_prop1(a);
            const auto t = eval_thm1(a);
            for (const auto& e : p.entries) {
                const auto& m = t.find("thm1." + e.family.substr(6), e.roles, "{}", e.b_set);
                worst_prop = std::max({worst_prop, std::abs(e.lhs - m.lhs), std::abs(e.rhs - m.rhs)});
                ++compared;
            }

            const double flip = 0.2 * u(g);
            const auto sv = perturbed_copy_tables(src, ch, flip);
            const double sg = marginalize(src.joint(), {"S1"}).values()[1];
            const double gm = marginalize(src.joint(), {"S3"}).values()[1];
            const auto r = reduced_example2_report(sg, gm, d, sv);
            const auto full =
                eval_thm1(assemble_joint(src, ch, parts, identity_additive_part(2, src), scheme_from_sv(src, parts, 2, sv)));
            const RegionEntry* m[] = {&full.find("thm1.pair", "i=2,j=3,k=1"), &full.find("thm1.pair", "i=1,j=2,k=3"),
                                      &full.find("thm1.pair", "i=1,j=3,k=2"), &full.find("thm1.total", "")};
            for (int k = 0; k < 4; ++k)
                worst_reduced = std::max({worst_reduced, std::abs(r.entries[k].lhs - m[k]->lhs),
                                          std::abs(r.entries[k].rhs - m[k]->rhs)});
        }
    }
    const bool ok = worst_prop <= 1e-12 && worst_reduced <= 1e-10 && compared == 12 * 36;
    return {ok, std::to_string(compared) + " shared entries, max diff " + f(worst_prop, 3) +
                    "; reduced vs full max diff " + f(worst_reduced, 3)};
}

// Exhaustive argmax over (s1, s3), first strict improvement wins.
std::uint64_t brute_decode(const Symbols& y, const LinearEncoder& e, const std::array<SymbolMaps, 3>& m,
                           const LinearSource& src, const MacChannel& ch, double& best_score) {
    const unsigned q = e.q;
    std::uint64_t qn = 1;
    for (std::size_t t = 0; t < e.n; ++t) qn *= q;
    auto digits = [&](std::uint64_t idx) {
        Symbols s(e.n);
        for (std::size_t t = e.n; t-- > 0; idx /= q) s[t] = static_cast<unsigned>(idx % q);
        return s;
    };
    auto enc = [&](const Symbols& s, const Symbols& b) {
        Symbols v(e.n);
        for (std::size_t c = 0; c < e.n; ++c) {
            unsigned long acc = b[c];
            for (std::size_t r = 0; r < e.n; ++r) acc += static_cast<unsigned long>(s[r]) * e.G[r * e.n + c];
            v[c] = static_cast<unsigned>(acc % q);
        }
        return v;
    };
    const auto ny = ch.output_size();
    best_score = -std::numeric_limits<double>::infinity();
    std::uint64_t best = 0;
    for (std::uint64_t i1 = 0; i1 < qn; ++i1) {
        const auto s1 = digits(i1);
        double lp1 = 0.0;
        bool ok = true;
        for (auto a : s1) {
            ok = ok && src.prob1(a) > 0.0;
            lp1 += std::log(src.prob1(a));
        }
        if (!ok) continue;
        for (std::uint64_t i3 = 0; i3 < qn; ++i3) {
            const auto s3 = digits(i3);
            double lp3 = 0.0;
            bool ok3 = true;
            for (auto a : s3) {
                ok3 = ok3 && src.prob3(a) > 0.0;
                lp3 += std::log(src.prob3(a));
            }
            if (!ok3) continue;
            Symbols s2(e.n);
            for (std::size_t t = 0; t < e.n; ++t) s2[t] = (s3[t] + q - s1[t]) % q;
            const auto v1 = enc(s1, e.b[0]), v2 = enc(s2, e.b[1]), v3 = enc(s3, e.b[2]);
            double score = lp1 + lp3;
            for (std::size_t t = 0; t < e.n; ++t) {
                const std::size_t gi[] = {m[0](t, s1[t], v1[t]), m[1](t, s2[t], v2[t]), m[2](t, s3[t], v3[t])};
                const double w = ch.kernel().values()[ch.kernel().given_flat(gi) * ny + y[t]];
                score += w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity();
            }
            if (score > best_score) {
                best_score = score;
                best = i1 * qn + i3;
            }
        }
    }
    return best;
}

Verdict c7() {
    SimConfig c;
    c.delta = 0.0;
    c.sigma = 0.0;
    c.gamma = 0.11;
    c.q = 2;
    c.trials = 2000;
    c.seed = 7;
    c.n = 4;
    const auto r4 = monte_carlo(c);
    c.n = 12;
    const auto r12 = monte_carlo(c);
    bool ok = r12.p_e_hat < r4.p_e_hat && r4.linearity_holds == r4.trials && r12.linearity_holds == r12.trials;

    SplitMix64 rng(77);
    int matched = 0, instances = 0;
    for (int rep = 0; instances < 100 && rep < 1000; ++rep) {
        const std::size_t n = 1 + rep % 5;
        const double d = rep % 2 == 0 ? 0.0 : 0.125;
        const LinearSource src{2, rep % 3 == 0 ? 0.0 : 0.15, 0.11};
        const auto ch = example2_channel(NoiseSpec(d));
        const auto e = LinearEncoder::random(2, n, rng);
        std::array<SymbolMaps, 3> maps;
        for (auto& m : maps) m = SymbolMaps{n, 2, 2, {}};
        Symbols y(n);
        for (auto& v : y) v = static_cast<unsigned>(rng.below(4));
        double best = 0.0;
        const auto want = brute_decode(y, e, maps, src, ch, best);
        if (!std::isfinite(best)) continue;
        ++instances;
        const auto got = map_decode(y, e, maps, src, ch);
        if (got.candidate == want) ++matched;
    }
    ok = ok && instances == 100 && matched == 100;
    return {ok, "p_e(n=4)=" + f(r4.p_e_hat, 4) + ", p_e(n=12)=" + f(r12.p_e_hat, 4) + ", linearity " +
                    std::to_string(r4.linearity_holds + r12.linearity_holds) + "/" +
                    std::to_string(r4.trials + r12.trials) + ", decoder matched " + std::to_string(matched) + "/" +
                    std::to_string(instances)};
}

Verdict c8() {
    const auto src = example2_source(0.3, 0.3);
    const auto parts = decompose_common_parts(src);
    const bool k1 = parts.w12.k == 1 && parts.w13.k == 1 && parts.w23.k == 1 && parts.w123.k == 1;
    const auto classes = find_q_additive_parts(src, 2);
    const QAdditivePart id{2, {std::vector<unsigned>{0, 1}, {0, 1}, {0, 1}}};
    const bool one = classes.size() == 1 && classes[0] == id;
    return {k1 && one, "k = (" + std::to_string(parts.w12.k) + ", " + std::to_string(parts.w13.k) + ", " +
                           std::to_string(parts.w23.k) + ", " + std::to_string(parts.w123.k) + "), " +
                           std::to_string(classes.size()) + " 2-additive class(es)" +
                           (one ? ", identity" : "")};
}

Verdict c9() {
    const double d = 0.125, gs = gamma_star(d);
    std::vector<double> gammas;
    for (int k = 6; k >= 0; --k) gammas.push_back(gs - 0.005 * k);
    const auto rows = improvement_sweep(d, {0.001, 0.002, 0.005, 0.01, 0.02, 0.05}, gammas);
    int flagged = 0;
    const SweepRow* first = nullptr;
    for (const auto& r : rows)
        if (r.improved) {
            ++flagged;
            if (!first) first = &r;
        }
    std::string detail = std::to_string(flagged) + " of " + std::to_string(rows.size()) + " points flagged";
    if (first)
        detail += ", e.g. sigma=" + f(first->sigma, 3) + " gamma=" + f(first->gamma, 6) + ": h+h=" +
                  f(first->lhs_sum, 6) + " > ceiling " + f(first->ces_ceiling, 6) + ", min slack " +
                  f(first->thm1_min_slack, 4);
    return {flagged > 0, detail};
}

}  // namespace

int main() {
    run(1, 1, c1);
    run(2, 10, c2);
    run(3, 300, c3);
    run(4, 10, c4);
    run(5, 30, c5);
    run(6, 60, c6);
    run(7, 600, c7);
    run(8, 1, c8);
    run(9, 900, c9);
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
