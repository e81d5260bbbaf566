#include "jscc/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <initializer_list>
#include <stdexcept>

#include "jscc/common_parts.hpp"

namespace jscc {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(12);
    o << v;
    return o.str();
}

// Key/value pairs rendered both as the summary text and as a CSV table, so
// every summary number is also machine readable.
class Summary {
public:
    void add(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }
    void add(std::string key, double value) { add(std::move(key), fmt(value)); }
    void note(std::string line) { notes_.push_back(std::move(line)); }

    void into(ReportBundle& b) const {
        std::ostringstream text, csv;
        csv << "key,value\n";
        for (const auto& [k, v] : rows_) {
            text << k << " = " << v << '\n';
            csv << k << ',' << v << '\n';
        }
        for (const auto& n : notes_) text << n << '\n';
        b.summary = text.str();
        b.tables.insert(b.tables.begin(), CsvTable{"summary", csv.str()});
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
    std::vector<std::string> notes_;
};

json provenance(const std::string& command, std::uint64_t seed, json config) {
    return json{{"tool", "jscc"}, {"version", kToolVersion}, {"command", command}, {"seed", seed},
                {"config", std::move(config)}};
}

json grid_to_json(const GridSpec& g) {
    return json{{"step", g.step}, {"restarts", g.restarts}, {"max_iters", g.max_iters}, {"tol", g.tol},
                {"seed", g.seed}};
}

void reject_unknown(const json& j, const char* what, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw std::invalid_argument(std::string("unknown key '") + key + "' in '" + what + "'");
    }
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    if (!j.is_object()) throw std::invalid_argument("'grid' must be an object");
    reject_unknown(j, "grid", {"step", "restarts", "max_iters", "tol", "seed"});
    if (j.contains("step")) g.step = parse_probability(j.at("step"));
    if (j.contains("restarts")) g.restarts = j.at("restarts").get<int>();
    if (j.contains("max_iters")) g.max_iters = j.at("max_iters").get<int>();
    if (j.contains("tol")) g.tol = j.at("tol").get<double>();
    if (j.contains("seed")) g.seed = j.at("seed").get<std::uint64_t>();
    g.validate();
    return g;
}

json sim_to_json(const SimConfig& c) {
    json j{{"n", c.n},         {"q", c.q},         {"delta", c.delta},
           {"sigma", c.sigma}, {"gamma", c.gamma}, {"trials", c.trials},
           {"seed", c.seed},   {"decoder", c.decoder}, {"fixed_code", c.fixed_code}};
    if (c.x_table) {
        json tables = json::array();
        for (const auto& t : *c.x_table) tables.push_back(std::vector<double>(t.values().begin(), t.values().end()));
        j["x_table"] = tables;
    }
    return j;
}

SimConfig sim_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("'sim' must be an object");
    reject_unknown(j, "sim", {"n", "q", "delta", "sigma", "gamma", "trials", "seed", "decoder", "fixed_code", "x_table"});
    SimConfig c;
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (j.contains("q")) c.q = j.at("q").get<unsigned>();
    if (j.contains("delta")) c.delta = parse_probability(j.at("delta"));
    if (j.contains("sigma")) c.sigma = parse_probability(j.at("sigma"));
    if (j.contains("gamma")) c.gamma = parse_probability(j.at("gamma"));
    if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("decoder")) c.decoder = j.at("decoder").get<std::string>();
    if (j.contains("fixed_code")) c.fixed_code = j.at("fixed_code").get<bool>();
    if (j.contains("x_table")) {
        const auto& xt = j.at("x_table");
        if (!xt.is_array() || xt.size() != 3) throw std::invalid_argument("'x_table' must hold three tables");
        std::vector<CondPmf> tables;
        for (int i = 1; i <= 3; ++i) {
            std::vector<double> v;
            for (const auto& p : xt.at(static_cast<std::size_t>(i - 1))) v.push_back(parse_probability(p));
            const std::size_t rows = static_cast<std::size_t>(c.q) * c.q;
            if (v.empty() || v.size() % rows) throw std::invalid_argument("'x_table' size must be a multiple of q^2");
            tables.emplace_back(std::vector<Alphabet>{Alphabet(axis::S(i), c.q), Alphabet(axis::V(i), c.q)},
                                std::vector<Alphabet>{Alphabet(axis::X(i), v.size() / rows)}, std::move(v));
        }
        c.x_table = SvTables{tables[0], tables[1], tables[2]};
    }
    return c;
}

std::string join(const std::vector<std::size_t>& v, char sep) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? std::string(1, sep) : "") + std::to_string(v[k]);
    return s;
}

std::string join(const std::vector<unsigned>& v, char sep) {
    return join(std::vector<std::size_t>(v.begin(), v.end()), sep);
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (key != "source" && key != "channel" && key != "grid" && key != "sim" && key != "output")
            throw std::invalid_argument("unknown config key '" + key + "'");
    ExperimentConfig c;
    if (j.contains("source")) {
        (void)source_from_json(j.at("source"));
        c.source = j.at("source");
    }
    if (j.contains("channel")) {
        (void)channel_from_json(j.at("channel"));
        c.channel = j.at("channel");
    }
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
    if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"));
    if (c.channel) c.sim.channel = channel_from_json(*c.channel);
    c.sim.validate_sampling();
    c.output = j.value("output", default_output_dir());
    return c;
}

json ExperimentConfig::to_json() const {
    json j{{"grid", grid_to_json(grid)}, {"sim", sim_to_json(sim)}, {"output", output}};
    if (source) j["source"] = *source;
    if (channel) j["channel"] = *channel;
    return j;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    auto same_grid = grid.step == o.grid.step && grid.restarts == o.grid.restarts &&
                     grid.max_iters == o.grid.max_iters && grid.tol == o.grid.tol && grid.seed == o.grid.seed;
    auto same_sim = sim.n == o.sim.n && sim.q == o.sim.q && sim.delta == o.sim.delta && sim.sigma == o.sim.sigma &&
                    sim.gamma == o.sim.gamma && sim.trials == o.sim.trials && sim.seed == o.sim.seed &&
                    sim.decoder == o.sim.decoder && sim.fixed_code == o.sim.fixed_code &&
                    sim.x_table == o.sim.x_table;
    return source == o.source && channel == o.channel && same_grid && same_sim && output == o.output;
}

std::string default_output_dir() {
    const char* env = std::getenv(kOutputDirEnv);
    return env && *env ? env : "jscc_out";
}

void ReportBundle::write(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream f(fs::path(dir) / name);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        f << content;
    };
    for (const auto& t : tables) put(t.name + ".csv", t.csv);
    for (const auto& [name, content] : companions) put(name, content);
    put("provenance.json", provenance.dump(2) + "\n");
}

std::vector<double> parse_real_list(const std::string& text) {
    auto num = [](const std::string& s) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("malformed number '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> p;
        std::stringstream ss(text);
        for (std::string part; std::getline(ss, part, ':');) p.push_back(num(part));
        if (p.size() != 3 || !(p[2] > 0.0)) throw std::invalid_argument("range must be start:stop:step with step > 0");
        for (std::size_t k = 0;; ++k) {
            const double v = p[0] + static_cast<double>(k) * p[2];
            if (v > p[1] + 1e-12) break;
            out.push_back(v);
        }
        return out;
    }
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');)
        if (!part.empty()) out.push_back(num(part));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

// ---------------------------------------------------------------- commands

CommandOutcome run_gamma_star(double delta) {
    const NoiseSpec noise(delta);
    const double g = gamma_star(delta);
    CommandOutcome out;
    Summary s;
    s.add("delta", delta);
    s.add("H_N_bits", noise.entropy());
    s.add("two_minus_H_N_bits", 2.0 - noise.entropy());
    s.add("gamma_star", g);
    s.into(out.bundle);
    out.bundle.provenance = provenance("gamma-star", 0, json{{"delta", delta}});
    return out;
}

CommandOutcome run_check_ces(double sigma, double gamma, double delta, const GridSpec& grid,
                             const std::optional<SourceTriple>& source, const std::optional<MacChannel>& channel) {
    const bool example_channel = !channel;
    const auto src = source ? *source : example2_source(sigma, gamma);
    const auto ch = channel ? *channel : example2_channel(NoiseSpec(delta));
    const double lhs = entropy(src.joint(), VarSet{"S1", "S2", "S3"});
    const auto res = maximize_ces_outer(src, ch, grid);
    const bool violated = lhs > res.best_value + grid.tol;

    CommandOutcome out;
    Summary s;
    if (!source) {
        s.add("sigma", sigma);
        s.add("gamma", gamma);
    }
    if (example_channel) s.add("delta", delta);
    s.add("lhs_sum_bits", lhs);
    s.add("ces_ceiling_bits", res.best_value);
    s.add("gap_bits", res.best_value - lhs);
    if (example_channel) {
        const double cap = 2.0 - NoiseSpec(delta).entropy();
        s.add("two_minus_H_N_bits", cap);
        s.add("ceiling_below_two_minus_H_N_bits", cap - res.best_value);
    }
    s.add("step", grid.step);
    s.add("restarts", static_cast<double>(grid.restarts));
    s.add("verdict", violated ? "CES necessary condition violated" : "CES necessary condition not violated");
    s.note("(gaps are observed on the search grid, not proved)");
    s.into(out.bundle);

    std::ostringstream t;
    t << "user,s,x,prob\n";
    t.precision(17);
    for (int i = 0; i < 3; ++i) {
        const auto& tab = res.x_tables[static_cast<std::size_t>(i)];
        for (std::size_t g = 0; g < tab.given_size(); ++g)
            for (std::size_t x = 0; x < tab.target_size(); ++x)
                t << i + 1 << ',' << g << ',' << x << ',' << tab.row(g)[x] << '\n';
    }
    out.bundle.tables.push_back({"ces_argmax", t.str()});
    std::ostringstream tr;
    tr << "restart,best_value_bits\n";
    tr.precision(17);
    for (std::size_t r = 0; r < res.trace.size(); ++r) tr << r << ',' << res.trace[r] << '\n';
    out.bundle.tables.push_back({"ces_trace", tr.str()});
    out.bundle.provenance = provenance(
        "check-ces", grid.seed, json{{"sigma", sigma}, {"gamma", gamma}, {"delta", delta}, {"grid", grid_to_json(grid)}});
    out.exit_code = violated ? kExitViolated : kExitOk;
    return out;
}

CommandOutcome run_check_thm1(double sigma, double gamma, double delta, const Thm1CheckOptions& options) {
    const NoiseSpec noise(delta);
    const auto src = example2_source(sigma, gamma);
    const auto ch = example2_channel(noise);
    CommandOutcome out;
    Summary s;
    s.add("sigma", sigma);
    s.add("gamma", gamma);
    s.add("delta", delta);
    bool feasible = false;
    if (options.witness) {
        const auto sv = perturbed_copy_tables(src, ch, options.flip);
        const auto rep = reduced_example2_report(sigma, gamma, delta, sv);
        s.add("witness_flip", options.flip);
        const char* names[] = {"slack_pair_23_given_1", "slack_pair_12_given_3", "slack_pair_13_given_2",
                               "slack_total"};
        for (std::size_t k = 0; k < rep.entries.size(); ++k) s.add(names[k], rep.entries[k].slack);
        s.add("witness_min_slack_bits", rep.min_slack());
        feasible = feasible || rep.all_satisfied();
        out.bundle.tables.push_back({"reduced", rep.to_csv()});
    }
    if (options.search) {
        const auto res = feasibility_search_thm1(src, ch, identity_additive_part(2, src), SchemeShape{}, options.grid);
        s.add("search_min_slack_bits", res.best_min_slack);
        feasible = feasible || res.best_min_slack >= -kSlackTolerance;
        out.bundle.tables.push_back({"thm1_search", res.report.to_csv()});
    }
    s.add("verdict", feasible ? "feasible" : "infeasible");
    s.into(out.bundle);
    out.bundle.provenance = provenance("check-thm1", options.grid.seed,
                                       json{{"sigma", sigma},
                                            {"gamma", gamma},
                                            {"delta", delta},
                                            {"witness", options.witness},
                                            {"flip", options.flip},
                                            {"search", options.search},
                                            {"grid", grid_to_json(options.grid)}});
    out.exit_code = feasible ? kExitOk : kExitViolated;
    return out;
}

CommandOutcome run_sweep(double delta, const std::vector<double>& sigmas, const std::vector<double>& gammas,
                         const SweepOptions& options) {
    const auto rows = improvement_sweep(delta, sigmas, gammas, options);
    CommandOutcome out;
    Summary s;
    s.add("delta", delta);
    s.add("points", static_cast<double>(rows.size()));
    std::size_t flagged = 0;
    for (const auto& r : rows) flagged += r.improved ? 1 : 0;
    s.add("improved_points", static_cast<double>(flagged));
    s.note("(improvement is observed on the search grid)");
    s.into(out.bundle);
    out.bundle.tables.push_back({"sweep", sweep_to_csv(rows)});

    std::ostringstream dat;
    dat.precision(12);
    dat << "# sigma gamma lhs_sum ces_ceiling thm1_min_slack improved\n";
    double last_sigma = rows.empty() ? 0.0 : rows.front().sigma;
    for (const auto& r : rows) {
        if (r.sigma != last_sigma) dat << '\n';
        last_sigma = r.sigma;
        dat << r.sigma << ' ' << r.gamma << ' ' << r.lhs_sum << ' ' << r.ces_ceiling << ' ' << r.thm1_min_slack
            << ' ' << (r.improved ? 1 : 0) << '\n';
    }
    out.bundle.companions.emplace_back("sweep.dat", dat.str());
    out.bundle.provenance = provenance("sweep", options.ces_grid.seed,
                                       json{{"delta", delta},
                                            {"sigma_grid", sigmas},
                                            {"gamma_grid", gammas},
                                            {"ces_grid", grid_to_json(options.ces_grid)},
                                            {"thm1_grid", grid_to_json(options.thm1_grid)}});
    return out;
}

CommandOutcome run_simulate(const SimConfig& base, const std::vector<std::size_t>& ns) {
    if (ns.empty()) throw std::invalid_argument("simulate: empty blocklength list");
    CommandOutcome out;
    Summary s;
    std::string csv = sim_csv_header();
    std::size_t linear = 0, total = 0;
    for (auto n : ns) {
        auto cfg = base;
        cfg.n = n;
        const auto r = monte_carlo(cfg);
        csv += sim_csv_row(r);
        s.add("p_e_hat_n" + std::to_string(n), r.p_e_hat);
        linear += r.linearity_holds;
        total += r.trials;
    }
    s.add("linearity_fraction", static_cast<double>(linear) / static_cast<double>(total));
    s.into(out.bundle);
    out.bundle.tables.push_back({"simulation", csv});
    std::vector<std::size_t> nlist(ns.begin(), ns.end());
    out.bundle.provenance = provenance("simulate", base.seed,
                                       json{{"n", nlist},
                                            {"q", base.q},
                                            {"delta", base.delta},
                                            {"sigma", base.sigma},
                                            {"gamma", base.gamma},
                                            {"trials", base.trials},
                                            {"fixed_code", base.fixed_code}});
    return out;
}

CommandOutcome run_common_parts(const SourceTriple& source, const std::vector<unsigned>& qs) {
    const auto parts = decompose_common_parts(source);
    CommandOutcome out;
    Summary s;
    std::ostringstream uni;
    uni << "part,members,k,maps\n";
    const std::pair<const char*, const CommonPart*> named[] = {
        {"W12", &parts.w12}, {"W13", &parts.w13}, {"W23", &parts.w23}, {"W123", &parts.w123}};
    for (const auto& [name, part] : named) {
        s.add(std::string("k_") + name, static_cast<double>(part->k));
        std::string members, maps;
        for (std::size_t m = 0; m < part->members.size(); ++m) {
            members += (m ? " " : "") + part->members[m];
            maps += (m ? " " : "") + part->members[m] + ":" + join(part->maps[m], '|');
        }
        uni << name << ',' << members << ',' << part->k << ',' << maps << '\n';
    }
    out.bundle.tables.push_back({"univariate_parts", uni.str()});

    std::ostringstream add;
    add << "q,class,t1,t2,t3\n";
    for (unsigned q : qs) {
        const auto classes = find_q_additive_parts(source, q);
        s.add("q_additive_classes_q" + std::to_string(q), static_cast<double>(classes.size()));
        for (std::size_t c = 0; c < classes.size(); ++c)
            add << q << ',' << c << ',' << join(classes[c].maps[0], '|') << ',' << join(classes[c].maps[1], '|')
                << ',' << join(classes[c].maps[2], '|') << '\n';
    }
    out.bundle.tables.push_back({"q_additive_parts", add.str()});
    s.into(out.bundle);
    const auto v = source.joint().values();
    out.bundle.provenance = provenance("common-parts", 0,
                                       json{{"source_pmf", std::vector<double>(v.begin(), v.end())}, {"q", qs}});
    return out;
}

CommandOutcome run_lemma4(std::size_t n, unsigned q) {
    const auto r = lemma4_verify(n, q);
    CommandOutcome out;
    Summary s;
    s.add("n", static_cast<double>(n));
    s.add("q", static_cast<double>(q));
    s.add("matrices", static_cast<double>(r.matrices));
    s.add("classes", static_cast<double>(r.classes));
    s.add("mismatches", static_cast<double>(r.mismatches));
    s.add("verdict", r.passed() ? "pass" : "fail");
    s.into(out.bundle);
    out.bundle.provenance = provenance("lemma4", 0, json{{"n", n}, {"q", q}});
    out.exit_code = r.passed() ? kExitOk : kExitViolated;
    return out;
}

}  // namespace jscc
