#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "jscc/experiments.hpp"

using namespace jscc;

namespace {

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return ExperimentConfig::from_json(nlohmann::json::object());
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config '" + path + "'");
    return ExperimentConfig::from_json(nlohmann::json::parse(f));
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_real_list(text)) {
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw std::invalid_argument("expected positive integers in '" + text + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

int finish(const CommandOutcome& out, const std::string& dir, bool write) {
    std::cout << out.bundle.summary;
    if (write) {
        out.bundle.write(dir);
        std::cout << "wrote " << dir << "\n";
    }
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint source-channel coding over a three-user MAC: thresholds, region checks, sweeps, simulation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = default_output_dir();
    std::string config_path;
    bool no_write = false;
    app.add_option("--out", out_dir, "output directory (default $JSCC_OUTPUT_DIR or jscc_out)");
    app.add_option("--config", config_path, "JSON experiment config (source, channel, grid, sim)");
    app.add_flag("--no-write", no_write, "print the summary only");

    double delta = 0.0, sigma = 0.0, gamma = 0.11;
    auto add_example = [&](CLI::App* c, bool with_source) {
        c->add_option("--delta", delta, "noise parameter, delta != 1/4")->capture_default_str();
        if (with_source) {
            c->add_option("--sigma", sigma, "P(S1 = 1)")->capture_default_str();
            c->add_option("--gamma", gamma, "P(S3 = 1)")->capture_default_str();
        }
    };

    GridSpec grid;
    auto add_grid = [&](CLI::App* c) {
        c->add_option("--step", grid.step, "finest grid step")->capture_default_str();
        c->add_option("--restarts", grid.restarts, "search restarts")->capture_default_str();
        c->add_option("--max-iters", grid.max_iters, "ascent sweeps per level")->capture_default_str();
        c->add_option("--seed", grid.seed, "search seed")->capture_default_str();
    };

    auto* gs = app.add_subcommand("gamma-star", "threshold gamma* = h^{-1}(2 - H(N))");
    add_example(gs, false);

    auto* ces = app.add_subcommand("check-ces", "CES necessary condition via the outer-bound maximization");
    add_example(ces, true);
    add_grid(ces);

    auto* thm = app.add_subcommand("check-thm1", "reduced conditions at the X_i = V_i witness, optional search");
    add_example(thm, true);
    std::string witness = "xi-equals-vi";
    Thm1CheckOptions thm_opts;
    thm->add_option("--witness", witness, "xi-equals-vi or none")
        ->check(CLI::IsMember({"xi-equals-vi", "none"}))
        ->capture_default_str();
    thm->add_option("--flip", thm_opts.flip, "flip X1 with this probability")->capture_default_str();
    thm->add_flag("--search", thm_opts.search, "run the feasibility search over the full region");
    thm->add_option("--step", thm_opts.grid.step, "search grid step")->capture_default_str();
    thm->add_option("--restarts", thm_opts.grid.restarts, "search restarts")->capture_default_str();
    thm->add_option("--seed", thm_opts.grid.seed, "search seed")->capture_default_str();

    auto* sw = app.add_subcommand("sweep", "improvement sweep over (sigma, gamma)");
    add_example(sw, false);
    std::string sigma_grid = "0.001,0.002,0.005,0.01,0.02,0.05";
    std::string gamma_grid;
    SweepOptions sweep_opts;
    sw->add_option("--sigma-grid", sigma_grid, "list a,b,c or range start:stop:step")->capture_default_str();
    sw->add_option("--gamma-grid", gamma_grid, "list or range; default gamma* - {0.03, 0.025, ..., 0}");
    sw->add_option("--step", sweep_opts.ces_grid.step, "CES grid step")->capture_default_str();
    sw->add_option("--restarts", sweep_opts.ces_grid.restarts, "CES restarts")->capture_default_str();
    sw->add_option("--thm1-step", sweep_opts.thm1_grid.step, "feasibility grid step")->capture_default_str();
    sw->add_option("--thm1-restarts", sweep_opts.thm1_grid.restarts, "feasibility restarts")->capture_default_str();
    sw->add_option("--seed", sweep_opts.ces_grid.seed, "search seed")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo error probability of the linear code");
    add_example(sim, true);
    std::string n_list = "4,8,12";
    SimConfig sim_cfg;
    sim->add_option("--n", n_list, "blocklengths, e.g. 4,8,12")->capture_default_str();
    sim->add_option("--q", sim_cfg.q, "field size (prime)")->capture_default_str();
    sim->add_option("--trials", sim_cfg.trials, "trials per blocklength")->capture_default_str();
    sim->add_option("--seed", sim_cfg.seed, "simulation seed")->capture_default_str();
    sim->add_flag("--fixed-code", sim_cfg.fixed_code, "one code for all trials");

    auto* cp = app.add_subcommand("common-parts", "univariate and q-additive common parts of the config source");
    add_example(cp, true);
    std::string q_list = "2,3";
    cp->add_option("--q", q_list, "field sizes")->capture_default_str();

    auto* l4 = app.add_subcommand("lemma4", "exact check of the random-code pair statistics");
    std::size_t l4_n = 2;
    unsigned l4_q = 2;
    l4->add_option("--n", l4_n, "blocklength")->capture_default_str();
    l4->add_option("--q", l4_q, "field size")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        const auto cfg = load_config(config_path);
        if (!app.get_option("--out")->count() && !config_path.empty()) out_dir = cfg.output;
        const bool write = !no_write;
        auto given = [](CLI::App* c, const char* flag) { return c->get_option(flag)->count() > 0; };

        if (*gs) return finish(run_gamma_star(delta), out_dir, write);

        if (*ces) {
            GridSpec g = cfg.grid;
            if (given(ces, "--step")) g.step = grid.step;
            if (given(ces, "--restarts")) g.restarts = grid.restarts;
            if (given(ces, "--max-iters")) g.max_iters = grid.max_iters;
            if (given(ces, "--seed")) g.seed = grid.seed;
            std::optional<SourceTriple> src;
            std::optional<MacChannel> ch;
            if (cfg.source) src = source_from_json(*cfg.source);
            if (cfg.channel) ch = channel_from_json(*cfg.channel);
            return finish(run_check_ces(sigma, gamma, delta, g, src, ch), out_dir, write);
        }

        if (*thm) {
            thm_opts.witness = witness == "xi-equals-vi";
            return finish(run_check_thm1(sigma, gamma, delta, thm_opts), out_dir, write);
        }

        if (*sw) {
            const auto sigmas = parse_real_list(sigma_grid);
            std::vector<double> gammas;
            if (gamma_grid.empty()) {
                const double gs_val = gamma_star(delta);
                for (int k = 6; k >= 0; --k) gammas.push_back(gs_val - 0.005 * k);
            } else {
                gammas = parse_real_list(gamma_grid);
            }
            return finish(run_sweep(delta, sigmas, gammas, sweep_opts), out_dir, write);
        }

        if (*sim) {
            SimConfig c = cfg.sim;
            if (given(sim, "--delta")) c.delta = delta;
            if (given(sim, "--sigma")) c.sigma = sigma;
            if (given(sim, "--gamma")) c.gamma = gamma;
            if (given(sim, "--q")) c.q = sim_cfg.q;
            if (given(sim, "--trials")) c.trials = sim_cfg.trials;
            if (given(sim, "--seed")) c.seed = sim_cfg.seed;
            if (sim_cfg.fixed_code) c.fixed_code = true;
            return finish(run_simulate(c, parse_sizes(n_list)), out_dir, write);
        }

        if (*cp) {
            const auto src = cfg.source ? source_from_json(*cfg.source) : example2_source(sigma, gamma);
            std::vector<unsigned> qs;
            for (auto q : parse_sizes(q_list)) qs.push_back(static_cast<unsigned>(q));
            return finish(run_common_parts(src, qs), out_dir, write);
        }

        if (*l4) return finish(run_lemma4(l4_n, l4_q), out_dir, write);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return kExitInvalid;
}
