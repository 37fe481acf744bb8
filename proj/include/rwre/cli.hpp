#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/experiments.hpp"
#include "rwre/report.hpp"
#include "rwre/rwre_version.hpp"

namespace rwre::cli {

using nlohmann::json;

// Exit codes are part of the interface: 0 success / all criteria pass,
// 1 config or parameter validation error, 2 runtime failure (I/O and the
// like), 3 a verification criterion failed or a requested object is absent.
enum ExitCode : int {
    exit_ok = 0,
    exit_validation = 1,
    exit_runtime = 2,
    exit_verification = 3,
};

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
}

inline EnvDistribution parse_distribution(const json& spec) {
    if (!spec.is_object()) throw std::invalid_argument("distribution must be an object");
    const std::string kind = spec.value("kind", "");
    if (kind == "two_point") {
        reject_unknown_keys(spec, {"kind", "atom_lo", "atom_hi", "p", "eta0"},
                            "distribution");
        const double lo = spec.at("atom_lo").get<double>();
        const double hi = spec.value("atom_hi", 1.0 - lo);
        const double p = spec.value("p", 0.5);
        const double eta0 = spec.value("eta0", -1.0);
        return EnvDistribution::two_point(lo, hi, p, eta0);
    }
    if (kind == "uniform") {
        reject_unknown_keys(spec, {"kind", "eta0"}, "distribution");
        return EnvDistribution::uniform(spec.at("eta0").get<double>());
    }
    if (kind == "tabulated") {
        reject_unknown_keys(spec, {"kind", "values", "weights", "eta0"}, "distribution");
        return EnvDistribution::tabulated(
            spec.at("values").get<std::vector<double>>(),
            spec.at("weights").get<std::vector<double>>(), spec.value("eta0", -1.0));
    }
    throw std::invalid_argument("distribution.kind must be two_point, uniform or tabulated");
}

inline json distribution_to_json(const EnvDistribution& d) {
    json j;
    j["kind"] = d.kind_name();
    j["eta0"] = d.eta0();
    if (d.kind() != EnvDistribution::Kind::uniform) {
        j["values"] = d.values();
        j["weights"] = d.weights();
    }
    return j;
}

struct CommonOptions {
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed_override;
    std::optional<unsigned> workers_override;
};

inline json load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path.string());
    json cfg;
    try {
        f >> cfg;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
    if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");
    return cfg;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

inline std::uint64_t master_seed(const json& cfg, const CommonOptions& opt) {
    if (opt.seed_override) return *opt.seed_override;
    return cfg.value("seed", std::uint64_t{1});
}

inline unsigned worker_count(const json& cfg, const CommonOptions& opt) {
    if (opt.workers_override) return *opt.workers_override;
    return cfg.value("workers", 1u);
}

// --- simulate -------------------------------------------------------------

inline int cmd_simulate(const json& cfg, const CommonOptions& opt) {
    reject_unknown_keys(cfg, {"distribution", "n", "env_seed", "walk_seed", "betas",
                              "start", "seed", "workers"},
                        "simulate config");
    const EnvDistribution dist = parse_distribution(cfg.at("distribution"));
    const std::int64_t n = cfg.at("n").get<std::int64_t>();
    require(n >= 1, "n must be >= 1");
    const std::uint64_t seed = master_seed(cfg, opt);
    const std::uint64_t env_seed = cfg.value("env_seed", derive_seed(seed, kEnvStream));
    const std::uint64_t walk_seed = cfg.value("walk_seed", derive_seed(seed, kWalkStream));
    std::vector<double> betas = cfg.value("betas", std::vector<double>{0.5});
    for (double b : betas) require(b >= 0.0 && b < 1.0, "beta must lie in [0, 1)");
    const Site start = cfg.value("start", Site{0});

    Environment env(dist, env_seed);
    const RunResult r = run(env, walk_seed, n, start);
    const ConcentrationStats st = stats(r.field);

    std::filesystem::create_directories(opt.out);
    Table hist({"site", "count"});
    for (Site k = r.field.min_site(); k <= r.field.max_site(); ++k)
        hist.add_row({k, r.field.count(k)});
    hist.save_csv((opt.out / "histogram.csv").string(), "rwre.histogram.v1");

    json out;
    out["distribution"] = distribution_to_json(dist);
    out["n"] = n;
    out["env_seed"] = env_seed;
    out["walk_seed"] = walk_seed;
    out["start"] = start;
    out["final_position"] = r.state.position;
    out["total_mass"] = r.field.total();
    out["max_local_time"] = st.max_local_time;
    out["favorites"] = st.favorites;
    out["favorite_spread"] = st.favorite_spread;
    json yj = json::object();
    for (double b : betas)
        yj[format_double(b)] = concentration_radius(r.field, b);
    out["concentration_radius"] = yj;
    write_json(opt.out / "stats.json", out);
    return exit_ok;
}

// --- valley ---------------------------------------------------------------

inline int cmd_valley(const json& cfg, const CommonOptions& opt) {
    reject_unknown_keys(cfg, {"distribution", "n", "env_seed", "margin",
                              "window_radius", "seed", "workers"},
                        "valley config");
    const EnvDistribution dist = parse_distribution(cfg.at("distribution"));
    const std::int64_t n = cfg.at("n").get<std::int64_t>();
    const double gamma = depth_threshold(n);
    const double margin = cfg.value("margin", side_margin(n));
    require(margin >= 0.0, "margin must be nonnegative");
    const std::uint64_t seed = master_seed(cfg, opt);
    const std::uint64_t env_seed = cfg.value("env_seed", derive_seed(seed, kEnvStream));
    const Site radius = cfg.contains("window_radius")
                            ? cfg.at("window_radius").get<Site>()
                            : 8 * window_bound(n, dist.sigma());
    require(radius > 0, "window radius must be positive");

    Environment env(dist, env_seed);
    Potential pot(env);
    const auto valley = basic_valley(pot, gamma, margin, {-radius, radius});

    std::filesystem::create_directories(opt.out);
    json out;
    out["distribution"] = distribution_to_json(dist);
    out["n"] = n;
    out["env_seed"] = env_seed;
    out["gamma"] = gamma;
    out["margin"] = margin;
    out["window_radius"] = radius;
    out["present"] = static_cast<bool>(valley);
    if (valley) {
        out["left_wall"] = valley->left_wall;
        out["bottom"] = valley->bottom;
        out["right_wall"] = valley->right_wall;
        out["depth"] = valley->depth;

        Table series({"site", "potential"});
        for (Site k = valley->left_wall; k <= valley->right_wall; ++k)
            series.add_row({k, pot.at(k)});
        series.save_csv((opt.out / "potential.csv").string(), "rwre.potential.v1");
    }
    write_json(opt.out / "valley.json", out);
    return valley ? exit_ok : exit_verification;
}

// --- verify ---------------------------------------------------------------

inline int cmd_verify(const json& cfg, const CommonOptions& opt) {
    reject_unknown_keys(cfg, {"distribution", "trials", "max_interval",
                              "local_time_trials", "max_span", "tol_hit",
                              "tol_local_time", "seed", "workers"},
                        "verify config");
    const EnvDistribution dist = parse_distribution(cfg.at("distribution"));
    const std::int64_t trials = cfg.value("trials", std::int64_t{1000});
    const Site max_interval = cfg.value("max_interval", Site{40});
    const std::int64_t lt_trials = cfg.value("local_time_trials", std::int64_t{1000});
    const Site max_span = cfg.value("max_span", Site{30});
    const double tol_hit = cfg.value("tol_hit", 1e-10);
    const double tol_local = cfg.value("tol_local_time", 1e-9);
    require(trials >= 1 && lt_trials >= 1, "trial counts must be >= 1");
    require(max_interval >= 3 && max_span >= 1, "interval sizes too small");
    const std::uint64_t seed = master_seed(cfg, opt);

    std::filesystem::create_directories(opt.out);
    Table hp({"seed", "a", "x", "b", "closed_form", "oracle", "abs_err"});
    double worst_hit = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
        const std::uint64_t es = derive_seed(seed, kTrialStream, static_cast<std::uint64_t>(t));
        Environment env(dist, es);
        UnitStream pick(derive_seed(seed, kWalkStream, static_cast<std::uint64_t>(t)));
        const Site len = 3 + static_cast<Site>(pick.next() * static_cast<double>(max_interval - 2));
        const Site a = -static_cast<Site>(pick.next() * static_cast<double>(len));
        const Site b = a + len;
        Site x = a + 1 + static_cast<Site>(pick.next() * static_cast<double>(len - 1));
        x = std::min(x, b - 1);
        ChainSegment seg(env, a, b);
        const double cf = hit_prob(seg, x, HitTarget::above);
        const double oc = oracle_hit_prob(seg, x);
        const double err = std::abs(cf - oc);
        worst_hit = std::max(worst_hit, err);
        hp.add_row({es, a, x, b, cf, oc, err});
    }
    hp.save_csv((opt.out / "verify_hit_prob.csv").string(), "rwre.verify_hit.v1");

    Table lt({"seed", "i", "x", "closed_form", "oracle", "rel_err"});
    double worst_lt = 0.0;
    for (std::int64_t t = 0; t < lt_trials; ++t) {
        const std::uint64_t es = derive_seed(seed, kTrialStream, static_cast<std::uint64_t>(trials + t));
        Environment env(dist, es);
        UnitStream pick(derive_seed(seed, kWalkStream, static_cast<std::uint64_t>(trials + t)));
        const Site i = static_cast<Site>(pick.next() * 21.0) - 10;
        Site off = 1 + static_cast<Site>(pick.next() * static_cast<double>(max_span));
        off = std::min(off, max_span);
        const Site x = pick.next() < 0.5 ? i - off : i + off;
        const double cf = expected_local_time(env, i, x);
        const double oc = oracle_expected_local_time(env, i, x);
        // local times reach e^{|S| span}, so the tolerance is relative there
        const double err = std::abs(cf - oc) / std::max(1.0, std::abs(oc));
        worst_lt = std::max(worst_lt, err);
        lt.add_row({es, i, x, cf, oc, err});
    }
    lt.save_csv((opt.out / "verify_local_time.csv").string(), "rwre.verify_lt.v1");

    const bool pass = worst_hit <= tol_hit && worst_lt <= tol_local;
    json out;
    out["distribution"] = distribution_to_json(dist);
    out["hit_prob"] = {{"trials", trials},
                       {"max_interval", max_interval},
                       {"worst_abs_err", worst_hit},
                       {"tolerance", tol_hit},
                       {"pass", worst_hit <= tol_hit}};
    out["expected_local_time"] = {{"trials", lt_trials},
                                  {"max_span", max_span},
                                  {"worst_abs_err", worst_lt},
                                  {"tolerance", tol_local},
                                  {"pass", worst_lt <= tol_local}};
    out["pass"] = pass;
    write_json(opt.out / "summary.json", out);
    return pass ? exit_ok : exit_verification;
}

// --- experiment -----------------------------------------------------------

inline Campaign parse_campaign(const json& cfg, const CommonOptions& opt) {
    Campaign c;
    c.dist = parse_distribution(cfg.at("distribution"));
    c.seed = master_seed(cfg, opt);
    c.workers = worker_count(cfg, opt);
    if (cfg.contains("schedule"))
        c.schedule = cfg.at("schedule").get<std::vector<std::int64_t>>();
    else
        c.schedule = default_schedule(cfg.value("n_max", std::int64_t{1 << 16}));
    c.replicas = cfg.value("replicas", 100);
    c.betas = cfg.value("betas", std::vector<double>{0.5});
    c.c0 = cfg.value("c0", 0.0);
    c.validate();
    return c;
}

inline int cmd_experiment(const json& cfg, const CommonOptions& opt) {
    reject_unknown_keys(cfg, {"distribution", "experiment", "seed", "workers",
                              "replicas", "betas", "schedule", "n_max", "n",
                              "trials", "a", "d", "r_list", "cores", "bands",
                              "beta", "environments", "walks_per_env", "c0",
                              "inclusion_halfwidths"},
                        "experiment config");
    const std::string name = cfg.at("experiment").get<std::string>();
    const std::uint64_t seed = master_seed(cfg, opt);
    const unsigned workers = worker_count(cfg, opt);
    std::filesystem::create_directories(opt.out);

    json out;
    out["experiment"] = name;
    out["seed"] = seed;
    bool pass = true;

    if (name == "wald") {
        const EnvDistribution dist = parse_distribution(cfg.at("distribution"));
        const auto r = verify_wald_bounds(dist, cfg.value("a", 5.0), cfg.value("d", 5.0),
                                          cfg.value("trials", std::int64_t{100000}),
                                          seed, workers);
        Table t({"event", "estimate", "se", "bound"});
        t.add_row({std::string("down_first"), r.est_down_first, r.se_down, r.bound_down});
        t.add_row({std::string("up_first"), r.est_up_first, r.se_up, r.bound_up});
        t.save_csv((opt.out / "rows.csv").string(), "rwre.wald.v1");
        out["a"] = r.a;
        out["d"] = r.d;
        out["trials"] = r.trials;
        out["est_down_first"] = r.est_down_first;
        out["se_down"] = r.se_down;
        out["bound_down"] = r.bound_down;
        out["est_up_first"] = r.est_up_first;
        out["se_up"] = r.se_up;
        out["bound_up"] = r.bound_up;
        out["exhausted"] = r.exhausted;
        pass = r.pass;
    } else if (name == "sqrt_tail") {
        const EnvDistribution dist = parse_distribution(cfg.at("distribution"));
        const auto r = verify_sqrt_tail(
            dist,
            cfg.value("r_list", std::vector<std::int64_t>{4, 16, 64, 256, 1024}),
            cfg.value("trials", std::int64_t{100000}), seed, workers);
        Table t({"r", "estimate", "se", "fitted_bound"});
        for (const auto& p : r.points)
            t.add_row({p.r, p.estimate, p.se, p.fitted_bound});
        t.save_csv((opt.out / "rows.csv").string(), "rwre.sqrt_tail.v1");
        out["trials"] = r.trials;
        out["slope"] = r.slope;
        out["slope_se"] = r.slope_se;
        out["fitted_b"] = r.fitted_b;
        pass = r.pass;
    } else if (name == "band") {
        const EnvDistribution dist = parse_distribution(cfg.at("distribution"));
        const auto r = verify_band_expectation(
            dist, cfg.value("n", std::int64_t{1000000}),
            cfg.value("cores", std::vector<double>{1.0, 4.0, 16.0}),
            cfg.value("bands", std::vector<int>{1, 2, 3}),
            cfg.value("replicas", 200), seed, workers);
        Table t({"core", "band", "mean_right", "se_right", "mean_left", "se_left"});
        for (const auto& c : r.cells)
            t.add_row({c.core, static_cast<std::int64_t>(c.band), c.mean_right,
                       c.se_right, c.mean_left, c.se_left});
        t.save_csv((opt.out / "rows.csv").string(), "rwre.band.v1");
        out["band_width"] = r.band_width;
        out["replicas"] = r.replicas;
        out["valleys_found"] = r.valleys_found;
        out["c_hat"] = r.c_hat;
        out["flagged"] = r.flagged;
        pass = r.pass;
    } else if (name == "good_env") {
        const EnvDistribution dist = parse_distribution(cfg.at("distribution"));
        const auto r = verify_good_env_rate(dist, cfg.value("n", std::int64_t{1000000}),
                                            cfg.value("beta", 0.5),
                                            cfg.value("replicas", 200), seed, workers);
        Table t({"quantity", "value"});
        t.add_row({std::string("c0"), r.c0});
        t.add_row({std::string("c3"), r.c3});
        t.add_row({std::string("core"), r.core});
        t.add_row({std::string("rate"), r.rate});
        t.save_csv((opt.out / "rows.csv").string(), "rwre.good_env.v1");
        out["c0"] = r.c0;
        out["c3"] = r.c3;
        out["core"] = r.core;
        out["rate"] = r.rate;
        out["se"] = r.se;
        out["replicas"] = r.replicas;
        out["valleys_found"] = r.valleys_found;
        out["window_ok"] = r.window_ok;
        out["expectation_ok"] = r.expectation_ok;
        out["calibration_count"] = r.calibration_count;
        out["dipped"] = r.dipped;
        pass = r.pass;
    } else if (name == "concentration" || name == "beta_scaling" ||
               name == "favorite_sites" || name == "zero_one") {
        Campaign c = parse_campaign(cfg, opt);
        if (name == "concentration") {
            const auto r = probe_concentration(c);
            std::vector<std::string> cols = {"replica", "env_seed", "walk_seed",
                                             "n",       "max_local_time",
                                             "fav_min", "fav_max"};
            for (double b : c.betas) cols.push_back("y_" + format_double(b));
            Table t(cols);
            for (const auto& row : r.rows) {
                std::vector<Table::Cell> cells = {
                    static_cast<std::int64_t>(row.replica), row.env_seed,
                    row.walk_seed, row.n, row.max_local_time, row.fav_min,
                    row.fav_max};
                for (std::int64_t y : row.y) cells.emplace_back(y);
                t.add_row(std::move(cells));
            }
            t.save_csv((opt.out / "rows.csv").string(), "rwre.concentration.v1");
            out["betas"] = c.betas;
            out["median_terminal_min_y"] = r.median_terminal_min_y;
            out["median_terminal_max_ratio"] = r.median_terminal_max_ratio;
            out["all_finite"] = r.all_finite;
            pass = r.all_finite;
        } else if (name == "beta_scaling") {
            const auto r = probe_beta_scaling(c);
            Table t({"beta", "median_terminal_min_y"});
            for (std::size_t b = 0; b < r.betas.size(); ++b)
                t.add_row({r.betas[b], r.medians[b]});
            t.save_csv((opt.out / "rows.csv").string(), "rwre.beta_scaling.v1");
            out["slope"] = r.slope;
            out["slope_se"] = r.slope_se;
            out["degenerate"] = r.degenerate;
            pass = r.pass;
        } else if (name == "favorite_sites") {
            const auto halfwidths =
                cfg.value("inclusion_halfwidths", std::vector<Site>{1, 2, 4, 8});
            const auto r = probe_favorite_sites(c, halfwidths);
            Table t({"replica", "terminal_min_spread", "terminal_max_ratio",
                     "inclusion_violation"});
            for (const auto& tr : r.tracks)
                t.add_row({static_cast<std::int64_t>(tr.replica),
                           static_cast<std::int64_t>(tr.terminal_min_spread),
                           tr.terminal_max_ratio,
                           static_cast<std::int64_t>(tr.inclusion_violation ? 1 : 0)});
            t.save_csv((opt.out / "rows.csv").string(), "rwre.favorites.v1");
            out["inclusion_checks"] = r.inclusion_checks;
            out["inclusion_violations"] = r.inclusion_violations;
            out["spread_median"] = r.spread_median;
            out["c2_lower_decile"] = r.c2_lower_decile;
            if (r.c4 > 0.0) out["c4"] = r.c4;
            pass = r.inclusion_violations == 0;
        } else {
            const auto r = probe_zero_one(c, cfg.value("environments", 50),
                                          cfg.value("walks_per_env", 20));
            Table t({"quantity", "value"});
            t.add_row({std::string("within_sd"), r.within_sd});
            t.add_row({std::string("between_sd"), r.between_sd});
            t.add_row({std::string("ratio"), r.ratio});
            t.add_row({std::string("ratio_se"), r.ratio_se});
            t.save_csv((opt.out / "rows.csv").string(), "rwre.zero_one.v1");
            out["environments"] = r.environments;
            out["walks_per_env"] = r.walks_per_env;
            out["within_sd"] = r.within_sd;
            out["between_sd"] = r.between_sd;
            out["ratio"] = r.ratio;
            out["ratio_se"] = r.ratio_se;
            // exploratory: no pass criterion
        }
    } else {
        throw std::invalid_argument("unknown experiment '" + name + "'");
    }

    out["pass"] = pass;
    write_json(opt.out / "summary.json", out);
    return pass ? exit_ok : exit_verification;
}

// --- dispatch ---------------------------------------------------------------

inline int dispatch(const std::string& command, const json& cfg,
                    const CommonOptions& opt) {
    if (command == "simulate") return cmd_simulate(cfg, opt);
    if (command == "valley") return cmd_valley(cfg, opt);
    if (command == "verify") return cmd_verify(cfg, opt);
    if (command == "experiment") return cmd_experiment(cfg, opt);
    throw std::invalid_argument("unknown command '" + command + "'");
}

inline int run(const std::string& command, const std::filesystem::path& config_path,
               const CommonOptions& opt) {
    try {
        const json cfg = load_config(config_path);
        return dispatch(command, cfg, opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const json::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return exit_runtime;
    }
}

}  // namespace rwre::cli
