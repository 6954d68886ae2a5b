#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rauzylab/rational.hpp"
#include "rauzylab/report.hpp"
#include "rauzylab/stats.hpp"

using namespace rauzylab;
using nlohmann::json;

namespace {

struct Config {
    std::string command;
    std::string pi;
    std::vector<std::string> lambda;
    std::string preset;
    std::uint64_t seed = 1;
    long n = 0;
    double horizon = 0.0; // --T
    long trials = 0;
    int grid = 32;
    std::string out = ".";
    int threads = 1;
    bool exact = false;
    std::string map = "t2";      // sbc/evl driver: t2 | t1 | g
    std::string center = "generic"; // generic | periodic
    double t_window = 1.0;       // repp window scale
    double target_measure = 2e-3;
    double c = 5.0;              // schedule / flow-radius constant
    double gamma = 0.1;
    int depth = 6;               // base-selection search depth
    long n2max = 12;
};

struct Preset {
    std::string pi;
    std::vector<double> lambda;
};

Preset resolve_preset(const std::string& name) {
    double phi = 0.5 * (1.0 + std::sqrt(5.0));
    if (name == "d2-golden") return {"AB/BA", {1.0, phi}};
    if (name == "d3-cubic") return {"ABC/CBA", {1.0, std::cbrt(2.0), std::cbrt(4.0)}};
    if (name == "d4-cyclic")
        return {"ABCD/DCBA", {1.0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0)}};
    throw ConfigError("unknown preset: " + name);
}

std::vector<double> normalized(std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (!(s > 0.0)) throw InvalidLength("lengths must have positive total");
    for (double& x : v) x /= s;
    return v;
}

std::pair<Permutation, std::vector<double>> resolve_iet(const Config& cfg) {
    if (!cfg.preset.empty()) {
        Preset p = resolve_preset(cfg.preset);
        return {Permutation::parse(p.pi), normalized(p.lambda)};
    }
    if (cfg.pi.empty()) throw ConfigError("either --preset or --pi/--lambda is required");
    Permutation perm = Permutation::parse(cfg.pi);
    std::vector<double> lam;
    for (const std::string& s : cfg.lambda) lam.push_back(to_double(parse_rational(s)));
    if (lam.empty()) {
        // default length vector: rationally independent, deterministic
        for (std::size_t i = 0; i < perm.size(); ++i) lam.push_back(std::sqrt(double(i) + 2.0));
    }
    if (lam.size() != perm.size()) throw ConfigError("lambda size does not match pi");
    return {perm, normalized(lam)};
}

BaseCell resolve_base(const Config& cfg) {
    auto [perm, lam] = resolve_iet(cfg);
    return select_base(perm, lam, cfg.depth);
}

// deterministic interior point of B, away from cell corners
std::vector<double> generic_center(const BaseCell& base) {
    std::vector<double> u(base.start_perm.size());
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] = std::sqrt(double(i) + 2.0));
    for (double& x : u) x /= s;
    return base.from_chart(u);
}

// the branch fixed point with the smallest Jacobian: the most visible
// periodic center for extreme-value experiments
std::vector<double> periodic_center(const BranchInventory& inv) {
    const Branch* pick = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const Branch& br : inv.branches) {
        double j = jacobian_t2(br, branch_fixed_point(br));
        if (j < best) {
            best = j;
            pick = &br;
        }
    }
    if (!pick) throw InsufficientSamples("no branches available for a periodic center");
    return branch_fixed_point(*pick);
}

json config_json(const Config& cfg) {
    json j;
    j["pi"] = cfg.pi;
    j["lambda"] = cfg.lambda;
    j["preset"] = cfg.preset;
    j["seed"] = cfg.seed;
    j["n"] = cfg.n;
    j["T"] = cfg.horizon;
    j["trials"] = cfg.trials;
    j["grid"] = cfg.grid;
    j["threads"] = cfg.threads;
    j["exact"] = cfg.exact;
    j["map"] = cfg.map;
    j["center"] = cfg.center;
    j["t"] = cfg.t_window;
    j["measure"] = cfg.target_measure;
    j["c"] = cfg.c;
    j["gamma"] = cfg.gamma;
    j["depth"] = cfg.depth;
    j["n2max"] = cfg.n2max;
    return j;
}

void emit(const Config& cfg, const json& results, const CsvTable* table,
          const std::string& csv_name) {
    std::filesystem::create_directories(cfg.out);
    json m = manifest_skeleton(cfg.command, cfg.seed);
    m["config"] = config_json(cfg);
    m["results"] = results;
    if (table) {
        m["outputs"] = json::array({csv_name});
        write_csv((std::filesystem::path(cfg.out) / csv_name).string(), *table);
    } else {
        m["outputs"] = json::array();
    }
    write_manifest((std::filesystem::path(cfg.out) / "manifest.json").string(), m);
    std::cout << results.dump(2) << "\n";
}

// ---------------------------------------------------------------- commands

void cmd_class(const Config& cfg) {
    if (cfg.pi.empty()) throw ConfigError("class requires --pi");
    RauzyClass rc = rauzy_class(Permutation::parse(cfg.pi));
    json res;
    res["size"] = rc.vertices.size();
    json verts = json::array();
    for (const Permutation& p : rc.vertices) verts.push_back(p.str());
    res["vertices"] = verts;
    emit(cfg, res, nullptr, "");

    std::filesystem::path out = std::filesystem::path(cfg.out) / "class.json";
    std::ofstream f(out, std::ios::binary);
    f << res.dump(2) << "\n";
}

template <class S>
CsvTable orbit_table(const Permutation& start, std::vector<S> lam, long n) {
    CsvTable t;
    t.columns = {"step", "n1", "start_type", "end_type"};
    for (std::size_t i = 0; i < start.size(); ++i)
        t.columns.push_back("lambda_" + std::string(1, char('A' + i)));
    Permutation p = start;
    for (long k = 1; k <= n; ++k) {
        auto step = zorich_step(p, std::move(lam));
        p = step.end_perm;
        lam = std::move(step.end_lengths);
        std::vector<double> row = {double(k), double(step.n1),
                                   double(type_index(step.start_type)),
                                   double(type_index(step.end_type))};
        for (const S& l : lam) row.push_back(to_double(l));
        t.rows.push_back(row);
    }
    return t;
}

void cmd_orbit(const Config& cfg) {
    long n = cfg.n > 0 ? cfg.n : 100;
    auto [perm, lam] = resolve_iet(cfg);
    CsvTable t;
    if (cfg.exact) {
        if (cfg.lambda.empty())
            throw ConfigError("--exact requires explicit rational --lambda");
        std::vector<Rational> rlam;
        Rational total = 0;
        for (const std::string& s : cfg.lambda) {
            rlam.push_back(parse_rational(s));
            total += rlam.back();
        }
        for (Rational& r : rlam) r /= total;
        t = orbit_table(perm, rlam, n);
    } else {
        t = orbit_table(perm, lam, n);
    }
    json res;
    res["steps"] = n;
    emit(cfg, res, &t, "orbit.csv");
}

void cmd_induce(const Config& cfg) {
    BaseCell base = resolve_base(cfg);
    BranchInventory inv = enumerate_branches(base, cfg.n2max);
    CsvTable t;
    t.columns = {"id", "n2", "mass"};
    for (const Branch& br : inv.branches)
        t.add_row({double(br.id), double(br.n2), br.mass});
    json res;
    res["n_b"] = base.n_b();
    res["base_mass"] = base.mass;
    res["branches"] = inv.branches.size();
    res["covered_mass"] = inv.covered_mass;
    emit(cfg, res, &t, "branches.csv");
}

void cmd_ulam(const Config& cfg) {
    BaseCell base = resolve_base(cfg);
    // depth 20 satisfies the coverage gate; the coarse mass floor only trims
    // negligible cylinders from the row sampler's lookup table
    BranchInventory inv = enumerate_branches(base, std::max<long>(cfg.n2max, 20), 1e-4);
    UlamOperator op = build_ulam(base, inv, cfg.grid, 400, cfg.seed);
    SpectralReport spec = spectral_analysis(op);
    CsvTable t;
    t.columns = {"cell", "h_b"};
    for (long i = 0; i < op.cell_count(); ++i) t.add_row({double(i), spec.h_b[i]});
    json res;
    res["cells"] = op.cell_count();
    res["leading_eigenvalue"] = spec.leading_eigenvalue;
    res["gap"] = spec.gap;
    res["unit_circle_eigs"] = spec.unit_circle_eigs.size();
    res["unassigned_fraction"] = op.unassigned_fraction;
    emit(cfg, res, &t, "ulam.csv");
}

void cmd_sbc(const Config& cfg) {
    long n = cfg.n > 0 ? cfg.n : 100000;
    BaseCell base = resolve_base(cfg);
    std::vector<double> p0 = generic_center(base);
    DistanceCalibration cal = cfg.map == "t2"
                                  ? calibrate_t2(base, p0, std::max<long>(100000, n / 5), cfg.seed)
                                  : calibrate_g(base, p0, std::max<long>(100000, n / 5), cfg.seed);
    TargetSchedule sched = nested_balls(cal, cfg.c, n);
    SbcReport rep;
    if (cfg.map == "t2")
        rep = sbc_ratio_t2(base, sched, n, cfg.seed);
    else if (cfg.map == "t1")
        rep = sbc_ratio_t1(base, sched, n, cfg.seed);
    else if (cfg.map == "g")
        rep = sbc_ratio_g(base, sched, n, cfg.seed);
    else
        throw ConfigError("--map must be t2, t1 or g");
    CsvTable t;
    t.columns = {"n", "ratio"};
    for (std::size_t i = 0; i < rep.checkpoints.size(); ++i)
        t.add_row({double(rep.checkpoints[i]), rep.ratio[i]});
    json res;
    res["final_ratio"] = rep.final_ratio;
    res["running_min"] = rep.running_min;
    res["e_n"] = rep.e_n;
    emit(cfg, res, &t, "sbc.csv");
}

void cmd_evl(const Config& cfg) {
    long n = cfg.n > 0 ? cfg.n : 10000;
    long trials = cfg.trials > 0 ? cfg.trials : 1000;
    BaseCell base = resolve_base(cfg);
    BranchInventory inv = enumerate_branches(base, cfg.n2max, 1e-4);
    std::vector<double> p0 =
        cfg.center == "periodic" ? periodic_center(inv) : generic_center(base);
    EvlReport rep = cfg.map == "t1" ? evl_t1(base, inv, p0, n, trials, cfg.seed)
                                    : evl_t2(base, inv, p0, n, trials, cfg.seed);
    CsvTable t;
    t.columns = {"t", "empirical", "reference"};
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        t.add_row({rep.t_grid[i], rep.empirical[i], rep.reference[i]});
    json res;
    res["ks"] = rep.ks;
    res["theta_hat"] = rep.theta_hat;
    res["theta_ref"] = rep.theta_ref;
    res["periodic"] = rep.center_class.periodic;
    emit(cfg, res, &t, "evl.csv");
}

void cmd_repp(const Config& cfg) {
    long n = cfg.n > 0 ? cfg.n : 10000;
    long trials = cfg.trials > 0 ? cfg.trials : 500;
    BaseCell base = resolve_base(cfg);
    BranchInventory inv = enumerate_branches(base, cfg.n2max, 1e-4);
    std::vector<double> p0 =
        cfg.center == "periodic" ? periodic_center(inv) : generic_center(base);
    ReppReport rep = repp_t2(base, inv, p0, n, cfg.t_window, trials, cfg.seed);
    long kmax = *std::max_element(rep.counts.begin(), rep.counts.end());
    std::vector<double> hist(kmax + 1, 0.0);
    for (long c : rep.counts) hist[c] += 1.0 / double(trials);
    CsvTable t;
    t.columns = {"k", "empirical", "poisson", "polya_aeppli"};
    for (long k = 0; k <= kmax; ++k) {
        double pois = std::exp(-rep.t + k * std::log(rep.t) - std::lgamma(double(k + 1)));
        t.add_row({double(k), hist[k], pois, polya_aeppli_pmf(rep.theta_ref, rep.t, k)});
    }
    json res;
    res["mean"] = rep.mean;
    res["var_over_mean"] = rep.var_over_mean;
    res["chi2_poisson"] = rep.chi2_poisson;
    res["chi2_polya"] = rep.chi2_polya;
    res["theta_ref"] = rep.theta_ref;
    emit(cfg, res, &t, "repp.csv");
}

void cmd_hitting(const Config& cfg) {
    long trials = cfg.trials > 0 ? cfg.trials : 400;
    BaseCell base = resolve_base(cfg);
    BranchInventory inv = enumerate_branches(base, cfg.n2max, 1e-4);
    std::vector<double> p0 =
        cfg.center == "periodic" ? periodic_center(inv) : generic_center(base);
    HittingReport rep =
        hitting_return_stats(base, inv, p0, cfg.target_measure, trials, cfg.seed);
    CsvTable t;
    t.columns = {"t", "hitting_cdf", "return_cdf"};
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        t.add_row({rep.t_grid[i], rep.hitting_cdf[i], rep.return_cdf[i]});
    json res;
    res["ks_hitting"] = rep.ks_hitting;
    res["ks_return"] = rep.ks_return;
    res["return_initial_mass"] = rep.return_initial_mass;
    res["measure_u"] = rep.measure_u;
    res["theta_ref"] = rep.center_class.theta;
    emit(cfg, res, &t, "hitting.csv");
}

void cmd_sbc_flow(const Config& cfg) {
    double horizon = cfg.horizon > 0.0 ? cfg.horizon : 10000.0;
    BaseCell base = resolve_base(cfg);
    FlowTarget target;
    target.center_x = generic_center(base);
    target.center_u = 0.5;
    target.c = cfg.c == 5.0 ? 0.1 : cfg.c; // the schedule default is not a radius
    target.gamma = cfg.gamma;
    target.strip = 0;
    FlowSbcReport rep = flow_sbc(base, target, horizon, cfg.seed, 4);
    CsvTable t;
    t.columns = {"ladder", "psi_seminorm"};
    for (std::size_t i = 0; i < rep.psi_seminorms.size(); ++i)
        t.add_row({double(i + 1), rep.psi_seminorms[i]});
    json res;
    res["ratio"] = rep.ratio;
    res["e_t"] = rep.e_t;
    res["kappa"] = rep.kappa;
    res["hits"] = rep.hits;
    emit(cfg, res, &t, "sbc_flow.csv");
}

void cmd_evl_flow(const Config& cfg) {
    double horizon = cfg.horizon > 0.0 ? cfg.horizon : 10000.0;
    long trials = cfg.trials > 0 ? cfg.trials : 500;
    BaseCell base = resolve_base(cfg);
    BranchInventory inv = enumerate_branches(base, cfg.n2max, 1e-4);
    FlowEvlReport rep =
        flow_evl(base, inv, generic_center(base), 0.5, horizon, trials, cfg.seed);
    CsvTable t;
    t.columns = {"t", "empirical", "reference"};
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
        t.add_row({rep.t_grid[i], rep.empirical[i], rep.reference[i]});
    json res;
    res["ks"] = rep.ks;
    res["r_bar"] = rep.r_bar;
    res["theta_ref"] = rep.theta_ref;
    emit(cfg, res, &t, "evl_flow.csv");
}

void cmd_polygon(const Config& cfg) {
    auto [perm, lam] = resolve_iet(cfg);
    TauVector tau = canonical_tau(perm);
    ZipperedPolygon poly = polygon(perm, lam, tau);
    CsvTable t;
    t.columns = {"vertex", "x", "y"};
    for (std::size_t i = 0; i < poly.vertices.size(); ++i)
        t.add_row({double(i), poly.vertices[i][0], poly.vertices[i][1]});
    json res;
    res["area"] = poly.area;
    res["vertices"] = poly.vertices.size();
    emit(cfg, res, &t, "polygon.csv");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"renormalisation experiments for interval exchange transformations"};
    app.require_subcommand(1);

    Config cfg;
    std::string config_file;

    const std::vector<std::string> names = {"class",   "orbit",   "induce", "ulam",
                                            "sbc",     "sbc-flow", "evl",    "evl-flow",
                                            "repp",    "hitting",  "polygon"};
    std::vector<CLI::App*> subs;
    for (const std::string& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--pi", cfg.pi, "permutation, e.g. ABC/CBA");
        sub->add_option("--lambda", cfg.lambda, "lengths (decimal or p/q)")->delimiter(',');
        sub->add_option("--preset", cfg.preset, "named IET preset");
        sub->add_option("--seed", cfg.seed, "master seed");
        sub->add_option("--n", cfg.n, "orbit length / trial horizon in steps");
        sub->add_option("--T", cfg.horizon, "flow-time horizon");
        sub->add_option("--trials", cfg.trials, "independent trials");
        sub->add_option("--grid", cfg.grid, "discretisation resolution");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--threads", cfg.threads, "worker cap")->check(CLI::PositiveNumber);
        sub->add_flag("--exact", cfg.exact, "exact rational arithmetic");
        sub->add_option("--map", cfg.map, "driving map: t2, t1 or g");
        sub->add_option("--center", cfg.center, "target center: generic or periodic");
        sub->add_option("--t", cfg.t_window, "scaled window length");
        sub->add_option("--measure", cfg.target_measure, "target set measure");
        sub->add_option("--c", cfg.c, "schedule or radius constant");
        sub->add_option("--gamma", cfg.gamma, "flow-radius shrink exponent");
        sub->add_option("--depth", cfg.depth, "base-selection search depth");
        sub->add_option("--n2max", cfg.n2max, "branch enumeration depth");
        sub->add_option("--config", config_file, "JSON config file (flags win)");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    CLI::App* active = nullptr;
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed()) {
            active = subs[i];
            cfg.command = names[i];
        }

    try {
        if (!config_file.empty()) {
            std::ifstream f(config_file);
            if (!f) throw ConfigError("cannot read config file: " + config_file);
            json j = json::parse(f, nullptr, true);
            json c = j.contains("config") ? j["config"] : j; // accept a manifest directly
            auto unset = [&](const char* flag) { return active->count(flag) == 0; };
            if (c.contains("pi") && unset("--pi")) cfg.pi = c["pi"];
            if (c.contains("lambda") && unset("--lambda"))
                cfg.lambda = c["lambda"].get<std::vector<std::string>>();
            if (c.contains("preset") && unset("--preset")) cfg.preset = c["preset"];
            if (c.contains("seed") && unset("--seed")) cfg.seed = c["seed"];
            if (c.contains("n") && unset("--n")) cfg.n = c["n"];
            if (c.contains("T") && unset("--T")) cfg.horizon = c["T"];
            if (c.contains("trials") && unset("--trials")) cfg.trials = c["trials"];
            if (c.contains("grid") && unset("--grid")) cfg.grid = c["grid"];
            if (c.contains("threads") && unset("--threads")) cfg.threads = c["threads"];
            if (c.contains("exact") && unset("--exact")) cfg.exact = c["exact"];
            if (c.contains("map") && unset("--map")) cfg.map = c["map"];
            if (c.contains("center") && unset("--center")) cfg.center = c["center"];
            if (c.contains("t") && unset("--t")) cfg.t_window = c["t"];
            if (c.contains("measure") && unset("--measure")) cfg.target_measure = c["measure"];
            if (c.contains("c") && unset("--c")) cfg.c = c["c"];
            if (c.contains("gamma") && unset("--gamma")) cfg.gamma = c["gamma"];
            if (c.contains("depth") && unset("--depth")) cfg.depth = c["depth"];
            if (c.contains("n2max") && unset("--n2max")) cfg.n2max = c["n2max"];
        }
        if (const char* env = std::getenv("RAUZYLAB_OUT")) cfg.out = env;

        if (cfg.command == "class") cmd_class(cfg);
        else if (cfg.command == "orbit") cmd_orbit(cfg);
        else if (cfg.command == "induce") cmd_induce(cfg);
        else if (cfg.command == "ulam") cmd_ulam(cfg);
        else if (cfg.command == "sbc") cmd_sbc(cfg);
        else if (cfg.command == "sbc-flow") cmd_sbc_flow(cfg);
        else if (cfg.command == "evl") cmd_evl(cfg);
        else if (cfg.command == "evl-flow") cmd_evl_flow(cfg);
        else if (cfg.command == "repp") cmd_repp(cfg);
        else if (cfg.command == "hitting") cmd_hitting(cfg);
        else if (cfg.command == "polygon") cmd_polygon(cfg);
    } catch (const Error& e) {
        json diag;
        diag["code"] = e.code();
        diag["exit"] = e.exit_class();
        diag["message"] = e.what();
        std::cerr << diag.dump() << "\n";
        return e.exit_class();
    } catch (const json::exception& e) {
        std::cerr << R"({"code":"ConfigError","exit":2,"message":")" << e.what() << "\"}\n";
        return 2;
    }
    return 0;
}
