// gridmarl: train, evaluate and benchmark distributed load-frequency control
// agents; export plot-ready CSV traces and metrics.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "gridmarl/benchmark.hpp"
#include "gridmarl/config.hpp"
#include "gridmarl/maddpg.hpp"
#include "gridmarl/trace.hpp"

namespace fs = std::filesystem;
using namespace gridmarl;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOpts {
    std::string config_path;
    std::string scenario_path;
    std::string out_dir = "out";
    std::int64_t seed = -1;  // -1: use the scenario's seeds
    int episodes = 0;        // 0: use the config value
    double grc = 0.0;        // 0: use the config value
    bool wind = false;
    int model = 0;           // 0: use the config value
};

int worker_cap() {
    if (const char* env = std::getenv("GRIDMARL_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ScenarioSpec load_spec(const CommonOpts& opt) {
    const std::string path = !opt.scenario_path.empty() ? opt.scenario_path : opt.config_path;
    if (path.empty()) throw ConfigError("no config file given (use --config or --scenario)");
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
    ConfigFile cf = ConfigFile::parse_file(path);
    if (opt.model != 0) cf.set("plant", "model", std::to_string(opt.model));
    if (opt.wind) cf.set("scenario", "wind", "true");
    if (opt.grc > 0.0) cf.set_double("env", "dz_max", opt.grc);
    if (opt.episodes > 0) cf.set("train", "episodes", std::to_string(opt.episodes));
    if (opt.seed >= 0) {
        cf.set("train", "seed", std::to_string(opt.seed));
        cf.set("scenario", "seeds", std::to_string(opt.seed));
    }
    return scenario_from_config(cf);
}

void write_resolved(const ScenarioSpec& spec, const fs::path& dir) {
    std::ofstream out(dir / "resolved.cfg");
    out << resolved_config(spec).to_text();
}

json metrics_json(const TraceMetrics& m) {
    json j;
    j["settled"] = m.settled;
    j["settling_time_s"] = m.settled ? json(m.settling_time_s) : json();  // null = never settled
    j["rocof_max_hz_s"] = m.rocof.max_hz_s;
    j["rocof_min_hz_s"] = m.rocof.min_hz_s;
    j["rocof_mean_hz_s"] = m.rocof.mean_hz_s;
    j["ss_d_omega"] = m.ss_d_omega;
    j["ss_p_total"] = m.ss_p_total;
    j["ss_total_cost"] = m.ss_total_cost;
    j["ss_p"] = m.ss_p;
    j["ss_load"] = m.ss_load;
    return j;
}

int cmd_dispatch_solve(const CommonOpts& opt, double load_override, double rho) {
    const ScenarioSpec spec = load_spec(opt);
    if (spec.env.costs.size() == 0) throw ConfigError("dispatch-solve: config has no [costs] section");
    const double load = load_override > 0.0 ? load_override : spec.env.nominal_load;
    const DispatchResult r = solve_dispatch(spec.env.costs, load, rho);
    json j;
    j["load"] = load;
    j["rho"] = rho;
    j["lambda"] = r.lambda;
    j["p_star"] = r.p_star;
    j["total_cost"] = r.total_cost;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_train(const CommonOpts& opt) {
    const ScenarioSpec spec = load_spec(opt);
    fs::create_directories(opt.out_dir);
    Environment env(spec.env);
    Maddpg system(spec.env, spec.train);
    const TrainResult result = system.train(env);
    const fs::path dir(opt.out_dir);
    system.save((dir / "checkpoint.bin").string());
    write_curve_csv((dir / "curve.csv").string(), result.curve);
    write_resolved(spec, dir);
    std::cout << "trained " << result.curve.size() << " episodes; artifacts in " << opt.out_dir
              << "\n";
    return kExitOk;
}

int cmd_eval(const CommonOpts& opt, const std::string& checkpoint) {
    const ScenarioSpec spec = load_spec(opt);
    if (!fs::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint);
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);

    Maddpg system = Maddpg::load(checkpoint);
    Environment env(spec.env);
    const std::uint64_t seed = opt.seed >= 0 ? static_cast<std::uint64_t>(opt.seed) : spec.seeds.front();
    const EpisodeTrace trace = system.evaluate(env, seed);
    trace.write_csv((dir / "trace.csv").string());

    const TraceMetrics m = compute_metrics(trace, spec.env.eps1);
    json j = metrics_json(m);
    if (spec.env.costs.size() == static_cast<std::size_t>(spec.env.n_agents)) {
        const DispatchResult opt_r = solve_dispatch(spec.env.costs, m.ss_load, spec.env.ba.rho);
        j["dispatch_optimal_cost"] = opt_r.total_cost;
        j["dispatch_gap"] =
            opt_r.total_cost != 0.0 ? (m.ss_total_cost - opt_r.total_cost) / opt_r.total_cost : 0.0;
    }
    std::ofstream mout(dir / "metrics.json");
    mout << j.dump(2) << "\n";
    write_resolved(spec, dir);
    std::cout << "evaluated seed " << seed << "; artifacts in " << opt.out_dir << "\n";
    return kExitOk;
}

int cmd_benchmark(const CommonOpts& opt, const std::string& rl_trace_path) {
    const ScenarioSpec spec = load_spec(opt);
    if (spec.env.costs.size() == 0) throw ConfigError("benchmark: config has no [costs] section");
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);

    BenchmarkScenario sc;
    sc.ba = spec.env.ba;
    sc.costs = spec.env.costs;
    sc.initial_load = spec.env.nominal_load;
    sc.step_time = spec.env.disturbance.step_time;
    sc.step_magnitude = spec.env.disturbance.step_magnitude;
    sc.initial_z = spec.env.initial_z;
    sc.steps = spec.env.episode_len;
    sc.dt_int = spec.env.dt_int;
    sc.substeps = spec.env.substeps;
    sc.gains = spec.pd_gains;

    const EpisodeTrace bench = run_benchmark(sc);
    bench.write_csv((dir / "benchmark_trace.csv").string());

    const TraceMetrics m = compute_metrics(bench, spec.env.eps1);
    json j = metrics_json(m);
    const DispatchResult opt_r = solve_dispatch(spec.env.costs, m.ss_load, spec.env.ba.rho);
    j["dispatch_optimal_cost"] = opt_r.total_cost;
    j["dispatch_gap"] =
        opt_r.total_cost != 0.0 ? (m.ss_total_cost - opt_r.total_cost) / opt_r.total_cost : 0.0;
    std::ofstream mout(dir / "metrics.json");
    mout << j.dump(2) << "\n";
    write_resolved(spec, dir);

    if (rl_trace_path.empty()) {
        std::cout << "no RL trace supplied; wrote benchmark-only metrics to " << opt.out_dir << "\n";
        return kExitOk;
    }
    if (!fs::exists(rl_trace_path)) throw ConfigError("RL trace not found: " + rl_trace_path);
    const EpisodeTrace rl = EpisodeTrace::read_csv(rl_trace_path);
    const auto cmp = compare_traces(rl, bench, spec.env.costs, spec.env.eps1, spec.env.ba.rho);
    write_comparison_csv((dir / "compare.csv").string(), cmp);
    std::cout << "benchmark + comparison written to " << opt.out_dir << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonOpts& opt, const std::string& checkpoint, std::vector<double> bounds) {
    const ScenarioSpec base = load_spec(opt);
    if (!fs::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint);
    if (bounds.empty()) bounds = {0.1, 0.05, 0.01};
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);

    struct Job {
        double bound;
        std::uint64_t seed;
        EpisodeTrace trace;
        bool done = false;
    };
    std::vector<Job> jobs;
    for (double b : bounds)
        for (std::uint64_t s : base.seeds) jobs.push_back({b, s, {}, false});

    const int workers = std::min<int>(worker_cap(), static_cast<int>(jobs.size()));
    std::mutex next_mutex;
    std::size_t next = 0;
    auto run = [&]() {
        for (;;) {
            std::size_t mine;
            {
                std::lock_guard lock(next_mutex);
                if (next >= jobs.size()) return;
                mine = next++;
            }
            Job& job = jobs[mine];
            EnvConfig env_cfg = base.env;
            env_cfg.dz_max = job.bound;
            Environment env(env_cfg);
            Maddpg system = Maddpg::load(checkpoint);
            job.trace = system.evaluate(env, job.seed);
            job.done = true;
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();

    std::ofstream summary(dir / "sweep_summary.csv");
    summary << "dz_max,seed,settled,settling_time_s,max_abs_dz,ss_d_omega\n";
    for (const auto& job : jobs) {
        char name[64];
        std::snprintf(name, sizeof(name), "trace_grc%g_seed%llu.csv", job.bound,
                      static_cast<unsigned long long>(job.seed));
        job.trace.write_csv((dir / name).string());
        const TraceMetrics m = compute_metrics(job.trace, base.env.eps1);
        double max_dz = 0.0;
        for (const auto& row : job.trace.rows)
            for (double dz : row.dz) max_dz = std::max(max_dz, std::abs(dz));
        summary << format_double(job.bound) << "," << job.seed << "," << (m.settled ? 1 : 0) << ","
                << format_double(m.settling_time_s) << "," << format_double(max_dz) << ","
                << format_double(m.ss_d_omega) << "\n";
    }
    write_resolved(base, dir);
    std::cout << "sweep over " << bounds.size() << " bounds x " << base.seeds.size()
              << " seeds written to " << opt.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed load-frequency control: MADDPG agents, economic dispatch, "
                 "primal-dual benchmark"};
    app.require_subcommand(1);

    CommonOpts opt;
    std::string checkpoint, rl_trace;
    double load_override = 0.0, rho = 0.0;
    std::vector<double> grc_bounds;

    auto add_common = [&opt](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path, "scenario config file (.cfg or .json)");
        cmd->add_option("--scenario", opt.scenario_path, "alias for --config");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--seed", opt.seed, "seed override");
        cmd->add_option("--episodes", opt.episodes, "training episode override");
        cmd->add_option("--grc", opt.grc, "action bound dz_max override [pu]");
        cmd->add_flag("--wind", opt.wind, "enable the wind disturbance");
        cmd->add_option("--model", opt.model, "plant model override (1 or 2)")
            ->check(CLI::IsMember({0, 1, 2}));
    };

    auto* c_train = app.add_subcommand("train", "train MADDPG agents");
    add_common(c_train);

    auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on a scenario");
    add_common(c_eval);
    c_eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

    auto* c_bench = app.add_subcommand("benchmark", "run the primal-dual baseline");
    add_common(c_bench);
    c_bench->add_option("--rl-trace", rl_trace, "RL trace CSV to compare against");

    auto* c_sweep = app.add_subcommand("sweep", "evaluate a checkpoint across GRC bounds");
    add_common(c_sweep);
    c_sweep->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    c_sweep->add_option("--grc-bounds", grc_bounds, "action bounds to sweep")->delimiter(',');

    auto* c_dispatch = app.add_subcommand("dispatch-solve", "solve the economic dispatch");
    add_common(c_dispatch);
    c_dispatch->add_option("--load", load_override, "system load [pu]");
    c_dispatch->add_option("--rho", rho, "loss sensitivity");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_train->parsed()) return cmd_train(opt);
        if (c_eval->parsed()) return cmd_eval(opt, checkpoint);
        if (c_bench->parsed()) return cmd_benchmark(opt, rl_trace);
        if (c_sweep->parsed()) return cmd_sweep(opt, checkpoint, grc_bounds);
        if (c_dispatch->parsed()) return cmd_dispatch_solve(opt, load_override, rho);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
