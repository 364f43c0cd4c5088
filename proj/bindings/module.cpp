#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridmarl/benchmark.hpp"
#include "gridmarl/config.hpp"
#include "gridmarl/dispatch.hpp"
#include "gridmarl/dynamics.hpp"
#include "gridmarl/env.hpp"
#include "gridmarl/maddpg.hpp"
#include "gridmarl/trace.hpp"

namespace py = pybind11;
using namespace gridmarl;

namespace {

py::dict trace_to_dict(const EpisodeTrace& tr) {
    py::dict d;
    d["n_agents"] = tr.n_agents;
    d["dt"] = tr.dt;
    d["f_nom"] = tr.f_nom;
    py::list t, d_omega, z, p, dz, p_load, reward, cost, c1, c2;
    for (const auto& row : tr.rows) {
        t.append(row.t);
        d_omega.append(row.d_omega);
        z.append(row.z);
        p.append(row.p);
        dz.append(row.dz);
        p_load.append(row.p_load);
        reward.append(row.reward);
        cost.append(row.cost);
        c1.append(row.c1);
        c2.append(row.c2);
    }
    d["t"] = t;
    d["d_omega"] = d_omega;
    d["z"] = z;
    d["p"] = p;
    d["dz"] = dz;
    d["p_load"] = p_load;
    d["reward"] = reward;
    d["cost"] = cost;
    d["c1"] = c1;
    d["c2"] = c2;
    return d;
}

py::dict info_to_dict(const StepInfo& info) {
    py::dict d;
    d["t"] = info.t;
    d["p_load"] = info.p_load;
    d["d_omega"] = info.d_omega;
    d["z"] = info.z;
    d["p_gen"] = info.p_gen;
    d["p_total"] = info.p_total;
    d["dz_applied"] = info.dz_applied;
    d["action_clamped"] = info.action_clamped;
    d["cost"] = info.cost;
    d["total_cost"] = info.total_cost;
    d["wind_power"] = info.wind_power;
    d["c1"] = info.c1;
    d["c2"] = info.c2;
    return d;
}

}  // namespace

PYBIND11_MODULE(_gridmarl, m) {
    m.doc() = "Distributed load-frequency control: plant models, economic dispatch, "
              "MADDPG agents and the primal-dual baseline";

    // ----- dispatch -----
    py::class_<CostModel>(m, "CostModel")
        .def(py::init<>())
        .def_readwrite("a", &CostModel::a)
        .def_readwrite("beta", &CostModel::beta)
        .def_readwrite("gamma", &CostModel::gamma)
        .def_static("quadratic", &CostModel::quadratic, py::arg("a"));
    py::class_<DispatchResult>(m, "DispatchResult")
        .def_readonly("p_star", &DispatchResult::p_star)
        .def_readonly("lambda_", &DispatchResult::lambda)
        .def_readonly("total_cost", &DispatchResult::total_cost);
    m.def("solve_dispatch", &solve_dispatch, py::arg("costs"), py::arg("p_load"),
          py::arg("rho") = 0.0);
    m.def("participation_deltas", &participation_deltas, py::arg("costs"), py::arg("d_lambda"));
    m.def(
        "eval_cost",
        [](const CostModel& costs, const std::vector<double>& p) {
            double total = 0.0;
            auto per_gen = eval_cost(costs, p, &total);
            return py::make_tuple(per_gen, total);
        },
        py::arg("costs"), py::arg("p"));

    // ----- dynamics -----
    py::class_<BAParams>(m, "BAParams")
        .def(py::init<>())
        .def_readwrite("m", &BAParams::m)
        .def_readwrite("d", &BAParams::d)
        .def_readwrite("r_d", &BAParams::r_d)
        .def_readwrite("t_sv", &BAParams::t_sv)
        .def_readwrite("rho", &BAParams::rho)
        .def_readwrite("f_nom", &BAParams::f_nom);
    py::class_<BAState>(m, "BAState")
        .def(py::init<>())
        .def_readwrite("d_omega", &BAState::d_omega)
        .def_readwrite("p_sv", &BAState::p_sv)
        .def_readwrite("z_g", &BAState::z_g);
    m.def(
        "ba_derivatives",
        [](const BAState& s, const BAParams& p, double p_load) {
            const BADeriv d = ba_derivatives(s, p, p_load);
            return py::make_tuple(d.d_omega_dot, d.p_sv_dot);
        },
        py::arg("state"), py::arg("params"), py::arg("p_load"));
    m.def("ba_steady_state_d_omega", &ba_steady_state_d_omega, py::arg("params"), py::arg("z_g"),
          py::arg("p_load"));
    m.def(
        "simulate_ba",
        [](BAState s, const BAParams& p, double p_load, double dt, int steps) {
            std::vector<double> d_omega;
            d_omega.reserve(static_cast<std::size_t>(steps));
            for (int k = 0; k < steps; ++k) {
                s = euler_step(s, ba_derivatives(s, p, p_load), dt);
                d_omega.push_back(s.d_omega);
            }
            return py::make_tuple(s, d_omega);
        },
        py::arg("state"), py::arg("params"), py::arg("p_load"), py::arg("dt"), py::arg("steps"),
        "Frozen-command rollout; returns the final state and the d_omega series.");

    py::class_<WindParams>(m, "WindParams")
        .def(py::init<>())
        .def_readwrite("alpha1", &WindParams::alpha1)
        .def_readwrite("alpha2", &WindParams::alpha2)
        .def_readwrite("beta1", &WindParams::beta1)
        .def_readwrite("beta2", &WindParams::beta2);
    py::class_<WindState>(m, "WindState")
        .def(py::init<>())
        .def_readwrite("d_pw", &WindState::d_pw)
        .def_readwrite("d_v", &WindState::d_v);
    m.def("wind_step", &wind_step, py::arg("state"), py::arg("params"), py::arg("dt"),
          py::arg("noise"));

    py::class_<NetworkModel>(m, "NetworkModel")
        .def_static("two_gen_two_load", &NetworkModel::two_gen_two_load, py::arg("b") = 10.0,
                    py::arg("load1") = 1.5, py::arg("load2") = 1.5);
    m.def("dc_power_flow", &dc_power_flow, py::arg("gen_angles"), py::arg("network"));

    py::class_<RocofStats>(m, "RocofStats")
        .def_readonly("max_hz_s", &RocofStats::max_hz_s)
        .def_readonly("min_hz_s", &RocofStats::min_hz_s)
        .def_readonly("mean_hz_s", &RocofStats::mean_hz_s);
    m.def("rocof", &rocof, py::arg("d_omega_series"), py::arg("dt"), py::arg("f_nom"));
    m.def("apply_grc", &apply_grc, py::arg("raw_action"), py::arg("dz_max"));

    // ----- scenario / environment -----
    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def_readonly("name", &ScenarioSpec::name)
        .def_readonly("seeds", &ScenarioSpec::seeds);
    m.def("load_scenario", &load_scenario, py::arg("path"));

    py::class_<Observation>(m, "Observation")
        .def_readonly("d_omega", &Observation::d_omega)
        .def_readonly("z", &Observation::z);

    py::class_<Environment>(m, "Environment")
        .def(py::init([](const ScenarioSpec& spec) { return Environment(spec.env); }),
             py::arg("scenario"))
        .def("reset", &Environment::reset, py::arg("seed"))
        .def(
            "step",
            [](Environment& env, const std::vector<double>& actions) {
                const StepResult r = env.step(actions);
                return py::make_tuple(r.obs, r.reward, r.done, info_to_dict(r.info));
            },
            py::arg("actions"))
        .def_property_readonly("done", &Environment::done)
        .def_property_readonly("episode_load", &Environment::episode_load);

    // ----- agents -----
    py::class_<LearningCurvePoint>(m, "LearningCurvePoint")
        .def_readonly("episode", &LearningCurvePoint::episode)
        .def_readonly("reward", &LearningCurvePoint::reward)
        .def_readonly("smoothed", &LearningCurvePoint::smoothed);

    py::class_<Maddpg>(m, "Maddpg")
        .def(py::init([](const ScenarioSpec& spec) { return Maddpg(spec.env, spec.train); }),
             py::arg("scenario"))
        .def(py::init([](const ScenarioSpec& spec, std::uint64_t seed) {
                 TrainConfig cfg = spec.train;
                 cfg.seed = seed;
                 return Maddpg(spec.env, cfg);
             }),
             py::arg("scenario"), py::arg("seed"))
        .def("train", [](Maddpg& sys, Environment& env) { return sys.train(env).curve; },
             py::arg("env"))
        .def(
            "evaluate",
            [](Maddpg& sys, Environment& env, std::uint64_t seed) {
                return trace_to_dict(sys.evaluate(env, seed));
            },
            py::arg("env"), py::arg("seed"))
        .def("save", &Maddpg::save, py::arg("path"))
        .def_static("load", &Maddpg::load, py::arg("path"))
        .def_property_readonly("n_agents", &Maddpg::n_agents);

    // ----- benchmark -----
    m.def(
        "run_benchmark",
        [](const ScenarioSpec& spec) {
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
            return trace_to_dict(run_benchmark(sc));
        },
        py::arg("scenario"));
}
