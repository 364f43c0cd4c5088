#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gridmarl/config.hpp"
#include "gridmarl/trace.hpp"

using namespace gridmarl;

namespace {

const char* kTable2Tertiary = R"cfg(
# two-generator BA area, tertiary reward
[scenario]
name = t2
seeds = 1, 2, 3
step_time = 0
step_magnitude = 0.15

[plant]
model = 1
m = 0.1
d = 0.016
r_d = 0.1
t_sv = 30
f_nom = 50

[costs]
a = 2, 1

[env]
n_agents = 2
reward = tertiary1
nominal_load = 3.0
initial_z = 1.5, 1.5
dz_max = 0.1

[train]
episodes = 5
seed = 9
)cfg";

}  // namespace

TEST_CASE("key=value parsing") {
    const ConfigFile cf = ConfigFile::parse_text(kTable2Tertiary);
    CHECK(cf.get("scenario", "name") == "t2");
    CHECK(cf.get_double("plant", "m", 0.0) == 0.1);
    CHECK(cf.get_list("costs", "a") == std::vector<double>{2.0, 1.0});
    CHECK(cf.get_int("train", "episodes", 0) == 5);
    CHECK(cf.get_or("env", "missing", "fallback") == "fallback");
    CHECK_THROWS_AS(cf.get("env", "missing"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_text("[oops\nx=1"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_text("keyvalue"), ConfigError);
}

TEST_CASE("json alternate encoding parses to the same scenario") {
    const char* json_text = R"({
      "scenario": {"name": "t2", "seeds": [1, 2, 3], "step_time": 0, "step_magnitude": 0.15},
      "plant": {"model": 1, "m": 0.1, "d": 0.016, "r_d": 0.1, "t_sv": 30, "f_nom": 50},
      "costs": {"a": [2, 1]},
      "env": {"n_agents": 2, "reward": "tertiary1", "nominal_load": 3.0,
              "initial_z": [1.5, 1.5], "dz_max": 0.1},
      "train": {"episodes": 5, "seed": 9}
    })";
    const ScenarioSpec a = scenario_from_config(ConfigFile::parse_text(kTable2Tertiary));
    const ScenarioSpec b = scenario_from_config(ConfigFile::parse_json_text(json_text));
    CHECK(a.name == b.name);
    CHECK(a.env.nominal_load == b.env.nominal_load);
    CHECK(a.env.costs.a == b.env.costs.a);
    CHECK(a.env.disturbance.step_magnitude == b.env.disturbance.step_magnitude);
    CHECK(a.train.episodes == b.train.episodes);
    CHECK(a.seeds == b.seeds);
}

TEST_CASE("scenario resolution fills documented defaults") {
    const ScenarioSpec spec = scenario_from_config(ConfigFile::parse_text(kTable2Tertiary));
    CHECK(spec.env.model == PlantModel::ModelI);
    CHECK(spec.env.reward == RewardKind::TertiaryModelI);
    CHECK(spec.env.episode_len == 100);
    CHECK(spec.env.eps1 == 0.05);
    CHECK(spec.env.eps2 == 0.2);
    CHECK(spec.env.load_jitter == 0.5);
    CHECK(spec.env.dt_int == 0.01);
    CHECK(spec.env.substeps == 100);
    CHECK(spec.train.gamma == 0.95);
    CHECK(spec.train.tau == 0.01);
    CHECK(spec.train.batch == 64);
    CHECK(spec.train.history == 8);
    CHECK(spec.seeds == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("resolved config echoes every field") {
    const ScenarioSpec spec = scenario_from_config(ConfigFile::parse_text(kTable2Tertiary));
    const ConfigFile cf = resolved_config(spec);
    const std::vector<std::pair<std::string, std::string>> required = {
        {"scenario", "name"},       {"scenario", "seeds"},       {"scenario", "step_time"},
        {"scenario", "step_magnitude"}, {"scenario", "churn"},   {"scenario", "wind"},
        {"plant", "model"},         {"plant", "f_nom"},          {"plant", "m"},
        {"plant", "d"},             {"plant", "r_d"},            {"plant", "t_sv"},
        {"plant", "rho"},           {"costs", "a"},              {"costs", "beta"},
        {"costs", "gamma"},         {"env", "n_agents"},         {"env", "reward"},
        {"env", "nominal_load"},    {"env", "load_jitter"},      {"env", "initial_z"},
        {"env", "episode_len"},     {"env", "eps1"},             {"env", "eps2"},
        {"env", "d"},               {"env", "d1"},               {"env", "d2"},
        {"env", "d_tiers"},         {"env", "dz_max"},           {"env", "dt_int"},
        {"env", "substeps"},        {"wind", "alpha1"},          {"wind", "alpha2"},
        {"wind", "beta1"},          {"wind", "beta2"},           {"train", "gamma"},
        {"train", "tau"},           {"train", "lr_actor"},       {"train", "lr_critic"},
        {"train", "batch"},         {"train", "buffer"},         {"train", "noise_sigma"},
        {"train", "noise_decay"},   {"train", "noise_sigma_min"}, {"train", "keep_best"},
        {"train", "episodes"},      {"train", "history"},
        {"train", "lstm_hidden"},   {"train", "dense"},          {"train", "warmup"},
        {"train", "train_every"},   {"train", "actor_every"},    {"train", "actor_head_scale"},
        {"train", "optimizer"},
        {"train", "seed"},
        {"benchmark", "k_lambda"},  {"benchmark", "k_consensus"}};
    for (const auto& [section, key] : required) {
        INFO("missing [" << section << "] " << key);
        CHECK(cf.has(section, key));
    }
    // The echo round-trips through the parser to the same scenario.
    const ScenarioSpec again = scenario_from_config(ConfigFile::parse_text(cf.to_text()));
    CHECK(again.env.nominal_load == spec.env.nominal_load);
    CHECK(again.env.dz_max == spec.env.dz_max);
    CHECK(again.train.episodes == spec.train.episodes);
}

TEST_CASE("model II scenario wiring") {
    const char* text = R"cfg(
[plant]
model = 2
[plant2]
m = 0.1, 0.15
d = 0.016, 0.018
r_d = 0.1, 0.08
t_sv = 30, 30
[network]
n_bus = 4
lines = 0-2:10, 2-3:10, 3-1:10
gen_bus = 0, 1
loads = 0, 0, 1.5, 1.5
[env]
n_agents = 2
reward = secondary2
initial_z = 1.5, 1.5
dt_int = 0.001
substeps = 1000
)cfg";
    const ScenarioSpec spec = scenario_from_config(ConfigFile::parse_text(text));
    CHECK(spec.env.model == PlantModel::ModelII);
    CHECK(spec.env.gens.size() == 2);
    CHECK(spec.env.gens[1].m == 0.15);
    CHECK(spec.env.network.n_bus == 4);
    CHECK(spec.env.network.susceptance(0, 2) == 10.0);
    CHECK(spec.env.d_tiers == std::vector<double>{100.0, 200.0});
    CHECK(spec.env.network.sigma_at_bus(2) == doctest::Approx(0.5));
}

TEST_CASE("trace csv schema and round trip") {
    EpisodeTrace tr;
    tr.n_agents = 2;
    tr.n_omega = 1;
    tr.has_cost = true;
    tr.dt = 1.0;
    tr.f_nom = 50.0;
    for (int k = 0; k < 3; ++k) {
        TraceRow row;
        row.t = k + 1.0;
        row.d_omega = {-0.01 * k};
        row.z = {1.5, 1.5 + 0.1 * k};
        row.p = {1.4, 1.6};
        row.dz = {0.0, 0.1};
        row.p_load = 3.15;
        row.reward = 100.0;
        row.cost = {3.92, 4.41};
        row.c1 = true;
        row.c2 = k > 0;
        tr.rows.push_back(row);
    }
    SUBCASE("golden header") {
        const auto cols = tr.columns();
        std::string header;
        for (std::size_t i = 0; i < cols.size(); ++i) header += (i ? "," : "") + cols[i];
        CHECK(header ==
              "t,d_omega,z_1,z_2,p_1,p_2,dz_1,dz_2,p_load,reward,cost_1,cost_2,c1,c2");
    }
    SUBCASE("write/read round trip") {
        namespace fs = std::filesystem;
        const fs::path p = fs::temp_directory_path() / "gridmarl_trace_test.csv";
        tr.write_csv(p.string());
        const EpisodeTrace back = EpisodeTrace::read_csv(p.string());
        REQUIRE(back.rows.size() == 3);
        CHECK(back.n_agents == 2);
        CHECK(back.n_omega == 1);
        CHECK(back.has_cost);
        CHECK(back.dt == 1.0);
        CHECK(back.rows[2].z[1] == doctest::Approx(1.7));
        CHECK(back.rows[2].c2);
        fs::remove(p);
    }
    SUBCASE("model II schema carries one omega column per generator") {
        EpisodeTrace m2;
        m2.n_agents = 2;
        m2.n_omega = 2;
        m2.has_cost = false;
        const auto cols = m2.columns();
        CHECK(cols[1] == "d_omega_1");
        CHECK(cols[2] == "d_omega_2");
    }
}
