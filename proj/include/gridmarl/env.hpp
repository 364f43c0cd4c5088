#pragma once
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gridmarl/dispatch.hpp"
#include "gridmarl/dynamics.hpp"

namespace gridmarl {

enum class PlantModel { ModelI, ModelII };
enum class RewardKind { SecondaryModelI, TertiaryModelI, SecondaryModelII };

// Scripted disturbance applied on top of the sampled episode load.
struct DisturbanceScript {
    double step_time = -1.0;       // [s]; < 0 disables the step
    double step_magnitude = 0.0;   // [pu], added to the load (each load, Model II)
    double churn_halfwidth = 0.0;  // per-control-step uniform load delta [pu]
};

struct EnvConfig {
    PlantModel model = PlantModel::ModelI;
    int n_agents = 2;

    BAParams ba;                    // Model I plant
    std::vector<GenParams> gens;    // Model II plants
    NetworkModel network;           // Model II network (loads = nominal bus loads)

    CostModel costs;                // required for the tertiary reward and cost traces
    RewardKind reward = RewardKind::SecondaryModelI;

    double nominal_load = 3.0;      // Model I system load [pu]
    double load_jitter = 0.5;       // episode load ~ nominal + U(-jitter, jitter)
    std::vector<double> initial_z;  // per-agent operating point; empty = nominal/n

    int episode_len = 100;
    double eps1 = 0.05;  // [pu]
    double eps2 = 0.2;   // [pu]
    double d = 10.0;
    double d1 = 200.0;
    double d2 = 100.0;
    std::vector<double> d_tiers;  // Model II reward constants d'_1 < ... < d'_n

    double dz_max = 0.1;   // [pu] per-step action bound (GRC)
    double dt_int = 0.01;  // [s] internal Euler step
    int substeps = 100;    // internal steps per control interval

    std::optional<WindParams> wind;  // Model I only
    DisturbanceScript disturbance;

    double control_period() const { return dt_int * static_cast<double>(substeps); }
    void validate() const;  // throws std::invalid_argument on inconsistent config
};

// Strictly local per-agent view: the frequency signal and the agent's own
// secondary command, nothing else.
struct Observation {
    double d_omega = 0.0;  // system d_omega (Model I) or own d_omega_i (Model II)
    double z = 0.0;        // own secondary command

    std::array<double, 2> serialize() const { return {d_omega, z}; }
};

using ActionVector = std::vector<double>;  // per-agent dz [pu]

struct StepInfo {
    double t = 0.0;                 // [s] at end of the control interval
    double p_load = 0.0;            // effective system load [pu] (sum of bus loads, Model II)
    std::vector<double> d_omega;    // size 1 (Model I) or n_agents
    std::vector<double> z;          // per-agent commands after the action
    std::vector<double> p_gen;      // per-generator outputs
    double p_total = 0.0;
    std::vector<double> dz_applied; // realized per-agent action
    bool action_clamped = false;    // an incoming action exceeded dz_max
    std::vector<double> cost;       // per-generator cost (empty without a cost model)
    double total_cost = 0.0;
    double wind_power = 0.0;        // current wind deviation [pu]
    bool c1 = false, c2 = false;
};

struct StepResult {
    std::vector<Observation> obs;
    double reward = 0.0;  // shared scalar, broadcast to all agents
    bool done = false;
    StepInfo info;
};

// Reward functions (strict < at every boundary).
double reward_secondary_model1(double d_omega, double eps1, double d);
// C2 averages |z_i c_i'' - z_j c_j''| over ordered pairs with the paper's
// (n-1)! normalization. The middle branch pays d2 when exactly one of C1, C2
// holds; d1 requires both.
double reward_tertiary(double d_omega, const std::vector<double>& z, const CostModel& costs,
                       double eps1, double eps2, double d1, double d2, bool* c1_out = nullptr,
                       bool* c2_out = nullptr);
// d'_k for k agents inside the tolerance band, 0 for none.
double reward_model2(const std::vector<double>& d_omegas, double eps,
                     const std::vector<double>& tiers);

// Generation-rate constraint: dz = dz_max * tanh(raw). Odd, monotone,
// |dz| < dz_max for all finite raw values.
double apply_grc(double raw_action, double dz_max);

class Environment {
  public:
    explicit Environment(EnvConfig cfg);

    std::vector<Observation> reset(std::uint64_t seed);
    StepResult step(const ActionVector& actions);  // throws std::logic_error after done

    const EnvConfig& config() const { return cfg_; }
    bool done() const { return steps_taken_ >= cfg_.episode_len; }
    int steps_taken() const { return steps_taken_; }
    double episode_load() const { return episode_load_; }
    std::vector<Observation> observations() const;

  private:
    void integrate_model1(double p_load);
    void integrate_model2(const Eigen::VectorXd& bus_loads);
    StepInfo snapshot() const;
    double current_load_model1() const;
    Eigen::VectorXd current_bus_loads() const;

    EnvConfig cfg_;
    std::mt19937_64 rng_;
    int steps_taken_ = 0;
    bool started_ = false;
    double t_ = 0.0;

    // Model I state
    BAState ba_state_;
    // Model II state
    std::vector<GenState> gen_states_;

    std::vector<double> z_;       // per-agent commands
    double episode_load_ = 0.0;   // Model I sampled episode load
    Eigen::VectorXd episode_bus_loads_;  // Model II sampled bus loads
    double churn_accum_ = 0.0;
    WindState wind_state_;
};

}  // namespace gridmarl
