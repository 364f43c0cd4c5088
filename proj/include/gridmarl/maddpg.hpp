#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "gridmarl/env.hpp"
#include "gridmarl/nn.hpp"
#include "gridmarl/trace.hpp"

namespace gridmarl {

struct TrainConfig {
    double gamma = 0.95;
    double tau = 0.01;
    double lr_actor = 1e-4;
    double lr_critic = 1e-3;
    int batch = 64;
    int buffer_capacity = 100000;
    double noise_sigma = 0.3;   // pre-tanh scale; ~0.3*dz_max in realized action units
    double noise_decay = 0.999; // per episode
    double noise_sigma_min = 0.0;
    bool keep_best = true;  // return the agents with the best smoothed reward
    int episodes = 500;
    int history = 8;            // observation window H
    int lstm_hidden = 16;
    std::vector<int> dense = {64, 32, 16};
    int warmup_transitions = 1000;
    int train_every = 1;
    int actor_every = 1;  // actor + target updates once per this many critic updates
    // Scale on the actor's output-layer init. Small values start the policy
    // near zero action so exploration is a zero-mean walk around the
    // operating point rather than a compounding random drift.
    double actor_head_scale = 1.0;
    nn::Optimizer optimizer = nn::Optimizer::Adam;
    std::uint64_t seed = 1;

    void validate() const;
};

// History-windowed experience. Observation blocks are flattened
// [agent][timestep][d_omega, z], oldest timestep first.
struct Transition {
    std::vector<double> obs;
    std::vector<double> actions;  // realized dz, agent order
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
};

class ReplayBuffer {
  public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void add(Transition t);
    std::size_t size() const { return full_ ? store_.size() : next_; }
    std::size_t capacity() const { return store_.size(); }
    const Transition& at(std::size_t i) const { return store_[i]; }

    // Uniform i.i.d. indices; throws std::logic_error when fewer than
    // `batch` transitions are stored.
    std::vector<std::size_t> sample_indices(std::size_t batch);

  private:
    std::vector<Transition> store_;
    std::size_t next_ = 0;
    bool full_ = false;
    std::mt19937_64 rng_;
};

struct AgentNets {
    nn::NetParams actor, critic, target_actor, target_critic;
    nn::OptimizerState actor_opt, critic_opt;
    std::mt19937_64 noise_rng;  // exploration stream, one per agent
};

struct TrainStepStats {
    std::vector<double> critic_loss;      // per agent, mean squared TD error
    std::vector<double> actor_objective;  // per agent, mean Q under the online actor
};

struct LearningCurvePoint {
    int episode = 0;
    double reward = 0.0;
    double smoothed = 0.0;
    double band_lo = 0.0, band_hi = 0.0;  // 95% band over the smoothing window
};

struct TrainResult {
    std::vector<LearningCurvePoint> curve;
};

void write_curve_csv(const std::string& path, const std::vector<LearningCurvePoint>& curve);

// Per-agent actor (local window -> dz) with centralized critics.
//
// Critic input, per window timestep, own action slot first:
//   Model I : [d_omega, z_1..z_n, dz_own, dz_others...]
//   Model II: [d_omega_1..d_omega_n, z_1..z_n, dz_own, dz_others...]
// The joint action is tiled across the window.
class Maddpg {
  public:
    Maddpg(const EnvConfig& env_cfg, const TrainConfig& cfg);

    int n_agents() const { return n_agents_; }
    int history() const { return cfg_.history; }
    int state_dim() const { return state_dim_; }
    double noise_sigma() const { return cfg_.noise_sigma; }
    const TrainConfig& config() const { return cfg_; }
    const AgentNets& agent(int i) const { return agents_[static_cast<std::size_t>(i)]; }
    AgentNets& agent_mut(int i) { return agents_[static_cast<std::size_t>(i)]; }

    // window: (2 x H), oldest column first. Noise is Gaussian, pre-tanh.
    double act(int agent, const Eigen::MatrixXd& window, bool noise_on);

    // state_window: (state_dim x H); joint_actions in agent-index order.
    double critic_q(int agent, const Eigen::MatrixXd& state_window,
                    const std::vector<double>& joint_actions) const;

    TrainStepStats train_step(ReplayBuffer& buffer);

    // Full training loop: reset/act/step/store/train_step, curve per episode.
    TrainResult train(Environment& env);

    // Greedy rollout, rewards recorded but unused by the agents.
    EpisodeTrace evaluate(Environment& env, std::uint64_t seed);

    void save(const std::string& path) const;
    static Maddpg load(const std::string& path);

  private:
    friend struct MaddpgTestAccess;
    struct Batch;
    Batch assemble(ReplayBuffer& buffer);
    std::vector<Eigen::MatrixXd> critic_seq(int agent, const std::vector<Eigen::MatrixXd>& state,
                                            const Eigen::MatrixXd& actions) const;
    void push_window(std::vector<Eigen::MatrixXd>& windows,
                     const std::vector<Observation>& obs) const;
    std::vector<double> window_blob(const std::vector<Eigen::MatrixXd>& windows) const;
    void check_env(const Environment& env) const;

    Maddpg() = default;

    TrainConfig cfg_;
    PlantModel model_ = PlantModel::ModelI;
    int n_agents_ = 0;
    int state_dim_ = 0;
    double dz_max_ = 0.1;
    long train_steps_ = 0;
    std::vector<AgentNets> agents_;
};

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

}  // namespace gridmarl
