#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "gridmarl/maddpg.hpp"

using namespace gridmarl;

namespace {

EnvConfig small_env_cfg() {
    EnvConfig cfg;
    cfg.model = PlantModel::ModelI;
    cfg.n_agents = 2;
    cfg.reward = RewardKind::SecondaryModelI;
    cfg.nominal_load = 3.0;
    cfg.initial_z = {1.5, 1.5};
    cfg.episode_len = 5;
    return cfg;
}

TrainConfig tiny_train_cfg() {
    TrainConfig cfg;
    cfg.lstm_hidden = 3;
    cfg.dense = {4};
    cfg.history = 4;
    cfg.batch = 4;
    cfg.buffer_capacity = 64;
    cfg.warmup_transitions = 4;
    cfg.episodes = 2;
    cfg.seed = 11;
    return cfg;
}

Transition make_transition(const Maddpg& sys, std::mt19937_64& rng, double reward, bool done) {
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    const std::size_t blob = static_cast<std::size_t>(sys.n_agents() * sys.history() * 2);
    Transition tr;
    tr.obs.resize(blob);
    tr.next_obs.resize(blob);
    for (auto& v : tr.obs) v = dist(rng);
    for (auto& v : tr.next_obs) v = dist(rng);
    tr.actions.resize(static_cast<std::size_t>(sys.n_agents()));
    for (auto& a : tr.actions) a = 0.1 * dist(rng);
    tr.reward = reward;
    tr.done = done;
    return tr;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar recomputation of a critic evaluation from the documented layout:
// per timestep [state block, own dz, other dz in index order].
double critic_oracle(const nn::NetParams& p, const Eigen::MatrixXd& state_window,
                     const std::vector<double>& joint, int agent) {
    const int h = p.spec.lstm_hidden;
    std::vector<double> hid(static_cast<std::size_t>(h), 0.0), cell(static_cast<std::size_t>(h), 0.0);
    const int sd = static_cast<int>(state_window.rows());
    const int n = static_cast<int>(joint.size());
    for (int t = 0; t < state_window.cols(); ++t) {
        std::vector<double> x;
        for (int r = 0; r < sd; ++r) x.push_back(state_window(r, t));
        x.push_back(joint[static_cast<std::size_t>(agent)]);
        for (int j = 0; j < n; ++j)
            if (j != agent) x.push_back(joint[static_cast<std::size_t>(j)]);
        std::vector<double> hid_next(static_cast<std::size_t>(h)), cell_next(static_cast<std::size_t>(h));
        for (int r = 0; r < h; ++r) {
            double zi = p.bl(r), zf = p.bl(h + r), zg = p.bl(2 * h + r), zo = p.bl(3 * h + r);
            for (std::size_t c = 0; c < x.size(); ++c) {
                zi += p.wx(r, static_cast<Eigen::Index>(c)) * x[c];
                zf += p.wx(h + r, static_cast<Eigen::Index>(c)) * x[c];
                zg += p.wx(2 * h + r, static_cast<Eigen::Index>(c)) * x[c];
                zo += p.wx(3 * h + r, static_cast<Eigen::Index>(c)) * x[c];
            }
            for (int c = 0; c < h; ++c) {
                zi += p.wh(r, c) * hid[static_cast<std::size_t>(c)];
                zf += p.wh(h + r, c) * hid[static_cast<std::size_t>(c)];
                zg += p.wh(2 * h + r, c) * hid[static_cast<std::size_t>(c)];
                zo += p.wh(3 * h + r, c) * hid[static_cast<std::size_t>(c)];
            }
            cell_next[static_cast<std::size_t>(r)] =
                sig(zf) * cell[static_cast<std::size_t>(r)] + sig(zi) * std::tanh(zg);
            hid_next[static_cast<std::size_t>(r)] =
                sig(zo) * std::tanh(cell_next[static_cast<std::size_t>(r)]);
        }
        hid = hid_next;
        cell = cell_next;
    }
    std::vector<double> head = hid;
    for (std::size_t l = 0; l < p.w.size(); ++l) {
        std::vector<double> next(static_cast<std::size_t>(p.w[l].rows()));
        for (Eigen::Index r = 0; r < p.w[l].rows(); ++r) {
            double acc = p.b[l](r);
            for (Eigen::Index c = 0; c < p.w[l].cols(); ++c)
                acc += p.w[l](r, c) * head[static_cast<std::size_t>(c)];
            if (l + 1 < p.w.size() && p.spec.hidden_act == nn::Activation::Tanh) acc = std::tanh(acc);
            next[static_cast<std::size_t>(r)] = acc;
        }
        head = next;
    }
    return head[0];
}

}  // namespace

TEST_CASE("replay buffer") {
    SUBCASE("uniform sampling within multinomial bounds") {
        ReplayBuffer buf(10, 3);
        Transition t;
        for (int k = 0; k < 10; ++k) buf.add(t);
        std::vector<int> counts(10, 0);
        const int draws = 10000;
        for (int k = 0; k < draws / 10; ++k)
            for (std::size_t i : buf.sample_indices(10)) counts[i]++;
        const double expect = draws / 10.0;
        const double sigma = std::sqrt(draws * 0.1 * 0.9);
        for (int c : counts) CHECK(std::abs(c - expect) < 3.0 * sigma);
    }
    SUBCASE("never yields more than stored") {
        ReplayBuffer buf(10, 3);
        buf.add(Transition{});
        CHECK_THROWS_AS(buf.sample_indices(2), std::logic_error);
    }
    SUBCASE("ring overwrite keeps size at capacity") {
        ReplayBuffer buf(4, 3);
        for (int k = 0; k < 9; ++k) buf.add(Transition{});
        CHECK(buf.size() == 4);
    }
}

TEST_CASE("act") {
    const EnvConfig env_cfg = small_env_cfg();
    TrainConfig cfg = tiny_train_cfg();
    Maddpg sys(env_cfg, cfg);
    Eigen::MatrixXd window = Eigen::MatrixXd::Zero(2, cfg.history);
    SUBCASE("zero-weight actor emits zero without noise") {
        sys.agent_mut(0).actor = nn::NetParams::zeros(sys.agent(0).actor.spec);
        CHECK(sys.act(0, window, false) == 0.0);
    }
    SUBCASE("deterministic without noise") {
        window(0, 1) = 0.02;
        window(1, 2) = 1.4;
        CHECK(sys.act(0, window, false) == sys.act(0, window, false));
    }
    SUBCASE("bounded for any observation and noise draw") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> dist(-5.0, 5.0);
        for (int k = 0; k < 100000; ++k) {
            window(0, k % cfg.history) = dist(rng);
            window(1, (k + 1) % cfg.history) = dist(rng);
            const double a = sys.act(k % 2, window, true);
            CHECK(std::abs(a) <= env_cfg.dz_max);
        }
    }
}

TEST_CASE("critic_q") {
    const EnvConfig env_cfg = small_env_cfg();
    TrainConfig cfg = tiny_train_cfg();
    Maddpg sys(env_cfg, cfg);
    Eigen::MatrixXd state = Eigen::MatrixXd::Zero(sys.state_dim(), cfg.history);
    SUBCASE("zero-weight critic scores zero") {
        sys.agent_mut(0).critic = nn::NetParams::zeros(sys.agent(0).critic.spec);
        CHECK(sys.critic_q(0, state, {0.05, -0.02}) == 0.0);
    }
    SUBCASE("matches the scalar oracle through the documented layout") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> dist(-0.4, 0.4);
        for (int t = 0; t < cfg.history; ++t)
            for (int r = 0; r < sys.state_dim(); ++r) state(r, t) = dist(rng);
        const std::vector<double> joint = {0.03, -0.06};
        for (int agent = 0; agent < 2; ++agent) {
            const double got = sys.critic_q(agent, state, joint);
            const double expect = critic_oracle(sys.agent(agent).critic, state, joint, agent);
            CHECK(got == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(sys.critic_q(0, state, {0.1}), std::invalid_argument);
        CHECK_THROWS_AS(sys.critic_q(0, Eigen::MatrixXd::Zero(1, cfg.history), {0.1, 0.1}),
                        std::invalid_argument);
    }
}

TEST_CASE("train_step") {
    const EnvConfig env_cfg = small_env_cfg();
    SUBCASE("gamma = 0 reduces the critic target to the reward") {
        TrainConfig cfg = tiny_train_cfg();
        cfg.gamma = 1e-12;  // validate() wants gamma > 0; degenerate limit
        cfg.batch = 1;
        Maddpg sys(env_cfg, cfg);
        for (int i = 0; i < 2; ++i) {
            sys.agent_mut(i).critic = nn::NetParams::zeros(sys.agent(i).critic.spec);
            // Non-trivial target critic to prove gamma gates it off.
            sys.agent_mut(i).target_critic.b.back().setConstant(5.0);
        }
        ReplayBuffer buf(8, 1);
        std::mt19937_64 rng(2);
        buf.add(make_transition(sys, rng, 7.0, false));
        const TrainStepStats stats = sys.train_step(buf);
        // Online critic outputs 0, y = r + tiny. Loss = r^2.
        CHECK(stats.critic_loss[0] == doctest::Approx(49.0).epsilon(1e-6));
        CHECK(stats.critic_loss[1] == doctest::Approx(49.0).epsilon(1e-6));
    }
    SUBCASE("singleton terminal transition drives the critic to the reward") {
        TrainConfig cfg = tiny_train_cfg();
        cfg.batch = 1;
        cfg.lr_critic = 3e-3;
        Maddpg sys(env_cfg, cfg);
        ReplayBuffer buf(4, 1);
        std::mt19937_64 rng(3);
        buf.add(make_transition(sys, rng, 2.0, true));  // done: y = r exactly
        double loss = 0.0;
        for (int k = 0; k < 4000; ++k) loss = sys.train_step(buf).critic_loss[0];
        CHECK(std::abs(std::sqrt(loss)) < 1e-3);  // |Q - 2.0| < 1e-3
    }
    SUBCASE("insufficient buffer throws") {
        TrainConfig cfg = tiny_train_cfg();
        Maddpg sys(env_cfg, cfg);
        ReplayBuffer buf(8, 1);
        CHECK_THROWS_AS(sys.train_step(buf), std::logic_error);
    }
    SUBCASE("soft update with tau = 1 copies the online nets") {
        TrainConfig cfg = tiny_train_cfg();
        cfg.tau = 1.0;
        Maddpg sys(env_cfg, cfg);
        ReplayBuffer buf(8, 1);
        std::mt19937_64 rng(4);
        for (int k = 0; k < 4; ++k) buf.add(make_transition(sys, rng, 1.0, false));
        sys.train_step(buf);
        CHECK(nn::max_abs_param_diff(sys.agent(0).critic, sys.agent(0).target_critic) == 0.0);
        CHECK(nn::max_abs_param_diff(sys.agent(0).actor, sys.agent(0).target_actor) == 0.0);
    }
}

TEST_CASE("actor ascends a critic rigged to pay its own action") {
    EnvConfig env_cfg = small_env_cfg();
    TrainConfig cfg;
    cfg.lstm_hidden = 0;  // plain dense heads make the rig exact
    cfg.dense = {};
    cfg.history = 3;
    cfg.batch = 4;
    cfg.buffer_capacity = 16;
    cfg.warmup_transitions = 4;
    cfg.seed = 5;
    cfg.lr_actor = 1e-3;
    Maddpg sys(env_cfg, cfg);
    // Q = own-action input of the last timestep.
    for (int i = 0; i < 2; ++i) {
        auto& critic = sys.agent_mut(i).critic;
        critic = nn::NetParams::zeros(critic.spec);
        critic.w[0](0, sys.state_dim()) = 1.0;
    }
    Eigen::MatrixXd probe = Eigen::MatrixXd::Zero(2, cfg.history);
    probe(0, 2) = 0.01;
    probe(1, 2) = 1.5;

    // Every stored observation equals the probed window so the ascent
    // direction is evaluated exactly where we measure it.
    ReplayBuffer buf(16, 1);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 8; ++k) {
        Transition tr = make_transition(sys, rng, 1.0, false);
        for (int a = 0; a < 2; ++a)
            for (int t = 0; t < cfg.history; ++t) {
                const std::size_t base = static_cast<std::size_t>((a * cfg.history + t) * 2);
                tr.obs[base] = probe(0, t);
                tr.obs[base + 1] = probe(1, t);
            }
        buf.add(tr);
    }
    auto pre_tanh = [&](int agent) {
        // act() applies the bound; undo it to read the raw head output.
        const double a = sys.act(agent, probe, false);
        return std::atanh(a / env_cfg.dz_max);
    };
    const double before0 = pre_tanh(0), before1 = pre_tanh(1);
    sys.train_step(buf);
    CHECK(pre_tanh(0) > before0);
    CHECK(pre_tanh(1) > before1);
}

TEST_CASE("training loop") {
    EnvConfig env_cfg = small_env_cfg();
    TrainConfig cfg = tiny_train_cfg();
    SUBCASE("curve length equals the configured episode count") {
        Environment env(env_cfg);
        Maddpg sys(env_cfg, cfg);
        const TrainResult r = sys.train(env);
        CHECK(r.curve.size() == 2);
        CHECK(r.curve[0].episode == 0);
        CHECK(r.curve[1].episode == 1);
    }
    SUBCASE("identical config and seed reproduce the curve exactly") {
        auto run = [&]() {
            Environment env(env_cfg);
            Maddpg sys(env_cfg, cfg);
            return sys.train(env);
        };
        const TrainResult a = run();
        const TrainResult b = run();
        REQUIRE(a.curve.size() == b.curve.size());
        for (std::size_t i = 0; i < a.curve.size(); ++i)
            CHECK(a.curve[i].reward == b.curve[i].reward);
    }
    SUBCASE("environment mismatch is rejected") {
        EnvConfig other = env_cfg;
        other.n_agents = 3;
        other.initial_z = {1.0, 1.0, 1.0};
        Environment env(other);
        Maddpg sys(env_cfg, cfg);
        CHECK_THROWS_AS(sys.train(env), std::invalid_argument);
    }
}

TEST_CASE("evaluation and checkpointing") {
    EnvConfig env_cfg = small_env_cfg();
    env_cfg.episode_len = 8;
    TrainConfig cfg = tiny_train_cfg();
    Maddpg sys(env_cfg, cfg);
    Environment env(env_cfg);

    const EpisodeTrace t1 = sys.evaluate(env, 123);
    CHECK(t1.rows.size() == 8);

    SUBCASE("evaluation is deterministic given checkpoint and seed") {
        const EpisodeTrace t2 = sys.evaluate(env, 123);
        REQUIRE(t1.rows.size() == t2.rows.size());
        for (std::size_t i = 0; i < t1.rows.size(); ++i) {
            CHECK(t1.rows[i].d_omega[0] == t2.rows[i].d_omega[0]);
            CHECK(t1.rows[i].z == t2.rows[i].z);
        }
    }
    SUBCASE("checkpoint round trip is bit-exact and evaluates identically") {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "gridmarl_ckpt_test";
        fs::create_directories(dir);
        const std::string p1 = (dir / "a.bin").string(), p2 = (dir / "b.bin").string();
        sys.save(p1);
        Maddpg loaded = Maddpg::load(p1);
        loaded.save(p2);
        std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
        const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
        CHECK(b1 == b2);
        CHECK(!b1.empty());

        const EpisodeTrace t3 = loaded.evaluate(env, 123);
        REQUIRE(t3.rows.size() == t1.rows.size());
        for (std::size_t i = 0; i < t1.rows.size(); ++i)
            CHECK(t1.rows[i].d_omega[0] == t3.rows[i].d_omega[0]);
        fs::remove_all(dir);
    }
    SUBCASE("checkpoint/environment mismatch errors") {
        EnvConfig other = env_cfg;
        other.model = PlantModel::ModelII;
        other.reward = RewardKind::SecondaryModelII;
        other.d_tiers = {100.0, 200.0};
        GenParams g;
        other.gens = {g, g};
        other.network = NetworkModel::two_gen_two_load();
        Environment env2(other);
        CHECK_THROWS_AS(sys.evaluate(env2, 1), std::invalid_argument);
    }
    SUBCASE("corrupt checkpoint rejected") {
        namespace fs = std::filesystem;
        const fs::path p = fs::temp_directory_path() / "gridmarl_bad.bin";
        std::ofstream out(p, std::ios::binary);
        out << "not a checkpoint";
        out.close();
        CHECK_THROWS_AS(Maddpg::load(p.string()), std::runtime_error);
        fs::remove(p);
    }
}

TEST_CASE("critic symmetry probe on a symmetric setup" * doctest::may_fail()) {
    // Diagnostic only: with freshly initialized (symmetric-width) critics the
    // other-agent slots need not be exchange-symmetric; report, don't gate.
    EnvConfig env_cfg = small_env_cfg();
    env_cfg.n_agents = 3;
    env_cfg.initial_z = {1.0, 1.0, 1.0};
    TrainConfig cfg = tiny_train_cfg();
    Maddpg sys(env_cfg, cfg);
    Eigen::MatrixXd state = Eigen::MatrixXd::Constant(sys.state_dim(), cfg.history, 0.1);
    const double q_a = sys.critic_q(0, state, {0.02, 0.05, -0.03});
    const double q_b = sys.critic_q(0, state, {0.02, -0.03, 0.05});
    WARN(std::abs(q_a - q_b) < 1e-2);
}
