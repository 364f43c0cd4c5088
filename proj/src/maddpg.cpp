#include "gridmarl/maddpg.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace gridmarl {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    auto mix = [](std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    };
    return mix(master ^ mix(stream ^ mix(index)));
}

void TrainConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TrainConfig: 0 < gamma < 1");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("TrainConfig: 0 < tau <= 1");
    if (!(lr_actor > 0.0) || !(lr_critic > 0.0))
        throw std::invalid_argument("TrainConfig: learning rates must be positive");
    if (batch < 1 || buffer_capacity < batch)
        throw std::invalid_argument("TrainConfig: need buffer capacity >= batch >= 1");
    if (history < 1) throw std::invalid_argument("TrainConfig: history must be >= 1");
    if (episodes < 1) throw std::invalid_argument("TrainConfig: episodes must be >= 1");
    if (!(noise_sigma >= 0.0) || !(noise_decay > 0.0 && noise_decay <= 1.0))
        throw std::invalid_argument("TrainConfig: bad noise parameters");
    if (train_every < 1) throw std::invalid_argument("TrainConfig: train_every must be >= 1");
    if (actor_every < 1) throw std::invalid_argument("TrainConfig: actor_every must be >= 1");
    if (lstm_hidden < 0) throw std::invalid_argument("TrainConfig: lstm_hidden must be >= 0");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : rng_(seed) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
    store_.resize(capacity);
}

void ReplayBuffer::add(Transition t) {
    store_[next_] = std::move(t);
    next_ += 1;
    if (next_ == store_.size()) {
        next_ = 0;
        full_ = true;
    }
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch) {
    if (batch > size()) throw std::logic_error("ReplayBuffer: fewer transitions than batch");
    std::uniform_int_distribution<std::size_t> pick(0, size() - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = pick(rng_);
    return idx;
}

Maddpg::Maddpg(const EnvConfig& env_cfg, const TrainConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    env_cfg.validate();
    model_ = env_cfg.model;
    n_agents_ = env_cfg.n_agents;
    dz_max_ = env_cfg.dz_max;
    state_dim_ = model_ == PlantModel::ModelI ? 1 + n_agents_ : 2 * n_agents_;

    nn::NetSpec actor_spec;
    actor_spec.input_dim = 2;
    actor_spec.lstm_hidden = cfg_.lstm_hidden;
    actor_spec.dense_hidden = cfg_.dense;
    actor_spec.output_dim = 1;

    nn::NetSpec critic_spec = actor_spec;
    critic_spec.input_dim = state_dim_ + n_agents_;

    agents_.resize(static_cast<std::size_t>(n_agents_));
    for (int i = 0; i < n_agents_; ++i) {
        auto& a = agents_[static_cast<std::size_t>(i)];
        a.actor = nn::NetParams::init(actor_spec, derive_seed(cfg_.seed, 1, static_cast<std::uint64_t>(i)));
        a.actor.w.back() *= cfg_.actor_head_scale;
        a.critic = nn::NetParams::init(critic_spec, derive_seed(cfg_.seed, 2, static_cast<std::uint64_t>(i)));
        a.target_actor = a.actor;
        a.target_critic = a.critic;
        a.actor_opt = nn::OptimizerState::make(cfg_.optimizer, actor_spec);
        a.critic_opt = nn::OptimizerState::make(cfg_.optimizer, critic_spec);
        a.noise_rng.seed(derive_seed(cfg_.seed, 3, static_cast<std::uint64_t>(i)));
    }
}

double Maddpg::act(int agent, const Eigen::MatrixXd& window, bool noise_on) {
    if (window.rows() != 2 || window.cols() != cfg_.history)
        throw std::invalid_argument("act: window must be 2 x history");
    std::vector<Eigen::MatrixXd> seq(static_cast<std::size_t>(cfg_.history));
    for (int t = 0; t < cfg_.history; ++t) seq[static_cast<std::size_t>(t)] = window.col(t);
    const double u = nn::forward(agents_[static_cast<std::size_t>(agent)].actor, seq)(0, 0);
    double noisy = u;
    if (noise_on) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        noisy += cfg_.noise_sigma * gauss(agents_[static_cast<std::size_t>(agent)].noise_rng);
    }
    return apply_grc(noisy, dz_max_);
}

std::vector<Eigen::MatrixXd> Maddpg::critic_seq(int agent, const std::vector<Eigen::MatrixXd>& state,
                                                const Eigen::MatrixXd& actions) const {
    // actions: (n x B) in agent-index order; reordered so the owner's slot
    // leads, remaining agents in index order.
    const int n = n_agents_;
    const auto batch = state.front().cols();
    std::vector<Eigen::MatrixXd> seq(state.size());
    for (std::size_t t = 0; t < state.size(); ++t) {
        Eigen::MatrixXd m(state_dim_ + n, batch);
        m.topRows(state_dim_) = state[t];
        m.row(state_dim_) = actions.row(agent);
        int row = state_dim_ + 1;
        for (int j = 0; j < n; ++j) {
            if (j == agent) continue;
            m.row(row++) = actions.row(j);
        }
        seq[t] = std::move(m);
    }
    return seq;
}

double Maddpg::critic_q(int agent, const Eigen::MatrixXd& state_window,
                        const std::vector<double>& joint_actions) const {
    if (state_window.rows() != state_dim_ || state_window.cols() != cfg_.history)
        throw std::invalid_argument("critic_q: state window must be state_dim x history");
    if (static_cast<int>(joint_actions.size()) != n_agents_)
        throw std::invalid_argument("critic_q: one action per agent required");
    std::vector<Eigen::MatrixXd> state(static_cast<std::size_t>(cfg_.history));
    for (int t = 0; t < cfg_.history; ++t) state[static_cast<std::size_t>(t)] = state_window.col(t);
    Eigen::MatrixXd actions(n_agents_, 1);
    for (int j = 0; j < n_agents_; ++j) actions(j, 0) = joint_actions[static_cast<std::size_t>(j)];
    const auto seq = critic_seq(agent, state, actions);
    return nn::forward(agents_[static_cast<std::size_t>(agent)].critic, seq)(0, 0);
}

struct Maddpg::Batch {
    int b = 0;
    // per agent: H matrices (2 x B)
    std::vector<std::vector<Eigen::MatrixXd>> actor_seq, next_actor_seq;
    // H matrices (state_dim x B)
    std::vector<Eigen::MatrixXd> state_seq, next_state_seq;
    Eigen::MatrixXd actions;  // (n x B)
    Eigen::RowVectorXd rewards, done;
};

Maddpg::Batch Maddpg::assemble(ReplayBuffer& buffer) {
    const int bsz = cfg_.batch;
    const int h = cfg_.history;
    const auto idx = buffer.sample_indices(static_cast<std::size_t>(bsz));

    Batch bt;
    bt.b = bsz;
    bt.actor_seq.assign(static_cast<std::size_t>(n_agents_),
                        std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(h),
                                                     Eigen::MatrixXd::Zero(2, bsz)));
    bt.next_actor_seq = bt.actor_seq;
    bt.state_seq.assign(static_cast<std::size_t>(h), Eigen::MatrixXd::Zero(state_dim_, bsz));
    bt.next_state_seq = bt.state_seq;
    bt.actions.resize(n_agents_, bsz);
    bt.rewards.resize(bsz);
    bt.done.resize(bsz);

    auto fill = [&](const std::vector<double>& blob, std::vector<std::vector<Eigen::MatrixXd>>& actor,
                    std::vector<Eigen::MatrixXd>& state, int col) {
        for (int a = 0; a < n_agents_; ++a) {
            for (int t = 0; t < h; ++t) {
                const std::size_t base = (static_cast<std::size_t>(a) * static_cast<std::size_t>(h) +
                                          static_cast<std::size_t>(t)) * 2;
                const double w = blob[base];
                const double z = blob[base + 1];
                actor[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)](0, col) = w;
                actor[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)](1, col) = z;
                if (model_ == PlantModel::ModelI) {
                    if (a == 0) state[static_cast<std::size_t>(t)](0, col) = w;
                    state[static_cast<std::size_t>(t)](1 + a, col) = z;
                } else {
                    state[static_cast<std::size_t>(t)](a, col) = w;
                    state[static_cast<std::size_t>(t)](n_agents_ + a, col) = z;
                }
            }
        }
    };

    for (int col = 0; col < bsz; ++col) {
        const Transition& tr = buffer.at(idx[static_cast<std::size_t>(col)]);
        fill(tr.obs, bt.actor_seq, bt.state_seq, col);
        fill(tr.next_obs, bt.next_actor_seq, bt.next_state_seq, col);
        for (int a = 0; a < n_agents_; ++a)
            bt.actions(a, col) = tr.actions[static_cast<std::size_t>(a)];
        bt.rewards(col) = tr.reward;
        bt.done(col) = tr.done ? 1.0 : 0.0;
    }
    return bt;
}

TrainStepStats Maddpg::train_step(ReplayBuffer& buffer) {
    if (buffer.size() < static_cast<std::size_t>(cfg_.batch))
        throw std::logic_error("train_step: buffer smaller than batch");
    Batch bt = assemble(buffer);
    const int bsz = bt.b;
    train_steps_ += 1;
    const bool update_actor = train_steps_ % cfg_.actor_every == 0;

    // Next joint action from all target actors, shared by every critic target.
    Eigen::MatrixXd next_actions(n_agents_, bsz);
    for (int j = 0; j < n_agents_; ++j) {
        const Eigen::MatrixXd u =
            nn::forward(agents_[static_cast<std::size_t>(j)].target_actor,
                        bt.next_actor_seq[static_cast<std::size_t>(j)]);
        next_actions.row(j) = dz_max_ * u.array().tanh().matrix();
    }

    TrainStepStats stats;
    stats.critic_loss.resize(static_cast<std::size_t>(n_agents_));
    stats.actor_objective.resize(static_cast<std::size_t>(n_agents_));

    for (int i = 0; i < n_agents_; ++i) {
        auto& ag = agents_[static_cast<std::size_t>(i)];

        // --- critic: minimize mean squared TD error ---
        const Eigen::MatrixXd q_next =
            nn::forward(ag.target_critic, critic_seq(i, bt.next_state_seq, next_actions));
        Eigen::RowVectorXd y = bt.rewards;
        y += cfg_.gamma * (1.0 - bt.done.array()).matrix().cwiseProduct(q_next.row(0));

        nn::ForwardCache ccache;
        const Eigen::MatrixXd q =
            nn::forward(ag.critic, critic_seq(i, bt.state_seq, bt.actions), &ccache);
        const Eigen::RowVectorXd td = q.row(0) - y;
        stats.critic_loss[static_cast<std::size_t>(i)] = td.squaredNorm() / static_cast<double>(bsz);
        const Eigen::MatrixXd upstream = (2.0 / static_cast<double>(bsz)) * td;
        auto cback = nn::backward(ag.critic, ccache, upstream);
        nn::optimizer_step(ag.critic, cback.grads, ag.critic_opt, cfg_.lr_critic);

        // --- actor: ascend Q through its own action slot ---
        if (update_actor) {
            nn::ForwardCache acache;
            const Eigen::MatrixXd u =
                nn::forward(ag.actor, bt.actor_seq[static_cast<std::size_t>(i)], &acache);
            const Eigen::MatrixXd a_own = dz_max_ * u.array().tanh().matrix();
            Eigen::MatrixXd mixed = bt.actions;
            mixed.row(i) = a_own.row(0);

            nn::ForwardCache qcache;
            const Eigen::MatrixXd q_pi =
                nn::forward(ag.critic, critic_seq(i, bt.state_seq, mixed), &qcache);
            stats.actor_objective[static_cast<std::size_t>(i)] = q_pi.row(0).mean();

            const Eigen::MatrixXd ones =
                Eigen::MatrixXd::Constant(1, bsz, 1.0 / static_cast<double>(bsz));
            auto qback = nn::backward(ag.critic, qcache, ones);
            // dQ/da_i: own action sits at row state_dim_ of every timestep input.
            Eigen::RowVectorXd dq_da = Eigen::RowVectorXd::Zero(bsz);
            for (const auto& g : qback.input_grads) dq_da += g.row(state_dim_);
            const Eigen::MatrixXd du =
                dq_da.cwiseProduct((dz_max_ * (1.0 - u.array().tanh().square())).matrix().row(0));
            auto aback = nn::backward(ag.actor, acache, -du);  // minimize -Q
            nn::optimizer_step(ag.actor, aback.grads, ag.actor_opt, cfg_.lr_actor);

            nn::soft_update(ag.target_critic, ag.critic, cfg_.tau);
            nn::soft_update(ag.target_actor, ag.actor, cfg_.tau);
        }
    }
    return stats;
}

void Maddpg::push_window(std::vector<Eigen::MatrixXd>& windows,
                         const std::vector<Observation>& obs) const {
    for (int a = 0; a < n_agents_; ++a) {
        auto& w = windows[static_cast<std::size_t>(a)];
        const int h = cfg_.history;
        if (h > 1) w.leftCols(h - 1) = w.rightCols(h - 1).eval();
        w(0, h - 1) = obs[static_cast<std::size_t>(a)].d_omega;
        w(1, h - 1) = obs[static_cast<std::size_t>(a)].z;
    }
}

std::vector<double> Maddpg::window_blob(const std::vector<Eigen::MatrixXd>& windows) const {
    std::vector<double> blob;
    blob.reserve(static_cast<std::size_t>(n_agents_ * cfg_.history * 2));
    for (int a = 0; a < n_agents_; ++a)
        for (int t = 0; t < cfg_.history; ++t) {
            blob.push_back(windows[static_cast<std::size_t>(a)](0, t));
            blob.push_back(windows[static_cast<std::size_t>(a)](1, t));
        }
    return blob;
}

void Maddpg::check_env(const Environment& env) const {
    if (env.config().n_agents != n_agents_)
        throw std::invalid_argument("Maddpg: environment agent count does not match checkpoint");
    if (env.config().model != model_)
        throw std::invalid_argument("Maddpg: environment model does not match checkpoint");
}

TrainResult Maddpg::train(Environment& env) {
    check_env(env);
    ReplayBuffer buffer(static_cast<std::size_t>(cfg_.buffer_capacity), derive_seed(cfg_.seed, 4, 0));
    TrainResult result;
    long global_step = 0;
    std::vector<AgentNets> best_agents;
    double best_smoothed = -std::numeric_limits<double>::infinity();

    for (int ep = 0; ep < cfg_.episodes; ++ep) {
        auto obs = env.reset(derive_seed(cfg_.seed, 5, static_cast<std::uint64_t>(ep)));
        std::vector<Eigen::MatrixXd> windows(static_cast<std::size_t>(n_agents_),
                                             Eigen::MatrixXd::Zero(2, cfg_.history));
        push_window(windows, obs);
        double ep_reward = 0.0;

        while (!env.done()) {
            ActionVector actions(static_cast<std::size_t>(n_agents_));
            for (int a = 0; a < n_agents_; ++a)
                actions[static_cast<std::size_t>(a)] =
                    act(a, windows[static_cast<std::size_t>(a)], true);
            const auto before = window_blob(windows);
            StepResult sr = env.step(actions);
            push_window(windows, sr.obs);

            Transition tr;
            tr.obs = before;
            tr.actions = sr.info.dz_applied;
            tr.reward = sr.reward;
            tr.next_obs = window_blob(windows);
            tr.done = sr.done;
            buffer.add(std::move(tr));

            global_step += 1;
            if (buffer.size() >= static_cast<std::size_t>(std::max(cfg_.warmup_transitions, cfg_.batch)) &&
                global_step % cfg_.train_every == 0)
                train_step(buffer);
            ep_reward += sr.reward;
        }

        // Trailing-window smoothing with a 95% band, as plotted per episode.
        LearningCurvePoint pt;
        pt.episode = ep;
        pt.reward = ep_reward;
        const int win = 20;
        const int lo = std::max(0, ep - win + 1);
        const double count = static_cast<double>(ep - lo + 1);
        double mean = ep_reward;
        for (int k = lo; k < ep; ++k) mean += result.curve[static_cast<std::size_t>(k)].reward;
        mean /= count;
        double var = (ep_reward - mean) * (ep_reward - mean);
        for (int k = lo; k < ep; ++k) {
            const double dd = result.curve[static_cast<std::size_t>(k)].reward - mean;
            var += dd * dd;
        }
        const double sem = count > 1 ? std::sqrt(var / (count - 1.0)) / std::sqrt(count) : 0.0;
        pt.smoothed = mean;
        pt.band_lo = mean - 1.96 * sem;
        pt.band_hi = mean + 1.96 * sem;
        result.curve.push_back(pt);

        if (cfg_.keep_best && pt.smoothed > best_smoothed && ep >= win - 1) {
            best_smoothed = pt.smoothed;
            best_agents = agents_;
        }
        cfg_.noise_sigma = std::max(cfg_.noise_sigma * cfg_.noise_decay, cfg_.noise_sigma_min);
    }
    if (cfg_.keep_best && !best_agents.empty()) agents_ = best_agents;
    return result;
}

EpisodeTrace Maddpg::evaluate(Environment& env, std::uint64_t seed) {
    check_env(env);
    EpisodeTrace trace;
    trace.n_agents = n_agents_;
    trace.n_omega = model_ == PlantModel::ModelI ? 1 : n_agents_;
    trace.has_cost = env.config().costs.size() == static_cast<std::size_t>(n_agents_);
    trace.dt = env.config().control_period();
    trace.f_nom = env.config().ba.f_nom;

    auto obs = env.reset(seed);
    std::vector<Eigen::MatrixXd> windows(static_cast<std::size_t>(n_agents_),
                                         Eigen::MatrixXd::Zero(2, cfg_.history));
    push_window(windows, obs);

    while (!env.done()) {
        ActionVector actions(static_cast<std::size_t>(n_agents_));
        for (int a = 0; a < n_agents_; ++a)
            actions[static_cast<std::size_t>(a)] = act(a, windows[static_cast<std::size_t>(a)], false);
        StepResult sr = env.step(actions);
        push_window(windows, sr.obs);

        TraceRow row;
        row.t = sr.info.t;
        row.d_omega = sr.info.d_omega;
        row.z = sr.info.z;
        row.p = sr.info.p_gen;
        row.dz = sr.info.dz_applied;
        row.p_load = sr.info.p_load;
        row.reward = sr.reward;
        row.cost = sr.info.cost;
        row.c1 = sr.info.c1;
        row.c2 = sr.info.c2;
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

void write_curve_csv(const std::string& path, const std::vector<LearningCurvePoint>& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open curve output: " + path);
    out << "episode,reward,smoothed,band_lo,band_hi\n";
    for (const auto& p : curve)
        out << p.episode << "," << format_double(p.reward) << "," << format_double(p.smoothed)
            << "," << format_double(p.band_lo) << "," << format_double(p.band_hi) << "\n";
}

namespace {

json spec_to_json(const nn::NetSpec& s) {
    return json{{"input_dim", s.input_dim},
                {"lstm_hidden", s.lstm_hidden},
                {"dense_hidden", s.dense_hidden},
                {"output_dim", s.output_dim},
                {"hidden_act", static_cast<int>(s.hidden_act)},
                {"output_act", static_cast<int>(s.output_act)}};
}

nn::NetSpec spec_from_json(const json& j) {
    nn::NetSpec s;
    s.input_dim = j.at("input_dim").get<int>();
    s.lstm_hidden = j.at("lstm_hidden").get<int>();
    s.dense_hidden = j.at("dense_hidden").get<std::vector<int>>();
    s.output_dim = j.at("output_dim").get<int>();
    s.hidden_act = static_cast<nn::Activation>(j.at("hidden_act").get<int>());
    s.output_act = static_cast<nn::Activation>(j.at("output_act").get<int>());
    return s;
}

void append_tensors(std::vector<nn::Tensor>& out, const nn::NetParams& p) {
    auto ts = p.tensors();
    out.insert(out.end(), ts.begin(), ts.end());
}

constexpr char kMagic[8] = {'G', 'M', 'R', 'L', 'C', 'K', 'P', '1'};

}  // namespace

void Maddpg::save(const std::string& path) const {
    json header;
    header["format_version"] = 1;
    header["model"] = model_ == PlantModel::ModelI ? "model1" : "model2";
    header["n_agents"] = n_agents_;
    header["history"] = cfg_.history;
    header["dz_max"] = dz_max_;
    header["state_dim"] = state_dim_;
    header["noise_sigma"] = cfg_.noise_sigma;
    header["actor_spec"] = spec_to_json(agents_.front().actor.spec);
    header["critic_spec"] = spec_to_json(agents_.front().critic.spec);
    header["critic_input_layout"] =
        "per timestep: [state block][own dz][other dz in agent-index order]; "
        "state block = [d_omega (system or per-agent)][z per agent]; joint action tiled over window";
    header["tensor_order"] = "per agent: actor, critic, target_actor, target_critic";

    std::vector<nn::Tensor> tensors;
    for (const auto& ag : agents_) {
        append_tensors(tensors, ag.actor);
        append_tensors(tensors, ag.critic);
        append_tensors(tensors, ag.target_actor);
        append_tensors(tensors, ag.target_critic);
    }
    json shapes = json::array();
    for (const auto& t : tensors) shapes.push_back(t.shape);
    header["tensor_shapes"] = shapes;

    const std::string head = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint output: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = head.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& t : tensors)
        out.write(reinterpret_cast<const char*>(t.values.data()),
                  static_cast<std::streamsize>(t.values.size() * sizeof(double)));
}

Maddpg Maddpg::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string head(hlen, '\0');
    in.read(head.data(), static_cast<std::streamsize>(hlen));
    const json header = json::parse(head);
    if (header.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint version");

    Maddpg sys;
    sys.model_ = header.at("model").get<std::string>() == "model1" ? PlantModel::ModelI
                                                                   : PlantModel::ModelII;
    sys.n_agents_ = header.at("n_agents").get<int>();
    sys.state_dim_ = header.at("state_dim").get<int>();
    sys.dz_max_ = header.at("dz_max").get<double>();
    sys.cfg_.history = header.at("history").get<int>();
    sys.cfg_.noise_sigma = header.at("noise_sigma").get<double>();
    const nn::NetSpec actor_spec = spec_from_json(header.at("actor_spec"));
    const nn::NetSpec critic_spec = spec_from_json(header.at("critic_spec"));
    sys.cfg_.lstm_hidden = actor_spec.lstm_hidden;
    sys.cfg_.dense = actor_spec.dense_hidden;

    auto shapes = header.at("tensor_shapes").get<std::vector<std::vector<std::size_t>>>();
    std::size_t cursor = 0;
    auto read_net = [&](const nn::NetSpec& spec) {
        nn::NetParams p = nn::NetParams::zeros(spec);
        std::vector<nn::Tensor> ts;
        for (const auto& ref : p.tensors()) {
            if (cursor >= shapes.size()) throw std::runtime_error("checkpoint tensor list truncated");
            nn::Tensor t;
            t.shape = shapes[cursor++];
            std::size_t count = 1;
            for (std::size_t s : t.shape) count *= s;
            t.values.resize(count);
            in.read(reinterpret_cast<char*>(t.values.data()),
                    static_cast<std::streamsize>(count * sizeof(double)));
            if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
                throw std::runtime_error("checkpoint truncated");
            (void)ref;
            ts.push_back(std::move(t));
        }
        p.load_tensors(ts);
        return p;
    };

    sys.agents_.resize(static_cast<std::size_t>(sys.n_agents_));
    for (auto& ag : sys.agents_) {
        ag.actor = read_net(actor_spec);
        ag.critic = read_net(critic_spec);
        ag.target_actor = read_net(actor_spec);
        ag.target_critic = read_net(critic_spec);
        ag.actor_opt = nn::OptimizerState::make(nn::Optimizer::Adam, actor_spec);
        ag.critic_opt = nn::OptimizerState::make(nn::Optimizer::Adam, critic_spec);
    }
    for (std::size_t i = 0; i < sys.agents_.size(); ++i)
        sys.agents_[i].noise_rng.seed(derive_seed(sys.cfg_.seed, 3, i));
    return sys;
}

}  // namespace gridmarl
