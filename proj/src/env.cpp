#include "gridmarl/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridmarl {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

}  // namespace

void EnvConfig::validate() const {
    if (n_agents < 1) throw std::invalid_argument("EnvConfig: n_agents must be >= 1");
    if (episode_len < 1) throw std::invalid_argument("EnvConfig: episode_len must be >= 1");
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw std::invalid_argument("EnvConfig: eps1, eps2 must be > 0");
    if (!(dz_max > 0.0)) throw std::invalid_argument("EnvConfig: dz_max must be > 0");
    if (!(dt_int > 0.0) || substeps < 1)
        throw std::invalid_argument("EnvConfig: dt_int must be > 0 and substeps >= 1");
    if (!(load_jitter >= 0.0)) throw std::invalid_argument("EnvConfig: load_jitter must be >= 0");

    if (model == PlantModel::ModelI) {
        ba.validate();
    } else {
        if (static_cast<int>(gens.size()) != n_agents)
            throw std::invalid_argument("EnvConfig: one GenParams per agent required for Model II");
        for (const auto& g : gens) g.validate();
        network.validate();
        if (static_cast<int>(network.gen_at_bus.size()) != n_agents)
            throw std::invalid_argument("EnvConfig: network generator count must match n_agents");
        if (wind) throw std::invalid_argument("EnvConfig: wind disturbance is a Model I feature");
    }

    switch (reward) {
        case RewardKind::SecondaryModelI:
            if (model != PlantModel::ModelI)
                throw std::invalid_argument("EnvConfig: secondary Model I reward needs Model I");
            break;
        case RewardKind::TertiaryModelI:
            if (model != PlantModel::ModelI)
                throw std::invalid_argument("EnvConfig: tertiary reward needs Model I");
            if (costs.size() != static_cast<std::size_t>(n_agents))
                throw std::invalid_argument("EnvConfig: tertiary reward needs one cost triple per agent");
            costs.validate();
            if (!(d2 < d1)) throw std::invalid_argument("EnvConfig: d2 < d1 required");
            break;
        case RewardKind::SecondaryModelII: {
            if (model != PlantModel::ModelII)
                throw std::invalid_argument("EnvConfig: Model II reward needs Model II");
            if (static_cast<int>(d_tiers.size()) != n_agents)
                throw std::invalid_argument("EnvConfig: need one reward tier per agent");
            for (std::size_t i = 1; i < d_tiers.size(); ++i)
                if (!(d_tiers[i - 1] < d_tiers[i]))
                    throw std::invalid_argument("EnvConfig: reward tiers must be strictly increasing");
            break;
        }
    }
    if (!initial_z.empty() && static_cast<int>(initial_z.size()) != n_agents)
        throw std::invalid_argument("EnvConfig: initial_z size must match n_agents");
    if (wind) wind->validate();
    if (costs.size() != 0) costs.validate();
}

double reward_secondary_model1(double d_omega, double eps1, double d) {
    return std::abs(d_omega) < eps1 ? d : 0.0;
}

double reward_tertiary(double d_omega, const std::vector<double>& z, const CostModel& costs,
                       double eps1, double eps2, double d1, double d2, bool* c1_out, bool* c2_out) {
    const int n = static_cast<int>(z.size());
    if (n < 2) throw std::invalid_argument("reward_tertiary: need at least two agents");
    if (costs.size() != z.size()) throw std::invalid_argument("reward_tertiary: cost model size mismatch");

    const bool c1 = std::abs(d_omega) < eps1;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            acc += std::abs(z[static_cast<std::size_t>(i)] * costs.curvature(static_cast<std::size_t>(i)) -
                            z[static_cast<std::size_t>(j)] * costs.curvature(static_cast<std::size_t>(j)));
    const bool c2 = acc / factorial(n - 1) < eps2;

    if (c1_out) *c1_out = c1;
    if (c2_out) *c2_out = c2;
    if (c1 && c2) return d1;
    if (c1 != c2) return d2;
    return 0.0;
}

double reward_model2(const std::vector<double>& d_omegas, double eps,
                     const std::vector<double>& tiers) {
    for (std::size_t i = 1; i < tiers.size(); ++i)
        if (!(tiers[i - 1] < tiers[i]))
            throw std::invalid_argument("reward_model2: tiers must be strictly increasing");
    int k = 0;
    for (double w : d_omegas)
        if (std::abs(w) < eps) ++k;
    if (k == 0) return 0.0;
    if (static_cast<std::size_t>(k) > tiers.size())
        throw std::invalid_argument("reward_model2: more agents than tiers");
    return tiers[static_cast<std::size_t>(k - 1)];
}

double apply_grc(double raw_action, double dz_max) {
    if (!(dz_max > 0.0)) throw std::invalid_argument("apply_grc: dz_max must be > 0");
    // tanh rounds to exactly +-1 past ~19; nudge back inside so the bound
    // stays strict for every finite input.
    double t = std::tanh(raw_action);
    if (t >= 1.0) t = std::nextafter(1.0, 0.0);
    if (t <= -1.0) t = std::nextafter(-1.0, 0.0);
    return dz_max * t;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.initial_z.empty()) {
        cfg_.initial_z.assign(static_cast<std::size_t>(cfg_.n_agents),
                              cfg_.nominal_load * (1.0 + (cfg_.model == PlantModel::ModelI ? cfg_.ba.rho : 0.0)) /
                                  static_cast<double>(cfg_.n_agents));
        if (cfg_.model == PlantModel::ModelII) {
            const double total = cfg_.network.load_at_bus.sum();
            cfg_.initial_z.assign(static_cast<std::size_t>(cfg_.n_agents),
                                  total / static_cast<double>(cfg_.n_agents));
        }
    }
}

std::vector<Observation> Environment::reset(std::uint64_t seed) {
    rng_.seed(seed);
    steps_taken_ = 0;
    started_ = true;
    t_ = 0.0;
    churn_accum_ = 0.0;
    wind_state_ = WindState{};
    z_ = cfg_.initial_z;

    std::uniform_real_distribution<double> jitter(-cfg_.load_jitter, cfg_.load_jitter);
    if (cfg_.model == PlantModel::ModelI) {
        const double beta = cfg_.load_jitter > 0.0 ? jitter(rng_) : 0.0;
        episode_load_ = cfg_.nominal_load + beta;
        ba_state_ = BAState{};
        ba_state_.d_omega = 0.0;
        ba_state_.z_g = std::accumulate(z_.begin(), z_.end(), 0.0);
        ba_state_.p_sv = ba_state_.z_g;  // table operating point: P_SV = Z_G, d_omega = 0
    } else {
        episode_bus_loads_ = cfg_.network.load_at_bus;
        for (int b = 0; b < cfg_.network.n_bus; ++b)
            if (cfg_.network.load_at_bus(b) != 0.0 && cfg_.load_jitter > 0.0)
                episode_bus_loads_(b) += jitter(rng_);

        // Initial operating point: outputs at initial_z against the *nominal*
        // loads, zero speed deviation.
        const auto angles = dc_initial_angles(cfg_.initial_z, cfg_.network);
        gen_states_.assign(static_cast<std::size_t>(cfg_.n_agents), GenState{});
        for (int g = 0; g < cfg_.n_agents; ++g) {
            auto& s = gen_states_[static_cast<std::size_t>(g)];
            s.delta = angles[static_cast<std::size_t>(g)];
            s.d_omega = 0.0;
            s.p_sv = cfg_.initial_z[static_cast<std::size_t>(g)];
            s.z = cfg_.initial_z[static_cast<std::size_t>(g)];
        }
    }
    return observations();
}

std::vector<Observation> Environment::observations() const {
    std::vector<Observation> obs(static_cast<std::size_t>(cfg_.n_agents));
    for (int i = 0; i < cfg_.n_agents; ++i) {
        auto& o = obs[static_cast<std::size_t>(i)];
        o.d_omega = cfg_.model == PlantModel::ModelI ? ba_state_.d_omega
                                                     : gen_states_[static_cast<std::size_t>(i)].d_omega;
        o.z = z_[static_cast<std::size_t>(i)];
    }
    return obs;
}

double Environment::current_load_model1() const {
    double load = episode_load_ + churn_accum_;
    if (cfg_.disturbance.step_time >= 0.0 && t_ >= cfg_.disturbance.step_time)
        load += cfg_.disturbance.step_magnitude;
    return load;
}

Eigen::VectorXd Environment::current_bus_loads() const {
    Eigen::VectorXd loads = episode_bus_loads_;
    if (cfg_.disturbance.step_time >= 0.0 && t_ >= cfg_.disturbance.step_time) {
        for (int b = 0; b < cfg_.network.n_bus; ++b)
            if (cfg_.network.load_at_bus(b) != 0.0) loads(b) += cfg_.disturbance.step_magnitude;
    }
    return loads;
}

void Environment::integrate_model1(double p_load) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < cfg_.substeps; ++k) {
        if (cfg_.wind) wind_state_ = wind_step(wind_state_, *cfg_.wind, cfg_.dt_int, gauss(rng_));
        const double effective = p_load - (cfg_.wind ? wind_state_.d_pw : 0.0) / (1.0 + cfg_.ba.rho);
        const BADeriv dv = ba_derivatives(ba_state_, cfg_.ba, effective);
        ba_state_ = euler_step(ba_state_, dv, cfg_.dt_int);
    }
}

void Environment::integrate_model2(const Eigen::VectorXd& bus_loads) {
    NetworkModel net = cfg_.network;
    net.load_at_bus = bus_loads;
    std::vector<double> angles(static_cast<std::size_t>(cfg_.n_agents));
    for (int k = 0; k < cfg_.substeps; ++k) {
        for (int g = 0; g < cfg_.n_agents; ++g)
            angles[static_cast<std::size_t>(g)] = gen_states_[static_cast<std::size_t>(g)].delta;
        const auto p_bus = dc_power_flow(angles, net);
        std::vector<GenDeriv> dv(static_cast<std::size_t>(cfg_.n_agents));
        for (int g = 0; g < cfg_.n_agents; ++g) {
            const int bus = net.gen_at_bus[static_cast<std::size_t>(g)];
            dv[static_cast<std::size_t>(g)] =
                gen_derivatives(gen_states_[static_cast<std::size_t>(g)],
                                cfg_.gens[static_cast<std::size_t>(g)], p_bus[static_cast<std::size_t>(bus)]);
        }
        for (int g = 0; g < cfg_.n_agents; ++g)
            gen_states_[static_cast<std::size_t>(g)] =
                euler_step(gen_states_[static_cast<std::size_t>(g)], dv[static_cast<std::size_t>(g)], cfg_.dt_int);
    }
}

StepInfo Environment::snapshot() const {
    StepInfo info;
    info.t = t_;
    info.z = z_;
    info.wind_power = wind_state_.d_pw;
    if (cfg_.model == PlantModel::ModelI) {
        info.p_load = current_load_model1();
        info.d_omega = {ba_state_.d_omega};
        // Per-generator attribution: command plus the droop share. Summed this
        // equals Z_G - d_omega/R_D, the steady-state value of P_SV.
        info.p_gen.resize(static_cast<std::size_t>(cfg_.n_agents));
        const double r_di = cfg_.ba.r_d * static_cast<double>(cfg_.n_agents);
        for (int i = 0; i < cfg_.n_agents; ++i)
            info.p_gen[static_cast<std::size_t>(i)] =
                z_[static_cast<std::size_t>(i)] - ba_state_.d_omega / r_di;
        info.p_total = ba_state_.p_sv;
    } else {
        Eigen::VectorXd loads = current_bus_loads();
        info.p_load = loads.sum();
        info.d_omega.resize(static_cast<std::size_t>(cfg_.n_agents));
        for (int g = 0; g < cfg_.n_agents; ++g)
            info.d_omega[static_cast<std::size_t>(g)] = gen_states_[static_cast<std::size_t>(g)].d_omega;
        NetworkModel net = cfg_.network;
        net.load_at_bus = loads;
        std::vector<double> angles(static_cast<std::size_t>(cfg_.n_agents));
        for (int g = 0; g < cfg_.n_agents; ++g)
            angles[static_cast<std::size_t>(g)] = gen_states_[static_cast<std::size_t>(g)].delta;
        const auto p_bus = dc_power_flow(angles, net);
        info.p_gen.resize(static_cast<std::size_t>(cfg_.n_agents));
        for (int g = 0; g < cfg_.n_agents; ++g)
            info.p_gen[static_cast<std::size_t>(g)] =
                p_bus[static_cast<std::size_t>(net.gen_at_bus[static_cast<std::size_t>(g)])];
        info.p_total = std::accumulate(info.p_gen.begin(), info.p_gen.end(), 0.0);
    }
    if (cfg_.costs.size() == static_cast<std::size_t>(cfg_.n_agents))
        info.cost = eval_cost(cfg_.costs, info.p_gen, &info.total_cost);
    return info;
}

StepResult Environment::step(const ActionVector& actions) {
    if (!started_) throw std::logic_error("Environment: reset() before step()");
    if (done()) throw std::logic_error("Environment: episode finished; reset() required");
    if (static_cast<int>(actions.size()) != cfg_.n_agents)
        throw std::invalid_argument("Environment: one action per agent required");

    StepResult result;
    result.info.dz_applied.resize(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        double dz = actions[i];
        if (!std::isfinite(dz)) throw std::invalid_argument("Environment: non-finite action");
        if (std::abs(dz) > cfg_.dz_max) {
            result.info.action_clamped = true;
            dz = std::clamp(dz, -cfg_.dz_max, cfg_.dz_max);
        }
        result.info.dz_applied[i] = dz;
        z_[i] += dz;
    }

    // Per-control-step load churn (after the step disturbance fires, when
    // one is scripted).
    if (cfg_.disturbance.churn_halfwidth > 0.0 &&
        (cfg_.disturbance.step_time < 0.0 || t_ >= cfg_.disturbance.step_time)) {
        std::uniform_real_distribution<double> churn(-cfg_.disturbance.churn_halfwidth,
                                                     cfg_.disturbance.churn_halfwidth);
        churn_accum_ += churn(rng_);
    }

    if (cfg_.model == PlantModel::ModelI) {
        ba_state_.z_g = std::accumulate(z_.begin(), z_.end(), 0.0);
        integrate_model1(current_load_model1());
    } else {
        for (int g = 0; g < cfg_.n_agents; ++g)
            gen_states_[static_cast<std::size_t>(g)].z = z_[static_cast<std::size_t>(g)];
        integrate_model2(current_bus_loads());
    }
    t_ += cfg_.control_period();
    steps_taken_ += 1;

    StepInfo info = snapshot();
    info.dz_applied = result.info.dz_applied;
    info.action_clamped = result.info.action_clamped;

    switch (cfg_.reward) {
        case RewardKind::SecondaryModelI:
            result.reward = reward_secondary_model1(ba_state_.d_omega, cfg_.eps1, cfg_.d);
            info.c1 = std::abs(ba_state_.d_omega) < cfg_.eps1;
            break;
        case RewardKind::TertiaryModelI:
            result.reward = reward_tertiary(ba_state_.d_omega, z_, cfg_.costs, cfg_.eps1, cfg_.eps2,
                                            cfg_.d1, cfg_.d2, &info.c1, &info.c2);
            break;
        case RewardKind::SecondaryModelII: {
            result.reward = reward_model2(info.d_omega, cfg_.eps1, cfg_.d_tiers);
            int k = 0;
            for (double w : info.d_omega)
                if (std::abs(w) < cfg_.eps1) ++k;
            info.c1 = k == cfg_.n_agents;
            break;
        }
    }

    result.obs = observations();
    result.done = done();
    result.info = std::move(info);
    return result;
}

}  // namespace gridmarl
