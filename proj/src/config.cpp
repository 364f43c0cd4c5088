#include "gridmarl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridmarl/trace.hpp"

namespace gridmarl {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return parse_json_text(ss.str());
    return parse_text(ss.str());
}

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile cf;
    std::stringstream ss(text);
    std::string line;
    std::string section = "global";
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            cf.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        cf.sections_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cf;
}

ConfigFile ConfigFile::parse_json_text(const std::string& text) {
    ConfigFile cf;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad json config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("json config must be an object of sections");
    for (const auto& [section, body] : j.items()) {
        if (!body.is_object()) throw ConfigError("json config section must be an object: " + section);
        for (const auto& [key, value] : body.items()) {
            std::string text_value;
            if (value.is_string()) {
                text_value = value.get<std::string>();
            } else if (value.is_array()) {
                for (std::size_t i = 0; i < value.size(); ++i) {
                    if (i) text_value += ", ";
                    text_value += value[i].is_string() ? value[i].get<std::string>()
                                                       : value[i].dump();
                }
            } else {
                text_value = value.dump();
            }
            cf.sections_[section][key] = text_value;
        }
    }
    return cf;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing config key [" + section + "] " + key);
    return sections_.at(section).at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return std::stod(get(section, key));
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for [" + section + "] " + key);
    }
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return std::stoi(get(section, key));
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for [" + section + "] " + key);
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean value for [" + section + "] " + key);
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : split(get(section, key), ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad list value for [" + section + "] " + key);
        }
    }
    return out;
}

std::vector<int> ConfigFile::get_int_list(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    for (double v : get_list(section, key)) out.push_back(static_cast<int>(v));
    return out;
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

void ConfigFile::set_double(const std::string& section, const std::string& key, double value) {
    set(section, key, format_double(value));
}

void ConfigFile::set_list(const std::string& section, const std::string& key,
                          const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ", ";
        s += format_double(values[i]);
    }
    set(section, key, s);
}

std::string ConfigFile::to_text() const {
    std::string out;
    for (const auto& [section, body] : sections_) {
        out += "[" + section + "]\n";
        for (const auto& [key, value] : body) out += key + " = " + value + "\n";
        out += "\n";
    }
    return out;
}

namespace {

NetworkModel network_from_config(const ConfigFile& cf) {
    if (!cf.has("network", "n_bus")) return NetworkModel::two_gen_two_load();
    NetworkModel net;
    net.n_bus = cf.get_int("network", "n_bus", 4);
    net.susceptance = Eigen::MatrixXd::Zero(net.n_bus, net.n_bus);
    for (const auto& tok : split(cf.get("network", "lines"), ',')) {
        if (tok.empty()) continue;
        // "i-k:b" with 0-based bus indices
        const auto dash = tok.find('-');
        const auto colon = tok.find(':');
        if (dash == std::string::npos || colon == std::string::npos || colon < dash)
            throw ConfigError("bad line spec (want i-k:b): " + tok);
        const int i = std::stoi(tok.substr(0, dash));
        const int k = std::stoi(tok.substr(dash + 1, colon - dash - 1));
        const double b = std::stod(tok.substr(colon + 1));
        if (i < 0 || k < 0 || i >= net.n_bus || k >= net.n_bus)
            throw ConfigError("line endpoint out of range: " + tok);
        net.susceptance(i, k) = b;
        net.susceptance(k, i) = b;
    }
    const auto gen_bus = cf.get_int_list("network", "gen_bus");
    net.gen_at_bus.assign(gen_bus.begin(), gen_bus.end());
    const auto loads = cf.get_list("network", "loads");
    if (static_cast<int>(loads.size()) != net.n_bus)
        throw ConfigError("[network] loads must list one value per bus");
    net.load_at_bus = Eigen::Map<const Eigen::VectorXd>(loads.data(), net.n_bus);
    net.rho_at_bus = Eigen::VectorXd::Zero(net.n_bus);
    if (cf.has("network", "rho")) {
        const auto rho = cf.get_list("network", "rho");
        if (static_cast<int>(rho.size()) != net.n_bus)
            throw ConfigError("[network] rho must list one value per bus");
        net.rho_at_bus = Eigen::Map<const Eigen::VectorXd>(rho.data(), net.n_bus);
    }
    if (cf.has("network", "sigma")) {
        const auto sigma = cf.get_list("network", "sigma");
        if (static_cast<int>(sigma.size()) != net.n_bus)
            throw ConfigError("[network] sigma must list one value per bus");
        net.sigma_at_bus = Eigen::Map<const Eigen::VectorXd>(sigma.data(), net.n_bus);
    } else {
        const double total = net.load_at_bus.sum();
        net.sigma_at_bus = total != 0.0 ? (net.load_at_bus / total).eval()
                                        : Eigen::VectorXd::Constant(net.n_bus, 1.0 / net.n_bus);
    }
    return net;
}

}  // namespace

ScenarioSpec scenario_from_config(const ConfigFile& cf) {
    ScenarioSpec spec;
    spec.name = cf.get_or("scenario", "name", "scenario");

    EnvConfig& env = spec.env;
    const int model = cf.get_int("plant", "model", 1);
    if (model != 1 && model != 2) throw ConfigError("[plant] model must be 1 or 2");
    env.model = model == 1 ? PlantModel::ModelI : PlantModel::ModelII;
    env.n_agents = cf.get_int("env", "n_agents", 2);

    env.ba.f_nom = cf.get_double("plant", "f_nom", 50.0);
    env.ba.m = cf.get_double("plant", "m", 0.1);
    env.ba.d = cf.get_double("plant", "d", 0.016);
    env.ba.r_d = cf.get_double("plant", "r_d", 0.1);
    env.ba.t_sv = cf.get_double("plant", "t_sv", 30.0);
    env.ba.rho = cf.get_double("plant", "rho", 0.0);

    if (env.model == PlantModel::ModelII) {
        auto per_gen = [&](const char* key, double fallback) {
            std::vector<double> v;
            if (cf.has("plant2", key))
                v = cf.get_list("plant2", key);
            else
                v.assign(static_cast<std::size_t>(env.n_agents), fallback);
            if (static_cast<int>(v.size()) != env.n_agents)
                throw ConfigError(std::string("[plant2] ") + key + " must list one value per agent");
            return v;
        };
        const auto m = per_gen("m", 0.1);
        const auto d = per_gen("d", 0.016);
        const auto r_d = per_gen("r_d", 0.1);
        const auto t_sv = per_gen("t_sv", 30.0);
        env.gens.clear();
        for (int i = 0; i < env.n_agents; ++i) {
            GenParams g;
            g.m = m[static_cast<std::size_t>(i)];
            g.d = d[static_cast<std::size_t>(i)];
            g.r_d = r_d[static_cast<std::size_t>(i)];
            g.t_sv = t_sv[static_cast<std::size_t>(i)];
            env.gens.push_back(g);
        }
        env.network = network_from_config(cf);
    }

    if (cf.has("costs", "a")) {
        env.costs.a = cf.get_list("costs", "a");
        env.costs.beta = cf.has("costs", "beta") ? cf.get_list("costs", "beta")
                                                 : std::vector<double>(env.costs.a.size(), 0.0);
        env.costs.gamma = cf.has("costs", "gamma") ? cf.get_list("costs", "gamma")
                                                   : std::vector<double>(env.costs.a.size(), 0.0);
    }

    const std::string reward = cf.get_or("env", "reward",
                                         env.model == PlantModel::ModelI ? "secondary1" : "secondary2");
    if (reward == "secondary1")
        env.reward = RewardKind::SecondaryModelI;
    else if (reward == "tertiary1")
        env.reward = RewardKind::TertiaryModelI;
    else if (reward == "secondary2")
        env.reward = RewardKind::SecondaryModelII;
    else
        throw ConfigError("[env] reward must be secondary1, tertiary1 or secondary2");

    env.nominal_load = cf.get_double("env", "nominal_load", 3.0);
    env.load_jitter = cf.get_double("env", "load_jitter", 0.5);
    if (cf.has("env", "initial_z")) env.initial_z = cf.get_list("env", "initial_z");
    env.episode_len = cf.get_int("env", "episode_len", 100);
    env.eps1 = cf.get_double("env", "eps1", 0.05);
    env.eps2 = cf.get_double("env", "eps2", 0.2);
    env.d = cf.get_double("env", "d", 10.0);
    env.d1 = cf.get_double("env", "d1", 200.0);
    env.d2 = cf.get_double("env", "d2", 100.0);
    if (cf.has("env", "d_tiers")) {
        env.d_tiers = cf.get_list("env", "d_tiers");
    } else if (env.reward == RewardKind::SecondaryModelII) {
        env.d_tiers.resize(static_cast<std::size_t>(env.n_agents));
        for (int i = 0; i < env.n_agents; ++i)
            env.d_tiers[static_cast<std::size_t>(i)] = 100.0 * static_cast<double>(i + 1);
    }
    env.dz_max = cf.get_double("env", "dz_max", 0.1);
    env.dt_int = cf.get_double("env", "dt_int", 0.01);
    env.substeps = cf.get_int("env", "substeps", 100);

    spec.wind_enabled = cf.get_bool("scenario", "wind", false);
    if (spec.wind_enabled) {
        WindParams wp;
        wp.alpha1 = cf.get_double("wind", "alpha1", -0.002);
        wp.alpha2 = cf.get_double("wind", "alpha2", 0.01);
        wp.beta1 = cf.get_double("wind", "beta1", -0.5);
        wp.beta2 = cf.get_double("wind", "beta2", -0.4);
        env.wind = wp;
    }

    env.disturbance.step_time = cf.get_double("scenario", "step_time", -1.0);
    env.disturbance.step_magnitude = cf.get_double("scenario", "step_magnitude", 0.0);
    env.disturbance.churn_halfwidth = cf.get_double("scenario", "churn", 0.0);

    TrainConfig& tr = spec.train;
    tr.gamma = cf.get_double("train", "gamma", tr.gamma);
    tr.tau = cf.get_double("train", "tau", tr.tau);
    tr.lr_actor = cf.get_double("train", "lr_actor", tr.lr_actor);
    tr.lr_critic = cf.get_double("train", "lr_critic", tr.lr_critic);
    tr.batch = cf.get_int("train", "batch", tr.batch);
    tr.buffer_capacity = cf.get_int("train", "buffer", tr.buffer_capacity);
    tr.noise_sigma = cf.get_double("train", "noise_sigma", tr.noise_sigma);
    tr.noise_decay = cf.get_double("train", "noise_decay", tr.noise_decay);
    tr.noise_sigma_min = cf.get_double("train", "noise_sigma_min", tr.noise_sigma_min);
    tr.keep_best = cf.get_bool("train", "keep_best", tr.keep_best);
    tr.episodes = cf.get_int("train", "episodes", tr.episodes);
    tr.history = cf.get_int("train", "history", tr.history);
    tr.lstm_hidden = cf.get_int("train", "lstm_hidden", tr.lstm_hidden);
    if (cf.has("train", "dense")) tr.dense = cf.get_int_list("train", "dense");
    tr.warmup_transitions = cf.get_int("train", "warmup", tr.warmup_transitions);
    tr.train_every = cf.get_int("train", "train_every", tr.train_every);
    tr.actor_every = cf.get_int("train", "actor_every", tr.actor_every);
    tr.actor_head_scale = cf.get_double("train", "actor_head_scale", tr.actor_head_scale);
    const std::string opt = cf.get_or("train", "optimizer", "adam");
    if (opt == "adam")
        tr.optimizer = nn::Optimizer::Adam;
    else if (opt == "sgd")
        tr.optimizer = nn::Optimizer::Sgd;
    else
        throw ConfigError("[train] optimizer must be adam or sgd");
    tr.seed = static_cast<std::uint64_t>(cf.get_double("train", "seed", 1));

    spec.pd_gains.k_lambda = cf.get_double("benchmark", "k_lambda", spec.pd_gains.k_lambda);
    spec.pd_gains.k_consensus = cf.get_double("benchmark", "k_consensus", spec.pd_gains.k_consensus);

    spec.seeds.clear();
    if (cf.has("scenario", "seeds")) {
        for (double s : cf.get_list("scenario", "seeds"))
            spec.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (spec.seeds.empty()) spec.seeds = {1};

    spec.env.validate();
    spec.train.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
    return scenario_from_config(ConfigFile::parse_file(path));
}

ConfigFile resolved_config(const ScenarioSpec& spec) {
    ConfigFile cf;
    const EnvConfig& env = spec.env;
    cf.set("scenario", "name", spec.name);
    {
        std::vector<double> seeds;
        for (auto s : spec.seeds) seeds.push_back(static_cast<double>(s));
        cf.set_list("scenario", "seeds", seeds);
    }
    cf.set_double("scenario", "step_time", env.disturbance.step_time);
    cf.set_double("scenario", "step_magnitude", env.disturbance.step_magnitude);
    cf.set_double("scenario", "churn", env.disturbance.churn_halfwidth);
    cf.set("scenario", "wind", spec.wind_enabled ? "true" : "false");

    cf.set("plant", "model", env.model == PlantModel::ModelI ? "1" : "2");
    cf.set_double("plant", "f_nom", env.ba.f_nom);
    cf.set_double("plant", "m", env.ba.m);
    cf.set_double("plant", "d", env.ba.d);
    cf.set_double("plant", "r_d", env.ba.r_d);
    cf.set_double("plant", "t_sv", env.ba.t_sv);
    cf.set_double("plant", "rho", env.ba.rho);

    if (env.model == PlantModel::ModelII) {
        std::vector<double> m, d, r_d, t_sv;
        for (const auto& g : env.gens) {
            m.push_back(g.m);
            d.push_back(g.d);
            r_d.push_back(g.r_d);
            t_sv.push_back(g.t_sv);
        }
        cf.set_list("plant2", "m", m);
        cf.set_list("plant2", "d", d);
        cf.set_list("plant2", "r_d", r_d);
        cf.set_list("plant2", "t_sv", t_sv);

        const NetworkModel& net = env.network;
        cf.set("network", "n_bus", std::to_string(net.n_bus));
        std::string lines;
        for (int i = 0; i < net.n_bus; ++i)
            for (int k = i + 1; k < net.n_bus; ++k)
                if (net.susceptance(i, k) != 0.0) {
                    if (!lines.empty()) lines += ", ";
                    lines += std::to_string(i) + "-" + std::to_string(k) + ":" +
                             format_double(net.susceptance(i, k));
                }
        cf.set("network", "lines", lines);
        std::string gen_bus;
        for (std::size_t g = 0; g < net.gen_at_bus.size(); ++g) {
            if (g) gen_bus += ", ";
            gen_bus += std::to_string(net.gen_at_bus[g]);
        }
        cf.set("network", "gen_bus", gen_bus);
        cf.set_list("network", "loads",
                    std::vector<double>(net.load_at_bus.data(), net.load_at_bus.data() + net.n_bus));
        cf.set_list("network", "rho",
                    std::vector<double>(net.rho_at_bus.data(), net.rho_at_bus.data() + net.n_bus));
        cf.set_list("network", "sigma",
                    std::vector<double>(net.sigma_at_bus.data(), net.sigma_at_bus.data() + net.n_bus));
    }

    if (env.costs.size() > 0) {
        cf.set_list("costs", "a", env.costs.a);
        cf.set_list("costs", "beta", env.costs.beta);
        cf.set_list("costs", "gamma", env.costs.gamma);
    }

    cf.set("env", "n_agents", std::to_string(env.n_agents));
    switch (env.reward) {
        case RewardKind::SecondaryModelI: cf.set("env", "reward", "secondary1"); break;
        case RewardKind::TertiaryModelI: cf.set("env", "reward", "tertiary1"); break;
        case RewardKind::SecondaryModelII: cf.set("env", "reward", "secondary2"); break;
    }
    cf.set_double("env", "nominal_load", env.nominal_load);
    cf.set_double("env", "load_jitter", env.load_jitter);
    cf.set_list("env", "initial_z", env.initial_z);
    cf.set("env", "episode_len", std::to_string(env.episode_len));
    cf.set_double("env", "eps1", env.eps1);
    cf.set_double("env", "eps2", env.eps2);
    cf.set_double("env", "d", env.d);
    cf.set_double("env", "d1", env.d1);
    cf.set_double("env", "d2", env.d2);
    cf.set_list("env", "d_tiers", env.d_tiers);
    cf.set_double("env", "dz_max", env.dz_max);
    cf.set_double("env", "dt_int", env.dt_int);
    cf.set("env", "substeps", std::to_string(env.substeps));

    const WindParams wp = env.wind.value_or(WindParams{});
    cf.set_double("wind", "alpha1", wp.alpha1);
    cf.set_double("wind", "alpha2", wp.alpha2);
    cf.set_double("wind", "beta1", wp.beta1);
    cf.set_double("wind", "beta2", wp.beta2);

    const TrainConfig& tr = spec.train;
    cf.set_double("train", "gamma", tr.gamma);
    cf.set_double("train", "tau", tr.tau);
    cf.set_double("train", "lr_actor", tr.lr_actor);
    cf.set_double("train", "lr_critic", tr.lr_critic);
    cf.set("train", "batch", std::to_string(tr.batch));
    cf.set("train", "buffer", std::to_string(tr.buffer_capacity));
    cf.set_double("train", "noise_sigma", tr.noise_sigma);
    cf.set_double("train", "noise_decay", tr.noise_decay);
    cf.set_double("train", "noise_sigma_min", tr.noise_sigma_min);
    cf.set("train", "keep_best", tr.keep_best ? "true" : "false");
    cf.set("train", "episodes", std::to_string(tr.episodes));
    cf.set("train", "history", std::to_string(tr.history));
    cf.set("train", "lstm_hidden", std::to_string(tr.lstm_hidden));
    {
        std::vector<double> dense(tr.dense.begin(), tr.dense.end());
        cf.set_list("train", "dense", dense);
    }
    cf.set("train", "warmup", std::to_string(tr.warmup_transitions));
    cf.set("train", "train_every", std::to_string(tr.train_every));
    cf.set("train", "actor_every", std::to_string(tr.actor_every));
    cf.set_double("train", "actor_head_scale", tr.actor_head_scale);
    cf.set("train", "optimizer", tr.optimizer == nn::Optimizer::Adam ? "adam" : "sgd");
    cf.set("train", "seed", std::to_string(tr.seed));

    cf.set_double("benchmark", "k_lambda", spec.pd_gains.k_lambda);
    cf.set_double("benchmark", "k_consensus", spec.pd_gains.k_consensus);
    return cf;
}

}  // namespace gridmarl
