#pragma once
#include <map>
#include <string>
#include <vector>

#include "gridmarl/benchmark.hpp"
#include "gridmarl/env.hpp"
#include "gridmarl/maddpg.hpp"

namespace gridmarl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat sections of key=value text; '#' or ';' start a comment. A ".json"
// file with one object per section is accepted as an alternate encoding.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text);
    static ConfigFile parse_json_text(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);
    void set_double(const std::string& section, const std::string& key, double value);
    void set_list(const std::string& section, const std::string& key,
                  const std::vector<double>& values);

    std::string to_text() const;  // sections and keys in sorted order
    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// A named experiment: environment, training setup, benchmark gains, seeds.
struct ScenarioSpec {
    std::string name = "scenario";
    EnvConfig env;
    TrainConfig train;
    PrimalDualGains pd_gains;
    std::vector<std::uint64_t> seeds = {1};
    bool wind_enabled = false;
};

ScenarioSpec scenario_from_config(const ConfigFile& cf);
ScenarioSpec load_scenario(const std::string& path);

// Full echo of the resolved scenario, every field with its effective value.
ConfigFile resolved_config(const ScenarioSpec& spec);

}  // namespace gridmarl
