#pragma once
#include <optional>
#include <string>
#include <vector>

#include "gridmarl/dispatch.hpp"
#include "gridmarl/dynamics.hpp"

namespace gridmarl {

// One row per control step. Column schema is fixed per (model, n_agents):
//   t, d_omega[ _i], z_i..., p_i..., dz_i..., p_load, reward, cost_i..., c1, c2
struct TraceRow {
    double t = 0.0;
    std::vector<double> d_omega;  // size 1 (Model I) or n_agents
    std::vector<double> z;
    std::vector<double> p;
    std::vector<double> dz;
    double p_load = 0.0;
    double reward = 0.0;
    std::vector<double> cost;  // empty when no cost model configured
    bool c1 = false, c2 = false;
};

struct EpisodeTrace {
    int n_agents = 0;
    int n_omega = 1;      // 1 for Model I, n_agents for Model II
    bool has_cost = false;
    double dt = 1.0;      // control period [s]
    double f_nom = 50.0;
    std::vector<TraceRow> rows;

    std::vector<std::string> columns() const;
    std::vector<double> d_omega_series(int idx = 0) const;

    void write_csv(const std::string& path) const;
    static EpisodeTrace read_csv(const std::string& path);
};

struct TraceMetrics {
    bool settled = false;
    double settling_time_s = -1.0;  // -1 is the horizon-exceeded sentinel
    RocofStats rocof;
    double ss_d_omega = 0.0;    // means over the trailing window
    double ss_p_total = 0.0;
    double ss_total_cost = 0.0;
    std::vector<double> ss_p;
    double ss_load = 0.0;
};

// Settling: first time after which every |d_omega| sample (all generators)
// stays below eps for the remainder of the episode. Steady-state quantities
// are means over the trailing `ss_fraction` of the rows.
TraceMetrics compute_metrics(const EpisodeTrace& trace, double eps_settle,
                             double ss_fraction = 0.2);

struct ControllerComparison {
    std::string name;
    TraceMetrics metrics;
    double dispatch_gap = 0.0;  // (ss cost - optimal cost) / optimal cost
};

// Side-by-side metric table; throws std::invalid_argument when the horizons
// differ. Dispatch optimum is evaluated at each trace's steady-state load.
std::vector<ControllerComparison> compare_traces(const EpisodeTrace& rl,
                                                 const EpisodeTrace& bench,
                                                 const CostModel& costs, double eps_settle,
                                                 double rho = 0.0);

void write_comparison_csv(const std::string& path,
                          const std::vector<ControllerComparison>& rows);

// Deterministic float formatting shared by every CSV/JSON writer.
std::string format_double(double v);

}  // namespace gridmarl
