#pragma once
#include <cstdint>
#include <vector>

#include "gridmarl/dispatch.hpp"
#include "gridmarl/dynamics.hpp"
#include "gridmarl/trace.hpp"

namespace gridmarl {

// Consensus-based partial primal-dual controller used as the optimal-LFC
// baseline. Each generator integrates a local incremental-cost estimate
// lambda_i from a frequency-based power-imbalance proxy plus a consensus
// term over its communication neighbours, and bids z_i = (lambda_i - beta_i)
// / (2 a_i). Fixed points coincide with the economic-dispatch optimum at
// zero frequency deviation.
struct PrimalDualState {
    std::vector<double> lambda;  // per-generator dual estimate [GBP/pu]
    std::vector<double> z;       // per-generator secondary command [pu]
};

// The dual integral gain must respect the plant's weakly damped swing mode:
// the loop gain k_lambda * (D + 1/R_D) * sum(1/(2 a_i)) / n at the resonance
// needs a margin below ~2 for the table-range plants, hence the small default.
struct PrimalDualGains {
    double k_lambda = 0.2;    // [1/s]
    double k_consensus = 2.0; // [1/s]
};

// Undirected communication graph over the generators.
struct CommGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    static CommGraph line(int n);
    bool connected() const;
    void validate() const;  // throws on disconnected graph or bad edges
};

// One Euler step of the dual dynamics. `d_omega` is the measured speed
// deviation (shared system value for the BA model) and `droop_gain` is the
// plant's D + 1/R_D so that -droop_gain * d_omega / n proxies each unit's
// share of the power imbalance.
PrimalDualState pd_step(const PrimalDualState& s, double d_omega, double droop_gain,
                        const CostModel& costs, const CommGraph& graph,
                        const PrimalDualGains& gains, double dt);

// Closed loop on the Model I plant; returns the per-control-step trace using
// the shared schema.
struct BenchmarkScenario {
    BAParams ba;
    CostModel costs;
    double initial_load = 3.0;
    double step_time = 0.0;
    double step_magnitude = 0.15;
    std::vector<double> initial_z;
    int steps = 100;            // control steps
    double dt_int = 0.01;       // plant / controller integration step
    int substeps = 100;         // integration steps per trace row
    PrimalDualGains gains;
};

EpisodeTrace run_benchmark(const BenchmarkScenario& sc);

}  // namespace gridmarl
