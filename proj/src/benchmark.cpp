#include "gridmarl/benchmark.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gridmarl {

CommGraph CommGraph::line(int n) {
    CommGraph g;
    g.n = n;
    for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
    return g;
}

bool CommGraph::connected() const {
    if (n <= 0) return false;
    std::vector<int> comp(static_cast<std::size_t>(n));
    std::iota(comp.begin(), comp.end(), 0);
    // Union-find without ranks; n is tiny.
    auto find = [&comp](int x) {
        while (comp[static_cast<std::size_t>(x)] != x) x = comp[static_cast<std::size_t>(x)];
        return x;
    };
    for (auto [a, b] : edges) comp[static_cast<std::size_t>(find(a))] = find(b);
    const int root = find(0);
    for (int i = 1; i < n; ++i)
        if (find(i) != root) return false;
    return true;
}

void CommGraph::validate() const {
    if (n < 1) throw std::invalid_argument("CommGraph: empty graph");
    for (auto [a, b] : edges)
        if (a < 0 || b < 0 || a >= n || b >= n || a == b)
            throw std::invalid_argument("CommGraph: bad edge");
    if (!connected()) throw NetworkError("CommGraph: communication graph is disconnected");
}

PrimalDualState pd_step(const PrimalDualState& s, double d_omega, double droop_gain,
                        const CostModel& costs, const CommGraph& graph,
                        const PrimalDualGains& gains, double dt) {
    graph.validate();
    costs.validate();
    const std::size_t n = s.lambda.size();
    if (n != costs.size() || static_cast<int>(n) != graph.n)
        throw std::invalid_argument("pd_step: size mismatch");
    if (!(gains.k_lambda > 0.0) || !(gains.k_consensus > 0.0))
        throw std::invalid_argument("pd_step: gains must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("pd_step: dt must be > 0");

    // Local imbalance proxy: each unit sees its 1/n share of the quasi-steady
    // power mismatch -(D + 1/R_D) d_omega.
    const double imbalance = -droop_gain * d_omega / static_cast<double>(n);

    std::vector<double> dlambda(n, gains.k_lambda * imbalance);
    for (auto [a, b] : graph.edges) {
        const double diff = s.lambda[static_cast<std::size_t>(a)] - s.lambda[static_cast<std::size_t>(b)];
        dlambda[static_cast<std::size_t>(a)] -= gains.k_consensus * diff;
        dlambda[static_cast<std::size_t>(b)] += gains.k_consensus * diff;
    }

    PrimalDualState next = s;
    for (std::size_t i = 0; i < n; ++i) {
        next.lambda[i] += dlambda[i] * dt;
        next.z[i] = (next.lambda[i] - costs.beta[i]) / (2.0 * costs.a[i]);
    }
    return next;
}

EpisodeTrace run_benchmark(const BenchmarkScenario& sc) {
    sc.ba.validate();
    sc.costs.validate();
    const int n = static_cast<int>(sc.costs.size());
    std::vector<double> z0 = sc.initial_z;
    if (z0.empty()) z0.assign(static_cast<std::size_t>(n), sc.initial_load / static_cast<double>(n));

    const CommGraph graph = CommGraph::line(n);
    const double droop_gain = sc.ba.d + 1.0 / sc.ba.r_d;

    PrimalDualState pd;
    pd.z = z0;
    pd.lambda.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pd.lambda[static_cast<std::size_t>(i)] =
            2.0 * sc.costs.a[static_cast<std::size_t>(i)] * z0[static_cast<std::size_t>(i)] +
            sc.costs.beta[static_cast<std::size_t>(i)];

    BAState plant;
    plant.d_omega = 0.0;
    plant.z_g = std::accumulate(z0.begin(), z0.end(), 0.0);
    plant.p_sv = plant.z_g;

    EpisodeTrace trace;
    trace.n_agents = n;
    trace.n_omega = 1;
    trace.has_cost = true;
    trace.dt = sc.dt_int * static_cast<double>(sc.substeps);
    trace.f_nom = sc.ba.f_nom;

    double t = 0.0;
    std::vector<double> prev_z = pd.z;
    for (int step = 0; step < sc.steps; ++step) {
        const double load =
            sc.initial_load + ((sc.step_time >= 0.0 && t >= sc.step_time) ? sc.step_magnitude : 0.0);
        for (int k = 0; k < sc.substeps; ++k) {
            pd = pd_step(pd, plant.d_omega, droop_gain, sc.costs, graph, sc.gains, sc.dt_int);
            plant.z_g = std::accumulate(pd.z.begin(), pd.z.end(), 0.0);
            const BADeriv dv = ba_derivatives(plant, sc.ba, load);
            plant = euler_step(plant, dv, sc.dt_int);
        }
        t += trace.dt;

        TraceRow row;
        row.t = t;
        row.d_omega = {plant.d_omega};
        row.z = pd.z;
        const double r_di = sc.ba.r_d * static_cast<double>(n);
        row.p.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            row.p[static_cast<std::size_t>(i)] =
                pd.z[static_cast<std::size_t>(i)] - plant.d_omega / r_di;
        row.dz.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            row.dz[static_cast<std::size_t>(i)] =
                pd.z[static_cast<std::size_t>(i)] - prev_z[static_cast<std::size_t>(i)];
        prev_z = pd.z;
        row.p_load = load;
        row.reward = 0.0;
        row.cost = eval_cost(sc.costs, row.p);
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

}  // namespace gridmarl
