#include "gridmarl/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridmarl {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<std::string> EpisodeTrace::columns() const {
    std::vector<std::string> cols;
    cols.push_back("t");
    if (n_omega == 1) {
        cols.push_back("d_omega");
    } else {
        for (int i = 0; i < n_omega; ++i) cols.push_back("d_omega_" + std::to_string(i + 1));
    }
    for (int i = 0; i < n_agents; ++i) cols.push_back("z_" + std::to_string(i + 1));
    for (int i = 0; i < n_agents; ++i) cols.push_back("p_" + std::to_string(i + 1));
    for (int i = 0; i < n_agents; ++i) cols.push_back("dz_" + std::to_string(i + 1));
    cols.push_back("p_load");
    cols.push_back("reward");
    if (has_cost)
        for (int i = 0; i < n_agents; ++i) cols.push_back("cost_" + std::to_string(i + 1));
    cols.push_back("c1");
    cols.push_back("c2");
    return cols;
}

std::vector<double> EpisodeTrace::d_omega_series(int idx) const {
    std::vector<double> s;
    s.reserve(rows.size());
    for (const auto& r : rows) s.push_back(r.d_omega.at(static_cast<std::size_t>(idx)));
    return s;
}

void EpisodeTrace::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace output: " + path);
    const auto cols = columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : rows) {
        out << format_double(r.t);
        for (double w : r.d_omega) out << "," << format_double(w);
        for (double z : r.z) out << "," << format_double(z);
        for (double p : r.p) out << "," << format_double(p);
        for (double dz : r.dz) out << "," << format_double(dz);
        out << "," << format_double(r.p_load);
        out << "," << format_double(r.reward);
        for (double c : r.cost) out << "," << format_double(c);
        out << "," << (r.c1 ? 1 : 0) << "," << (r.c2 ? 1 : 0);
        out << "\n";
    }
}

EpisodeTrace EpisodeTrace::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty trace file: " + path);

    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    EpisodeTrace tr;
    tr.n_omega = 0;
    tr.n_agents = 0;
    for (const auto& c : cols) {
        if (c == "d_omega" || c.rfind("d_omega_", 0) == 0) tr.n_omega++;
        if (c.rfind("z_", 0) == 0) tr.n_agents++;
        if (c.rfind("cost_", 0) == 0) tr.has_cost = true;
    }
    if (tr.n_omega == 0 || tr.n_agents == 0)
        throw std::runtime_error("trace header not recognized: " + path);

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> vals;
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != cols.size()) throw std::runtime_error("trace row width mismatch");
        TraceRow r;
        std::size_t k = 0;
        r.t = vals[k++];
        for (int i = 0; i < tr.n_omega; ++i) r.d_omega.push_back(vals[k++]);
        for (int i = 0; i < tr.n_agents; ++i) r.z.push_back(vals[k++]);
        for (int i = 0; i < tr.n_agents; ++i) r.p.push_back(vals[k++]);
        for (int i = 0; i < tr.n_agents; ++i) r.dz.push_back(vals[k++]);
        r.p_load = vals[k++];
        r.reward = vals[k++];
        if (tr.has_cost)
            for (int i = 0; i < tr.n_agents; ++i) r.cost.push_back(vals[k++]);
        r.c1 = vals[k++] != 0.0;
        r.c2 = vals[k++] != 0.0;
        tr.rows.push_back(std::move(r));
    }
    if (tr.rows.size() >= 2) tr.dt = tr.rows[1].t - tr.rows[0].t;
    return tr;
}

TraceMetrics compute_metrics(const EpisodeTrace& trace, double eps_settle, double ss_fraction) {
    if (trace.rows.size() < 2) throw std::invalid_argument("compute_metrics: trace too short");
    TraceMetrics m;

    // Settling: last index at which any |d_omega| >= eps; settled afterwards.
    std::ptrdiff_t last_bad = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(trace.rows.size()) - 1; i >= 0; --i) {
        bool ok = true;
        for (double w : trace.rows[static_cast<std::size_t>(i)].d_omega)
            if (!(std::abs(w) < eps_settle)) ok = false;
        if (!ok) {
            last_bad = i;
            break;
        }
    }
    if (last_bad + 1 < static_cast<std::ptrdiff_t>(trace.rows.size())) {
        m.settled = true;
        m.settling_time_s = trace.rows[static_cast<std::size_t>(last_bad + 1)].t;
    }

    m.rocof = rocof(trace.d_omega_series(0), trace.dt, trace.f_nom);
    for (int g = 1; g < trace.n_omega; ++g) {
        const RocofStats r = rocof(trace.d_omega_series(g), trace.dt, trace.f_nom);
        m.rocof.max_hz_s = std::max(m.rocof.max_hz_s, r.max_hz_s);
        m.rocof.min_hz_s = std::min(m.rocof.min_hz_s, r.min_hz_s);
    }

    const std::size_t n = trace.rows.size();
    std::size_t start = n - std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ss_fraction * static_cast<double>(n))));
    m.ss_p.assign(static_cast<std::size_t>(trace.n_agents), 0.0);
    double count = 0.0;
    for (std::size_t i = start; i < n; ++i) {
        const auto& r = trace.rows[i];
        for (double w : r.d_omega) m.ss_d_omega += w / static_cast<double>(r.d_omega.size());
        for (std::size_t g = 0; g < r.p.size(); ++g) m.ss_p[g] += r.p[g];
        double ptot = 0.0;
        for (double p : r.p) ptot += p;
        m.ss_p_total += ptot;
        double ctot = 0.0;
        for (double c : r.cost) ctot += c;
        m.ss_total_cost += ctot;
        m.ss_load += r.p_load;
        count += 1.0;
    }
    m.ss_d_omega /= count;
    m.ss_p_total /= count;
    m.ss_total_cost /= count;
    m.ss_load /= count;
    for (auto& p : m.ss_p) p /= count;
    return m;
}

std::vector<ControllerComparison> compare_traces(const EpisodeTrace& rl, const EpisodeTrace& bench,
                                                 const CostModel& costs, double eps_settle,
                                                 double rho) {
    if (rl.rows.size() != bench.rows.size())
        throw std::invalid_argument("compare_traces: traces must share the same horizon");
    std::vector<ControllerComparison> out;
    for (const auto* tr : {&rl, &bench}) {
        ControllerComparison c;
        c.name = tr == &rl ? "rl" : "benchmark";
        c.metrics = compute_metrics(*tr, eps_settle);
        const DispatchResult opt = solve_dispatch(costs, c.metrics.ss_load, rho);
        c.dispatch_gap = opt.total_cost != 0.0
                             ? (c.metrics.ss_total_cost - opt.total_cost) / opt.total_cost
                             : 0.0;
        out.push_back(std::move(c));
    }
    return out;
}

void write_comparison_csv(const std::string& path, const std::vector<ControllerComparison>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open comparison output: " + path);
    out << "controller,settled,settling_time_s,rocof_max_hz_s,rocof_min_hz_s,rocof_mean_hz_s,"
           "ss_total_cost,dispatch_gap,ss_p_total\n";
    for (const auto& r : rows) {
        out << r.name << "," << (r.metrics.settled ? 1 : 0) << ","
            << format_double(r.metrics.settling_time_s) << ","
            << format_double(r.metrics.rocof.max_hz_s) << ","
            << format_double(r.metrics.rocof.min_hz_s) << ","
            << format_double(r.metrics.rocof.mean_hz_s) << ","
            << format_double(r.metrics.ss_total_cost) << "," << format_double(r.dispatch_gap)
            << "," << format_double(r.metrics.ss_p_total) << "\n";
    }
}

}  // namespace gridmarl
