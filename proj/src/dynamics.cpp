#include "gridmarl/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmarl {

namespace {

void require_finite(std::initializer_list<double> xs, const char* what) {
    for (double x : xs)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

}  // namespace

void BAParams::validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("BAParams: M must be > 0");
    if (!(t_sv > 0.0)) throw std::invalid_argument("BAParams: T_SV must be > 0");
    if (!(r_d > 0.0)) throw std::invalid_argument("BAParams: R_D must be > 0");
    if (!(d >= 0.0)) throw std::invalid_argument("BAParams: D must be >= 0");
    if (!(f_nom > 0.0)) throw std::invalid_argument("BAParams: f_nom must be > 0");
    require_finite({m, d, r_d, t_sv, rho, f_nom}, "BAParams");
}

BADeriv ba_derivatives(const BAState& s, const BAParams& p, double p_load) {
    p.validate();
    require_finite({s.d_omega, s.p_sv, s.z_g, p_load}, "ba_derivatives");
    BADeriv out;
    out.d_omega_dot = (s.p_sv - (1.0 + p.rho) * p_load - p.d * s.d_omega) / p.m;
    out.p_sv_dot = (-s.p_sv + s.z_g - s.d_omega / p.r_d) / p.t_sv;
    return out;
}

BAState euler_step(const BAState& s, const BADeriv& d, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be > 0");
    BAState n = s;
    n.d_omega += d.d_omega_dot * dt;
    n.p_sv += d.p_sv_dot * dt;
    return n;
}

double ba_steady_state_d_omega(const BAParams& p, double z_g, double p_load) {
    p.validate();
    return (z_g - (1.0 + p.rho) * p_load) / (p.d + 1.0 / p.r_d);
}

void GenParams::validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("GenParams: M must be > 0");
    if (!(t_sv > 0.0)) throw std::invalid_argument("GenParams: T_SV must be > 0");
    if (!(r_d > 0.0)) throw std::invalid_argument("GenParams: R_D must be > 0");
    if (!(d >= 0.0)) throw std::invalid_argument("GenParams: D must be >= 0");
    require_finite({m, d, r_d, t_sv}, "GenParams");
}

GenDeriv gen_derivatives(const GenState& s, const GenParams& p, double p_elec) {
    p.validate();
    require_finite({s.delta, s.d_omega, s.p_sv, s.z, p_elec}, "gen_derivatives");
    GenDeriv out;
    out.delta_dot = s.d_omega;
    out.d_omega_dot = (s.p_sv - p_elec - p.d * s.d_omega) / p.m;
    out.p_sv_dot = (-s.p_sv + s.z - s.d_omega / p.r_d) / p.t_sv;
    return out;
}

GenState euler_step(const GenState& s, const GenDeriv& d, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be > 0");
    GenState n = s;
    n.delta += d.delta_dot * dt;
    n.d_omega += d.d_omega_dot * dt;
    n.p_sv += d.p_sv_dot * dt;
    return n;
}

void NetworkModel::validate() const {
    if (n_bus < 1) throw std::invalid_argument("NetworkModel: need at least one bus");
    if (susceptance.rows() != n_bus || susceptance.cols() != n_bus)
        throw std::invalid_argument("NetworkModel: susceptance matrix shape mismatch");
    for (int i = 0; i < n_bus; ++i) {
        if (susceptance(i, i) != 0.0)
            throw std::invalid_argument("NetworkModel: susceptance diagonal must be zero");
        for (int k = 0; k < i; ++k) {
            if (susceptance(i, k) != susceptance(k, i))
                throw std::invalid_argument("NetworkModel: susceptance must be symmetric");
            if (susceptance(i, k) < 0.0)
                throw std::invalid_argument("NetworkModel: susceptances must be >= 0");
        }
    }
    if (gen_at_bus.empty())
        throw std::invalid_argument("NetworkModel: at least one generator bus required");
    for (int b : gen_at_bus)
        if (b < 0 || b >= n_bus) throw std::invalid_argument("NetworkModel: generator bus out of range");
    if (load_at_bus.size() != n_bus || rho_at_bus.size() != n_bus)
        throw std::invalid_argument("NetworkModel: per-bus vector size mismatch");
    if (sigma_at_bus.size() != n_bus)
        throw std::invalid_argument("NetworkModel: sigma vector size mismatch");
    const double sigma_sum = sigma_at_bus.sum();
    if (std::abs(sigma_sum - 1.0) > 1e-9)
        throw std::invalid_argument("NetworkModel: load participation factors must sum to 1");
}

bool NetworkModel::is_gen_bus(int bus) const {
    for (int b : gen_at_bus)
        if (b == bus) return true;
    return false;
}

NetworkModel NetworkModel::two_gen_two_load(double b, double load1, double load2) {
    NetworkModel net;
    net.n_bus = 4;
    net.susceptance = Eigen::MatrixXd::Zero(4, 4);
    auto line = [&](int i, int k) {
        net.susceptance(i, k) = b;
        net.susceptance(k, i) = b;
    };
    line(0, 2);  // G1 - L1
    line(2, 3);  // L1 - L2
    line(3, 1);  // L2 - G2
    net.gen_at_bus = {0, 1};
    net.load_at_bus = Eigen::VectorXd::Zero(4);
    net.load_at_bus(2) = load1;
    net.load_at_bus(3) = load2;
    net.rho_at_bus = Eigen::VectorXd::Zero(4);
    net.sigma_at_bus = Eigen::VectorXd::Zero(4);
    const double total = load1 + load2;
    if (total > 0.0) {
        net.sigma_at_bus(2) = load1 / total;
        net.sigma_at_bus(3) = load2 / total;
    } else {
        net.sigma_at_bus(2) = 0.5;
        net.sigma_at_bus(3) = 0.5;
    }
    return net;
}

namespace {

Eigen::MatrixXd laplacian(const NetworkModel& net) {
    Eigen::MatrixXd lap = -net.susceptance;
    for (int i = 0; i < net.n_bus; ++i) lap(i, i) = net.susceptance.row(i).sum();
    return lap;
}

std::vector<int> non_gen_buses(const NetworkModel& net) {
    std::vector<int> out;
    for (int b = 0; b < net.n_bus; ++b)
        if (!net.is_gen_bus(b)) out.push_back(b);
    return out;
}

}  // namespace

Eigen::VectorXd dc_load_angles(const std::vector<double>& gen_angles, const NetworkModel& net) {
    net.validate();
    if (gen_angles.size() != net.gen_at_bus.size())
        throw std::invalid_argument("dc_load_angles: one angle per generator required");
    for (double a : gen_angles)
        if (!std::isfinite(a)) throw std::invalid_argument("dc_load_angles: non-finite angle");

    const auto loads = non_gen_buses(net);
    if (loads.empty()) return Eigen::VectorXd();

    const Eigen::MatrixXd lap = laplacian(net);
    const int nl = static_cast<int>(loads.size());
    Eigen::MatrixXd lap_ll(nl, nl);
    Eigen::VectorXd rhs(nl);
    for (int r = 0; r < nl; ++r) {
        const int bus = loads[r];
        // 0 - (1+rho) P_L = (L theta)_bus at a bus without generation
        rhs(r) = -(1.0 + net.rho_at_bus(bus)) * net.load_at_bus(bus);
        for (int c = 0; c < nl; ++c) lap_ll(r, c) = lap(bus, loads[c]);
        for (std::size_t g = 0; g < net.gen_at_bus.size(); ++g)
            rhs(r) -= lap(bus, net.gen_at_bus[g]) * gen_angles[g];
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(lap_ll);
    if (!lu.isInvertible())
        throw NetworkError("dc_power_flow: load buses disconnected from every generator");
    return lu.solve(rhs);
}

std::vector<double> dc_power_flow(const std::vector<double>& gen_angles, const NetworkModel& net) {
    const Eigen::VectorXd theta_l = dc_load_angles(gen_angles, net);
    const auto loads = non_gen_buses(net);

    Eigen::VectorXd theta(net.n_bus);
    for (std::size_t g = 0; g < net.gen_at_bus.size(); ++g)
        theta(net.gen_at_bus[g]) = gen_angles[g];
    for (std::size_t l = 0; l < loads.size(); ++l) theta(loads[l]) = theta_l(static_cast<int>(l));

    std::vector<double> p(static_cast<std::size_t>(net.n_bus), 0.0);
    for (int bus = 0; bus < net.n_bus; ++bus) {
        if (!net.is_gen_bus(bus)) continue;  // zero generation at load-only buses
        double flow = 0.0;
        for (int k = 0; k < net.n_bus; ++k)
            flow += net.susceptance(bus, k) * (theta(bus) - theta(k));
        p[static_cast<std::size_t>(bus)] = (1.0 + net.rho_at_bus(bus)) * net.load_at_bus(bus) + flow;
    }
    return p;
}

std::vector<double> dc_initial_angles(const std::vector<double>& p_gen, const NetworkModel& net) {
    net.validate();
    const int ng = static_cast<int>(net.gen_at_bus.size());
    if (static_cast<int>(p_gen.size()) != ng)
        throw std::invalid_argument("dc_initial_angles: one output per generator required");

    // Solve L theta = injections with theta at the first generator bus pinned
    // to zero. The injection profile must balance; project out any residual.
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(net.n_bus);
    for (int g = 0; g < ng; ++g) inj(net.gen_at_bus[g]) += p_gen[static_cast<std::size_t>(g)];
    for (int b = 0; b < net.n_bus; ++b) inj(b) -= (1.0 + net.rho_at_bus(b)) * net.load_at_bus(b);

    const int ref = net.gen_at_bus[0];
    const Eigen::MatrixXd lap = laplacian(net);
    const int n = net.n_bus;
    Eigen::MatrixXd reduced(n - 1, n - 1);
    Eigen::VectorXd rhs(n - 1);
    std::vector<int> keep;
    for (int b = 0; b < n; ++b)
        if (b != ref) keep.push_back(b);
    for (int r = 0; r < n - 1; ++r) {
        rhs(r) = inj(keep[static_cast<std::size_t>(r)]);
        for (int c = 0; c < n - 1; ++c)
            reduced(r, c) = lap(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
    if (!lu.isInvertible()) throw NetworkError("dc_initial_angles: network is disconnected");
    const Eigen::VectorXd theta_rest = lu.solve(rhs);

    std::vector<double> angles(static_cast<std::size_t>(ng), 0.0);
    for (int g = 1; g < ng; ++g) {
        const int bus = net.gen_at_bus[static_cast<std::size_t>(g)];
        for (int r = 0; r < n - 1; ++r)
            if (keep[static_cast<std::size_t>(r)] == bus) angles[static_cast<std::size_t>(g)] = theta_rest(r);
    }
    return angles;
}

void WindParams::validate() const {
    if (!(beta1 < 0.0)) throw std::invalid_argument("WindParams: beta1 must be negative (mean reversion)");
    if (!(alpha1 < 0.0)) throw std::invalid_argument("WindParams: alpha1 must be negative");
    require_finite({alpha1, alpha2, beta1, beta2}, "WindParams");
}

WindState wind_step(const WindState& s, const WindParams& p, double dt, double noise) {
    p.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("wind_step: dt must be > 0");
    // Both drifts evaluate at the pre-step state (simultaneous Euler-Maruyama).
    WindState n;
    n.d_v = s.d_v + p.beta1 * s.d_v * dt + p.beta2 * std::sqrt(dt) * noise;
    n.d_pw = s.d_pw + (p.alpha1 * s.d_pw + p.alpha2 * s.d_v) * dt;
    return n;
}

RocofStats rocof(const std::vector<double>& d_omega_series, double dt, double f_nom) {
    if (d_omega_series.size() < 2)
        throw std::invalid_argument("rocof: need at least two samples");
    if (!(dt > 0.0)) throw std::invalid_argument("rocof: dt must be > 0");
    RocofStats st;
    st.max_hz_s = -std::numeric_limits<double>::infinity();
    st.min_hz_s = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < d_omega_series.size(); ++i) {
        const double r = f_nom * (d_omega_series[i + 1] - d_omega_series[i]) / dt;
        st.max_hz_s = std::max(st.max_hz_s, r);
        st.min_hz_s = std::min(st.min_hz_s, r);
        sum += r;
    }
    st.mean_hz_s = sum / static_cast<double>(d_omega_series.size() - 1);
    return st;
}

}  // namespace gridmarl
