#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gridmarl/dynamics.hpp"

using namespace gridmarl;

namespace {

BAParams table2() {
    BAParams p;
    p.m = 0.1;
    p.d = 0.016;
    p.r_d = 0.1;
    p.t_sv = 30.0;
    p.rho = 0.0;
    p.f_nom = 50.0;
    return p;
}

// Straight-line dense solve of the flow equations, written independently of
// the Kron-reduction path: unknown load-bus angles from their balance rows,
// then every injection from the raw equation.
std::vector<double> dc_flow_oracle(const std::vector<double>& gen_angles, const NetworkModel& net) {
    std::vector<int> load_buses;
    for (int b = 0; b < net.n_bus; ++b)
        if (!net.is_gen_bus(b)) load_buses.push_back(b);
    const int nl = static_cast<int>(load_buses.size());

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(net.n_bus);
    for (std::size_t g = 0; g < net.gen_at_bus.size(); ++g)
        theta(net.gen_at_bus[g]) = gen_angles[g];

    if (nl > 0) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nl, nl);
        Eigen::VectorXd rhs(nl);
        for (int r = 0; r < nl; ++r) {
            const int bus = load_buses[static_cast<std::size_t>(r)];
            rhs(r) = -(1.0 + net.rho_at_bus(bus)) * net.load_at_bus(bus);
            for (int k = 0; k < net.n_bus; ++k) {
                if (k == bus) continue;
                const double b_ik = net.susceptance(bus, k);
                if (b_ik == 0.0) continue;
                // sum_k B_ik (theta_bus - theta_k)
                a(r, r) += b_ik;
                bool is_load = false;
                for (int c = 0; c < nl; ++c)
                    if (load_buses[static_cast<std::size_t>(c)] == k) {
                        a(r, c) -= b_ik;
                        is_load = true;
                    }
                if (!is_load) rhs(r) += b_ik * theta(k);
            }
        }
        const Eigen::VectorXd theta_l = a.colPivHouseholderQr().solve(rhs);
        for (int r = 0; r < nl; ++r) theta(load_buses[static_cast<std::size_t>(r)]) = theta_l(r);
    }

    std::vector<double> p(static_cast<std::size_t>(net.n_bus), 0.0);
    for (int bus = 0; bus < net.n_bus; ++bus) {
        if (!net.is_gen_bus(bus)) continue;
        double flow = 0.0;
        for (int k = 0; k < net.n_bus; ++k)
            flow += net.susceptance(bus, k) * (theta(bus) - theta(k));
        p[static_cast<std::size_t>(bus)] = (1.0 + net.rho_at_bus(bus)) * net.load_at_bus(bus) + flow;
    }
    return p;
}

}  // namespace

TEST_CASE("BA derivatives at the operating point") {
    const BAParams p = table2();
    SUBCASE("equilibrium") {
        const BADeriv d = ba_derivatives({0.0, 3.0, 3.0}, p, 3.0);
        CHECK(d.d_omega_dot == 0.0);
        CHECK(d.p_sv_dot == 0.0);
    }
    SUBCASE("load step accelerates the area") {
        const BADeriv d = ba_derivatives({0.0, 3.0, 3.0}, p, 3.15);
        CHECK(d.d_omega_dot == doctest::Approx(-1.5).epsilon(1e-12));
    }
    SUBCASE("closed-form steady state has zero derivatives") {
        const double w_ss = ba_steady_state_d_omega(p, 3.0, 3.15);
        CHECK(w_ss == doctest::Approx(-0.15 / 10.016).epsilon(1e-12));
        BAState s;
        s.d_omega = w_ss;
        s.z_g = 3.0;
        s.p_sv = s.z_g - w_ss / p.r_d;
        const BADeriv d = ba_derivatives(s, p, 3.15);
        CHECK(std::abs(d.d_omega_dot) < 1e-12);
        CHECK(std::abs(d.p_sv_dot) < 1e-12);
    }
    SUBCASE("non-finite input rejected") {
        CHECK_THROWS_AS(ba_derivatives({std::nan(""), 3.0, 3.0}, p, 3.0), std::invalid_argument);
    }
}

TEST_CASE("generator derivatives") {
    GenParams g;
    g.m = 0.15;
    g.d = 0.018;
    g.r_d = 0.08;
    g.t_sv = 30.0;
    SUBCASE("equilibrium") {
        GenState s;
        s.d_omega = 0.0;
        s.p_sv = 1.5;
        s.z = 1.5;
        const GenDeriv d = gen_derivatives(s, g, 1.5);
        CHECK(d.delta_dot == 0.0);
        CHECK(d.d_omega_dot == 0.0);
        CHECK(d.p_sv_dot == 0.0);
    }
    SUBCASE("angle rate equals speed deviation") {
        GenState s;
        s.d_omega = 0.01;
        CHECK(gen_derivatives(s, g, 0.0).delta_dot == 0.01);
    }
    SUBCASE("electrical excess decelerates the rotor") {
        GenState s;
        s.p_sv = 1.5;
        const GenDeriv d = gen_derivatives(s, g, 1.65);
        CHECK(d.d_omega_dot == doctest::Approx(-1.0).epsilon(1e-12));
    }
}

TEST_CASE("euler step") {
    SUBCASE("zero derivative is the identity") {
        BAState s;
        s.d_omega = 1.0;
        const BAState n = euler_step(s, BADeriv{0.0, 0.0}, 0.01);
        CHECK(n.d_omega == 1.0);
        CHECK(n.p_sv == s.p_sv);
    }
    SUBCASE("componentwise update") {
        BAState s;
        const BAState n = euler_step(s, BADeriv{-1.5, 0.0}, 0.01);
        CHECK(n.d_omega == doctest::Approx(-0.015).epsilon(1e-12));
    }
    SUBCASE("dt must be positive") {
        CHECK_THROWS_AS(euler_step(BAState{}, BADeriv{}, 0.0), std::invalid_argument);
    }
}

TEST_CASE("Model I converges to the closed-form steady state") {
    const BAParams p = table2();
    BAState s;
    s.d_omega = 0.0;
    s.p_sv = 3.0;
    s.z_g = 3.0;
    const double dt = 0.01;
    for (int k = 0; k < 30000; ++k) s = euler_step(s, ba_derivatives(s, p, 3.15), dt);
    CHECK(std::abs(s.d_omega - (-0.15 / 10.016)) < 1e-6);
}

TEST_CASE("Model I steady state over randomized table-range parameters") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> m_dist(0.1, 0.15), rd_dist(0.08, 0.1),
        d_dist(0.016, 0.018), tsv_dist(20.0, 30.0), z_dist(2.5, 3.5), l_dist(2.7, 3.3);
    for (int trial = 0; trial < 10; ++trial) {
        BAParams p = table2();
        p.m = m_dist(rng);
        p.r_d = rd_dist(rng);
        p.d = d_dist(rng);
        p.t_sv = tsv_dist(rng);
        const double z_g = z_dist(rng), load = l_dist(rng);
        BAState s;
        s.d_omega = 0.0;
        s.p_sv = z_g;
        s.z_g = z_g;
        for (int k = 0; k < 60000; ++k) s = euler_step(s, ba_derivatives(s, p, load), 0.01);
        CHECK(std::abs(s.d_omega - ba_steady_state_d_omega(p, z_g, load)) < 1e-6);
    }
}

TEST_CASE("halving the integration step barely moves a 100 s endpoint") {
    const BAParams p = table2();
    auto endpoint = [&](double dt) {
        BAState s;
        s.d_omega = 0.0;
        s.p_sv = 3.0;
        s.z_g = 3.0;
        const int n = static_cast<int>(std::lround(100.0 / dt));
        for (int k = 0; k < n; ++k) s = euler_step(s, ba_derivatives(s, p, 3.15), dt);
        return s.d_omega;
    };
    CHECK(std::abs(endpoint(0.01) - endpoint(0.005)) < 1e-3);
}

TEST_CASE("DC power flow") {
    SUBCASE("single line") {
        NetworkModel net;
        net.n_bus = 2;
        net.susceptance = Eigen::MatrixXd::Zero(2, 2);
        net.susceptance(0, 1) = net.susceptance(1, 0) = 10.0;
        net.gen_at_bus = {0, 1};
        net.load_at_bus = Eigen::VectorXd::Zero(2);
        net.rho_at_bus = Eigen::VectorXd::Zero(2);
        net.sigma_at_bus = Eigen::VectorXd::Constant(2, 0.5);
        const auto p = dc_power_flow({0.01, 0.0}, net);
        CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(-0.1).epsilon(1e-12));
    }
    SUBCASE("equal angles with loads at generator buses") {
        NetworkModel net;
        net.n_bus = 2;
        net.susceptance = Eigen::MatrixXd::Zero(2, 2);
        net.susceptance(0, 1) = net.susceptance(1, 0) = 10.0;
        net.gen_at_bus = {0, 1};
        net.load_at_bus = Eigen::VectorXd::Zero(2);
        net.load_at_bus << 1.2, 0.4;
        net.rho_at_bus = Eigen::VectorXd::Zero(2);
        net.rho_at_bus << 0.01, 0.02;
        net.sigma_at_bus = Eigen::VectorXd::Constant(2, 0.5);
        const auto p = dc_power_flow({0.3, 0.3}, net);
        CHECK(p[0] == doctest::Approx(1.2 * 1.01).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.4 * 1.02).epsilon(1e-12));
    }
    SUBCASE("two-generator two-load chain matches the dense oracle") {
        const NetworkModel net = NetworkModel::two_gen_two_load(10.0, 1.5, 1.5);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ang(-0.3, 0.3);
        for (int trial = 0; trial < 100; ++trial) {
            const std::vector<double> angles = {ang(rng), ang(rng)};
            const auto p = dc_power_flow(angles, net);
            const auto oracle = dc_flow_oracle(angles, net);
            for (int b = 0; b < net.n_bus; ++b)
                CHECK(p[static_cast<std::size_t>(b)] ==
                      doctest::Approx(oracle[static_cast<std::size_t>(b)]).epsilon(1e-9));
            // Net injections balance when rho = 0.
            double net_sum = 0.0;
            for (int b = 0; b < net.n_bus; ++b)
                net_sum += p[static_cast<std::size_t>(b)] - net.load_at_bus(b);
            CHECK(std::abs(net_sum) < 1e-9);
        }
    }
    SUBCASE("angle shift equivariance") {
        const NetworkModel net = NetworkModel::two_gen_two_load(10.0, 1.0, 2.0);
        const auto base = dc_power_flow({0.05, -0.02}, net);
        const auto shifted = dc_power_flow({0.05 + 7.0, -0.02 + 7.0}, net);
        for (int b = 0; b < net.n_bus; ++b)
            CHECK(base[static_cast<std::size_t>(b)] ==
                  doctest::Approx(shifted[static_cast<std::size_t>(b)]).epsilon(1e-9));
    }
    SUBCASE("disconnected load pocket is a structured error") {
        NetworkModel net;
        net.n_bus = 3;
        net.susceptance = Eigen::MatrixXd::Zero(3, 3);
        net.susceptance(0, 1) = net.susceptance(1, 0) = 10.0;  // bus 2 isolated
        net.gen_at_bus = {0};
        net.load_at_bus = Eigen::VectorXd::Zero(3);
        net.load_at_bus(2) = 1.0;
        net.rho_at_bus = Eigen::VectorXd::Zero(3);
        net.sigma_at_bus = Eigen::VectorXd::Zero(3);
        net.sigma_at_bus(2) = 1.0;
        CHECK_THROWS_AS(dc_power_flow({0.0}, net), NetworkError);
    }
    SUBCASE("balanced initial angles reproduce the requested outputs") {
        const NetworkModel net = NetworkModel::two_gen_two_load(10.0, 1.5, 1.5);
        const auto angles = dc_initial_angles({1.5, 1.5}, net);
        const auto p = dc_power_flow(angles, net);
        CHECK(p[0] == doctest::Approx(1.5).epsilon(1e-9));
        CHECK(p[1] == doctest::Approx(1.5).epsilon(1e-9));
    }
}

TEST_CASE("wind process") {
    WindParams wp;
    wp.alpha1 = -0.002;
    wp.alpha2 = 0.01;
    wp.beta1 = -0.5;
    wp.beta2 = -0.4;
    SUBCASE("origin is a fixed point under zero noise") {
        const WindState s = wind_step(WindState{}, wp, 0.01, 0.0);
        CHECK(s.d_v == 0.0);
        CHECK(s.d_pw == 0.0);
    }
    SUBCASE("stationary speed variance matches beta2^2/(2|beta1|)") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> gauss(0.0, 1.0);
        WindState s;
        const double dt = 0.01;
        double sum = 0.0, sum2 = 0.0;
        const int n = 2'000'000;
        for (int k = 0; k < n; ++k) {
            s = wind_step(s, wp, dt, gauss(rng));
            sum += s.d_v;
            sum2 += s.d_v * s.d_v;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        CHECK(var == doctest::Approx(0.16).epsilon(0.10));
    }
    SUBCASE("power deviation approaches -alpha2/alpha1 * dv for held wind speed") {
        WindState s;
        s.d_v = 1.0;
        const double dt = 0.1;
        for (int k = 0; k < 80000; ++k) {
            const double dv_held = s.d_v;
            s = wind_step(s, wp, dt, 0.0);
            s.d_v = dv_held;  // hold the speed deviation fixed
        }
        CHECK(s.d_pw == doctest::Approx(5.0).epsilon(1e-3));
    }
    SUBCASE("mean reversion from an ensemble of starts") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const int ensemble = 400, steps = 2000;
        double sum = 0.0;
        for (int e = 0; e < ensemble; ++e) {
            WindState s;
            s.d_v = 2.0;
            for (int k = 0; k < steps; ++k) s = wind_step(s, wp, 0.01, gauss(rng));
            sum += s.d_v;
        }
        const double mean = sum / ensemble;
        // stationary sd 0.4, so the standard error of the ensemble mean is .02
        CHECK(std::abs(mean) < 3.0 * 0.4 / std::sqrt(static_cast<double>(ensemble)));
    }
}

TEST_CASE("rocof statistics") {
    SUBCASE("constant series") {
        const RocofStats r = rocof({0.01, 0.01, 0.01}, 1.0, 50.0);
        CHECK(r.max_hz_s == 0.0);
        CHECK(r.min_hz_s == 0.0);
        CHECK(r.mean_hz_s == 0.0);
    }
    SUBCASE("linear ramp") {
        std::vector<double> series;
        for (int k = 0; k <= 10; ++k) series.push_back(0.001 * k);  // 0 -> 0.01 over 1 s
        const RocofStats r = rocof(series, 0.1, 50.0);
        CHECK(r.max_hz_s == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(r.mean_hz_s == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("too short") {
        CHECK_THROWS_AS(rocof({0.0}, 1.0, 50.0), std::invalid_argument);
    }
}
