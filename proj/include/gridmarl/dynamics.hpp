#pragma once
#include <Eigen/Dense>
#include <stdexcept>
#include <cstdint>
#include <vector>

namespace gridmarl {

// ---------------------------------------------------------------------------
// Model I: single balancing-authority area, aggregate states (d_omega, p_sv).
// ---------------------------------------------------------------------------

struct BAParams {
    double m = 0.1;      // aggregate inertia [pu*s]
    double d = 0.016;    // aggregate load damping [pu]
    double r_d = 0.1;    // aggregate droop; 1/r_d = sum of 1/r_d_i [pu]
    double t_sv = 30.0;  // governor time constant [s]
    double rho = 0.0;    // loss sensitivity, dimensionless
    double f_nom = 50.0; // nominal frequency [Hz]

    void validate() const;
};

struct BAState {
    double d_omega = 0.0;  // speed deviation [pu]
    double p_sv = 0.0;     // total mechanical power [pu]
    double z_g = 0.0;      // total secondary command [pu]
};

struct BADeriv {
    double d_omega_dot = 0.0;
    double p_sv_dot = 0.0;
};

// d(d_omega)/dt = (P_SV - (1+rho) P_L - D d_omega) / M
// d(P_SV)/dt    = (-P_SV + Z_G - d_omega / R_D) / T_SV
BADeriv ba_derivatives(const BAState& s, const BAParams& p, double p_load);

BAState euler_step(const BAState& s, const BADeriv& d, double dt);

// Closed-form steady state for frozen Z_G, P_L:
// d_omega_ss = (Z_G - (1+rho) P_L) / (D + 1/R_D).
double ba_steady_state_d_omega(const BAParams& p, double z_g, double p_load);

// ---------------------------------------------------------------------------
// Model II: per-generator swing dynamics coupled through a DC network.
// ---------------------------------------------------------------------------

struct GenParams {
    double m = 0.1;
    double d = 0.016;
    double r_d = 0.1;
    double t_sv = 30.0;

    void validate() const;
};

struct GenState {
    double delta = 0.0;    // rotor electrical angle [rad]
    double d_omega = 0.0;  // speed deviation [pu]
    double p_sv = 0.0;     // mechanical power [pu]
    double z = 0.0;        // secondary command [pu]
};

struct GenDeriv {
    double delta_dot = 0.0;
    double d_omega_dot = 0.0;
    double p_sv_dot = 0.0;
};

// d(delta)/dt   = d_omega
// d(d_omega)/dt = (P_SV - P_elec - D d_omega) / M
// d(P_SV)/dt    = (-P_SV + z - d_omega / R_D) / T_SV
GenDeriv gen_derivatives(const GenState& s, const GenParams& p, double p_elec);

GenState euler_step(const GenState& s, const GenDeriv& d, double dt);

// Lossless DC network: P_i - (1+rho_i) P_Li = sum_k B_ik (theta_i - theta_k).
// Bus angles are known at generator buses (the rotor angles, by coherency);
// angles at the remaining buses are eliminated by Kron reduction.
struct NetworkModel {
    int n_bus = 0;
    Eigen::MatrixXd susceptance;      // symmetric, zero diagonal [pu]
    std::vector<int> gen_at_bus;      // bus index of each generator
    Eigen::VectorXd load_at_bus;      // P_Li per bus [pu]
    Eigen::VectorXd rho_at_bus;       // per-bus loss sensitivity
    Eigen::VectorXd sigma_at_bus;     // load participation factors, sum to 1

    void validate() const;
    bool is_gen_bus(int bus) const;

    // The two-generator, two-load chain used throughout: G1 - L1 - L2 - G2,
    // every drawn line at `b` pu.
    static NetworkModel two_gen_two_load(double b = 10.0, double load1 = 1.5,
                                         double load2 = 1.5);
};

// Per-bus generator injections for given generator rotor angles. Load-only
// buses carry zero generation by construction; their angles are solved
// internally. Throws NetworkError if the load-bus block is singular
// (load pocket disconnected from every generator).
std::vector<double> dc_power_flow(const std::vector<double>& gen_angles,
                                  const NetworkModel& net);

// Angles of the non-generator buses implied by the generator angles.
Eigen::VectorXd dc_load_angles(const std::vector<double>& gen_angles,
                               const NetworkModel& net);

// Balanced initial angle profile: generator angles (reference gen 0 at 0 rad)
// such that the flow equations reproduce the requested generator outputs
// against the network's stored loads.
std::vector<double> dc_initial_angles(const std::vector<double>& p_gen,
                                      const NetworkModel& net);

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Wind-based generation: linear power/speed model driven by a Wiener process.
// ---------------------------------------------------------------------------

struct WindParams {
    double alpha1 = -0.002;  // [1/s]
    double alpha2 = 0.01;    // [pu/(m/s)/s]
    double beta1 = -0.5;     // [1/s], mean reversion
    double beta2 = -0.4;     // [(m/s)/sqrt(s)]

    void validate() const;
};

struct WindState {
    double d_pw = 0.0;  // wind power deviation [pu]
    double d_v = 0.0;   // wind speed deviation [m/s]
};

// One Euler-Maruyama step; `noise` is a standard normal draw.
WindState wind_step(const WindState& s, const WindParams& p, double dt, double noise);

// ---------------------------------------------------------------------------
// Rate of change of frequency over a sampled d_omega series.
// ---------------------------------------------------------------------------

struct RocofStats {
    double max_hz_s = 0.0;
    double min_hz_s = 0.0;
    double mean_hz_s = 0.0;
};

// Finite differences of f_nom * d_omega over the sampling interval dt.
RocofStats rocof(const std::vector<double>& d_omega_series, double dt, double f_nom);

}  // namespace gridmarl
