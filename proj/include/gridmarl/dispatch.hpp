#pragma once
#include <vector>

namespace gridmarl {

// Quadratic generation costs c_i(P) = a_i P^2 + beta_i P + gamma_i [GBP],
// one triple per generator. a_i > 0 is required (strict convexity).
struct CostModel {
    std::vector<double> a;      // [1/pu * GBP]
    std::vector<double> beta;   // [GBP/pu]
    std::vector<double> gamma;  // [GBP]

    std::size_t size() const { return a.size(); }
    // d^2 c_i / dP^2 = 2 a_i
    double curvature(std::size_t i) const { return 2.0 * a[i]; }

    static CostModel quadratic(std::vector<double> a_coeffs);
    void validate() const;  // throws std::invalid_argument on bad coefficients
};

// Analytic economic-dispatch optimum for quadratic costs without generation
// limits: equal incremental cost 2 a_i P_i + beta_i = lambda for all i,
// subject to sum P_i = (1 + rho) P_L.
struct DispatchResult {
    std::vector<double> p_star;  // per-generator output [pu]
    double lambda = 0.0;         // system incremental cost [GBP/pu]
    double total_cost = 0.0;     // [GBP]
};

DispatchResult solve_dispatch(const CostModel& costs, double p_load, double rho = 0.0);

// Incremental participation: dP_i = d_lambda / (2 a_i).
std::vector<double> participation_deltas(const CostModel& costs, double d_lambda);

// Literal cost evaluation; returns per-generator costs, sum in `total`.
std::vector<double> eval_cost(const CostModel& costs, const std::vector<double>& p,
                              double* total = nullptr);

}  // namespace gridmarl
