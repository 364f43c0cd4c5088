#include "gridmarl/dispatch.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmarl {

CostModel CostModel::quadratic(std::vector<double> a_coeffs) {
    CostModel m;
    m.a = std::move(a_coeffs);
    m.beta.assign(m.a.size(), 0.0);
    m.gamma.assign(m.a.size(), 0.0);
    return m;
}

void CostModel::validate() const {
    if (a.empty() || a.size() != beta.size() || a.size() != gamma.size())
        throw std::invalid_argument("CostModel: coefficient vectors must be non-empty and equal length");
    for (double ai : a) {
        if (!(ai > 0.0) || !std::isfinite(ai))
            throw std::invalid_argument("CostModel: a_i must be positive and finite");
    }
    for (double b : beta)
        if (!std::isfinite(b)) throw std::invalid_argument("CostModel: beta_i must be finite");
    for (double g : gamma)
        if (!std::isfinite(g)) throw std::invalid_argument("CostModel: gamma_i must be finite");
}

DispatchResult solve_dispatch(const CostModel& costs, double p_load, double rho) {
    costs.validate();
    if (!std::isfinite(p_load) || !std::isfinite(rho))
        throw std::invalid_argument("solve_dispatch: load and rho must be finite");

    const double demand = (1.0 + rho) * p_load;
    double inv_sum = 0.0;   // sum 1/(2 a_i)
    double bias_sum = 0.0;  // sum beta_i/(2 a_i)
    for (std::size_t i = 0; i < costs.size(); ++i) {
        inv_sum += 1.0 / (2.0 * costs.a[i]);
        bias_sum += costs.beta[i] / (2.0 * costs.a[i]);
    }

    DispatchResult r;
    r.lambda = (demand + bias_sum) / inv_sum;
    r.p_star.resize(costs.size());
    for (std::size_t i = 0; i < costs.size(); ++i)
        r.p_star[i] = (r.lambda - costs.beta[i]) / (2.0 * costs.a[i]);
    eval_cost(costs, r.p_star, &r.total_cost);
    return r;
}

std::vector<double> participation_deltas(const CostModel& costs, double d_lambda) {
    costs.validate();
    std::vector<double> dp(costs.size());
    for (std::size_t i = 0; i < costs.size(); ++i)
        dp[i] = d_lambda / (2.0 * costs.a[i]);
    return dp;
}

std::vector<double> eval_cost(const CostModel& costs, const std::vector<double>& p, double* total) {
    if (p.size() != costs.size())
        throw std::invalid_argument("eval_cost: output vector size mismatch");
    std::vector<double> c(p.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        c[i] = costs.a[i] * p[i] * p[i] + costs.beta[i] * p[i] + costs.gamma[i];
        sum += c[i];
    }
    if (total) *total = sum;
    return c;
}

}  // namespace gridmarl
