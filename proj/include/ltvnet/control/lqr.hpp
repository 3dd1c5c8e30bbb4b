#pragma once

#include <vector>

#include "ltvnet/control/cost.hpp"

namespace ltvnet::control {

struct LqrSolution {
    std::vector<Matrix> gains;   // K_0 .. K_{T-1}, u_t = -K_t (x_t - goal)
    std::vector<Matrix> values;  // P_0 .. P_T, cost-to-go 0.5 e^T P_t e

    // Optimal total cost from the initial error e_0 = x_0 - goal.
    double optimal_cost(const Vector& initial_error) const;
};

// Finite-horizon discrete Riccati recursion for x_{t+1} = A x_t + B u_t in
// goal-error coordinates (the goal must be an equilibrium under zero
// control). Running weights are dt*Q and dt*R, terminal weight Qf, matching
// evaluate_cost. Throws NumericalError if R + B^T P B is singular.
LqrSolution lqr_reference(const Matrix& a, const Matrix& b, const CostSpec& cost,
                          std::size_t horizon, double dt = 1.0);

}  // namespace ltvnet::control
