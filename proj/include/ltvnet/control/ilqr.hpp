#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ltvnet/control/cost.hpp"
#include "ltvnet/envs/env.hpp"
#include "ltvnet/structnet/model.hpp"

namespace ltvnet::control {

struct MPCConfig {
    std::size_t horizon = 50;
    std::size_t ilqr_iterations = 20;
    double dt = 1.0;

    // Levenberg-Marquardt damping on the control Hessian.
    double lambda_init = 1e-6;
    double lambda_min = 1e-6;
    double lambda_max = 1e10;
    double lambda_growth = 10.0;
    double lambda_shrink = 0.5;

    std::vector<double> line_search_alphas = default_alphas();
    std::vector<envs::Interval> control_bounds;

    // Relative cost change below which the solver stops.
    double convergence_tol = 1e-6;

    static std::vector<double> default_alphas();
};

// Throws UsageError on an invalid configuration.
void validate(const MPCConfig& config, Eigen::Index control_dim);

struct Plan {
    std::vector<Vector> controls;          // T entries, within bounds
    std::vector<Vector> predicted_states;  // T+1 entries, [0] is the query state
    double cost = 0.0;
    bool converged = false;
    std::size_t iterations_used = 0;
    std::vector<double> accepted_costs;  // cost after the initial rollout and each accepted step
};

// A_d = I + dt A, B_d = dt B, consistent with forward-Euler rollouts.
struct DiscreteLinearization {
    Matrix a;
    Matrix b;
};
DiscreteLinearization discretize(const structnet::Linearization& lin, double dt);

// iLQR on the learned model. The backward pass uses the subnet-predicted
// A and B along the current rollout; the forward pass line-searches on the
// model itself with controls clamped to the bounds.
//
// Throws NumericalError only if the initial rollout is non-finite. A
// backward pass that stays indefinite up to lambda_max ends the solve with
// converged = false and the best plan found so far.
Plan ilqr_solve(const structnet::StructuredModel& model, const Vector& x0, const CostSpec& cost,
                const MPCConfig& config,
                std::optional<std::span<const Vector>> warm_start = std::nullopt);

}  // namespace ltvnet::control
