#pragma once

#include <span>
#include <vector>

#include "ltvnet/common.hpp"

namespace ltvnet::control {

// Quadratic tracking cost
//   l(x,u)  = 0.5 (x - goal)^T Q (x - goal) + 0.5 u^T R u
//   l_T(x)  = 0.5 (x - goal)^T Qf (x - goal)
// where differences along angle_dims are wrapped to (-pi, pi].
struct CostSpec {
    Matrix q;
    Matrix r;
    Matrix qf;
    Vector goal;
    std::vector<Eigen::Index> angle_dims;
};

CostSpec diagonal_cost(const Vector& q, const Vector& r, const Vector& qf, const Vector& goal,
                       std::vector<Eigen::Index> angle_dims = {});

// Throws UsageError unless shapes match (N, M), Q and Qf are symmetric PSD
// and R is symmetric PD.
void validate(const CostSpec& cost, Eigen::Index state_dim, Eigen::Index control_dim);

// Wraps into (-pi, pi].
double wrap_angle(double radians);

Vector state_error(const CostSpec& cost, const Vector& x);

double running_cost(const CostSpec& cost, const Vector& x, const Vector& u);
double terminal_cost(const CostSpec& cost, const Vector& x);

// sum_k l(x_k, u_k) dt + l_T(x_T). Requires states.size() == controls.size() + 1.
double evaluate_cost(const CostSpec& cost, std::span<const Vector> states,
                     std::span<const Vector> controls, double dt);

}  // namespace ltvnet::control
