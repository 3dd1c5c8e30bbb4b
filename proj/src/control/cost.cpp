#include "ltvnet/control/cost.hpp"

#include <cmath>
#include <numbers>

namespace ltvnet::control {

CostSpec diagonal_cost(const Vector& q, const Vector& r, const Vector& qf, const Vector& goal,
                       std::vector<Eigen::Index> angle_dims) {
    CostSpec c;
    c.q = q.asDiagonal();
    c.r = r.asDiagonal();
    c.qf = qf.asDiagonal();
    c.goal = goal;
    c.angle_dims = std::move(angle_dims);
    return c;
}

namespace {

bool symmetric(const Matrix& m) {
    return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return es.eigenvalues().minCoeff();
}

}  // namespace

void validate(const CostSpec& cost, Eigen::Index state_dim, Eigen::Index control_dim) {
    if (cost.q.rows() != state_dim || cost.qf.rows() != state_dim ||
        cost.r.rows() != control_dim || cost.goal.size() != state_dim) {
        throw UsageError("cost matrices do not match state/control dimensions");
    }
    if (!symmetric(cost.q) || !symmetric(cost.qf) || !symmetric(cost.r)) {
        throw UsageError("cost matrices must be symmetric");
    }
    if (min_eigenvalue(cost.q) < -1e-12 || min_eigenvalue(cost.qf) < -1e-12) {
        throw UsageError("Q and Qf must be positive semidefinite");
    }
    if (min_eigenvalue(cost.r) <= 0.0) {
        throw UsageError("R must be positive definite");
    }
    for (auto d : cost.angle_dims) {
        if (d < 0 || d >= state_dim) throw UsageError("angle dimension out of range");
    }
}

double wrap_angle(double radians) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(radians, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

Vector state_error(const CostSpec& cost, const Vector& x) {
    require_dims(x.size() == cost.goal.size(), "state length vs goal");
    Vector e = x - cost.goal;
    for (auto d : cost.angle_dims) e(d) = wrap_angle(e(d));
    return e;
}

double running_cost(const CostSpec& cost, const Vector& x, const Vector& u) {
    const Vector e = state_error(cost, x);
    return 0.5 * e.dot(cost.q * e) + 0.5 * u.dot(cost.r * u);
}

double terminal_cost(const CostSpec& cost, const Vector& x) {
    const Vector e = state_error(cost, x);
    return 0.5 * e.dot(cost.qf * e);
}

double evaluate_cost(const CostSpec& cost, std::span<const Vector> states,
                     std::span<const Vector> controls, double dt) {
    require_dims(!states.empty() && states.size() == controls.size() + 1,
                 "cost needs len(states) == len(controls) + 1");
    double total = 0.0;
    for (std::size_t k = 0; k < controls.size(); ++k) {
        require_dims(controls[k].size() == cost.r.rows(), "control length");
        total += running_cost(cost, states[k], controls[k]) * dt;
    }
    return total + terminal_cost(cost, states.back());
}

}  // namespace ltvnet::control
