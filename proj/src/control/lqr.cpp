#include "ltvnet/control/lqr.hpp"

namespace ltvnet::control {

double LqrSolution::optimal_cost(const Vector& initial_error) const {
    return 0.5 * initial_error.dot(values.front() * initial_error);
}

LqrSolution lqr_reference(const Matrix& a, const Matrix& b, const CostSpec& cost,
                          std::size_t horizon, double dt) {
    require_dims(a.rows() == a.cols() && b.rows() == a.rows() && cost.q.rows() == a.rows() &&
                     cost.r.rows() == b.cols(),
                 "LQR system/cost shapes");
    const Matrix q = dt * cost.q;
    const Matrix r = dt * cost.r;

    LqrSolution sol;
    sol.gains.resize(horizon);
    sol.values.resize(horizon + 1);
    sol.values[horizon] = cost.qf;
    for (std::size_t t = horizon; t-- > 0;) {
        const Matrix& p = sol.values[t + 1];
        const Matrix s = r + b.transpose() * p * b;
        Eigen::FullPivLU<Matrix> lu(s);
        if (!lu.isInvertible()) {
            throw NumericalError("R + B^T P B is singular at t=" + std::to_string(t));
        }
        sol.gains[t] = lu.solve(b.transpose() * p * a);
        Matrix next = q + a.transpose() * p * a - a.transpose() * p * b * sol.gains[t];
        sol.values[t] = 0.5 * (next + next.transpose());
    }
    return sol;
}

}  // namespace ltvnet::control
