#include "ltvnet/control/ilqr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ltvnet::control {

using structnet::Linearization;
using structnet::StructuredModel;

std::vector<double> MPCConfig::default_alphas() {
    std::vector<double> alphas;
    for (double a = 1.0; a >= 1.0 / 1024.0; a *= 0.5) alphas.push_back(a);
    return alphas;
}

void validate(const MPCConfig& config, Eigen::Index control_dim) {
    if (config.horizon == 0) throw UsageError("MPC horizon must be at least 1");
    if (!(config.dt > 0.0)) throw UsageError("MPC dt must be positive");
    if (config.lambda_init < 0.0 || config.lambda_min < 0.0 ||
        config.lambda_max < config.lambda_min || config.lambda_growth <= 1.0 ||
        config.lambda_shrink <= 0.0 || config.lambda_shrink >= 1.0) {
        throw UsageError("invalid iLQR regularization schedule");
    }
    if (config.line_search_alphas.empty()) throw UsageError("line search needs at least one alpha");
    for (std::size_t i = 0; i < config.line_search_alphas.size(); ++i) {
        const double a = config.line_search_alphas[i];
        if (!(a > 0.0 && a <= 1.0) || (i > 0 && a >= config.line_search_alphas[i - 1])) {
            throw UsageError("line search alphas must be descending values in (0, 1]");
        }
    }
    if (config.control_bounds.size() != static_cast<std::size_t>(control_dim)) {
        throw UsageError("MPC control bounds do not match the control dimension");
    }
    for (const auto& b : config.control_bounds) {
        if (!(b.lo <= b.hi)) throw UsageError("MPC control bound with lo > hi");
    }
}

DiscreteLinearization discretize(const Linearization& lin, double dt) {
    if (!(dt > 0.0)) throw UsageError("discretize dt must be positive");
    DiscreteLinearization d;
    d.a = Matrix::Identity(lin.a.rows(), lin.a.cols()) + dt * lin.a;
    d.b = dt * lin.b;
    return d;
}

namespace {

struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> controls;
    std::vector<Linearization> lins;
    double cost = std::numeric_limits<double>::infinity();
    bool ok = false;
};

Vector clamp(const Vector& u, const std::vector<envs::Interval>& bounds) {
    Vector c(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const auto& b = bounds[static_cast<std::size_t>(i)];
        c(i) = std::clamp(u(i), b.lo, b.hi);
    }
    return c;
}

// Rolls the model forward under u_k = clamp(ubar_k + alpha kff_k + K_k (x_k - xbar_k)).
// With empty gains this is a plain open-loop rollout of `nominal.controls`.
Trajectory rollout(const StructuredModel& model, const Vector& x0, const CostSpec& cost,
                   const MPCConfig& config, const Trajectory& nominal,
                   const std::vector<Vector>& feedforward, const std::vector<Matrix>& gains,
                   double alpha) {
    const std::size_t horizon = nominal.controls.size();
    Trajectory t;
    t.states.reserve(horizon + 1);
    t.controls.reserve(horizon);
    t.lins.reserve(horizon);
    t.states.push_back(x0);
    double total = 0.0;
    try {
        for (std::size_t k = 0; k < horizon; ++k) {
            const Vector& x = t.states.back();
            Vector u = nominal.controls[k];
            if (!gains.empty()) {
                u += alpha * feedforward[k] + gains[k] * (x - nominal.states[k]);
            }
            u = clamp(u, config.control_bounds);
            Linearization lin = structnet::linearize(model, x, u);
            Vector next = x + config.dt * (lin.a * x + lin.b * u);
            if (!next.allFinite()) return t;
            total += running_cost(cost, x, u) * config.dt;
            t.controls.push_back(std::move(u));
            t.lins.push_back(std::move(lin));
            t.states.push_back(std::move(next));
        }
    } catch (const NumericalError&) {
        return t;
    }
    total += terminal_cost(cost, t.states.back());
    if (!std::isfinite(total)) return t;
    t.cost = total;
    t.ok = true;
    return t;
}

struct BackwardPass {
    std::vector<Vector> feedforward;
    std::vector<Matrix> gains;
    double expected_linear = 0.0;     // sum k^T Q_u
    double expected_quadratic = 0.0;  // sum 0.5 k^T Q_uu k
    bool ok = false;
};

BackwardPass backward_pass(const Trajectory& nominal, const CostSpec& cost,
                           const MPCConfig& config, double lambda) {
    const std::size_t horizon = nominal.controls.size();
    const double dt = config.dt;
    BackwardPass bp;
    bp.feedforward.resize(horizon);
    bp.gains.resize(horizon);

    Vector v_x = cost.qf * state_error(cost, nominal.states.back());
    Matrix v_xx = cost.qf;

    for (std::size_t k = horizon; k-- > 0;) {
        const Vector& u = nominal.controls[k];
        const DiscreteLinearization d = discretize(nominal.lins[k], dt);
        const Vector e = state_error(cost, nominal.states[k]);

        const Vector q_x = dt * (cost.q * e) + d.a.transpose() * v_x;
        const Vector q_u = dt * (cost.r * u) + d.b.transpose() * v_x;
        const Matrix vb = v_xx * d.b;
        const Matrix q_xx = dt * cost.q + d.a.transpose() * v_xx * d.a;
        const Matrix q_uu = dt * cost.r + d.b.transpose() * vb;
        const Matrix q_ux = vb.transpose() * d.a;

        Matrix q_uu_reg = q_uu;
        q_uu_reg.diagonal().array() += lambda;
        Eigen::LLT<Matrix> llt(q_uu_reg);
        if (llt.info() != Eigen::Success) return bp;

        const Vector kff = -llt.solve(q_u);
        const Matrix gain = -llt.solve(q_ux);
        if (!kff.allFinite() || !gain.allFinite()) return bp;

        bp.expected_linear += kff.dot(q_u);
        bp.expected_quadratic += 0.5 * kff.dot(q_uu * kff);

        v_x = q_x + gain.transpose() * (q_uu * kff) + gain.transpose() * q_u +
              q_ux.transpose() * kff;
        Matrix v = q_xx + gain.transpose() * q_uu * gain + gain.transpose() * q_ux +
                   q_ux.transpose() * gain;
        v_xx = 0.5 * (v + v.transpose());

        bp.feedforward[k] = kff;
        bp.gains[k] = gain;
    }
    bp.ok = true;
    return bp;
}

Plan to_plan(const Trajectory& t) {
    Plan p;
    p.controls = t.controls;
    p.predicted_states = t.states;
    p.cost = t.cost;
    return p;
}

}  // namespace

Plan ilqr_solve(const StructuredModel& model, const Vector& x0, const CostSpec& cost,
                const MPCConfig& config, std::optional<std::span<const Vector>> warm_start) {
    require_dims(x0.size() == model.state_dim, "initial state length");
    validate(config, model.control_dim);

    Trajectory seed;
    if (warm_start) {
        require_dims(warm_start->size() == config.horizon, "warm start length");
        for (const auto& u : *warm_start) {
            require_dims(u.size() == model.control_dim, "warm start control length");
            seed.controls.push_back(u);
        }
    } else {
        seed.controls.assign(config.horizon, Vector::Zero(model.control_dim));
    }

    Trajectory current = rollout(model, x0, cost, config, seed, {}, {}, 0.0);
    if (!current.ok) {
        throw NumericalError("initial iLQR rollout is non-finite");
    }

    Plan plan;
    plan.accepted_costs.push_back(current.cost);
    double lambda = config.lambda_init;
    bool converged = false;
    std::size_t iterations = 0;

    while (iterations < config.ilqr_iterations && !converged) {
        ++iterations;

        BackwardPass bp;
        while (true) {
            bp = backward_pass(current, cost, config, lambda);
            if (bp.ok) break;
            lambda = std::max(lambda * config.lambda_growth, config.lambda_min);
            if (lambda > config.lambda_max) break;
        }
        if (!bp.ok) break;

        const double scale = std::max(std::abs(current.cost), 1e-12);
        const double expected = -(bp.expected_linear + bp.expected_quadratic);
        if (expected <= config.convergence_tol * scale) {
            converged = true;
            break;
        }

        bool accepted = false;
        for (double alpha : config.line_search_alphas) {
            Trajectory candidate =
                rollout(model, x0, cost, config, current, bp.feedforward, bp.gains, alpha);
            if (candidate.ok && candidate.cost < current.cost) {
                const double improvement = (current.cost - candidate.cost) / scale;
                current = std::move(candidate);
                plan.accepted_costs.push_back(current.cost);
                accepted = true;
                if (improvement < config.convergence_tol) converged = true;
                break;
            }
        }

        if (accepted) {
            lambda = std::max(lambda * config.lambda_shrink, config.lambda_min);
        } else {
            lambda = std::max(lambda * config.lambda_growth, config.lambda_min);
            if (lambda > config.lambda_max) break;
        }
    }

    Plan out = to_plan(current);
    out.accepted_costs = std::move(plan.accepted_costs);
    out.converged = converged;
    out.iterations_used = iterations;
    return out;
}

}  // namespace ltvnet::control
