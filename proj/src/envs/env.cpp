#include "ltvnet/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ltvnet::envs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

namespace mc {
constexpr double power = 0.0015;
constexpr double gravity = 0.0025;
constexpr double max_speed = 0.07;
}  // namespace mc

namespace cp {
constexpr double cart_mass = 1.0;
constexpr double pole_mass = 0.1;
constexpr double total_mass = cart_mass + pole_mass;
constexpr double half_length = 0.5;
constexpr double gravity = 9.81;
}  // namespace cp

struct CartPoleAccel {
    double cart;
    double pole;
};

// theta measured from the hanging position.
CartPoleAccel cart_pole_accel(double theta, double theta_dot, double force) {
    using namespace cp;
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double temp = (force + pole_mass * half_length * theta_dot * theta_dot * s) / total_mass;
    const double pole =
        -(gravity * s + c * temp) /
        (half_length * (4.0 / 3.0 - pole_mass * c * c / total_mass));
    const double cart = temp - pole_mass * half_length * pole * c / total_mass;
    return {cart, pole};
}

}  // namespace

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::none: return "none";
        case Termination::max_steps: return "max_steps";
        case Termination::boundary: return "boundary";
        case Termination::safety: return "safety";
    }
    return "none";
}

EnvSpec mountain_car() {
    EnvSpec s;
    s.kind = EnvKind::mountain_car;
    s.name = "mountain_car";
    s.state_dim = 2;
    s.control_dim = 1;
    s.dt = 1.0;
    s.control_bounds = {{-1.0, 1.0}};
    s.state_bounds = {{-1.2, 0.6}, {-mc::max_speed, mc::max_speed}};
    s.bound_kinds = {Termination::boundary, Termination::boundary};
    s.init_ranges = {{-0.6, -0.4}, {0.0, 0.0}};
    s.goal = Vector(2);
    s.goal << 0.45, 0.0;
    return s;
}

EnvSpec cart_pole() {
    EnvSpec s;
    s.kind = EnvKind::cart_pole;
    s.name = "cart_pole";
    s.state_dim = 4;
    s.control_dim = 1;
    s.dt = 0.02;
    s.control_bounds = {{-10.0, 10.0}};
    s.state_bounds = {{-2.4, 2.4}, {-kInf, kInf}, {-kInf, kInf}, {-kInf, kInf}};
    s.bound_kinds = {Termination::boundary, Termination::boundary, Termination::boundary,
                     Termination::boundary};
    s.init_ranges = {{-1.0, 1.0}, {-1.0, 1.0}, {0.0, 2.0 * kPi}, {-2.0, 2.0}};
    s.goal = Vector::Zero(4);
    s.goal(2) = kPi;
    s.angle_dims = {2};
    return s;
}

EnvSpec two_link_arm() {
    constexpr double max_accel = 5.0;
    constexpr double max_speed = 8.0;
    EnvSpec s;
    s.kind = EnvKind::two_link_arm;
    s.name = "two_link_arm";
    s.state_dim = 4;
    s.control_dim = 2;
    s.dt = 0.01;
    s.control_bounds = {{-max_accel, max_accel}, {-max_accel, max_accel}};
    s.state_bounds = {{-kInf, kInf}, {-max_speed, max_speed}, {-kInf, kInf}, {-max_speed, max_speed}};
    s.bound_kinds = {Termination::boundary, Termination::safety, Termination::boundary,
                     Termination::safety};
    s.init_ranges = {{-kPi, kPi}, {0.0, 0.0}, {-kPi, kPi}, {0.0, 0.0}};
    s.goal = Vector(4);
    s.goal << kPi / 2.0, 0.0, 0.0, 0.0;
    s.angle_dims = {0, 2};
    return s;
}

EnvSpec linear_system(const Matrix& a, const Matrix& b, double dt,
                      std::vector<Interval> control_bounds, std::vector<Interval> state_bounds,
                      std::vector<Interval> init_ranges) {
    EnvSpec s;
    s.kind = EnvKind::linear;
    s.name = "linear";
    s.state_dim = a.rows();
    s.control_dim = b.cols();
    s.dt = dt;
    s.control_bounds = std::move(control_bounds);
    s.state_bounds = std::move(state_bounds);
    s.bound_kinds.assign(s.state_bounds.size(), Termination::boundary);
    s.init_ranges = std::move(init_ranges);
    s.goal = Vector::Zero(a.rows());
    s.linear_a = a;
    s.linear_b = b;
    validate(s);
    return s;
}

EnvSpec make_env(std::string_view name) {
    if (name == "mountain_car") return mountain_car();
    if (name == "cart_pole") return cart_pole();
    if (name == "two_link_arm") return two_link_arm();
    throw UsageError("unknown environment '" + std::string(name) +
                     "' (expected mountain_car, cart_pole or two_link_arm)");
}

void validate(const EnvSpec& spec) {
    const auto n = static_cast<std::size_t>(spec.state_dim);
    const auto m = static_cast<std::size_t>(spec.control_dim);
    if (n == 0 || m == 0 || spec.state_bounds.size() != n || spec.init_ranges.size() != n ||
        spec.bound_kinds.size() != n || spec.control_bounds.size() != m ||
        spec.goal.size() != spec.state_dim || !(spec.dt > 0.0)) {
        throw UsageError("inconsistent environment spec '" + spec.name + "'");
    }
    for (const auto* ranges : {&spec.state_bounds, &spec.init_ranges, &spec.control_bounds}) {
        for (const auto& r : *ranges) {
            if (!(r.lo <= r.hi)) throw UsageError("interval with lo > hi in '" + spec.name + "'");
        }
    }
    if (spec.kind == EnvKind::linear &&
        (spec.linear_a.rows() != spec.state_dim || spec.linear_a.cols() != spec.state_dim ||
         spec.linear_b.rows() != spec.state_dim || spec.linear_b.cols() != spec.control_dim)) {
        throw UsageError("linear system matrices do not match dimensions");
    }
}

Vector sample_uniform(const std::vector<Interval>& ranges, Rng& rng) {
    Vector v(static_cast<Eigen::Index>(ranges.size()));
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        const auto& r = ranges[i];
        v(static_cast<Eigen::Index>(i)) = r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi);
    }
    return v;
}

Vector reset(const EnvSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return sample_uniform(spec.init_ranges, rng);
}

Vector clamp_control(const EnvSpec& spec, const Vector& u) {
    require_dims(u.size() == spec.control_dim, "control length");
    Vector c(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const auto& b = spec.control_bounds[static_cast<std::size_t>(i)];
        c(i) = std::clamp(u(i), b.lo, b.hi);
    }
    return c;
}

Vector dynamics(const EnvSpec& spec, const Vector& x, const Vector& u_raw) {
    require_dims(x.size() == spec.state_dim, "state length");
    const Vector u = clamp_control(spec, u_raw);
    Vector f(spec.state_dim);
    switch (spec.kind) {
        case EnvKind::mountain_car:
            f << x(1), mc::power * u(0) - mc::gravity * std::cos(3.0 * x(0));
            break;
        case EnvKind::cart_pole: {
            const auto acc = cart_pole_accel(x(2), x(3), u(0));
            f << x(1), acc.cart, x(3), acc.pole;
            break;
        }
        case EnvKind::two_link_arm:
            f << x(1), u(0), x(3), u(1);
            break;
        case EnvKind::linear:
            f = spec.linear_a * x + spec.linear_b * u;
            break;
    }
    return f;
}

bool in_bounds(const EnvSpec& spec, const Vector& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!spec.state_bounds[static_cast<std::size_t>(i)].contains(x(i))) return false;
    }
    return true;
}

StepResult step(const EnvSpec& spec, const Vector& x, const Vector& u_raw) {
    require_dims(x.size() == spec.state_dim, "state length");
    const Vector u = clamp_control(spec, u_raw);
    const double dt = spec.dt;
    StepResult r;
    r.x = Vector(spec.state_dim);
    switch (spec.kind) {
        case EnvKind::mountain_car: {
            double v = x(1) + mc::power * u(0) - mc::gravity * std::cos(3.0 * x(0));
            v = std::clamp(v, -mc::max_speed, mc::max_speed);
            r.x << x(0) + v, v;
            break;
        }
        case EnvKind::cart_pole: {
            const auto acc = cart_pole_accel(x(2), x(3), u(0));
            const double v = x(1) + dt * acc.cart;
            const double w = x(3) + dt * acc.pole;
            r.x << x(0) + dt * v, v, x(2) + dt * w, w;
            break;
        }
        case EnvKind::two_link_arm: {
            const double w1 = x(1) + dt * u(0);
            const double w2 = x(3) + dt * u(1);
            r.x << x(0) + dt * w1, w1, x(2) + dt * w2, w2;
            break;
        }
        case EnvKind::linear:
            r.x = x + dt * (spec.linear_a * x + spec.linear_b * u);
            break;
    }
    if (!r.x.allFinite()) {
        throw NumericalError("environment '" + spec.name + "' produced a non-finite state");
    }
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!spec.state_bounds[idx].contains(r.x(i))) {
            r.terminated = true;
            r.reason = spec.bound_kinds[idx];
            break;
        }
    }
    return r;
}

structnet::Linearization true_linearization(const EnvSpec& spec, const Vector& x, const Vector& u,
                                            double step) {
    const Eigen::Index n = spec.state_dim;
    const Eigen::Index m = spec.control_dim;
    structnet::Linearization lin;
    lin.x = x;
    lin.u = u;
    lin.a.resize(n, n);
    lin.b.resize(n, m);
    for (Eigen::Index j = 0; j < n; ++j) {
        Vector up = x, down = x;
        up(j) += step;
        down(j) -= step;
        lin.a.col(j) = (dynamics(spec, up, u) - dynamics(spec, down, u)) / (2.0 * step);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        Vector up = u, down = u;
        up(j) += step;
        down(j) -= step;
        lin.b.col(j) = (dynamics(spec, x, up) - dynamics(spec, x, down)) / (2.0 * step);
    }
    return lin;
}

Collection collect(const EnvSpec& spec, std::size_t n_traj, std::size_t max_steps,
                   std::uint64_t seed, std::size_t control_hold) {
    validate(spec);
    if (n_traj == 0 || max_steps == 0 || control_hold == 0) {
        throw UsageError("collect needs n_traj, max_steps and control_hold >= 1");
    }
    Collection out;
    for (std::size_t i = 0; i < n_traj; ++i) {
        Trajectory traj;
        traj.dt = spec.dt;
        traj.states.push_back(reset(spec, seed + i));
        Rng control_rng(derive_seed(seed + i, 1));
        Vector u;
        for (std::size_t k = 0; k < max_steps; ++k) {
            const Vector& x = traj.states.back();
            if (k % control_hold == 0) u = sample_uniform(spec.control_bounds, control_rng);
            StepResult r = step(spec, x, u);

            structnet::Transition t;
            t.x = x;
            t.u = u;
            t.xdot = (r.x - x) / spec.dt;
            t.dt = spec.dt;
            out.transitions.push_back(std::move(t));
            out.traj_ids.push_back(i);
            out.steps.push_back(k);

            traj.controls.push_back(u);
            traj.states.push_back(std::move(r.x));
            if (r.terminated) {
                traj.terminated_early = true;
                traj.reason = r.reason;
                break;
            }
        }
        out.trajectories.push_back(std::move(traj));
    }
    return out;
}

}  // namespace ltvnet::envs
