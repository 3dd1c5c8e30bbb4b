#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ltvnet/common.hpp"
#include "ltvnet/structnet/model.hpp"
#include "ltvnet/structnet/training.hpp"

namespace ltvnet::envs {

enum class EnvKind { mountain_car, cart_pole, two_link_arm, linear };

enum class Termination { none, max_steps, boundary, safety };

std::string_view to_string(Termination t);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
};

// Immutable description of an environment. `state_bounds` is the
// termination box; `bound_kinds` says whether leaving a given coordinate's
// box counts as a boundary or a safety violation.
struct EnvSpec {
    EnvKind kind = EnvKind::linear;
    std::string name;
    Eigen::Index state_dim = 0;
    Eigen::Index control_dim = 0;
    double dt = 1.0;
    std::vector<Interval> control_bounds;
    std::vector<Interval> state_bounds;
    std::vector<Termination> bound_kinds;
    std::vector<Interval> init_ranges;
    Vector goal;
    std::vector<Eigen::Index> angle_dims;

    // Linear test system xdot = A x + B u (EnvKind::linear only).
    Matrix linear_a;
    Matrix linear_b;
};

// Continuous mountain car: state (position, velocity), control force in
// [-1, 1], one native step per dt.
EnvSpec mountain_car();

// Frictionless cart-pole, state (x, xdot, theta, thetadot) with theta = 0
// hanging down and theta = pi upright; control is the cart force in newtons.
EnvSpec cart_pole();

// Planar two-link arm under direct joint-acceleration control, state
// (theta1, omega1, theta2, omega2), control (alpha1, alpha2).
EnvSpec two_link_arm();

// Linear test system stepped with explicit Euler, so that the observed
// finite difference equals A x + B u exactly up to rounding.
EnvSpec linear_system(const Matrix& a, const Matrix& b, double dt,
                      std::vector<Interval> control_bounds, std::vector<Interval> state_bounds,
                      std::vector<Interval> init_ranges);

// Looks up one of the three named benchmark environments.
EnvSpec make_env(std::string_view name);

// Throws UsageError if the spec's shapes are inconsistent.
void validate(const EnvSpec& spec);

Vector sample_uniform(const std::vector<Interval>& ranges, Rng& rng);

// Each coordinate uniform in its init range.
Vector reset(const EnvSpec& spec, std::uint64_t seed);

Vector clamp_control(const EnvSpec& spec, const Vector& u);

// Continuous-time equations of motion xdot = f(x, u) (control is clamped).
Vector dynamics(const EnvSpec& spec, const Vector& x, const Vector& u);

struct StepResult {
    Vector x;
    bool terminated = false;
    Termination reason = Termination::none;
};

// Clamps u, integrates one dt with semi-implicit Euler (explicit Euler for
// the linear test system) and checks the termination box. Throws
// NumericalError on a non-finite state.
StepResult step(const EnvSpec& spec, const Vector& x, const Vector& u);

bool in_bounds(const EnvSpec& spec, const Vector& x);

// Central finite differences of dynamics() at (x, u).
structnet::Linearization true_linearization(const EnvSpec& spec, const Vector& x, const Vector& u,
                                            double step = 1e-6);

struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> controls;
    double dt = 0.0;
    bool terminated_early = false;
    Termination reason = Termination::max_steps;
};

struct Collection {
    std::vector<structnet::Transition> transitions;
    std::vector<std::size_t> traj_ids;  // parallel to transitions
    std::vector<std::size_t> steps;     // parallel to transitions
    std::vector<Trajectory> trajectories;
};

// Random-control data collection: trajectory i starts from reset(seed + i)
// and applies controls drawn uniformly from the control bounds until
// max_steps or termination. Each draw is held for `control_hold` steps
// (1 = a fresh draw every step).
Collection collect(const EnvSpec& spec, std::size_t n_traj, std::size_t max_steps,
                   std::uint64_t seed, std::size_t control_hold = 1);

}  // namespace ltvnet::envs
