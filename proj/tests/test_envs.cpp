#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ltvnet/common/csv.hpp"
#include "ltvnet/envs/dataset_io.hpp"
#include "ltvnet/envs/env.hpp"

using namespace ltvnet;
using namespace ltvnet::envs;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out(i++) = d;
    return out;
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "ltvnet_envs_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("environment dimensions") {
    CHECK(mountain_car().state_dim == 2);
    CHECK(mountain_car().control_dim == 1);
    CHECK(cart_pole().state_dim == 4);
    CHECK(cart_pole().control_dim == 1);
    CHECK(two_link_arm().state_dim == 4);
    CHECK(two_link_arm().control_dim == 2);
    for (const char* name : {"mountain_car", "cart_pole", "two_link_arm"}) {
        CHECK_NOTHROW(validate(make_env(name)));
    }
    CHECK_THROWS_AS(make_env("acrobot"), UsageError);
}

TEST_CASE("reset draws from the init ranges") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Vector mc = reset(mountain_car(), seed);
        CHECK(mc(0) >= -0.6);
        CHECK(mc(0) <= -0.4);
        CHECK(mc(1) == 0.0);

        const Vector arm = reset(two_link_arm(), seed);
        CHECK(arm(1) == 0.0);
        CHECK(arm(3) == 0.0);
        CHECK(std::abs(arm(0)) <= kPi);
        CHECK(std::abs(arm(2)) <= kPi);
    }
    CHECK(reset(cart_pole(), 7) == reset(cart_pole(), 7));
    CHECK_FALSE(reset(cart_pole(), 7) == reset(cart_pole(), 8));
}

TEST_CASE("mountain car step matches the closed-form update") {
    const EnvSpec s = mountain_car();
    const double p = -0.5, v = 0.01, u = 0.3;
    const StepResult r = step(s, vec({p, v}), vec({u}));
    const double v_next = v + 0.0015 * u - 0.0025 * std::cos(3 * p);
    CHECK(r.x(1) == v_next);
    CHECK(r.x(0) == p + v_next);
    CHECK_FALSE(r.terminated);

    // Valley bottom, at rest, no force: velocity change equals the gravity term.
    const double bottom = -kPi / 6;
    const StepResult rest = step(s, vec({bottom, 0.0}), vec({0.0}));
    CHECK(rest.x(1) == -0.0025 * std::cos(3 * bottom));
    CHECK(std::abs(rest.x(1)) < 1e-15);

    // Speed clipping.
    const StepResult fast = step(s, vec({-0.5, 0.07}), vec({1.0}));
    CHECK(fast.x(1) == 0.07);

    // Leaving the position box terminates.
    const StepResult out = step(s, vec({0.59, 0.05}), vec({1.0}));
    CHECK(out.terminated);
    CHECK(out.reason == Termination::boundary);
}

TEST_CASE("equilibria are exact fixed points") {
    const Vector down = Vector::Zero(4);
    CHECK(step(cart_pole(), down, vec({0.0})).x == down);

    const Vector arm = vec({0.7, 0.0, -1.2, 0.0});
    CHECK(step(two_link_arm(), arm, vec({0.0, 0.0})).x == arm);
}

TEST_CASE("step clamps controls and is deterministic") {
    const EnvSpec s = cart_pole();
    const Vector x = vec({0.1, -0.2, 1.0, 0.5});
    CHECK(step(s, x, vec({50.0})).x == step(s, x, vec({10.0})).x);
    CHECK(step(s, x, vec({-50.0})).x == step(s, x, vec({-10.0})).x);
    CHECK(step(s, x, vec({3.3})).x == step(s, x, vec({3.3})).x);

    const EnvSpec arm = two_link_arm();
    const Vector y = vec({0.0, 1.0, 0.0, -1.0});
    CHECK(step(arm, y, vec({9.0, -9.0})).x == step(arm, y, vec({5.0, -5.0})).x);
    CHECK(clamp_control(arm, vec({9.0, 0.5})) == vec({5.0, 0.5}));
}

TEST_CASE("two-link arm safety bound") {
    const StepResult r = step(two_link_arm(), vec({0.0, 7.99, 0.0, 0.0}), vec({5.0, 0.0}));
    CHECK(r.terminated);
    CHECK(r.reason == Termination::safety);
}

TEST_CASE("mountain car does not gain energy without control") {
    const EnvSpec s = mountain_car();
    const auto energy = [](const Vector& x) {
        return 0.5 * x(1) * x(1) + 0.0025 / 3.0 * std::sin(3.0 * x(0));
    };
    Vector x = vec({-0.9, 0.0});
    double high = energy(x);
    for (int k = 0; k < 1000; ++k) {
        const StepResult r = step(s, x, vec({0.0}));
        REQUIRE_FALSE(r.terminated);
        x = r.x;
        CHECK(energy(x) <= high + 1e-3);
        high = std::max(high, energy(x));
    }
}

TEST_CASE("true_linearization") {
    SUBCASE("linear system is recovered exactly") {
        Matrix a(2, 2), b(2, 1);
        a << 0.3, -1.0, 2.0, 0.1;
        b << 0.5, -0.25;
        const EnvSpec s = linear_system(a, b, 0.1, {{-1, 1}}, {{-10, 10}, {-10, 10}},
                                        {{-1, 1}, {-1, 1}});
        const auto lin = true_linearization(s, vec({0.2, -0.4}), vec({0.3}));
        CHECK((lin.a - a).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((lin.b - b).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("mountain car control column") {
        const auto lin = true_linearization(mountain_car(), vec({-0.5, 0.01}), vec({0.2}));
        CHECK(std::abs(lin.b(0, 0)) < 1e-12);
        CHECK(lin.b(1, 0) == doctest::Approx(0.0015).epsilon(1e-8));
        CHECK(lin.a(1, 0) == doctest::Approx(3 * 0.0025 * std::sin(-1.5)).epsilon(1e-6));
    }
    SUBCASE("cart-pole reflection symmetry") {
        // f(-x, -u) = -f(x, u), so the Jacobians agree at mirrored points.
        const Vector x = vec({0.3, -0.7, 2.1, 1.4});
        const Vector u = vec({2.5});
        const auto lin = true_linearization(cart_pole(), x, u);
        const auto mirrored = true_linearization(cart_pole(), -x, -u);
        CHECK((lin.a - mirrored.a).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((lin.b - mirrored.b).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((dynamics(cart_pole(), -x, -u) + dynamics(cart_pole(), x, u)).cwiseAbs().maxCoeff() <
              1e-14);
    }
    SUBCASE("agrees with Richardson-extrapolated differences") {
        const struct {
            EnvSpec spec;
            Vector x;
            Vector u;
        } cases[] = {
            {mountain_car(), vec({-0.7, 0.02}), vec({0.4})},
            {cart_pole(), vec({0.5, 0.3, 2.5, -1.0}), vec({4.0})},
            {two_link_arm(), vec({0.5, 0.3, -2.5, 1.0}), vec({1.0, -2.0})},
        };
        for (const auto& c : cases) {
            const auto lin = true_linearization(c.spec, c.x, c.u);
            const double h = 1e-3;
            for (Eigen::Index j = 0; j < c.x.size(); ++j) {
                const auto d = [&](double step) {
                    Vector up = c.x, down = c.x;
                    up(j) += step;
                    down(j) -= step;
                    return Vector((dynamics(c.spec, up, c.u) - dynamics(c.spec, down, c.u)) / (2 * step));
                };
                const Vector rich = (4.0 * d(h / 2) - d(h)) / 3.0;
                CHECK((rich - lin.a.col(j)).cwiseAbs().maxCoeff() < 1e-6);
            }
        }
    }
}

TEST_CASE("collect") {
    SUBCASE("one step") {
        const Collection c = collect(mountain_car(), 1, 1, 0);
        CHECK(c.transitions.size() == 1);
        REQUIRE(c.trajectories.size() == 1);
        CHECK(c.trajectories[0].states.size() == 2);
        CHECK(c.trajectories[0].controls.size() == 1);
    }
    SUBCASE("bounded count, reconstruction and source states in bounds") {
        for (const char* name : {"mountain_car", "cart_pole", "two_link_arm"}) {
            const EnvSpec s = make_env(name);
            const Collection c = collect(s, 5, 120, 11);
            CHECK(c.transitions.size() <= 600);
            CHECK(c.traj_ids.size() == c.transitions.size());
            std::size_t row = 0;
            for (const auto& traj : c.trajectories) {
                CHECK(traj.states.size() == traj.controls.size() + 1);
                for (std::size_t k = 0; k < traj.controls.size(); ++k, ++row) {
                    const auto& t = c.transitions[row];
                    CHECK(in_bounds(s, t.x));
                    CHECK(t.x == traj.states[k]);
                    CHECK((t.x + t.dt * t.xdot - traj.states[k + 1]).cwiseAbs().maxCoeff() < 1e-12);
                    for (Eigen::Index i = 0; i < t.u.size(); ++i) {
                        const auto& b = s.control_bounds[static_cast<std::size_t>(i)];
                        CHECK(b.contains(t.u(i)));
                    }
                }
                if (traj.controls.size() < 120) CHECK(traj.terminated_early);
            }
        }
    }
    SUBCASE("deterministic given the seed") {
        const Collection a = collect(cart_pole(), 3, 50, 5);
        const Collection b = collect(cart_pole(), 3, 50, 5);
        CHECK(a.transitions == b.transitions);
    }
    SUBCASE("control hold repeats draws") {
        const Collection c = collect(two_link_arm(), 1, 9, 2, 3);
        const auto& us = c.trajectories[0].controls;
        CHECK(us[0] == us[1]);
        CHECK(us[1] == us[2]);
        CHECK_FALSE(us[2] == us[3]);
    }
    CHECK_THROWS_AS(collect(mountain_car(), 0, 10, 0), UsageError);
    CHECK_THROWS_AS(collect(mountain_car(), 1, 0, 0), UsageError);
}

TEST_CASE("dataset CSV round-trip and errors") {
    const EnvSpec s = two_link_arm();
    const Collection c = collect(s, 3, 20, 1);
    const fs::path p = temp_dir() / "data.csv";
    write_dataset(p, c, 4, 2);

    const std::string text = read_file(p);
    CHECK(text.rfind("traj_id,step,x_0,x_1,x_2,x_3,u_0,u_1,xdot_0,xdot_1,xdot_2,xdot_3,dt\n", 0) == 0);

    const Collection back = read_dataset(p, 4, 2);
    CHECK(back.transitions == c.transitions);
    CHECK(back.traj_ids == c.traj_ids);
    CHECK(back.steps == c.steps);

    CHECK_THROWS_AS(read_dataset(p, 2, 1), DataError);

    const fs::path empty = temp_dir() / "empty.csv";
    write_file_atomic(empty, dataset_header(4, 2) + "\n");
    try {
        read_dataset(empty, 4, 2);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("empty.csv") != std::string::npos);
    }

    const fs::path bad = temp_dir() / "bad.csv";
    write_file_atomic(bad, dataset_header(4, 2) + "\n0,0,1,2,3,4,5,6,7,8,9,oops,0.01\n");
    try {
        read_dataset(bad, 4, 2);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("bad.csv:2") != std::string::npos);
    }

    CHECK_THROWS_AS(read_dataset(temp_dir() / "missing.csv", 4, 2), DataError);
}
