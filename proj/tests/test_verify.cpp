#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ltvnet/common/csv.hpp"
#include "ltvnet/envs/env.hpp"
#include "ltvnet/verify/fidelity.hpp"

using namespace ltvnet;
using namespace ltvnet::verify;

namespace {

std::vector<EvalPoint> random_points(Eigen::Index n, Eigen::Index m, std::size_t count, Rng& rng) {
    std::vector<EvalPoint> out;
    for (std::size_t k = 0; k < count; ++k) {
        Vector x(n), u(m);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(-2, 2);
        for (Eigen::Index i = 0; i < m; ++i) u(i) = rng.uniform(-2, 2);
        out.emplace_back(x, u);
    }
    return out;
}

std::vector<structnet::Transition> random_transitions(Eigen::Index n, Eigen::Index m,
                                                      std::size_t count, Rng& rng) {
    std::vector<structnet::Transition> out;
    for (const auto& [x, u] : random_points(n, m, count, rng)) {
        Vector xdot(n);
        for (Eigen::Index i = 0; i < n; ++i) xdot(i) = rng.uniform(-1, 1);
        out.push_back({x, u, xdot, 0.1});
    }
    return out;
}

}  // namespace

TEST_CASE("quantiles") {
    const Quantiles q = quantiles({3.0, 1.0, 2.0});
    CHECK(q.min == 1.0);
    CHECK(q.median == 2.0);
    CHECK(q.max == 3.0);
    CHECK(quantiles({4.0, 1.0, 2.0, 3.0}).median == 2.5);
}

TEST_CASE("bias-only models are reported exact") {
    Rng rng(1);
    Matrix a(3, 3), b(3, 2);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-1, 1);
    const auto model = structnet::make_linear_model(a, b);
    const auto points = random_points(3, 2, 25, rng);
    const FidelityReport r = jacobian_fidelity(model, points);
    REQUIRE(r.samples.size() == 25);
    for (const auto& s : r.samples) {
        CHECK(s.cosine >= 1.0 - 1e-9);
        CHECK(s.relative_error <= 1e-6);
        CHECK(s.sign_agreement == 1.0);
        CHECK(std::isnan(s.env_cosine));
    }
    CHECK(r.relative_error.max <= 1e-6);
}

TEST_CASE("untrained model gives a finite report") {
    Rng rng(2);
    const auto spec = envs::cart_pole();
    const auto model = structnet::make_model(4, 1, 5, {{16, 16}});
    const auto points = random_points(4, 1, 30, rng);
    FidelityOptions opt;
    opt.env = &spec;
    const FidelityReport r = jacobian_fidelity(model, points, opt);
    for (const auto& s : r.samples) {
        CHECK(std::isfinite(s.cosine));
        CHECK(std::isfinite(s.relative_error));
        CHECK(std::isfinite(s.env_cosine));
        CHECK(s.cosine >= -1.0);
        CHECK(s.cosine <= 1.0);
        CHECK(s.sign_agreement >= 0.0);
        CHECK(s.sign_agreement <= 1.0);
    }
    for (const Quantiles& q : {r.cosine, r.relative_error, r.sign_agreement, r.env_cosine}) {
        CHECK(std::isfinite(q.min));
        CHECK(std::isfinite(q.median));
        CHECK(std::isfinite(q.max));
    }

    const std::string csv = format_fidelity_csv(r);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 31);
}

TEST_CASE("reference Jacobian of a bias-only model is [A B]") {
    const Matrix a{{0.0, 1.0}, {-3.0, 0.2}};
    const Matrix b{{0.5}, {1.5}};
    const auto model = structnet::make_linear_model(a, b);
    Matrix expected(2, 3);
    expected << a, b;
    const Matrix j = reference_jacobian(model, Vector::Ones(2), Vector::Ones(1), 1e-5);
    CHECK((j - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("model fidelity at horizon one is the one-step prediction error") {
    const auto spec = envs::mountain_car();
    const auto model = structnet::make_model(2, 1, 4, {{16}});
    const auto inputs = sample_rollout_inputs(spec, 10, 1, 3);
    const ModelFidelity mf = model_fidelity(model, spec, inputs);
    REQUIRE(mf.mean_error.size() == 1);
    double sum = 0.0;
    for (const auto& in : inputs) {
        const auto r = envs::step(spec, in.x0, in.controls[0]);
        const Vector xdot = (r.x - in.x0) / spec.dt;
        sum += (structnet::forward(model, in.x0, in.controls[0]) - xdot).norm() * spec.dt;
    }
    CHECK(mf.mean_error[0] == doctest::Approx(sum / 10.0).epsilon(1e-9));
    CHECK(mf.counts[0] == 10);
}

TEST_CASE("model fidelity of an exact linear model is near zero") {
    const Matrix a{{0.0, 1.0}, {-1.0, -0.2}};
    const Matrix b{{0.0}, {1.0}};
    const auto spec = envs::linear_system(a, b, 0.05, {{-1, 1}}, {{-50, 50}, {-50, 50}},
                                          {{-1, 1}, {-1, 1}});
    const ModelFidelity mf = model_fidelity(structnet::make_linear_model(a, b), spec, 5, 40, 1);
    CHECK(mf.mean_error.size() == 40);
    for (double e : mf.mean_error) CHECK(e < 1e-12);
    CHECK(mf.truncated == 0);
}

TEST_CASE("model fidelity survives diverging rollouts") {
    const auto spec = envs::mountain_car();
    const auto wild = structnet::make_linear_model(Matrix::Identity(2, 2) * 1e120, Matrix::Zero(2, 1));
    const ModelFidelity mf = model_fidelity(wild, spec, 4, 30, 2);
    CHECK(mf.mean_error.size() == 30);
    CHECK(mf.truncated > 0);
    CHECK(std::isfinite(mf.mean_error[0]));
    const std::string csv = format_model_fidelity_csv(mf);
    CHECK(csv.rfind("step,mean_error,count\n", 0) == 0);
}

TEST_CASE("gradient audit") {
    Rng rng(6);
    const auto model = structnet::make_model(3, 2, 8, {{12, 12}});
    auto sample = random_transitions(3, 2, 10, rng);
    const double forward_order = gradient_audit(model, sample);
    CHECK(forward_order < 1e-5);

    std::reverse(sample.begin(), sample.end());
    const double reversed = gradient_audit(model, sample);
    CHECK(reversed < 1e-5);
    CHECK(std::abs(reversed - forward_order) < 1e-7);

    // All-zero inputs: the loss is identically zero, so is its gradient.
    std::vector<structnet::Transition> zeros(4, {Vector::Zero(3), Vector::Zero(2), Vector::Zero(3), 0.1});
    const auto g = structnet::loss_and_gradient(model, zeros);
    CHECK(g.loss == 0.0);
    CHECK(diffcore::flatten(g.a_grad).isZero(0.0));
    CHECK(diffcore::flatten(g.b_grad).isZero(0.0));
    CHECK(gradient_audit(model, zeros) == 0.0);
}
