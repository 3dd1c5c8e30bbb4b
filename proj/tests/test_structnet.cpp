#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ltvnet/envs/env.hpp"
#include "ltvnet/structnet/model.hpp"
#include "ltvnet/structnet/serialize.hpp"
#include "ltvnet/structnet/training.hpp"

using namespace ltvnet;
using namespace ltvnet::structnet;
namespace fs = std::filesystem;

namespace {

Vector random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
    return v;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-scale, scale);
    return m;
}

// Raw subnet outputs reshaped row-major and multiplied out by hand.
Vector oracle_forward(const StructuredModel& model, const Vector& x, const Vector& u) {
    Vector in(x.size() + u.size());
    in << x, u;
    const Vector a_raw = diffcore::mlp_forward(model.a_net, in).output;
    const Vector b_raw = diffcore::mlp_forward(model.b_net, in).output;
    const Eigen::Index n = model.state_dim;
    const Eigen::Index m = model.control_dim;
    Vector out = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out(i) += a_raw(i * n + j) * x(j);
        for (Eigen::Index j = 0; j < m; ++j) out(i) += b_raw(i * m + j) * u(j);
    }
    return out;
}

std::vector<Transition> linear_transitions(const Matrix& a, const Matrix& b, std::size_t count,
                                           Rng& rng) {
    std::vector<Transition> out;
    for (std::size_t k = 0; k < count; ++k) {
        Transition t;
        t.x = random_vector(a.rows(), rng);
        t.u = random_vector(b.cols(), rng);
        t.xdot = a * t.x + b * t.u;
        t.dt = 0.1;
        out.push_back(t);
    }
    return out;
}

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ltvnet_structnet_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("make_model shapes") {
    const StructuredModel m = make_model(4, 2, 3);
    CHECK(m.a_net.input_size() == 6);
    CHECK(m.b_net.input_size() == 6);
    CHECK(m.a_net.output_size() == 16);
    CHECK(m.b_net.output_size() == 8);
    CHECK(m.a_net.layer_sizes == std::vector<Eigen::Index>{6, 64, 64, 16});
    CHECK_NOTHROW(validate(m));
    CHECK_THROWS_AS(make_model(0, 1, 0), UsageError);

    StructuredModel broken = m;
    broken.control_dim = 1;
    CHECK_THROWS_AS(validate(broken), DataError);
}

TEST_CASE("forward at the origin is exactly zero") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const StructuredModel m = make_model(3, 2, seed, {{8, 8}, diffcore::Activation::tanh});
        const Vector out = forward(m, Vector::Zero(3), Vector::Zero(2));
        for (Eigen::Index i = 0; i < out.size(); ++i) CHECK(out(i) == 0.0);
    }
}

TEST_CASE("forward matches an independent reshape of raw subnet outputs") {
    Rng rng(17);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const StructuredModel m = make_model(4, 2, seed, {{16, 16}, diffcore::Activation::tanh});
        const Vector x = random_vector(4, rng, 2.0);
        const Vector u = random_vector(2, rng, 2.0);
        const Vector f = forward(m, x, u);
        CHECK((f - oracle_forward(m, x, u)).cwiseAbs().maxCoeff() <= 1e-12);

        const Linearization lin = linearize(m, x, u);
        CHECK(lin.a.rows() == 4);
        CHECK(lin.a.cols() == 4);
        CHECK(lin.b.rows() == 4);
        CHECK(lin.b.cols() == 2);
        CHECK((f - (lin.a * x + lin.b * u)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("forward_batch agrees with forward column by column") {
    Rng rng(2);
    const StructuredModel m = make_model(2, 1, 5, {{12}, diffcore::Activation::tanh});
    const Matrix xs = random_matrix(2, 7, rng);
    const Matrix us = random_matrix(1, 7, rng);
    const Matrix fs_ = forward_batch(m, xs, us);
    for (Eigen::Index j = 0; j < 7; ++j) {
        CHECK((fs_.col(j) - forward(m, xs.col(j), us.col(j))).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("bias-only model is globally linear") {
    Rng rng(8);
    const Matrix a = random_matrix(3, 3, rng);
    const Matrix b = random_matrix(3, 2, rng);
    const StructuredModel m = make_linear_model(a, b);
    for (int k = 0; k < 5; ++k) {
        const Vector x = random_vector(3, rng, 3.0);
        const Vector u = random_vector(2, rng, 3.0);
        const Linearization lin = linearize(m, x, u);
        CHECK(lin.a == a);
        CHECK(lin.b == b);
        CHECK(forward(m, x, u) == a * x + b * u);

        // Central differences of forward recover A.
        const double h = 1e-5;
        for (Eigen::Index j = 0; j < 3; ++j) {
            Vector up = x, down = x;
            up(j) += h;
            down(j) -= h;
            const Vector col = (forward(m, up, u) - forward(m, down, u)) / (2 * h);
            CHECK((col - a.col(j)).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("forward rejects wrong dimensions") {
    const StructuredModel m = make_model(2, 1, 0, {{4}, diffcore::Activation::tanh});
    CHECK_THROWS_AS(forward(m, Vector::Zero(3), Vector::Zero(1)), DimensionError);
    CHECK_THROWS_AS(linearize(m, Vector::Zero(2), Vector::Zero(2)), DimensionError);
}

TEST_CASE("predict_rollout") {
    Rng rng(4);
    const Matrix a = random_matrix(2, 2, rng, 0.5);
    const Matrix b = random_matrix(2, 1, rng);
    const StructuredModel m = make_linear_model(a, b);
    const Vector x0 = random_vector(2, rng);

    SUBCASE("no controls gives the initial state only") {
        const Rollout r = predict_rollout(m, x0, {}, 0.1);
        REQUIRE(r.states.size() == 1);
        CHECK(r.states[0] == x0);
    }
    SUBCASE("bias-only model equals the discrete LTI recurrence") {
        const double dt = 0.05;
        std::vector<Vector> us;
        for (int k = 0; k < 30; ++k) us.push_back(random_vector(1, rng));
        const Rollout r = predict_rollout(m, x0, us, dt);
        REQUIRE(r.states.size() == 31);
        CHECK_FALSE(r.diverged);
        const Matrix ad = Matrix::Identity(2, 2) + dt * a;
        const Matrix bd = dt * b;
        Vector x = x0;
        for (std::size_t k = 0; k < us.size(); ++k) {
            x = ad * x + bd * us[k];
            CHECK((r.states[k + 1] - x).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
    SUBCASE("blow-up returns the finite prefix") {
        const StructuredModel fast = make_linear_model(Matrix::Identity(2, 2) * 1e200, Matrix::Zero(2, 1));
        std::vector<Vector> us(10, Vector::Zero(1));
        const Rollout r = predict_rollout(fast, Vector::Ones(2), us, 1.0);
        CHECK(r.diverged);
        CHECK_FALSE(r.diagnostic.empty());
        CHECK(r.states.size() < 11);
        for (const auto& s : r.states) CHECK(s.allFinite());
    }
    CHECK_THROWS_AS(predict_rollout(m, x0, {}, 0.0), UsageError);
}

TEST_CASE("dataset loss matches a naive sum") {
    Rng rng(12);
    const StructuredModel m = make_model(3, 1, 4, {{10, 10}, diffcore::Activation::tanh});
    std::vector<Transition> data;
    for (int k = 0; k < 40; ++k) {
        data.push_back({random_vector(3, rng), random_vector(1, rng), random_vector(3, rng), 0.1});
    }
    double naive = 0.0;
    for (const auto& t : data) naive += 0.5 * (oracle_forward(m, t.x, t.u) - t.xdot).squaredNorm();
    CHECK(dataset_loss(m, data) == doctest::Approx(naive).epsilon(1e-10));
    CHECK(loss_and_gradient(m, data).loss == doctest::Approx(naive).epsilon(1e-10));
}

TEST_CASE("split_dataset") {
    Rng rng(1);
    std::vector<Transition> data;
    for (int k = 0; k < 11; ++k) {
        data.push_back({Vector::Constant(1, k), Vector::Zero(1), Vector::Zero(1), 1.0});
    }
    const DatasetSplit odd = split_dataset(data, 3);
    CHECK(odd.train.size() == 6);
    CHECK(odd.val.size() == 5);

    const std::span<const Transition> ten(data.data(), 10);
    const DatasetSplit even = split_dataset(ten, 3);
    CHECK(even.train.size() == 5);
    CHECK(even.val.size() == 5);

    const DatasetSplit again = split_dataset(data, 3);
    CHECK(again.train == odd.train);
    CHECK(again.val == odd.val);

    // Multiset preserved.
    std::vector<double> seen;
    for (const auto& t : odd.train) seen.push_back(t.x(0));
    for (const auto& t : odd.val) seen.push_back(t.x(0));
    std::sort(seen.begin(), seen.end());
    for (int k = 0; k < 11; ++k) CHECK(seen[static_cast<std::size_t>(k)] == k);

    CHECK_THROWS_AS(split_dataset(std::span<const Transition>(data.data(), 1), 0), UsageError);
}

TEST_CASE("training with zero epochs returns the model unchanged") {
    Rng rng(3);
    const Matrix a = random_matrix(2, 2, rng);
    const Matrix b = random_matrix(2, 1, rng);
    const auto data = linear_transitions(a, b, 20, rng);
    const StructuredModel m = make_model(2, 1, 9, {{8}, diffcore::Activation::tanh});
    TrainOptions opt;
    opt.epochs = 0;
    const TrainResult r = train(m, data, data, opt);
    CHECK(r.model == m);
    CHECK(r.report.epochs_run == 0);
    CHECK(r.report.train_loss.empty());
    CHECK(r.report.val_loss.empty());
}

TEST_CASE("training fits a linear system") {
    Rng rng(5);
    Matrix a(2, 2);
    a << 0.0, 1.0, -2.0, -0.3;
    Matrix b(2, 1);
    b << 0.0, 1.0;
    const auto data = linear_transitions(a, b, 1000, rng);
    const DatasetSplit split = split_dataset(data, 1);
    const StructuredModel m = make_model(2, 1, 2);
    TrainOptions opt;
    opt.epochs = 200;
    opt.seed = 6;
    const TrainResult r = train(m, split.train, split.val, opt);
    const TrainingReport& rep = r.report;
    REQUIRE(rep.epochs_run == 200);
    CHECK(rep.train_loss.size() == 200);
    CHECK(rep.val_loss.size() == 200);
    CHECK(rep.train_loss.front() < rep.initial_train_loss);
    CHECK(rep.train_loss.back() < 1e-4 * rep.initial_train_loss);
    for (double l : rep.train_loss) CHECK(l >= 0.0);

    // Same seed, same result.
    const TrainResult again = train(m, split.train, split.val, opt);
    CHECK(again.model == r.model);
    CHECK(again.report.train_loss == rep.train_loss);
}

TEST_CASE("training rejects empty sets") {
    const StructuredModel m = make_model(2, 1, 0, {{4}, diffcore::Activation::tanh});
    std::vector<Transition> one = {{Vector::Zero(2), Vector::Zero(1), Vector::Zero(2), 1.0}};
    CHECK_THROWS_AS(train(m, {}, one, {}), UsageError);
    CHECK_THROWS_AS(train(m, one, {}, {}), UsageError);
}

TEST_CASE("training on a mountain-car dataset reduces the loss") {
    const auto spec = envs::mountain_car();
    const auto data = envs::collect(spec, 10, 100, 4);
    const DatasetSplit split = split_dataset(data.transitions, 1);
    const StructuredModel m = make_model(2, 1, 3, {{16, 16}, diffcore::Activation::tanh});
    TrainOptions opt;
    opt.epochs = 5;
    const TrainResult r = train(m, split.train, split.val, opt);
    CHECK(r.report.train_loss.back() < r.report.train_loss.front());
}

TEST_CASE("model serialization round-trips exactly") {
    Rng rng(30);
    const StructuredModel m = make_model(4, 2, 11, {{7, 5}, diffcore::Activation::relu});
    const StructuredModel back = parse_model(serialize_model(m));
    CHECK(back == m);

    const fs::path p = temp_file("model.txt");
    save_model(m, p);
    const StructuredModel loaded = load_model(p);
    CHECK(loaded == m);
    for (int k = 0; k < 100; ++k) {
        const Vector x = random_vector(4, rng, 3.0);
        const Vector u = random_vector(2, rng, 3.0);
        CHECK(forward(loaded, x, u) == forward(m, x, u));
    }
}

TEST_CASE("model parsing errors") {
    const std::string good = serialize_model(make_model(2, 1, 0, {{3}, diffcore::Activation::tanh}));
    CHECK_THROWS_AS(parse_model(""), DataError);
    CHECK_THROWS_AS(parse_model("something-else v1\n"), DataError);

    std::string wrong_version = good;
    wrong_version.replace(wrong_version.find(" v1 "), 4, " v9 ");
    CHECK_THROWS_AS(parse_model(wrong_version), DataError);

    const std::string truncated = good.substr(0, good.rfind("B.b"));
    CHECK_THROWS_AS(parse_model(truncated), DataError);

    std::string garbled = good;
    garbled.replace(garbled.find("A.b0") + 5, 1, "x");
    CHECK_THROWS_AS(parse_model(garbled), DataError);

    CHECK_THROWS_AS(load_model(temp_file("does_not_exist.txt")), DataError);
}
