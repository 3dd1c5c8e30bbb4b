#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltvnet/common.hpp"
#include "ltvnet/diffcore/mlp.hpp"

namespace ltvnet::structnet {

// Learned dynamics of the form  xdot = A(x,u) x + B(x,u) u.
//
// Both subnets read the concatenation [x; u]. The A-subnet emits N*N values
// and the B-subnet N*M values, each reshaped row-major into the matrices
// that the controller consumes directly as df/dx and df/du.
struct StructuredModel {
    Eigen::Index state_dim = 0;
    Eigen::Index control_dim = 0;
    diffcore::MlpParams a_net;
    diffcore::MlpParams b_net;

    bool operator==(const StructuredModel& other) const = default;
};

struct ModelOptions {
    std::vector<Eigen::Index> hidden = {64, 64};
    diffcore::Activation activation = diffcore::Activation::tanh;
};

StructuredModel make_model(Eigen::Index state_dim, Eigen::Index control_dim, std::uint64_t seed,
                           const ModelOptions& options = {});

// A model whose hidden weights are all zero and whose final-layer biases
// hold `a` and `b`: constant subnet outputs, hence exactly linear dynamics.
StructuredModel make_linear_model(const Matrix& a, const Matrix& b,
                                  const ModelOptions& options = {});

// Throws DataError unless the subnet shapes agree with (N, M).
void validate(const StructuredModel& model);

struct Linearization {
    Matrix a;  // N x N
    Matrix b;  // N x M
    Vector x;
    Vector u;
};

// Reads A and B off the subnet outputs; no differentiation takes place.
Linearization linearize(const StructuredModel& model, const Vector& x, const Vector& u);

// A(x,u) x + B(x,u) u, computed from the same matrices linearize() returns.
Vector forward(const StructuredModel& model, const Vector& x, const Vector& u);

// Batched forward, one sample per column.
Matrix forward_batch(const StructuredModel& model, const Matrix& xs, const Matrix& us);

struct Rollout {
    std::vector<Vector> states;
    bool diverged = false;
    std::string diagnostic;
};

// Forward-Euler integration x_{k+1} = x_k + dt * forward(x_k, u_k). On a
// non-finite state the finite prefix is returned with `diverged` set.
Rollout predict_rollout(const StructuredModel& model, const Vector& x0,
                        std::span<const Vector> controls, double dt);

}  // namespace ltvnet::structnet
