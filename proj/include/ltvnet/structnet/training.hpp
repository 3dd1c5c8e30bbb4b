#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ltvnet/diffcore/adam.hpp"
#include "ltvnet/structnet/model.hpp"

namespace ltvnet::structnet {

// One training tuple: source state, applied control, and the finite
// difference xdot = (x_next - x) / dt observed after applying it.
struct Transition {
    Vector x;
    Vector u;
    Vector xdot;
    double dt = 0.0;

    bool operator==(const Transition& other) const {
        return x == other.x && u == other.u && xdot == other.xdot && dt == other.dt;
    }
};

// Per-epoch losses are the dataset error  sum 0.5 * |f(x,u) - xdot|^2
// divided by the number of samples, evaluated on the full set after each
// epoch. The initial_* fields hold the same quantity before training.
struct TrainingReport {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    double initial_train_loss = 0.0;
    double initial_val_loss = 0.0;
    std::size_t epochs_run = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

struct TrainOptions {
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    diffcore::AdamConfig adam = {};
};

struct TrainResult {
    StructuredModel model;
    TrainingReport report;
};

// Sum over the set of 0.5 * |forward(x,u) - xdot|^2.
double dataset_loss(const StructuredModel& model, std::span<const Transition> data);

struct LossGradient {
    double loss = 0.0;
    diffcore::MlpParams a_grad;
    diffcore::MlpParams b_grad;
};

// Sum-of-squares loss over `data` and its gradient with respect to both
// subnets, scaled by `scale`, through a single recorded tape.
LossGradient loss_and_gradient(const StructuredModel& model, std::span<const Transition> data,
                               double scale = 1.0);

// Minibatch Adam on the dataset error. Deterministic given options.seed.
// Throws NumericalError naming the epoch and batch on a non-finite loss.
TrainResult train(StructuredModel model, std::span<const Transition> train_set,
                  std::span<const Transition> val_set, const TrainOptions& options);

struct DatasetSplit {
    std::vector<Transition> train;
    std::vector<Transition> val;
};

// Uniform random permutation then a half/half split; odd counts give the
// extra element to training.
DatasetSplit split_dataset(std::span<const Transition> transitions, std::uint64_t seed);

}  // namespace ltvnet::structnet
