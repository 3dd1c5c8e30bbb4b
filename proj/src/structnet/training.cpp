#include "ltvnet/structnet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace ltvnet::structnet {

namespace {

void check_transitions(const StructuredModel& model, std::span<const Transition> data) {
    for (const auto& t : data) {
        require_dims(t.x.size() == model.state_dim && t.u.size() == model.control_dim &&
                         t.xdot.size() == model.state_dim,
                     "transition dimensions do not match model");
    }
}

struct Batch {
    Matrix xs;
    Matrix us;
    Matrix xdots;
};

template <typename IndexRange>
Batch gather(std::span<const Transition> data, const IndexRange& idx, Eigen::Index n,
             Eigen::Index m) {
    const auto count = static_cast<Eigen::Index>(idx.size());
    Batch b{Matrix(n, count), Matrix(m, count), Matrix(n, count)};
    Eigen::Index j = 0;
    for (std::size_t i : idx) {
        b.xs.col(j) = data[i].x;
        b.us.col(j) = data[i].u;
        b.xdots.col(j) = data[i].xdot;
        ++j;
    }
    return b;
}

LossGradient batch_loss_and_gradient(const StructuredModel& model, const Batch& batch,
                                     double scale) {
    diffcore::Tape tape;
    const auto x = tape.leaf(batch.xs);
    const auto u = tape.leaf(batch.us);
    const auto input = tape.vstack(x, u);
    const auto a_trace = diffcore::record_mlp(tape, model.a_net, input);
    const auto b_trace = diffcore::record_mlp(tape, model.b_net, input);
    const auto ax = tape.batched_matvec(a_trace.output, x, model.state_dim);
    const auto bu = tape.batched_matvec(b_trace.output, u, model.state_dim);
    const auto f = tape.add(ax, bu);
    const auto residual = tape.sub(f, tape.leaf(batch.xdots));
    const auto loss = tape.half_squared_sum(residual);

    LossGradient out;
    out.loss = tape.value(loss)(0, 0);
    tape.backward(loss, Matrix::Constant(1, 1, scale));
    out.a_grad = diffcore::collect_grads(tape, a_trace, model.a_net);
    out.b_grad = diffcore::collect_grads(tape, b_trace, model.b_net);
    return out;
}

double mean_loss(const StructuredModel& model, std::span<const Transition> data) {
    return data.empty() ? 0.0 : dataset_loss(model, data) / static_cast<double>(data.size());
}

}  // namespace

double dataset_loss(const StructuredModel& model, std::span<const Transition> data) {
    check_transitions(model, data);
    constexpr std::size_t chunk = 1024;
    double total = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        const std::size_t stop = std::min(data.size(), start + chunk);
        idx.resize(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        const Batch b = gather(data, idx, model.state_dim, model.control_dim);
        const Matrix residual = forward_batch(model, b.xs, b.us) - b.xdots;
        total += 0.5 * residual.squaredNorm();
    }
    return total;
}

LossGradient loss_and_gradient(const StructuredModel& model, std::span<const Transition> data,
                               double scale) {
    check_transitions(model, data);
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    return batch_loss_and_gradient(model, gather(data, idx, model.state_dim, model.control_dim),
                                   scale);
}

TrainResult train(StructuredModel model, std::span<const Transition> train_set,
                  std::span<const Transition> val_set, const TrainOptions& options) {
    validate(model);
    if (train_set.empty() || val_set.empty()) {
        throw UsageError("training and validation sets must be non-empty");
    }
    if (options.batch_size == 0) {
        throw UsageError("batch size must be positive");
    }
    check_transitions(model, train_set);
    check_transitions(model, val_set);

    const auto started = std::chrono::steady_clock::now();
    TrainResult result;
    TrainingReport& report = result.report;
    report.seed = options.seed;
    report.initial_train_loss = mean_loss(model, train_set);
    report.initial_val_loss = mean_loss(model, val_set);

    auto a_state = diffcore::make_adam(model.a_net, options.adam);
    auto b_state = diffcore::make_adam(model.b_net, options.adam);
    Rng rng(options.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size, ++batch_index) {
            const std::size_t stop = std::min(order.size(), start + options.batch_size);
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            const Batch batch = gather(train_set, idx, model.state_dim, model.control_dim);
            const LossGradient lg = batch_loss_and_gradient(
                model, batch, 1.0 / static_cast<double>(idx.size()));
            if (!std::isfinite(lg.loss)) {
                throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(batch_index) + " (samples " +
                                     std::to_string(start) + ".." + std::to_string(stop - 1) +
                                     " of the shuffled order)");
            }
            diffcore::adam_step(model.a_net, lg.a_grad, a_state);
            diffcore::adam_step(model.b_net, lg.b_grad, b_state);
        }
        report.train_loss.push_back(mean_loss(model, train_set));
        report.val_loss.push_back(mean_loss(model, val_set));
        ++report.epochs_run;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.model = std::move(model);
    return result;
}

DatasetSplit split_dataset(std::span<const Transition> transitions, std::uint64_t seed) {
    if (transitions.size() < 2) {
        throw UsageError("need at least 2 transitions to split, got " +
                         std::to_string(transitions.size()));
    }
    std::vector<std::size_t> order(transitions.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng.engine());

    const std::size_t n_train = (transitions.size() + 1) / 2;
    DatasetSplit split;
    split.train.reserve(n_train);
    split.val.reserve(transitions.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? split.train : split.val).push_back(transitions[order[i]]);
    }
    return split;
}

}  // namespace ltvnet::structnet
