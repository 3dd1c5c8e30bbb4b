#include "ltvnet/diffcore/adam.hpp"

#include <cmath>

namespace ltvnet::diffcore {

AdamState make_adam(const MlpParams& shape, AdamConfig config) {
    AdamState s;
    s.config = config;
    s.first_moment = zeros_like(shape);
    s.second_moment = zeros_like(shape);
    return s;
}

namespace {

template <typename Block>
void update_block(Block& param, const Block& grad, Block& m, Block& v, const AdamConfig& c,
                  double correction1, double correction2) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    param.array() -= c.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + c.epsilon);
}

}  // namespace

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
    require_dims(grads.layer_sizes == params.layer_sizes &&
                     state.first_moment.layer_sizes == params.layer_sizes,
                 "Adam parameter/gradient shapes");
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
            throw NumericalError("non-finite gradient in layer " + std::to_string(l));
        }
    }

    const AdamConfig& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);

    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        update_block(params.weights[l], grads.weights[l], state.first_moment.weights[l],
                     state.second_moment.weights[l], c, correction1, correction2);
        update_block(params.biases[l], grads.biases[l], state.first_moment.biases[l],
                     state.second_moment.biases[l], c, correction1, correction2);
    }
}

}  // namespace ltvnet::diffcore
