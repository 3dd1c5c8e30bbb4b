#pragma once

#include <cstdint>

#include "ltvnet/diffcore/mlp.hpp"

namespace ltvnet::diffcore {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    MlpParams first_moment;
    MlpParams second_moment;
    std::uint64_t step = 0;
};

AdamState make_adam(const MlpParams& shape, AdamConfig config = {});

// Bias-corrected Adam update of `params` in place. Throws NumericalError on
// non-finite gradients, leaving params and state untouched.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

}  // namespace ltvnet::diffcore
