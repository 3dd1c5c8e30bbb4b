#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ltvnet/common.hpp"
#include "ltvnet/diffcore/tape.hpp"

namespace ltvnet::diffcore {

// Fully connected network. Hidden layers use `activation`; the final layer
// is always affine (identity activation).
//
// weights[i] is layer_sizes[i+1] x layer_sizes[i], biases[i] has length
// layer_sizes[i+1]. Gradients and Adam moments reuse this type as a
// same-shaped container.
struct MlpParams {
    std::vector<Eigen::Index> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    Activation activation = Activation::tanh;

    std::size_t num_layers() const { return weights.size(); }
    Eigen::Index input_size() const { return layer_sizes.front(); }
    Eigen::Index output_size() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;

    bool operator==(const MlpParams& other) const;
};

// Glorot-uniform weights, zero biases, final layer weights scaled by 0.1.
MlpParams build_mlp(std::span<const Eigen::Index> layer_sizes, Activation activation,
                    std::uint64_t seed);

MlpParams zeros_like(const MlpParams& shape);

// Parameters in layer order: W0 (row-major), b0, W1, b1, ...
Vector flatten(const MlpParams& params);
MlpParams unflatten(const MlpParams& shape, const Vector& flat);

// Tape slots produced by recording a network onto a tape.
struct MlpTrace {
    SlotId input = 0;
    SlotId output = 0;
    std::vector<SlotId> weights;
    std::vector<SlotId> biases;
};

// Appends the network applied to the (batched) value in `input` to `tape`.
MlpTrace record_mlp(Tape& tape, const MlpParams& params, SlotId input);

// Reads parameter gradients out of a consumed tape.
MlpParams collect_grads(const Tape& tape, const MlpTrace& trace, const MlpParams& shape);

struct MlpForward {
    Vector output;
    Tape tape;
    MlpTrace trace;
    MlpParams shape;
};

MlpForward mlp_forward(const MlpParams& params, const Vector& input);

struct MlpBackward {
    MlpParams param_grads;
    Vector input_grad;
};

// Gradients of <output, cotangent>. Consumes the forward pass's tape.
MlpBackward backward(MlpForward& pass, const Vector& cotangent);

// Tape-free evaluation, one sample per column of `inputs`.
Matrix mlp_eval(const MlpParams& params, const Matrix& inputs);

}  // namespace ltvnet::diffcore
