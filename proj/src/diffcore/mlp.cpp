#include "ltvnet/diffcore/mlp.hpp"

#include <cmath>
#include <string>

namespace ltvnet::diffcore {

std::size_t MlpParams::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        count += static_cast<std::size_t>(weights[i].size() + biases[i].size());
    }
    return count;
}

bool MlpParams::operator==(const MlpParams& other) const {
    if (layer_sizes != other.layer_sizes || activation != other.activation) return false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] != other.weights[i] || biases[i] != other.biases[i]) return false;
    }
    return true;
}

MlpParams build_mlp(std::span<const Eigen::Index> layer_sizes, Activation activation,
                    std::uint64_t seed) {
    if (layer_sizes.size() < 2) {
        throw UsageError("an MLP needs at least 2 layer sizes, got " +
                         std::to_string(layer_sizes.size()));
    }
    for (auto s : layer_sizes) {
        if (s <= 0) throw UsageError("MLP layer sizes must be positive");
    }

    MlpParams p;
    p.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
    p.activation = activation;

    Rng rng(seed);
    const std::size_t n_layers = layer_sizes.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Eigen::Index fan_in = layer_sizes[l];
        const Eigen::Index fan_out = layer_sizes[l + 1];
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        if (l + 1 == n_layers) limit *= 0.1;

        Matrix w(fan_out, fan_in);
        // Row-major draw order so the stream maps onto the serialized layout.
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) {
                w(r, c) = rng.uniform(-limit, limit);
            }
        }
        p.weights.push_back(std::move(w));
        p.biases.push_back(Vector::Zero(fan_out));
    }
    return p;
}

MlpParams zeros_like(const MlpParams& shape) {
    MlpParams z;
    z.layer_sizes = shape.layer_sizes;
    z.activation = shape.activation;
    for (std::size_t i = 0; i < shape.weights.size(); ++i) {
        z.weights.push_back(Matrix::Zero(shape.weights[i].rows(), shape.weights[i].cols()));
        z.biases.push_back(Vector::Zero(shape.biases[i].size()));
    }
    return z;
}

Vector flatten(const MlpParams& params) {
    Vector flat(static_cast<Eigen::Index>(params.parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const Matrix& w = params.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat(k++) = w(r, c);
        }
        for (Eigen::Index r = 0; r < params.biases[l].size(); ++r) flat(k++) = params.biases[l](r);
    }
    return flat;
}

MlpParams unflatten(const MlpParams& shape, const Vector& flat) {
    require_dims(flat.size() == static_cast<Eigen::Index>(shape.parameter_count()),
                 "flat parameter vector length");
    MlpParams p = zeros_like(shape);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        Matrix& w = p.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat(k++);
        }
        for (Eigen::Index r = 0; r < p.biases[l].size(); ++r) p.biases[l](r) = flat(k++);
    }
    return p;
}

MlpTrace record_mlp(Tape& tape, const MlpParams& params, SlotId input) {
    require_dims(tape.value(input).rows() == params.input_size(), "MLP input size");
    MlpTrace trace;
    trace.input = input;
    SlotId h = input;
    const std::size_t n = params.num_layers();
    for (std::size_t l = 0; l < n; ++l) {
        const SlotId w = tape.leaf(params.weights[l]);
        const SlotId b = tape.leaf(params.biases[l]);
        trace.weights.push_back(w);
        trace.biases.push_back(b);
        h = tape.add_bias(tape.matmul(w, h), b);
        if (l + 1 < n && params.activation != Activation::identity) {
            h = tape.activate(h, params.activation);
        }
    }
    trace.output = h;
    return trace;
}

MlpParams collect_grads(const Tape& tape, const MlpTrace& trace, const MlpParams& shape) {
    MlpParams g;
    g.layer_sizes = shape.layer_sizes;
    g.activation = shape.activation;
    for (std::size_t l = 0; l < trace.weights.size(); ++l) {
        g.weights.push_back(tape.grad(trace.weights[l]));
        g.biases.push_back(tape.grad(trace.biases[l]).col(0));
    }
    return g;
}

MlpForward mlp_forward(const MlpParams& params, const Vector& input) {
    require_dims(input.size() == params.input_size(), "MLP input length");
    MlpForward pass;
    pass.shape = zeros_like(params);
    const SlotId in = pass.tape.leaf(input);
    pass.trace = record_mlp(pass.tape, params, in);
    pass.output = pass.tape.value(pass.trace.output).col(0);
    return pass;
}

MlpBackward backward(MlpForward& pass, const Vector& cotangent) {
    require_dims(cotangent.size() == pass.output.size(), "cotangent length");
    pass.tape.backward(pass.trace.output, cotangent);
    MlpBackward out;
    out.param_grads = collect_grads(pass.tape, pass.trace, pass.shape);
    out.input_grad = pass.tape.grad(pass.trace.input).col(0);
    return out;
}

Matrix mlp_eval(const MlpParams& params, const Matrix& inputs) {
    require_dims(inputs.rows() == params.input_size(), "MLP input size");
    Matrix h = inputs;
    const std::size_t n = params.num_layers();
    for (std::size_t l = 0; l < n; ++l) {
        Matrix z = params.weights[l] * h;
        z.colwise() += params.biases[l];
        if (l + 1 < n) {
            switch (params.activation) {
                case Activation::tanh: z = z.array().tanh().matrix(); break;
                case Activation::relu: z = z.cwiseMax(0.0); break;
                case Activation::identity: break;
            }
        }
        h = std::move(z);
    }
    return h;
}

}  // namespace ltvnet::diffcore
