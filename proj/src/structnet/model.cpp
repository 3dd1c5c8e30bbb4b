#include "ltvnet/structnet/model.hpp"

namespace ltvnet::structnet {

using diffcore::MlpParams;

namespace {

std::vector<Eigen::Index> subnet_sizes(Eigen::Index in, const std::vector<Eigen::Index>& hidden,
                                       Eigen::Index out) {
    std::vector<Eigen::Index> sizes;
    sizes.push_back(in);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(out);
    return sizes;
}

Matrix reshape_row_major(const Eigen::Ref<const Vector>& flat, Eigen::Index rows,
                         Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = flat(i * cols + k);
    }
    return m;
}

}  // namespace

StructuredModel make_model(Eigen::Index state_dim, Eigen::Index control_dim, std::uint64_t seed,
                           const ModelOptions& options) {
    if (state_dim <= 0 || control_dim <= 0) {
        throw UsageError("state and control dimensions must be positive");
    }
    StructuredModel m;
    m.state_dim = state_dim;
    m.control_dim = control_dim;
    const Eigen::Index in = state_dim + control_dim;
    const auto a_sizes = subnet_sizes(in, options.hidden, state_dim * state_dim);
    const auto b_sizes = subnet_sizes(in, options.hidden, state_dim * control_dim);
    m.a_net = diffcore::build_mlp(a_sizes, options.activation, derive_seed(seed, 0));
    m.b_net = diffcore::build_mlp(b_sizes, options.activation, derive_seed(seed, 1));
    return m;
}

StructuredModel make_linear_model(const Matrix& a, const Matrix& b, const ModelOptions& options) {
    require_dims(a.rows() == a.cols() && b.rows() == a.rows(), "linear model matrices");
    StructuredModel m = make_model(a.rows(), b.cols(), 0, options);
    for (auto* net : {&m.a_net, &m.b_net}) {
        for (auto& w : net->weights) w.setZero();
        for (auto& bias : net->biases) bias.setZero();
    }
    const Eigen::Index n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) m.a_net.biases.back()(i * n + k) = a(i, k);
        for (Eigen::Index k = 0; k < b.cols(); ++k) {
            m.b_net.biases.back()(i * b.cols() + k) = b(i, k);
        }
    }
    return m;
}

void validate(const StructuredModel& model) {
    const Eigen::Index n = model.state_dim;
    const Eigen::Index mdim = model.control_dim;
    if (n <= 0 || mdim <= 0 || model.a_net.layer_sizes.size() < 2 ||
        model.b_net.layer_sizes.size() < 2) {
        throw DataError("structured model has empty dimensions");
    }
    if (model.a_net.input_size() != n + mdim || model.b_net.input_size() != n + mdim) {
        throw DataError("subnet input size must equal N+M");
    }
    if (model.a_net.output_size() != n * n) {
        throw DataError("A-subnet output size must equal N*N");
    }
    if (model.b_net.output_size() != n * mdim) {
        throw DataError("B-subnet output size must equal N*M");
    }
}

Linearization linearize(const StructuredModel& model, const Vector& x, const Vector& u) {
    require_dims(x.size() == model.state_dim, "state length");
    require_dims(u.size() == model.control_dim, "control length");
    Vector input(model.state_dim + model.control_dim);
    input << x, u;
    const Matrix a_out = diffcore::mlp_eval(model.a_net, input);
    const Matrix b_out = diffcore::mlp_eval(model.b_net, input);
    if (!a_out.allFinite() || !b_out.allFinite()) {
        throw NumericalError("non-finite subnet output");
    }
    Linearization lin;
    lin.a = reshape_row_major(a_out.col(0), model.state_dim, model.state_dim);
    lin.b = reshape_row_major(b_out.col(0), model.state_dim, model.control_dim);
    lin.x = x;
    lin.u = u;
    return lin;
}

Vector forward(const StructuredModel& model, const Vector& x, const Vector& u) {
    const Linearization lin = linearize(model, x, u);
    Vector out = lin.a * x + lin.b * u;
    if (!out.allFinite()) {
        throw NumericalError("non-finite model output");
    }
    return out;
}

Matrix forward_batch(const StructuredModel& model, const Matrix& xs, const Matrix& us) {
    require_dims(xs.rows() == model.state_dim && us.rows() == model.control_dim &&
                     xs.cols() == us.cols(),
                 "batched state/control shapes");
    Matrix input(xs.rows() + us.rows(), xs.cols());
    input.topRows(xs.rows()) = xs;
    input.bottomRows(us.rows()) = us;
    const Matrix a_out = diffcore::mlp_eval(model.a_net, input);
    const Matrix b_out = diffcore::mlp_eval(model.b_net, input);
    const Eigen::Index n = model.state_dim;
    const Eigen::Index m = model.control_dim;
    Matrix out(n, xs.cols());
    for (Eigen::Index j = 0; j < xs.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) acc += a_out(i * n + k, j) * xs(k, j);
            for (Eigen::Index k = 0; k < m; ++k) acc += b_out(i * m + k, j) * us(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

Rollout predict_rollout(const StructuredModel& model, const Vector& x0,
                        std::span<const Vector> controls, double dt) {
    if (!(dt > 0.0)) {
        throw UsageError("rollout dt must be positive");
    }
    Rollout r;
    r.states.reserve(controls.size() + 1);
    r.states.push_back(x0);
    for (std::size_t k = 0; k < controls.size(); ++k) {
        Vector next;
        try {
            next = r.states.back() + dt * forward(model, r.states.back(), controls[k]);
        } catch (const NumericalError& e) {
            r.diverged = true;
            r.diagnostic = "step " + std::to_string(k) + ": " + e.what();
            return r;
        }
        if (!next.allFinite()) {
            r.diverged = true;
            r.diagnostic = "step " + std::to_string(k) + ": non-finite state";
            return r;
        }
        r.states.push_back(std::move(next));
    }
    return r;
}

}  // namespace ltvnet::structnet
