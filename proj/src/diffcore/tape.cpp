#include "ltvnet/diffcore/tape.hpp"

#include <string>

namespace ltvnet::diffcore {

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::identity: return "identity";
    }
    return "identity";
}

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    if (name == "identity") return Activation::identity;
    throw UsageError("unknown activation '" + std::string(name) + "'");
}

namespace {

Matrix apply_activation(const Matrix& x, Activation act) {
    switch (act) {
        case Activation::tanh: return x.array().tanh().matrix();
        case Activation::relu: return x.cwiseMax(0.0);
        case Activation::identity: return x;
    }
    return x;
}

}  // namespace

SlotId Tape::push(Node node) {
    if (consumed_) {
        throw UsageError("tape already consumed by backward()");
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

const Tape::Node& Tape::node(SlotId id) const {
    if (id >= nodes_.size()) {
        throw UsageError("tape slot " + std::to_string(id) + " out of range");
    }
    return nodes_[id];
}

SlotId Tape::leaf(Matrix value) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

SlotId Tape::matmul(SlotId lhs, SlotId rhs) {
    const Matrix& a = node(lhs).value;
    const Matrix& b = node(rhs).value;
    require_dims(a.cols() == b.rows(), "matmul inner dimensions");
    Node n;
    n.op = Op::matmul;
    n.lhs = lhs;
    n.rhs = rhs;
    n.value.noalias() = a * b;
    return push(std::move(n));
}

SlotId Tape::add_bias(SlotId x, SlotId bias) {
    const Matrix& a = node(x).value;
    const Matrix& b = node(bias).value;
    require_dims(b.cols() == 1 && b.rows() == a.rows(), "bias length");
    Node n;
    n.op = Op::add_bias;
    n.lhs = x;
    n.rhs = bias;
    n.value = a.colwise() + b.col(0);
    return push(std::move(n));
}

SlotId Tape::activate(SlotId x, Activation act) {
    Node n;
    n.op = Op::activate;
    n.lhs = x;
    n.act = act;
    n.value = apply_activation(node(x).value, act);
    return push(std::move(n));
}

SlotId Tape::add(SlotId lhs, SlotId rhs) {
    const Matrix& a = node(lhs).value;
    const Matrix& b = node(rhs).value;
    require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "add operand shapes");
    Node n;
    n.op = Op::add;
    n.lhs = lhs;
    n.rhs = rhs;
    n.value = a + b;
    return push(std::move(n));
}

SlotId Tape::sub(SlotId lhs, SlotId rhs) {
    const Matrix& a = node(lhs).value;
    const Matrix& b = node(rhs).value;
    require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "sub operand shapes");
    Node n;
    n.op = Op::sub;
    n.lhs = lhs;
    n.rhs = rhs;
    n.value = a - b;
    return push(std::move(n));
}

SlotId Tape::vstack(SlotId top, SlotId bottom) {
    const Matrix& a = node(top).value;
    const Matrix& b = node(bottom).value;
    require_dims(a.cols() == b.cols(), "vstack column counts");
    Node n;
    n.op = Op::vstack;
    n.lhs = top;
    n.rhs = bottom;
    n.value.resize(a.rows() + b.rows(), a.cols());
    n.value.topRows(a.rows()) = a;
    n.value.bottomRows(b.rows()) = b;
    return push(std::move(n));
}

SlotId Tape::batched_matvec(SlotId mats, SlotId vecs, Eigen::Index rows) {
    const Matrix& m = node(mats).value;
    const Matrix& v = node(vecs).value;
    const Eigen::Index cols = v.rows();
    require_dims(rows > 0 && m.rows() == rows * cols && m.cols() == v.cols(),
                 "batched_matvec operand shapes");
    Node n;
    n.op = Op::batched_matvec;
    n.lhs = mats;
    n.rhs = vecs;
    n.rows = rows;
    n.value = Matrix::Zero(rows, v.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < cols; ++k) {
                acc += m(i * cols + k, j) * v(k, j);
            }
            n.value(i, j) = acc;
        }
    }
    return push(std::move(n));
}

SlotId Tape::sum(SlotId x) {
    Node n;
    n.op = Op::sum;
    n.lhs = x;
    n.value = Matrix::Constant(1, 1, node(x).value.sum());
    return push(std::move(n));
}

SlotId Tape::half_squared_sum(SlotId x) {
    Node n;
    n.op = Op::half_squared_sum;
    n.lhs = x;
    n.value = Matrix::Constant(1, 1, 0.5 * node(x).value.squaredNorm());
    return push(std::move(n));
}

const Matrix& Tape::value(SlotId id) const { return node(id).value; }

Tape::Op Tape::op(SlotId id) const { return node(id).op; }

const Matrix& Tape::grad(SlotId id) const {
    if (!consumed_) {
        throw UsageError("gradients requested before backward()");
    }
    return node(id).grad;
}

void Tape::backward(SlotId output, const Matrix& cotangent) {
    if (consumed_) {
        throw UsageError("tape already consumed by backward()");
    }
    const Node& out = node(output);
    require_dims(cotangent.rows() == out.value.rows() && cotangent.cols() == out.value.cols(),
                 "cotangent shape");
    consumed_ = true;

    for (auto& n : nodes_) {
        n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    }
    nodes_[output].grad = cotangent;

    for (SlotId id = output + 1; id-- > 0;) {
        Node& n = nodes_[id];
        const Matrix& g = n.grad;
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::matmul: {
                Node& a = nodes_[n.lhs];
                Node& b = nodes_[n.rhs];
                a.grad.noalias() += g * b.value.transpose();
                b.grad.noalias() += a.value.transpose() * g;
                break;
            }
            case Op::add_bias:
                nodes_[n.lhs].grad += g;
                nodes_[n.rhs].grad.col(0) += g.rowwise().sum();
                break;
            case Op::activate: {
                Node& a = nodes_[n.lhs];
                switch (n.act) {
                    case Activation::tanh:
                        a.grad.array() += g.array() * (1.0 - n.value.array().square());
                        break;
                    case Activation::relu:
                        a.grad.array() += (a.value.array() > 0.0).select(g.array(), 0.0);
                        break;
                    case Activation::identity:
                        a.grad += g;
                        break;
                }
                break;
            }
            case Op::add:
                nodes_[n.lhs].grad += g;
                nodes_[n.rhs].grad += g;
                break;
            case Op::sub:
                nodes_[n.lhs].grad += g;
                nodes_[n.rhs].grad -= g;
                break;
            case Op::vstack: {
                Node& a = nodes_[n.lhs];
                Node& b = nodes_[n.rhs];
                a.grad += g.topRows(a.value.rows());
                b.grad += g.bottomRows(b.value.rows());
                break;
            }
            case Op::batched_matvec: {
                Node& m = nodes_[n.lhs];
                Node& v = nodes_[n.rhs];
                const Eigen::Index cols = v.value.rows();
                for (Eigen::Index j = 0; j < g.cols(); ++j) {
                    for (Eigen::Index i = 0; i < n.rows; ++i) {
                        const double gi = g(i, j);
                        for (Eigen::Index k = 0; k < cols; ++k) {
                            m.grad(i * cols + k, j) += gi * v.value(k, j);
                            v.grad(k, j) += gi * m.value(i * cols + k, j);
                        }
                    }
                }
                break;
            }
            case Op::sum:
                nodes_[n.lhs].grad.array() += g(0, 0);
                break;
            case Op::half_squared_sum: {
                Node& a = nodes_[n.lhs];
                a.grad += g(0, 0) * a.value;
                break;
            }
        }
    }
}

}  // namespace ltvnet::diffcore
