#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ltvnet/common.hpp"

namespace ltvnet::diffcore {

enum class Activation { tanh, relu, identity };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

using SlotId = std::size_t;

// Reverse-mode tape over dense matrices. Every slot holds a matrix value;
// batched quantities store one sample per column. Operations are appended in
// evaluation order, so the record is topologically sorted by construction.
//
// A tape is single-use: backward() may be called once, after which the tape
// is consumed and further backward calls throw.
class Tape {
public:
    enum class Op {
        leaf,
        matmul,          // a * b
        add_bias,        // a + b * 1^T, b is a column vector
        activate,        // act(a), elementwise
        add,             // a + b
        sub,             // a - b
        vstack,          // [a; b]
        batched_matvec,  // column j: reshape_rowmajor(a.col(j), rows) * b.col(j)
        sum,             // 1x1, sum of all entries of a
        half_squared_sum // 1x1, 0.5 * sum of squares of a
    };

    SlotId leaf(Matrix value);
    SlotId matmul(SlotId lhs, SlotId rhs);
    SlotId add_bias(SlotId x, SlotId bias);
    SlotId activate(SlotId x, Activation act);
    SlotId add(SlotId lhs, SlotId rhs);
    SlotId sub(SlotId lhs, SlotId rhs);
    SlotId vstack(SlotId top, SlotId bottom);
    // `mats` is (rows*cols) x B holding row-major rows x cols matrices per
    // column, `vecs` is cols x B. Result is rows x B.
    SlotId batched_matvec(SlotId mats, SlotId vecs, Eigen::Index rows);
    SlotId sum(SlotId x);
    SlotId half_squared_sum(SlotId x);

    const Matrix& value(SlotId id) const;
    Op op(SlotId id) const;
    std::size_t size() const { return nodes_.size(); }

    // Propagates `cotangent` (shaped like value(output)) back to every slot
    // recorded at or before `output`.
    void backward(SlotId output, const Matrix& cotangent);

    // Gradient of <value(output), cotangent> with respect to the slot.
    // Only valid after backward().
    const Matrix& grad(SlotId id) const;

    bool consumed() const { return consumed_; }

private:
    struct Node {
        Op op = Op::leaf;
        SlotId lhs = 0;
        SlotId rhs = 0;
        Activation act = Activation::identity;
        Eigen::Index rows = 0;
        Matrix value;
        Matrix grad;
    };

    SlotId push(Node node);
    const Node& node(SlotId id) const;

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace ltvnet::diffcore
