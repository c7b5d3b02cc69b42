#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "symfore/error.hpp"

namespace symfore::ad {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major array of 64-bit reals. Tensors are plain values until an
// operation records them on a Tape; `tracked` marks tensors whose gradient
// must be carried during a backward pass (leaves with requires_grad, plus
// every intermediate derived from one).
class Tensor {
public:
    std::vector<std::size_t> shape;
    std::vector<double> values;
    bool requires_grad = false;
    bool tracked = false;
    std::vector<double> grad;  // empty until backward touches this tensor

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    // grad as a same-shape array, allocating zeros on first use
    std::vector<double>& grad_storage();

    void zero_grad() { grad.clear(); }

    std::string shape_str() const;

    static TensorPtr zeros(std::vector<std::size_t> shape);
    static TensorPtr full(std::vector<std::size_t> shape, double value);
    static TensorPtr from(std::vector<std::size_t> shape, std::vector<double> values);
    static TensorPtr scalar(double value);
    // leaf tensor participating in optimization
    static TensorPtr param(std::vector<std::size_t> shape, std::vector<double> values);
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

struct TapeNode {
    const char* op;
    std::vector<TensorPtr> inputs;
    TensorPtr output;
    std::function<void()> backward;
};

// Eager recording tape. Nodes are appended in execution order, which is a
// topological order by construction; backward replays them once in reverse.
class Tape {
public:
    TensorPtr record(const char* op, std::vector<TensorPtr> inputs, TensorPtr output,
                     std::function<void()> backward);

    // Seeds grad(loss) = 1 and propagates through every recorded node.
    // Gradients accumulate additively across multiple uses of a tensor.
    void backward(const TensorPtr& loss);

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    std::vector<TapeNode> nodes_;
};

namespace detail {

// Forward-op epilogue: on finite inputs every op must produce finite values.
void check_finite(const Tensor& t, const char* op);

inline void accumulate(const TensorPtr& t, std::size_t idx, double v) {
    t->grad_storage()[idx] += v;
}

}  // namespace detail

}  // namespace symfore::ad
