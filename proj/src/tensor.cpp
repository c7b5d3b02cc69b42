#include "symfore/tensor.hpp"

#include <cmath>
#include <sstream>

namespace symfore::ad {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
    if (shape_product(shape) != values.size()) {
        throw DimensionError("tensor shape " + shape_str() + " does not match value count " +
                             std::to_string(values.size()));
    }
    for (std::size_t e : shape) {
        if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_str());
    }
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw DimensionError("rows() needs a rank-2 tensor, got " + shape_str());
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw DimensionError("cols() needs a rank-2 tensor, got " + shape_str());
    return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
double Tensor::at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

std::vector<double>& Tensor::grad_storage() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
    return grad;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

TensorPtr Tensor::zeros(std::vector<std::size_t> shape) {
    return full(std::move(shape), 0.0);
}

TensorPtr Tensor::full(std::vector<std::size_t> shape, double value) {
    std::vector<double> v(shape_product(shape), value);
    return std::make_shared<Tensor>(std::move(shape), std::move(v));
}

TensorPtr Tensor::from(std::vector<std::size_t> shape, std::vector<double> values) {
    return std::make_shared<Tensor>(std::move(shape), std::move(values));
}

TensorPtr Tensor::scalar(double value) {
    return from({1}, {value});
}

TensorPtr Tensor::param(std::vector<std::size_t> shape, std::vector<double> values) {
    auto t = from(std::move(shape), std::move(values));
    t->requires_grad = true;
    t->tracked = true;
    return t;
}

TensorPtr Tape::record(const char* op, std::vector<TensorPtr> inputs, TensorPtr output,
                       std::function<void()> backward) {
    bool any_tracked = false;
    for (const auto& in : inputs) {
        if (in->tracked) {
            any_tracked = true;
            break;
        }
    }
    if (any_tracked) {
        output->tracked = true;
        nodes_.push_back(TapeNode{op, std::move(inputs), output, std::move(backward)});
    }
    return output;
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1) {
        throw ContractError("backward needs a scalar loss, got shape " + loss->shape_str());
    }
    loss->grad_storage()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        if (it->output->grad.empty()) continue;  // not reachable from the loss
        it->backward();
    }
}

namespace detail {

void check_finite(const Tensor& t, const char* op) {
#ifndef NDEBUG
    for (double v : t.values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite value produced by op '") + op + "'");
        }
    }
#else
    (void)t;
    (void)op;
#endif
}

}  // namespace detail

}  // namespace symfore::ad
