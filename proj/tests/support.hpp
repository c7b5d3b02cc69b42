#pragma once

// Shared test oracles. Everything here is independent of the library's
// implementation paths: finite differences for gradients, an explicit
// transport plan for 1-D EMD, and the contingency-table ARI.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "symfore/ops.hpp"
#include "symfore/rng.hpp"
#include "symfore/tensor.hpp"

namespace testsup {

namespace ad = symfore::ad;

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

// Central finite-difference gradient check. `build` must construct the whole
// computation from the current leaf values and return the scalar loss tensor.
// Returns the worst relative error over every element of every leaf.
struct GradCheck {
    std::vector<ad::TensorPtr> leaves;
    std::function<ad::TensorPtr(ad::Tape&)> build;
    double h = 1e-5;

    double max_rel_error() const {
        for (const auto& leaf : leaves) leaf->zero_grad();
        ad::Tape tape;
        auto loss = build(tape);
        tape.backward(loss);

        std::vector<std::vector<double>> analytic;
        analytic.reserve(leaves.size());
        for (const auto& leaf : leaves) {
            analytic.push_back(leaf->grad.empty() ? std::vector<double>(leaf->size(), 0.0)
                                                  : leaf->grad);
        }

        auto eval = [&]() {
            ad::Tape fresh;
            return build(fresh)->values[0];
        };

        double worst = 0.0;
        for (std::size_t li = 0; li < leaves.size(); ++li) {
            auto& vals = leaves[li]->values;
            for (std::size_t i = 0; i < vals.size(); ++i) {
                const double keep = vals[i];
                vals[i] = keep + h;
                const double fp = eval();
                vals[i] = keep - h;
                const double fm = eval();
                vals[i] = keep;
                const double fd = (fp - fm) / (2.0 * h);
                worst = std::max(worst, rel_err(fd, analytic[li][i]));
            }
        }
        return worst;
    }
};

inline ad::TensorPtr random_param(std::vector<std::size_t> shape, symfore::Rng& rng,
                                  double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(ad::shape_product(shape));
    for (double& x : v) x = rng.uniform(lo, hi);
    return ad::Tensor::param(std::move(shape), std::move(v));
}

inline ad::TensorPtr random_const(std::vector<std::size_t> shape, symfore::Rng& rng,
                                  double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(ad::shape_product(shape));
    for (double& x : v) x = rng.uniform(lo, hi);
    return ad::Tensor::from(std::move(shape), std::move(v));
}

// Optimal 1-D transport cost computed as an explicit plan: ship mass between
// the leftmost unmet supply and demand, paying |i - j| per unit. For convex
// ground cost on a line the monotone plan is optimal.
inline double transport_emd_oracle(std::vector<double> supply, std::vector<double> demand) {
    double cost = 0.0;
    std::size_t i = 0, j = 0;
    while (i < supply.size() && j < demand.size()) {
        if (supply[i] <= 1e-15) {
            ++i;
            continue;
        }
        if (demand[j] <= 1e-15) {
            ++j;
            continue;
        }
        const double moved = std::min(supply[i], demand[j]);
        cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
        supply[i] -= moved;
        demand[j] -= moved;
    }
    return cost;
}

// Adjusted Rand index from the pair-counting contingency table.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const int ka = *std::max_element(a.begin(), a.end()) + 1;
    const int kb = *std::max_element(b.begin(), b.end()) + 1;
    std::vector<std::vector<long long>> table(ka, std::vector<long long>(kb, 0));
    for (std::size_t i = 0; i < a.size(); ++i) table[a[i]][b[i]]++;
    auto choose2 = [](long long n) { return n * (n - 1) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (int i = 0; i < ka; ++i) {
        long long row = 0;
        for (int j = 0; j < kb; ++j) {
            sum_ij += choose2(table[i][j]);
            row += table[i][j];
        }
        sum_a += choose2(row);
    }
    for (int j = 0; j < kb; ++j) {
        long long col = 0;
        for (int i = 0; i < ka; ++i) col += table[i][j];
        sum_b += choose2(col);
    }
    const double total = choose2(static_cast<long long>(a.size()));
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace testsup
