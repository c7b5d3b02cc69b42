#include "symfore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace symfore::ad {

namespace {

void require_rank2(const TensorPtr& t, const char* op) {
    if (t->rank() != 2) {
        throw DimensionError(std::string(op) + " needs a rank-2 tensor, got " + t->shape_str());
    }
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape) {
        throw DimensionError(std::string(op) + " shape mismatch: " + a->shape_str() + " vs " +
                             b->shape_str());
    }
}

}  // namespace

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    if (a->cols() != b->rows()) {
        throw DimensionError("matmul inner extents differ: " + a->shape_str() + " vs " +
                             b->shape_str());
    }
    const std::size_t m = a->rows(), k = a->cols(), n = b->cols();
    auto out = Tensor::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a->values[i * k + p];
            if (av == 0.0) continue;
            const double* brow = &b->values[p * n];
            double* orow = &out->values[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    detail::check_finite(*out, "matmul");
    return tape.record("matmul", {a, b}, out, [a, b, out] {
        const std::size_t m = a->rows(), k = a->cols(), n = b->cols();
        const auto& go = out->grad;
        if (a->tracked) {
            auto& ga = a->grad_storage();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j)
                        acc += go[i * n + j] * b->values[p * n + j];
                    ga[i * k + p] += acc;
                }
        }
        if (b->tracked) {
            auto& gb = b->grad_storage();
            for (std::size_t p = 0; p < k; ++p)
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < m; ++i)
                        acc += a->values[i * k + p] * go[i * n + j];
                    gb[p * n + j] += acc;
                }
        }
    });
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    enum class Mode { same, row, col } mode;
    if (a->shape == b->shape) {
        mode = Mode::same;
    } else if (a->rank() == 2 && b->rank() == 2 && b->rows() == 1 && b->cols() == a->cols()) {
        mode = Mode::row;
    } else if (a->rank() == 2 && b->rank() == 2 && b->cols() == 1 && b->rows() == a->rows()) {
        mode = Mode::col;
    } else {
        throw DimensionError("add shape mismatch: " + a->shape_str() + " vs " + b->shape_str());
    }
    auto out = Tensor::from(a->shape, a->values);
    if (mode == Mode::same) {
        for (std::size_t i = 0; i < out->size(); ++i) out->values[i] += b->values[i];
    } else if (mode == Mode::row) {
        const std::size_t n = a->cols();
        for (std::size_t i = 0; i < a->rows(); ++i)
            for (std::size_t j = 0; j < n; ++j) out->values[i * n + j] += b->values[j];
    } else {
        const std::size_t n = a->cols();
        for (std::size_t i = 0; i < a->rows(); ++i)
            for (std::size_t j = 0; j < n; ++j) out->values[i * n + j] += b->values[i];
    }
    detail::check_finite(*out, "add");
    return tape.record("add", {a, b}, out, [a, b, out, mode] {
        const auto& go = out->grad;
        if (a->tracked) {
            auto& ga = a->grad_storage();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
        }
        if (b->tracked) {
            auto& gb = b->grad_storage();
            if (mode == Mode::same) {
                for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
            } else if (mode == Mode::row) {
                const std::size_t n = a->cols();
                for (std::size_t i = 0; i < a->rows(); ++i)
                    for (std::size_t j = 0; j < n; ++j) gb[j] += go[i * n + j];
            } else {
                const std::size_t n = a->cols();
                for (std::size_t i = 0; i < a->rows(); ++i)
                    for (std::size_t j = 0; j < n; ++j) gb[i] += go[i * n + j];
            }
        }
    });
}

TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "sub");
    auto out = Tensor::from(a->shape, a->values);
    for (std::size_t i = 0; i < out->size(); ++i) out->values[i] -= b->values[i];
    detail::check_finite(*out, "sub");
    return tape.record("sub", {a, b}, out, [a, b, out] {
        const auto& go = out->grad;
        if (a->tracked) {
            auto& ga = a->grad_storage();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
        }
        if (b->tracked) {
            auto& gb = b->grad_storage();
            for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
        }
    });
}

TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "mul");
    auto out = Tensor::from(a->shape, a->values);
    for (std::size_t i = 0; i < out->size(); ++i) out->values[i] *= b->values[i];
    detail::check_finite(*out, "mul");
    return tape.record("mul", {a, b}, out, [a, b, out] {
        const auto& go = out->grad;
        if (a->tracked) {
            auto& ga = a->grad_storage();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * b->values[i];
        }
        if (b->tracked) {
            auto& gb = b->grad_storage();
            for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * a->values[i];
        }
    });
}

TensorPtr scale(Tape& tape, const TensorPtr& x, double c) {
    auto out = Tensor::from(x->shape, x->values);
    for (double& v : out->values) v *= c;
    detail::check_finite(*out, "scale");
    return tape.record("scale", {x}, out, [x, out, c] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t i = 0; i < out->grad.size(); ++i) gx[i] += c * out->grad[i];
    });
}

TensorPtr add_scalar(Tape& tape, const TensorPtr& x, double c) {
    auto out = Tensor::from(x->shape, x->values);
    for (double& v : out->values) v += c;
    detail::check_finite(*out, "add_scalar");
    return tape.record("add_scalar", {x}, out, [x, out] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t i = 0; i < out->grad.size(); ++i) gx[i] += out->grad[i];
    });
}

TensorPtr relu(Tape& tape, const TensorPtr& x) {
    auto out = Tensor::from(x->shape, x->values);
    for (double& v : out->values) v = v > 0.0 ? v : 0.0;
    return tape.record("relu", {x}, out, [x, out] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t i = 0; i < out->grad.size(); ++i)
            if (x->values[i] > 0.0) gx[i] += out->grad[i];
    });
}

TensorPtr sigmoid(Tape& tape, const TensorPtr& x) {
    auto out = Tensor::from(x->shape, x->values);
    for (double& v : out->values) v = 1.0 / (1.0 + std::exp(-v));
    detail::check_finite(*out, "sigmoid");
    return tape.record("sigmoid", {x}, out, [x, out] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t i = 0; i < out->grad.size(); ++i) {
            const double y = out->values[i];
            gx[i] += out->grad[i] * y * (1.0 - y);
        }
    });
}

TensorPtr tanh(Tape& tape, const TensorPtr& x) {
    auto out = Tensor::from(x->shape, x->values);
    for (double& v : out->values) v = std::tanh(v);
    detail::check_finite(*out, "tanh");
    return tape.record("tanh", {x}, out, [x, out] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t i = 0; i < out->grad.size(); ++i) {
            const double y = out->values[i];
            gx[i] += out->grad[i] * (1.0 - y * y);
        }
    });
}

TensorPtr softmax(Tape& tape, const TensorPtr& x) {
    if (x->rank() < 1) throw DimensionError("softmax needs rank >= 1");
    const std::size_t n = x->shape.back();
    const std::size_t rows = x->size() / n;
    auto out = Tensor::from(x->shape, x->values);
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = &out->values[r * n];
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = std::exp(row[j] - mx);
            total += row[j];
        }
        for (std::size_t j = 0; j < n; ++j) row[j] /= total;
    }
    detail::check_finite(*out, "softmax");
    return tape.record("softmax", {x}, out, [x, out, n, rows] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = &out->values[r * n];
            const double* gy = &out->grad[r * n];
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
            for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += y[j] * (gy[j] - dot);
        }
    });
}

TensorPtr dilated_causal_conv1d(Tape& tape, const TensorPtr& x, const TensorPtr& w, int dilation) {
    if (dilation <= 0) {
        throw ParameterError("conv dilation must be positive, got " + std::to_string(dilation));
    }
    require_rank2(x, "dilated_causal_conv1d");
    if (w->rank() != 3) {
        throw DimensionError("conv kernel must be rank 3 [out x in x k], got " + w->shape_str());
    }
    const std::size_t c_in = x->rows(), frames = x->cols();
    const std::size_t c_out = w->shape[0], k = w->shape[2];
    if (w->shape[1] != c_in) {
        throw DimensionError("conv kernel " + w->shape_str() + " does not match input " +
                             x->shape_str());
    }
    const std::size_t dil = static_cast<std::size_t>(dilation);
    auto out = Tensor::zeros({c_out, frames});
    // output frame t reads x at t - (k-1-kk)*dil, so only frames <= t
    for (std::size_t o = 0; o < c_out; ++o) {
        double* orow = &out->values[o * frames];
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* xrow = &x->values[ci * frames];
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double wv = w->values[(o * c_in + ci) * k + kk];
                if (wv == 0.0) continue;
                const std::size_t off = (k - 1 - kk) * dil;
                for (std::size_t t = off; t < frames; ++t) orow[t] += wv * xrow[t - off];
            }
        }
    }
    detail::check_finite(*out, "dilated_causal_conv1d");
    return tape.record("dilated_causal_conv1d", {x, w}, out, [x, w, out, dil] {
        const std::size_t c_in = x->rows(), frames = x->cols();
        const std::size_t c_out = w->shape[0], k = w->shape[2];
        const auto& go = out->grad;
        if (x->tracked) {
            auto& gx = x->grad_storage();
            for (std::size_t o = 0; o < c_out; ++o)
                for (std::size_t ci = 0; ci < c_in; ++ci)
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        const double wv = w->values[(o * c_in + ci) * k + kk];
                        if (wv == 0.0) continue;
                        const std::size_t off = (k - 1 - kk) * dil;
                        for (std::size_t t = off; t < frames; ++t)
                            gx[ci * frames + t - off] += wv * go[o * frames + t];
                    }
        }
        if (w->tracked) {
            auto& gw = w->grad_storage();
            for (std::size_t o = 0; o < c_out; ++o)
                for (std::size_t ci = 0; ci < c_in; ++ci)
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        const std::size_t off = (k - 1 - kk) * dil;
                        double acc = 0.0;
                        for (std::size_t t = off; t < frames; ++t)
                            acc += go[o * frames + t] * x->values[ci * frames + t - off];
                        gw[(o * c_in + ci) * k + kk] += acc;
                    }
        }
    });
}

TensorPtr weight_norm_conv(Tape& tape, const TensorPtr& v, const TensorPtr& g) {
    if (v->rank() != 3) {
        throw DimensionError("weight_norm_conv expects rank-3 kernel, got " + v->shape_str());
    }
    const std::size_t c_out = v->shape[0];
    const std::size_t per = v->shape[1] * v->shape[2];
    if (g->size() != c_out) {
        throw DimensionError("weight_norm_conv gain size " + std::to_string(g->size()) +
                             " vs " + std::to_string(c_out) + " output channels");
    }
    auto out = Tensor::zeros(v->shape);
    std::vector<double> norms(c_out);
    for (std::size_t o = 0; o < c_out; ++o) {
        double nsq = 0.0;
        for (std::size_t i = 0; i < per; ++i) nsq += v->values[o * per + i] * v->values[o * per + i];
        const double norm = std::sqrt(nsq);
        if (norm <= 0.0) throw NumericError("weight_norm_conv: zero-norm kernel row");
        norms[o] = norm;
        const double s = g->values[o] / norm;
        for (std::size_t i = 0; i < per; ++i) out->values[o * per + i] = s * v->values[o * per + i];
    }
    detail::check_finite(*out, "weight_norm_conv");
    return tape.record("weight_norm_conv", {v, g}, out,
                       [v, g, out, norms = std::move(norms), c_out, per] {
        const auto& go = out->grad;
        for (std::size_t o = 0; o < c_out; ++o) {
            const double norm = norms[o];
            double dot = 0.0;  // <grad_w, unit(v)>
            for (std::size_t i = 0; i < per; ++i)
                dot += go[o * per + i] * v->values[o * per + i] / norm;
            if (g->tracked) g->grad_storage()[o] += dot;
            if (v->tracked) {
                auto& gv = v->grad_storage();
                const double s = g->values[o] / norm;
                for (std::size_t i = 0; i < per; ++i) {
                    const double u = v->values[o * per + i] / norm;
                    gv[o * per + i] += s * (go[o * per + i] - dot * u);
                }
            }
        }
    });
}

TensorPtr transpose(Tape& tape, const TensorPtr& x) {
    require_rank2(x, "transpose");
    const std::size_t m = x->rows(), n = x->cols();
    auto out = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out->values[j * m + i] = x->values[i * n + j];
    return tape.record("transpose", {x}, out, [x, out, m, n] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += out->grad[j * m + i];
    });
}

TensorPtr concat(Tape& tape, const TensorPtr& a, const TensorPtr& b, int axis) {
    require_rank2(a, "concat");
    require_rank2(b, "concat");
    if (axis != 0 && axis != 1) {
        throw ParameterError("concat axis out of range: " + std::to_string(axis));
    }
    if (axis == 0) {
        if (a->cols() != b->cols()) {
            throw DimensionError("concat axis 0 column mismatch: " + a->shape_str() + " vs " +
                                 b->shape_str());
        }
        return vstack(tape, {a, b});
    }
    if (a->rows() != b->rows()) {
        throw DimensionError("concat axis 1 row mismatch: " + a->shape_str() + " vs " +
                             b->shape_str());
    }
    const std::size_t m = a->rows(), na = a->cols(), nb = b->cols();
    auto out = Tensor::zeros({m, na + nb});
    for (std::size_t i = 0; i < m; ++i) {
        std::copy_n(&a->values[i * na], na, &out->values[i * (na + nb)]);
        std::copy_n(&b->values[i * nb], nb, &out->values[i * (na + nb) + na]);
    }
    return tape.record("concat", {a, b}, out, [a, b, out, m, na, nb] {
        for (std::size_t i = 0; i < m; ++i) {
            if (a->tracked) {
                auto& ga = a->grad_storage();
                for (std::size_t j = 0; j < na; ++j)
                    ga[i * na + j] += out->grad[i * (na + nb) + j];
            }
            if (b->tracked) {
                auto& gb = b->grad_storage();
                for (std::size_t j = 0; j < nb; ++j)
                    gb[i * nb + j] += out->grad[i * (na + nb) + na + j];
            }
        }
    });
}

TensorPtr vstack(Tape& tape, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw ParameterError("vstack of zero tensors");
    const std::size_t n = parts[0]->cols();
    std::size_t total_rows = 0;
    for (const auto& p : parts) {
        require_rank2(p, "vstack");
        if (p->cols() != n) {
            throw DimensionError("vstack column mismatch: " + p->shape_str());
        }
        total_rows += p->rows();
    }
    auto out = Tensor::zeros({total_rows, n});
    std::size_t r = 0;
    for (const auto& p : parts) {
        std::copy(p->values.begin(), p->values.end(), out->values.begin() + r * n);
        r += p->rows();
    }
    return tape.record("vstack", parts, out, [parts, out, n] {
        std::size_t r = 0;
        for (const auto& p : parts) {
            if (p->tracked) {
                auto& gp = p->grad_storage();
                for (std::size_t i = 0; i < p->size(); ++i) gp[i] += out->grad[r * n + i];
            }
            r += p->rows();
        }
    });
}

TensorPtr rows(Tape& tape, const TensorPtr& x, std::size_t r0, std::size_t r1) {
    require_rank2(x, "rows");
    if (r0 >= r1 || r1 > x->rows()) {
        throw RangeError("rows slice [" + std::to_string(r0) + ", " + std::to_string(r1) +
                         ") out of range for " + x->shape_str());
    }
    const std::size_t n = x->cols();
    auto out = Tensor::from({r1 - r0, n},
                            {x->values.begin() + r0 * n, x->values.begin() + r1 * n});
    return tape.record("rows", {x}, out, [x, out, r0, n] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        for (std::size_t i = 0; i < out->grad.size(); ++i) gx[r0 * n + i] += out->grad[i];
    });
}

TensorPtr sum(Tape& tape, const TensorPtr& x) {
    double total = 0.0;
    for (double v : x->values) total += v;
    auto out = Tensor::scalar(total);
    return tape.record("sum", {x}, out, [x, out] {
        if (!x->tracked) return;
        auto& gx = x->grad_storage();
        const double g = out->grad[0];
        for (double& v : gx) v += g;
    });
}

TensorPtr cross_entropy(Tape& tape, const TensorPtr& pred_probs, std::span<const int> targets) {
    require_rank2(pred_probs, "cross_entropy");
    const std::size_t frames = pred_probs->rows(), n = pred_probs->cols();
    if (targets.size() != frames) {
        throw DimensionError("cross_entropy needs one target per frame: " +
                             std::to_string(targets.size()) + " vs " + std::to_string(frames));
    }
    for (std::size_t t = 0; t < frames; ++t) {
        if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= n) {
            throw RangeError("cross_entropy target id " + std::to_string(targets[t]) +
                             " outside 0.." + std::to_string(n - 1));
        }
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) row_sum += pred_probs->values[t * n + j];
        if (std::abs(row_sum - 1.0) > 1e-6) {
            throw ContractError("cross_entropy row " + std::to_string(t) +
                                " does not sum to 1 (got " + std::to_string(row_sum) + ")");
        }
    }
    double loss = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
        const double p = std::max(pred_probs->values[t * n + targets[t]], kLogClamp);
        loss -= std::log(p);
    }
    loss /= static_cast<double>(frames);
    auto out = Tensor::scalar(loss);
    std::vector<int> tgt(targets.begin(), targets.end());
    return tape.record("cross_entropy", {pred_probs}, out,
                       [pred_probs, out, tgt = std::move(tgt), frames, n] {
        if (!pred_probs->tracked) return;
        auto& gx = pred_probs->grad_storage();
        const double g = out->grad[0] / static_cast<double>(frames);
        for (std::size_t t = 0; t < frames; ++t) {
            const double p = pred_probs->values[t * n + tgt[t]];
            if (p > kLogClamp) gx[t * n + tgt[t]] -= g / p;
        }
    });
}

TensorPtr l2_pose_loss(Tape& tape, const TensorPtr& pred, const TensorPtr& target) {
    require_same_shape(pred, target, "l2_pose_loss");
    require_rank2(pred, "l2_pose_loss");
    if (pred->cols() % 3 != 0) {
        throw DimensionError("l2_pose_loss needs 3 columns per joint, got " + pred->shape_str());
    }
    const std::size_t frames = pred->rows(), joints = pred->cols() / 3;
    const double norm_factor = 1.0 / static_cast<double>(frames * joints);
    double loss = 0.0;
    for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t j = 0; j < joints; ++j) {
            const std::size_t base = t * joints * 3 + j * 3;
            const double dx = pred->values[base] - target->values[base];
            const double dy = pred->values[base + 1] - target->values[base + 1];
            const double dz = pred->values[base + 2] - target->values[base + 2];
            loss += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    auto out = Tensor::scalar(loss * norm_factor);
    return tape.record("l2_pose_loss", {pred, target}, out,
                       [pred, target, out, frames, joints, norm_factor] {
        const double g = out->grad[0] * norm_factor;
        for (std::size_t t = 0; t < frames; ++t)
            for (std::size_t j = 0; j < joints; ++j) {
                const std::size_t base = t * joints * 3 + j * 3;
                const double dx = pred->values[base] - target->values[base];
                const double dy = pred->values[base + 1] - target->values[base + 1];
                const double dz = pred->values[base + 2] - target->values[base + 2];
                const double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (norm < 1e-12) continue;  // flat spot of the norm
                const double s = g / norm;
                if (pred->tracked) {
                    auto& gp = pred->grad_storage();
                    gp[base] += s * dx;
                    gp[base + 1] += s * dy;
                    gp[base + 2] += s * dz;
                }
                if (target->tracked) {
                    auto& gt = target->grad_storage();
                    gt[base] -= s * dx;
                    gt[base + 1] -= s * dy;
                    gt[base + 2] -= s * dz;
                }
            }
    });
}

TensorPtr one_hot(int id, int n) {
    if (n <= 0) throw ParameterError("one_hot needs n > 0");
    if (id < 0 || id >= n) {
        throw RangeError("one_hot id " + std::to_string(id) + " outside 0.." +
                         std::to_string(n - 1));
    }
    auto out = Tensor::zeros({1, static_cast<std::size_t>(n)});
    out->values[static_cast<std::size_t>(id)] = 1.0;
    return out;
}

std::size_t argmax_row(const Tensor& x, std::size_t row) {
    const std::size_t n = x.shape.back();
    const double* v = &x.values[row * n];
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (v[j] > v[best]) best = j;  // strict: ties keep the lowest index
    return best;
}

std::vector<int> argmax_rows(const Tensor& x) {
    const std::size_t n = x.shape.back();
    const std::size_t rows = x.size() / n;
    std::vector<int> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = static_cast<int>(argmax_row(x, r));
    return out;
}

}  // namespace symfore::ad
