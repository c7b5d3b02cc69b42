#include "symfore/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "symfore/error.hpp"
#include "symfore/rng.hpp"

namespace symfore::labeling {

namespace {

FeatureMatrix window_features(const PoseSequence& p, const std::vector<int>& excluded,
                              bool pad_tail) {
    const auto flat = data::to_feature_matrix(p, excluded);
    const std::size_t d = flat->cols();
    const std::size_t frames = flat->rows();
    FeatureMatrix out;
    out.dim = kWindowFrames * d;
    out.count = pad_tail ? frames : frames - (kWindowFrames - 1);
    out.values.reserve(out.count * out.dim);
    for (std::size_t tau = 0; tau < out.count; ++tau) {
        for (std::size_t w = 0; w < kWindowFrames; ++w) {
            const std::size_t src = std::min(tau + w, frames - 1);  // clamp only when padding
            const double* row = &flat->values[src * d];
            out.values.insert(out.values.end(), row, row + d);
        }
    }
    return out;
}

}  // namespace

FeatureMatrix build_frame_features(const PoseSequence& p, const std::vector<int>& excluded) {
    if (p.frames < kWindowFrames) {
        throw ParameterError("need at least " + std::to_string(kWindowFrames) +
                             " frames to build lookahead features, got " +
                             std::to_string(p.frames));
    }
    return window_features(p, excluded, false);
}

FeatureMatrix build_frame_features_padded(const PoseSequence& p,
                                          const std::vector<int>& excluded) {
    return window_features(p, excluded, true);
}

std::vector<double> PcaModel::project(const double* x) const {
    std::vector<double> out(out_dim, 0.0);
    for (std::size_t c = 0; c < out_dim; ++c) {
        const double* comp = &components[c * in_dim];
        double acc = 0.0;
        for (std::size_t i = 0; i < in_dim; ++i) acc += comp[i] * (x[i] - mean[i]);
        out[c] = acc;
    }
    return out;
}

FeatureMatrix PcaModel::project_all(const FeatureMatrix& f) const {
    if (f.dim != in_dim) {
        throw DimensionError("feature dim " + std::to_string(f.dim) + " does not match PCA dim " +
                             std::to_string(in_dim));
    }
    FeatureMatrix out;
    out.count = f.count;
    out.dim = out_dim;
    out.values.reserve(out.count * out.dim);
    for (std::size_t i = 0; i < f.count; ++i) {
        const auto proj = project(f.row(i));
        out.values.insert(out.values.end(), proj.begin(), proj.end());
    }
    return out;
}

namespace {

// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Deterministic
// sweep order; accurate enough for covariance work at desk scale.
void jacobi_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& eigvec,
                  std::vector<double>& eigval) {
    eigvec.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eigvec[i * n + i] = 1.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-20) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p], aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i], aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = eigvec[i * n + p], viq = eigvec[i * n + q];
                    eigvec[i * n + p] = c * vip - s * viq;
                    eigvec[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    eigval.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigval[i] = a[i * n + i];
}

}  // namespace

PcaModel fit_pca(const FeatureMatrix& features, std::size_t out_dim) {
    const std::size_t n = features.count, d = features.dim;
    if (n < out_dim) {
        throw ParameterError("PCA needs at least " + std::to_string(out_dim) + " samples, got " +
                             std::to_string(n));
    }
    if (out_dim < 1 || out_dim > d) {
        throw ParameterError("PCA output dim " + std::to_string(out_dim) +
                             " outside 1.." + std::to_string(d));
    }
    PcaModel model;
    model.in_dim = d;
    model.out_dim = out_dim;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = features.row(i);
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
    }
    for (double& m : model.mean) m /= static_cast<double>(n);

    std::vector<double> cov(d * d, 0.0);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = features.row(i);
        for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - model.mean[j];
        for (std::size_t p = 0; p < d; ++p) {
            const double cp = centered[p];
            if (cp == 0.0) continue;
            for (std::size_t q = p; q < d; ++q) cov[p * d + q] += cp * centered[q];
        }
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p; q < d; ++q) {
            cov[p * d + q] /= denom;
            cov[q * d + p] = cov[p * d + q];
        }

    std::vector<double> eigvec, eigval;
    jacobi_eigen(cov, d, eigvec, eigval);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return eigval[a] > eigval[b]; });

    model.components.resize(out_dim * d);
    model.explained.resize(out_dim);
    for (std::size_t c = 0; c < out_dim; ++c) {
        const std::size_t col = order[c];
        model.explained[c] = eigval[col];
        double* comp = &model.components[c * d];
        for (std::size_t i = 0; i < d; ++i) comp[i] = eigvec[i * d + col];
        // deterministic sign: largest-magnitude entry ends up positive
        std::size_t arg = 0;
        for (std::size_t i = 1; i < d; ++i)
            if (std::abs(comp[i]) > std::abs(comp[arg])) arg = i;
        if (comp[arg] < 0) {
            for (std::size_t i = 0; i < d; ++i) comp[i] = -comp[i];
        }
    }
    return model;
}

std::size_t ClusterModel::nearest(const double* x) const {
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double* center = &centers[c * dim];
        double dist = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double diff = x[i] - center[i];
            dist += diff * diff;
        }
        if (c == 0 || dist < best_d) {  // strict: ties keep the lowest id
            best = c;
            best_d = dist;
        }
    }
    return best;
}

ClusterModel fit_kmeans(const FeatureMatrix& points, std::size_t k, std::uint64_t seed,
                        std::vector<double>* objective_history) {
    const std::size_t n = points.count, d = points.dim;
    if (k < 1 || k > n) {
        throw ParameterError("k-means needs 1 <= k <= samples, got k=" + std::to_string(k) +
                             " with " + std::to_string(n) + " samples");
    }
    ClusterModel model;
    model.k = k;
    model.dim = d;
    model.seed = seed;
    model.centers.assign(k * d, 0.0);

    Rng rng(seed);
    auto sq_dist = [&](const double* a, const double* b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = a[i] - b[i];
            acc += diff * diff;
        }
        return acc;
    };

    // k-means++ seeding
    std::vector<double> min_dist(n, 0.0);
    const std::size_t first = rng.below(n);
    std::copy_n(points.row(first), d, model.centers.begin());
    for (std::size_t i = 0; i < n; ++i) min_dist[i] = sq_dist(points.row(i), points.row(first));
    for (std::size_t c = 1; c < k; ++c) {
        const double total = std::accumulate(min_dist.begin(), min_dist.end(), 0.0);
        std::size_t pick = 0;
        if (total <= 0.0) {
            pick = rng.below(n);  // all remaining points coincide with a center
        } else {
            double target = rng.uniform01() * total;
            for (std::size_t i = 0; i < n; ++i) {
                target -= min_dist[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy_n(points.row(pick), d, model.centers.begin() + c * d);
        for (std::size_t i = 0; i < n; ++i) {
            min_dist[i] = std::min(min_dist[i], sq_dist(points.row(i), model.centers.data() + c * d));
        }
    }

    std::vector<std::size_t> assign(n, 0);
    std::vector<double> next(k * d);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < 300; ++iter) {
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            assign[i] = model.nearest(points.row(i));
            objective += sq_dist(points.row(i), &model.centers[assign[i] * d]);
        }
        if (objective_history) objective_history->push_back(objective);

        std::fill(next.begin(), next.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = points.row(i);
            double* acc = &next[assign[i] * d];
            for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
            counts[assign[i]]++;
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < d; ++j) next[c * d + j] /= static_cast<double>(counts[c]);
            } else {
                // re-seed the empty cluster to the point farthest from its center
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dist = sq_dist(points.row(i), &model.centers[assign[i] * d]);
                    if (dist > far_d) {
                        far_d = dist;
                        far = i;
                    }
                }
                std::copy_n(points.row(far), d, next.begin() + c * d);
            }
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            movement = std::max(movement, std::sqrt(sq_dist(&next[c * d], &model.centers[c * d])));
        }
        model.centers = next;
        if (movement < 1e-6) break;
    }
    return model;
}

LabelSequence assign_labels(const PoseSequence& p, const PcaModel& pca, const ClusterModel& cm,
                            const std::vector<int>& excluded) {
    const FeatureMatrix feats = build_frame_features_padded(p, excluded);
    const FeatureMatrix projected = pca.project_all(feats);
    LabelSequence out(projected.count);
    for (std::size_t i = 0; i < projected.count; ++i) {
        out[i] = static_cast<int>(cm.nearest(projected.row(i)));
    }
    return out;
}

double label_accuracy(const LabelSequence& pred, const LabelSequence& truth) {
    if (pred.size() != truth.size()) {
        throw DimensionError("label sequences differ in length: " + std::to_string(pred.size()) +
                             " vs " + std::to_string(truth.size()));
    }
    if (pred.empty()) return 1.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace symfore::labeling
