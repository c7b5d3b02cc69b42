#pragma once

#include <cstdint>
#include <vector>

#include "symfore/sequence.hpp"

namespace symfore::labeling {

using data::LabelSequence;
using data::PoseSequence;

// pose at tau concatenated with the next 10 poses
constexpr std::size_t kWindowFrames = 11;

struct FeatureMatrix {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> values;  // count x dim, row-major

    const double* row(std::size_t i) const { return &values[i * dim]; }
};

// Fitting variant: exactly T - 10 features, aligned to frames 0 .. T-11.
FeatureMatrix build_frame_features(const PoseSequence& p, const std::vector<int>& excluded = {});

// Assignment variant: one feature per frame; windows that would run past the
// end repeat the last frame.
FeatureMatrix build_frame_features_padded(const PoseSequence& p,
                                          const std::vector<int>& excluded = {});

struct PcaModel {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> mean;        // in_dim
    std::vector<double> components;  // out_dim x in_dim, orthonormal rows
    std::vector<double> explained;   // out_dim eigenvalues, descending

    std::vector<double> project(const double* x) const;
    FeatureMatrix project_all(const FeatureMatrix& f) const;
};

// Top eigenvectors of the centered sample covariance, descending eigenvalue
// order. Sign convention: the largest-magnitude entry of each component is
// positive.
PcaModel fit_pca(const FeatureMatrix& features, std::size_t out_dim = 32);

struct ClusterModel {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    std::vector<double> centers;  // k x dim

    std::size_t nearest(const double* x) const;  // ties -> lowest center id
};

// k-means++ seeding, Lloyd iterations until max center movement < 1e-6 or 300
// rounds; an emptied cluster is re-seeded to the point farthest from its
// assigned center. `objective_history`, when given, receives the sum of
// squared distances after every assignment step.
ClusterModel fit_kmeans(const FeatureMatrix& points, std::size_t k, std::uint64_t seed,
                        std::vector<double>* objective_history = nullptr);

LabelSequence assign_labels(const PoseSequence& p, const PcaModel& pca, const ClusterModel& cm,
                            const std::vector<int>& excluded = {});

double label_accuracy(const LabelSequence& pred, const LabelSequence& truth);

}  // namespace symfore::labeling
