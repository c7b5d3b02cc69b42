#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "symfore/labeling.hpp"
#include "symfore/synth.hpp"

using namespace symfore;
using labeling::FeatureMatrix;

namespace {

data::PoseSequence constant_pose_sequence(std::size_t frames, std::size_t joints, double value) {
    data::PoseSequence p;
    p.frames = frames;
    p.joints = joints;
    p.positions.assign(frames * joints * 3, value);
    return p;
}

FeatureMatrix gaussian_blobs(const std::vector<std::vector<double>>& centers, std::size_t per_blob,
                             double sigma, Rng& rng, std::vector<int>* truth = nullptr) {
    FeatureMatrix f;
    f.dim = centers[0].size();
    f.count = centers.size() * per_blob;
    f.values.reserve(f.count * f.dim);
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            for (std::size_t j = 0; j < f.dim; ++j)
                f.values.push_back(centers[c][j] + sigma * rng.normal());
            if (truth) truth->push_back(static_cast<int>(c));
        }
    }
    return f;
}

}  // namespace

TEST_CASE("frame features: count, alignment, boundary") {
    auto gen = data::synth_generate(data::SynthKind::sine_walk, {.frames = 11, .joints = 2, .seed = 1});
    const auto f = labeling::build_frame_features(gen.poses);
    CHECK(f.count == 1);
    CHECK(f.dim == 11 * 6);

    auto longer = data::synth_generate(data::SynthKind::sine_walk, {.frames = 30, .joints = 2, .seed = 2});
    const auto g = labeling::build_frame_features(longer.poses);
    CHECK(g.count == 20);
    // leading slice of feature tau equals pose tau exactly
    for (std::size_t tau = 0; tau < g.count; ++tau)
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(g.row(tau)[i] == longer.poses.positions[tau * 6 + i]);

    const auto constant = constant_pose_sequence(15, 2, 3.5);
    const auto h = labeling::build_frame_features(constant);
    for (std::size_t i = 1; i < h.count; ++i)
        for (std::size_t j = 0; j < h.dim; ++j) CHECK(h.row(i)[j] == h.row(0)[j]);

    CHECK_THROWS_AS(labeling::build_frame_features(constant_pose_sequence(10, 2, 0.0)),
                    ParameterError);
}

TEST_CASE("pca recovers an exact low-rank plane") {
    Rng rng(3);
    FeatureMatrix f;
    f.dim = 6;
    f.count = 200;
    std::vector<double> u{1, 0, 2, 0, -1, 0.5}, v{0, 1, -1, 2, 0, 0.25};
    for (std::size_t i = 0; i < f.count; ++i) {
        const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
        for (std::size_t j = 0; j < f.dim; ++j) f.values.push_back(4.0 + a * u[j] + b * v[j]);
    }
    const auto pca = labeling::fit_pca(f, 2);

    // orthonormal components
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < f.dim; ++j)
                dot += pca.components[a * f.dim + j] * pca.components[b * f.dim + j];
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-9);
        }

    // reconstruction error is zero for data lying in the plane
    for (std::size_t i = 0; i < f.count; ++i) {
        const auto proj = pca.project(f.row(i));
        double err = 0.0;
        for (std::size_t j = 0; j < f.dim; ++j) {
            double recon = pca.mean[j];
            for (std::size_t c = 0; c < 2; ++c) recon += proj[c] * pca.components[c * f.dim + j];
            err += (recon - f.row(i)[j]) * (recon - f.row(i)[j]);
        }
        CHECK(err < 1e-9);
    }

    // the mean projects to the zero vector
    const auto zero = pca.project(pca.mean.data());
    for (double z : zero) CHECK(std::abs(z) < 1e-9);

    CHECK_THROWS_AS(labeling::fit_pca(f, 500), ParameterError);
}

TEST_CASE("pca explained variance is flat on an isotropic gaussian") {
    Rng rng(7);
    FeatureMatrix f;
    f.dim = 6;
    f.count = 10000;
    f.values.resize(f.count * f.dim);
    for (double& v : f.values) v = rng.normal();
    const auto pca = labeling::fit_pca(f, 4);
    for (std::size_t c = 1; c < 4; ++c) {
        CHECK(pca.explained[c - 1] >= pca.explained[c]);  // descending
        CHECK(pca.explained[c] / pca.explained[0] > 0.9);
    }
}

TEST_CASE("k-means separates well-spaced blobs") {
    Rng rng(11);
    std::vector<int> truth;
    const auto f = gaussian_blobs({{0, 0, 0, 0}, {50, 0, 0, 0}, {0, 50, 0, 50}}, 120, 0.5, rng, &truth);
    std::vector<double> objective;
    const auto cm = labeling::fit_kmeans(f, 3, 42, &objective);
    std::vector<int> pred(f.count);
    for (std::size_t i = 0; i < f.count; ++i) pred[i] = static_cast<int>(cm.nearest(f.row(i)));
    CHECK(testsup::adjusted_rand_index(pred, truth) > 0.99);
    for (std::size_t i = 1; i < objective.size(); ++i) CHECK(objective[i] <= objective[i - 1] + 1e-9);
}

TEST_CASE("k-means with k=1 returns the sample mean and is deterministic") {
    Rng rng(13);
    FeatureMatrix f;
    f.dim = 3;
    f.count = 64;
    f.values.resize(f.count * f.dim);
    for (double& v : f.values) v = rng.uniform(-2, 2);
    const auto cm = labeling::fit_kmeans(f, 1, 7);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < f.count; ++i) mean += f.row(i)[j];
        mean /= static_cast<double>(f.count);
        CHECK(std::abs(cm.centers[j] - mean) < 1e-9);
    }

    const auto again = labeling::fit_kmeans(f, 4, 99);
    const auto again2 = labeling::fit_kmeans(f, 4, 99);
    CHECK(again.centers == again2.centers);

    CHECK_THROWS_AS(labeling::fit_kmeans(f, 65, 1), ParameterError);
}

TEST_CASE("assign_labels covers every frame and matches training assignments") {
    auto gen = data::synth_generate(data::SynthKind::switch_motion,
                                    {.frames = 200, .joints = 3, .seed = 17, .noise_mm = 0.3});
    const auto feats = labeling::build_frame_features(gen.poses);
    const auto pca = labeling::fit_pca(feats, 8);
    const auto projected = pca.project_all(feats);
    const auto cm = labeling::fit_kmeans(projected, 2, 5);

    const auto labels = labeling::assign_labels(gen.poses, pca, cm);
    CHECK(labels.size() == gen.poses.frames);

    // frames with a full window reproduce their training-time assignment
    for (std::size_t tau = 0; tau < projected.count; ++tau) {
        CHECK(labels[tau] == static_cast<int>(cm.nearest(projected.row(tau))));
    }

    // boundary: an 11-frame sequence still gets 11 labels via tail padding
    auto tiny = data::synth_generate(data::SynthKind::still, {.frames = 11, .joints = 3, .seed = 1});
    CHECK(labeling::assign_labels(tiny.poses, pca, cm).size() == 11);
}

TEST_CASE("cluster labels locate the synthetic transition within ten frames") {
    auto gen = data::synth_generate(data::SynthKind::switch_motion,
                                    {.frames = 240, .joints = 4, .seed = 21, .noise_mm = 0.3});
    const auto feats = labeling::build_frame_features(gen.poses);
    const auto pca = labeling::fit_pca(feats, 8);
    const auto cm = labeling::fit_kmeans(pca.project_all(feats), 2, 3);
    const auto labels = labeling::assign_labels(gen.poses, pca, cm);

    // find the last change in the cluster ids; ground truth steps at T/2
    std::size_t change = 0;
    int changes = 0;
    for (std::size_t t = 1; t < labels.size(); ++t) {
        if (labels[t] != labels[t - 1]) {
            change = t;
            ++changes;
        }
    }
    REQUIRE(changes >= 1);
    const double truth = 120.0;
    CHECK(std::abs(static_cast<double>(change) - truth) <= 10.0);
    CHECK(changes == 1);
}

TEST_CASE("label accuracy") {
    CHECK(labeling::label_accuracy({1, 1, 0}, {1, 1, 0}) == 1.0);
    CHECK(labeling::label_accuracy({1, 1, 1}, {0, 0, 0}) == 0.0);
    CHECK(labeling::label_accuracy({1, 0, 1, 0}, {1, 1, 1, 1}) == 0.5);
    CHECK_THROWS_AS(labeling::label_accuracy({1}, {1, 2}), DimensionError);
}

TEST_CASE("pca reconstruction error never grows with more components") {
    Rng rng(29);
    FeatureMatrix f;
    f.dim = 8;
    f.count = 300;
    f.values.resize(f.count * f.dim);
    for (std::size_t i = 0; i < f.count; ++i)
        for (std::size_t j = 0; j < f.dim; ++j)
            f.values[i * f.dim + j] = rng.normal() * static_cast<double>(j + 1);

    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t dim = 1; dim <= 6; ++dim) {
        const auto pca = labeling::fit_pca(f, dim);
        double err = 0.0;
        for (std::size_t i = 0; i < f.count; ++i) {
            const auto proj = pca.project(f.row(i));
            for (std::size_t j = 0; j < f.dim; ++j) {
                double recon = pca.mean[j];
                for (std::size_t c = 0; c < dim; ++c)
                    recon += proj[c] * pca.components[c * f.dim + j];
                err += (recon - f.row(i)[j]) * (recon - f.row(i)[j]);
            }
        }
        CHECK(err <= previous + 1e-9);
        previous = err;
    }
}
