// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Training oracles run on synthetic corpora at desk scale; the
// architecture checks run at the full default configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "symfore/checkpoint.hpp"
#include "symfore/labeling.hpp"
#include "symfore/metrics.hpp"
#include "symfore/models.hpp"
#include "symfore/sampling.hpp"
#include "symfore/sequence.hpp"
#include "symfore/synth.hpp"
#include "symfore/training.hpp"

namespace fs = std::filesystem;
using namespace symfore;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ------------------------------------------------------------------ corpus

constexpr double kScale = 0.01;  // corpus preprocessing: millimeters -> decimeter-ish units

struct Corpus {
    std::vector<data::PoseSequence> train, test;
    std::vector<data::LabelSequence> train_labels, test_labels;
    std::size_t total_frames() const {
        std::size_t n = 0;
        for (const auto& s : train) n += s.frames;
        return n;
    }
};

Corpus make_corpus(data::SynthKind kind, int train_count, int test_count, std::size_t frames) {
    Corpus corpus;
    for (int i = 0; i < train_count + test_count; ++i) {
        data::SynthParams params;
        params.frames = frames;
        params.joints = 4;
        params.seed = static_cast<std::uint64_t>(i < train_count ? i : 1000 + i);
        params.noise_mm = 0.5;
        auto gen = data::synth_generate(kind, params);
        for (double& v : gen.poses.positions) v *= kScale;
        if (i < train_count) {
            corpus.train.push_back(std::move(gen.poses));
            corpus.train_labels.push_back(std::move(gen.labels));
        } else {
            corpus.test.push_back(std::move(gen.poses));
            corpus.test_labels.push_back(std::move(gen.labels));
        }
    }
    return corpus;
}

std::vector<train::TrainPair> corpus_windows(const Corpus& corpus, int total, int stride) {
    std::vector<train::TrainPair> pairs;
    for (std::size_t s = 0; s < corpus.train.size(); ++s) {
        const auto flat = data::to_feature_matrix(corpus.train[s]);
        const std::size_t d = flat->cols();
        for (std::size_t start = 0; start + static_cast<std::size_t>(total) <= corpus.train[s].frames;
             start += static_cast<std::size_t>(stride)) {
            train::TrainPair pair;
            pair.poses = ad::Tensor::from(
                {static_cast<std::size_t>(total), d},
                {flat->values.begin() + start * d,
                 flat->values.begin() + (start + static_cast<std::size_t>(total)) * d});
            pair.labels.assign(corpus.train_labels[s].begin() + start,
                               corpus.train_labels[s].begin() + start + total);
            pairs.push_back(std::move(pair));
        }
    }
    return pairs;
}

models::ModelConfig desk_model_config(int warmup) {
    models::ModelConfig c;
    c.label_count = 2;
    c.pose_dim = 12;
    c.observed_frames = 50;
    c.total_frames = 75;
    c.warmup_frames = warmup;
    c.tcn_channels = 12;
    c.tcn_blocks = 3;
    c.forecaster_hidden = 32;
    c.pose_encoder_hidden = 32;
    c.label_encoder_hidden = 8;
    return c;
}

// the boundary-transient probe needs a lossy pose summary: with a roomy
// encoder the toy task is encoded exactly and the warm-up effect vanishes
models::ModelConfig sine_model_config(int warmup) {
    models::ModelConfig c = desk_model_config(warmup);
    c.pose_encoder_hidden = 12;
    c.label_encoder_hidden = 4;
    return c;
}

train::TrainConfig desk_train_config(int epochs, std::uint64_t seed) {
    train::TrainConfig c;
    c.batch_size = 16;
    c.adam_lr = 3e-3;
    c.sgd_lr = 3e-4;
    c.plateau_patience = 10;
    c.max_epochs = epochs;
    c.seed = seed;
    return c;
}

train::TrainState train_on(const Corpus& corpus, const models::ModelConfig& mc,
                           const train::TrainConfig& tc) {
    auto pairs = corpus_windows(corpus, mc.total_frames, 5);
    std::vector<train::TrainPair> train_set, val_set;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i % 10 == 9) {
            val_set.push_back(pairs[i]);
        } else {
            train_set.push_back(pairs[i]);
        }
    }
    auto state = train::make_train_state(mc, tc);
    train::train_loop(state, train_set, val_set);
    return state;
}

// eval-mode forecast of one observed window
data::PoseSequence model_forecast(const train::TrainState& state,
                                  const data::PoseSequence& observed, std::size_t horizon) {
    models::ModelConfig mc = state.model_config;
    mc.total_frames = mc.observed_frames + static_cast<int>(horizon);
    ad::Tape tape;
    const auto out = models::full_forward(tape, state.params, mc,
                                          data::to_feature_matrix(observed), models::Mode::eval);
    const auto w = static_cast<std::size_t>(mc.warmup_frames);
    auto future = ad::rows(tape, out.generated_poses, w, w + horizon);
    return data::from_feature_matrix(*future, observed.frame_rate_hz);
}

// ------------------------------------------------------------------ criteria

void criterion_gradient_correctness() {
    const auto start = Clock::now();
    double worst_op = 0.0, worst_composite = 0.0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(1000 + seed);
        {
            auto a = testsup::random_param({3, 4}, rng);
            auto b = testsup::random_param({4, 2}, rng);
            worst_op = std::max(worst_op, testsup::GradCheck{{a, b}, [&](ad::Tape& tp) {
                                              return ad::sum(tp, ad::matmul(tp, a, b));
                                          }}.max_rel_error());
        }
        {
            auto x = testsup::random_param({2, 10}, rng);
            auto w = testsup::random_param({3, 2, 3}, rng);
            worst_op = std::max(worst_op, testsup::GradCheck{{x, w}, [&](ad::Tape& tp) {
                                              return ad::sum(tp, ad::dilated_causal_conv1d(tp, x, w, 2));
                                          }}.max_rel_error());
        }
        {
            auto x = testsup::random_param({24}, rng);
            for (double& v : x->values) {
                v = (std::abs(v) < 0.05) ? 0.1 : v;  // stay off the relu kink
            }
            for (auto fn : {&ad::relu, &ad::sigmoid, &ad::tanh}) {
                worst_op = std::max(worst_op, testsup::GradCheck{{x}, [&](ad::Tape& tp) {
                                                  return ad::sum(tp, fn(tp, x));
                                              }}.max_rel_error());
            }
        }
        {
            auto logits = testsup::random_param({4, 3}, rng);
            std::vector<int> targets{0, 2, 1, 1};
            worst_op = std::max(worst_op, testsup::GradCheck{{logits}, [&](ad::Tape& tp) {
                                              return ad::cross_entropy(tp, ad::softmax(tp, logits),
                                                                       targets);
                                          }}.max_rel_error());
        }
        {
            auto pred = testsup::random_param({3, 6}, rng, 0.5, 2.0);
            auto target = testsup::random_const({3, 6}, rng, -2.0, -0.5);
            worst_op = std::max(worst_op, testsup::GradCheck{{pred}, [&](ad::Tape& tp) {
                                              return ad::l2_pose_loss(tp, pred, target);
                                          }}.max_rel_error());
        }
        {
            auto v = testsup::random_param({2, 2, 3}, rng, 0.2, 1.0);
            auto g = testsup::random_param({2}, rng, 0.5, 1.5);
            auto x = testsup::random_const({2, 8}, rng);
            worst_op = std::max(worst_op, testsup::GradCheck{{v, g}, [&](ad::Tape& tp) {
                                              auto w = ad::weight_norm_conv(tp, v, g);
                                              return ad::sum(tp, ad::dilated_causal_conv1d(tp, x, w, 1));
                                          }}.max_rel_error());
        }
        {
            auto a = testsup::random_param({3, 4}, rng);
            auto b = testsup::random_param({3, 4}, rng);
            auto row = testsup::random_param({1, 4}, rng);
            worst_op = std::max(worst_op, testsup::GradCheck{{a, b, row}, [&](ad::Tape& tp) {
                auto h = ad::mul(tp, ad::sub(tp, a, b), ad::add_scalar(tp, b, 0.25));
                h = ad::add(tp, h, row);
                auto stacked = ad::vstack(tp, {h, ad::scale(tp, a, -0.5)});
                auto sliced = ad::rows(tp, ad::transpose(tp, stacked), 1, 3);
                return ad::sum(tp, ad::concat(tp, sliced, sliced, 1));
            }}.max_rel_error());
        }

        // composite: full three-network loss on a 4-frame toy problem
        models::ModelConfig mc;
        mc.label_count = 2;
        mc.pose_dim = 6;
        mc.observed_frames = 3;
        mc.total_frames = 4;
        mc.warmup_frames = 1;
        mc.tcn_channels = 3;
        mc.tcn_blocks = 1;
        mc.tcn_kernel = 2;
        mc.forecaster_hidden = 4;
        mc.pose_encoder_hidden = 4;
        mc.label_encoder_hidden = 3;
        Rng model_rng(2000 + seed);
        auto params = models::init_model(mc, model_rng);
        for (const auto& [name, tensor] : models::named_params(params)) {
            for (double& v : tensor->values) v += model_rng.uniform(-0.1, 0.1);
        }
        auto x = testsup::random_const({3, 6}, rng);
        auto target = testsup::random_const({2, 6}, rng);
        data::LabelSequence gt{0, 1, 1, 0};
        std::vector<ad::TensorPtr> leaves;
        for (const auto& [name, tensor] : models::named_params(params)) leaves.push_back(tensor);
        worst_composite = std::max(
            worst_composite,
            testsup::GradCheck{leaves, [&](ad::Tape& tp) {
                auto out = models::full_forward(tp, params, mc, x, models::Mode::train, &gt);
                auto l1 = ad::cross_entropy(tp, out.observed_label_probs,
                                            std::vector<int>{gt.begin(), gt.begin() + 3});
                auto l2 = ad::cross_entropy(tp, out.future_label_probs,
                                            std::vector<int>{gt.begin() + 3, gt.end()});
                auto l3 = ad::l2_pose_loss(tp, out.generated_poses, target);
                return ad::add(tp, ad::add(tp, l1, l2), l3);
            }}.max_rel_error());
    }
    std::ostringstream detail;
    detail << "worst per-op rel err " << worst_op << " (<=1e-6), composite " << worst_composite
           << " (<=1e-4), " << seconds_since(start) << " s";
    report("gradient-correctness", worst_op <= 1e-6 && worst_composite <= 1e-4, detail.str());
}

void criterion_tcn_causality_rf() {
    // bit-exact zero future leakage on a randomly initialized full-depth stack
    models::ModelConfig mc;
    mc.label_count = 3;
    mc.pose_dim = 6;
    mc.observed_frames = 130;
    mc.total_frames = 131;
    mc.warmup_frames = 0;
    mc.tcn_channels = 8;
    Rng rng(7);
    auto params = models::init_model(mc, rng);
    Rng data_rng(8);
    auto x = testsup::random_const({130, 6}, data_rng);
    ad::Tape tape;
    auto base = models::tcn_forward(tape, params.label_predictor, x);
    bool leak_free = true;
    for (std::size_t t_perturb : {40UL, 90UL, 129UL}) {
        auto x2 = ad::Tensor::from(x->shape, x->values);
        for (std::size_t j = 0; j < 6; ++j) x2->values[t_perturb * 6 + j] += 1e6;
        auto probed = models::tcn_forward(tape, params.label_predictor, x2);
        for (std::size_t t = 0; t < t_perturb && leak_free; ++t)
            for (std::size_t j = 0; j < 3; ++j)
                if (base->values[t * 3 + j] != probed->values[t * 3 + j]) leak_free = false;
    }

    const models::ModelConfig full;  // default 5 blocks, kernel 3
    const std::size_t theoretical = models::theoretical_receptive_field(full);
    const std::size_t measured = models::measure_receptive_field(full, 160);
    std::ostringstream detail;
    detail << "no future leakage (bit-exact); measured RF " << measured
           << " frames, architecture-derived " << theoretical
           << ", originally quoted value 65";
    report("tcn-causality-rf", leak_free && measured == theoretical, detail.str());
}

void criterion_architecture_conformance() {
    models::ModelConfig full;  // paper-scale defaults
    full.label_count = 11;
    full.pose_dim = 51;  // 17 kept joints
    Rng rng(1);
    auto params = models::init_model(full, rng);

    bool ok = true;
    std::ostringstream why;
    auto expect = [&](const std::string& name, std::vector<std::size_t> shape) {
        for (const auto& [n, tensor] : models::named_params(params)) {
            if (n == name) {
                if (tensor->shape != shape) {
                    ok = false;
                    why << name << " has shape " << tensor->shape_str() << "; ";
                }
                return;
            }
        }
        ok = false;
        why << name << " missing; ";
    };

    expect("label_predictor.in_proj.w", {256, 51, 1});
    for (int b = 0; b < 5; ++b) {
        const std::string prefix = "label_predictor.block" + std::to_string(b);
        expect(prefix + ".conv1.w", {256, 256, 3});
        expect(prefix + ".conv2.w", {256, 256, 3});
    }
    expect("label_predictor.out.w", {256, 11});
    expect("forecast_encoder.update.w", {62, 512});   // pose 51 + labels 11
    expect("forecast_encoder.update.u", {512, 512});
    expect("forecast_decoder.update.u", {512, 512});  // no input weights: hidden-only decoder
    expect("forecast_head.w", {512, 11});
    expect("label_encoder.update.w", {11, 256});
    expect("label_encoder.update.u", {256, 256});
    expect("pose_encoder.update.w", {51, 512});
    expect("pose_encoder.update.u", {512, 512});
    expect("generator.update.w", {62, 768});          // hidden 768 = 256 + 512 concatenation
    expect("generator.update.u", {768, 768});
    expect("generator_head.w", {768, 51});

    // the hidden-only decoder must not own input weight matrices
    for (const auto& [n, tensor] : models::named_params(params)) {
        if (n.rfind("forecast_decoder", 0) == 0 && n.size() > 2 &&
            n.substr(n.size() - 2) == ".w") {
            ok = false;
            why << "unexpected decoder input weights " << n << "; ";
        }
    }
    const auto dils = params.label_predictor.blocks;
    for (std::size_t b = 0; b < dils.size(); ++b) {
        if (dils[b].dilation != (1 << b)) {
            ok = false;
            why << "block " << b << " dilation " << dils[b].dilation << "; ";
        }
    }
    report("architecture-conformance", ok,
           ok ? "conv 256, encoders 512/512, label encoder 256, generator 768=256+512"
              : why.str());
}

void criterion_labeling_oracle() {
    Rng rng(17);
    labeling::FeatureMatrix blobs;
    blobs.dim = 40;
    std::vector<int> truth;
    const std::vector<std::vector<double>> centers{
        std::vector<double>(40, 0.0), std::vector<double>(40, 8.0), [] {
            std::vector<double> c(40, 0.0);
            for (std::size_t i = 0; i < 40; i += 2) c[i] = -8.0;
            return c;
        }()};
    blobs.count = 3 * 150;
    for (std::size_t c = 0; c < 3; ++c)
        for (int i = 0; i < 150; ++i) {
            for (std::size_t j = 0; j < 40; ++j)
                blobs.values.push_back(centers[c][j] + 0.4 * rng.normal());
            truth.push_back(static_cast<int>(c));
        }

    const auto pca = labeling::fit_pca(blobs, 32);
    const auto projected = pca.project_all(blobs);
    std::vector<double> objective;
    const auto cm = labeling::fit_kmeans(projected, 3, 99, &objective);
    std::vector<int> pred(projected.count);
    for (std::size_t i = 0; i < projected.count; ++i)
        pred[i] = static_cast<int>(cm.nearest(projected.row(i)));
    const double ari = testsup::adjusted_rand_index(pred, truth);

    bool monotone = true;
    for (std::size_t i = 1; i < objective.size(); ++i)
        if (objective[i] > objective[i - 1] + 1e-9) monotone = false;

    std::ostringstream detail;
    detail << "ARI " << ari << " (>0.99), k-means objective monotone over " << objective.size()
           << " iterations";
    report("labeling-oracle", ari > 0.99 && monotone, detail.str());
}

void criterion_metric_identities() {
    bool ok = true;
    std::ostringstream why;

    auto gen = data::synth_generate(data::SynthKind::sine_walk, {.frames = 120, .joints = 4, .seed = 3});
    if (metrics::npss(gen.poses, gen.poses, metrics::NpssBucket::long_term) > 1e-9) {
        ok = false;
        why << "npss(x,x) != 0; ";
    }

    Rng rng(23);
    double worst_emd = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> p(8), q(8);
        double sp = 0, sq = 0;
        for (int i = 0; i < 8; ++i) {
            p[i] = rng.uniform(0.0, 1.0);
            q[i] = rng.uniform(0.0, 1.0);
            sp += p[i];
            sq += q[i];
        }
        for (int i = 0; i < 8; ++i) {
            p[i] /= sp;
            q[i] /= sq;
        }
        worst_emd = std::max(worst_emd, std::abs(metrics::emd_1d(p, q) -
                                                 testsup::transport_emd_oracle(p, q)));
    }
    if (worst_emd > 1e-9) {
        ok = false;
        why << "emd vs transport oracle off by " << worst_emd << "; ";
    }

    double worst_parseval = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(48);
        double energy = 0.0;
        for (double& v : x) {
            v = rng.uniform(-1, 1);
            energy += v * v;
        }
        const auto spec = metrics::power_spectrum({x});
        worst_parseval = std::max(worst_parseval, std::abs(spec.total_power[0] - energy));
    }
    if (worst_parseval > 1e-9) {
        ok = false;
        why << "Parseval off by " << worst_parseval << "; ";
    }

    auto rest = data::synth_generate(data::SynthKind::still,
                                     {.frames = 30, .joints = 4, .seed = 5, .noise_mm = 0.0});
    data::PoseSequence shifted = rest.poses;
    for (std::size_t t = 0; t < shifted.frames; ++t)
        for (std::size_t j = 0; j < shifted.joints; ++j) shifted.at(t, j, 2) += 10.0;
    if (metrics::mpjpe(shifted, rest.poses, 5) != 10.0) {
        ok = false;
        why << "uniform 10 mm offset mpjpe != 10; ";
    }

    std::ostringstream detail;
    detail << "npss self 0, emd oracle gap " << worst_emd << ", Parseval gap " << worst_parseval
           << ", 10 mm offset exact";
    report("metric-identities", ok, ok ? detail.str() : why.str());
}

struct TrainingOracleModels {
    train::TrainState switch_model;
    train::TrainState sine_w8;
    train::TrainState sine_w0;
};

TrainingOracleModels g_models;

void criterion_training_oracle() {
    const auto start = Clock::now();

    // switch corpus: 10 x 160 = 1600 training frames
    Corpus switch_corpus = make_corpus(data::SynthKind::switch_motion, 10, 2, 160);
    const auto mc = desk_model_config(8);
    const auto tc = desk_train_config(60, 41);
    g_models.switch_model = train_on(switch_corpus, mc, tc);
    const train::TrainState& model = g_models.switch_model;

    // pose label predictor accuracy on a held-out sequence, argmax pipeline
    double label_acc = 0.0;
    {
        std::size_t hits = 0, total = 0;
        for (std::size_t s = 0; s < switch_corpus.test.size(); ++s) {
            ad::Tape tape;
            auto probs = models::tcn_forward(tape, model.params.label_predictor,
                                             data::to_feature_matrix(switch_corpus.test[s]));
            const auto pred = ad::argmax_rows(*probs);
            for (std::size_t t = 0; t < pred.size(); ++t) {
                if (pred[t] == switch_corpus.test_labels[s][t]) ++hits;
                ++total;
            }
        }
        label_acc = static_cast<double>(hits) / static_cast<double>(total);
    }

    // forecast accuracy at the 25-frame horizon over held-out windows
    double forecast_acc = 0.0;
    {
        std::size_t hits = 0, total = 0;
        for (std::size_t s = 0; s < switch_corpus.test.size(); ++s) {
            const auto& seq = switch_corpus.test[s];
            for (std::size_t startf = 0; startf + 75 <= seq.frames; startf += 7) {
                ad::Tape tape;
                auto out = models::full_forward(tape, model.params, model.model_config,
                                                data::to_feature_matrix(seq.slice(startf, 50)),
                                                models::Mode::eval);
                const auto pred = ad::argmax_rows(*out.future_label_probs);
                for (std::size_t h = 0; h < 25; ++h) {
                    if (pred[h] == switch_corpus.test_labels[s][startf + 50 + h]) ++hits;
                    ++total;
                }
            }
        }
        forecast_acc = static_cast<double>(hits) / static_cast<double>(total);
    }

    // sine-walk: beat zero velocity at the 1000 ms horizon (25 frames at 25 Hz)
    Corpus sine_corpus = make_corpus(data::SynthKind::sine_walk, 6, 2, 200);
    g_models.sine_w8 = train_on(sine_corpus, sine_model_config(8), desk_train_config(40, 43));
    double model_mpjpe = 0.0, zv_mpjpe = 0.0;
    {
        int count = 0;
        for (std::size_t s = 0; s < sine_corpus.test.size(); ++s) {
            const auto& seq = sine_corpus.test[s];
            for (std::size_t startf = 0; startf + 75 <= seq.frames; startf += 11) {
                const auto observed = seq.slice(startf, 50);
                const auto truth = seq.slice(startf + 50, 25);
                model_mpjpe += metrics::mpjpe(model_forecast(g_models.sine_w8, observed, 25),
                                              truth, 25);
                zv_mpjpe += metrics::mpjpe(metrics::zero_velocity(observed, 25), truth, 25);
                ++count;
            }
        }
        model_mpjpe /= count;
        zv_mpjpe /= count;
    }

    const double elapsed = seconds_since(start);
    std::ostringstream detail;
    detail << "label acc " << label_acc << " (>=0.95), forecast acc " << forecast_acc
           << " (>=0.9), sine-walk mpjpe@1000ms " << model_mpjpe / kScale << " mm vs zero-velocity "
           << zv_mpjpe / kScale << " mm, " << elapsed << " s (<=1800)";
    report("end-to-end-training-oracle",
           label_acc >= 0.95 && forecast_acc >= 0.9 && model_mpjpe < zv_mpjpe && elapsed <= 1800,
           detail.str());
}

void criterion_warmup_ablation() {
    Corpus sine_corpus = make_corpus(data::SynthKind::sine_walk, 6, 2, 200);
    g_models.sine_w0 = train_on(sine_corpus, sine_model_config(0), desk_train_config(40, 43));

    // frame-to-frame jump across the observation boundary, true pose optional
    auto first_frame_jump = [&](const train::TrainState* state) {
        double jump = 0.0;
        int count = 0;
        for (std::size_t s = 0; s < sine_corpus.test.size(); ++s) {
            const auto& seq = sine_corpus.test[s];
            for (std::size_t startf = 0; startf + 75 <= seq.frames; startf += 11) {
                const auto observed = seq.slice(startf, 50);
                const auto pred = state ? model_forecast(*state, observed, 25)
                                        : seq.slice(startf + 50, 1);
                double d2 = 0.0;
                for (std::size_t j = 0; j < seq.joints; ++j)
                    for (int a = 0; a < 3; ++a) {
                        const double diff = pred.at(0, j, a) - observed.at(49, j, a);
                        d2 += diff * diff;
                    }
                jump += std::sqrt(d2);
                ++count;
            }
        }
        return jump / count;
    };

    const double jump_w0 = first_frame_jump(&g_models.sine_w0);
    const double jump_w8 = first_frame_jump(&g_models.sine_w8);
    const double jump_true = first_frame_jump(nullptr);
    std::ostringstream detail;
    detail << "first-frame jump w=0: " << jump_w0 / kScale << " mm, w=8: " << jump_w8 / kScale
           << " mm (ground truth moves " << jump_true / kScale << " mm)";
    report("warmup-ablation-direction", jump_w0 > jump_w8, detail.str());
}

void criterion_ablation_machinery() {
    const auto base_mc = desk_model_config(4);
    Rng data_rng(51);
    auto observed = testsup::random_const({50, 12}, data_rng);

    auto run = [&](bool concat, bool label_enc, bool pose_enc) {
        auto mc = base_mc;
        mc.use_label_concat = concat;
        mc.use_label_encoder = label_enc;
        mc.use_pose_encoder = pose_enc;
        Rng rng(53);
        auto params = models::init_model(mc, rng);
        ad::Tape tape;
        return models::full_forward(tape, params, mc, observed, models::Mode::eval)
            .generated_poses->values;
    };

    const std::vector<std::vector<double>> variants{
        run(true, true, true),    // full
        run(false, true, true),   // no label concatenation
        run(true, false, true),   // no label encoder
        run(true, true, false),   // no pose encoder
        run(false, false, false)  // base model: zero initial state, poses only
    };
    bool distinct = true;
    for (std::size_t a = 0; a < variants.size(); ++a)
        for (std::size_t b = a + 1; b < variants.size(); ++b)
            if (variants[a] == variants[b]) distinct = false;
    const auto rerun = run(true, true, true);
    const bool deterministic = rerun == variants[0];
    report("ablation-machinery", distinct && deterministic,
           "five variants end-to-end, pairwise distinct, rerun bit-identical");
}

void criterion_reproducibility() {
    bool ok = true;
    std::ostringstream why;
    const fs::path dir = "acceptance_tmp";
    fs::create_directories(dir);

    // checkpoint round-trip: save -> load -> save, byte-identical files
    {
        const auto mc = desk_model_config(4);
        auto tc = desk_train_config(2, 61);
        auto state = train::make_train_state(mc, tc);
        const std::string p1 = (dir / "a.ckpt").string();
        const std::string p2 = (dir / "b.ckpt").string();
        train::to_checkpoint(state).save(p1);
        auto reloaded = train::from_checkpoint(io::Checkpoint::load(p1));
        train::to_checkpoint(reloaded).save(p2);
        if (io::fnv1a_file(p1) != io::fnv1a_file(p2)) {
            ok = false;
            why << "checkpoint round-trip not byte-identical; ";
        }
    }

    // resumed training reproduces the continuous run bit-identically
    {
        Corpus corpus = make_corpus(data::SynthKind::switch_motion, 3, 0, 120);
        auto mc = desk_model_config(4);
        mc.observed_frames = 40;
        mc.total_frames = 60;
        auto tc = desk_train_config(3, 67);

        auto continuous = train::make_train_state(mc, tc);
        auto pairs = corpus_windows(corpus, mc.total_frames, 10);
        train::train_loop(continuous, pairs, {});

        const std::string ckpt = (dir / "resume.ckpt").string();
        auto partial = train::make_train_state(mc, tc);
        partial.train_config.max_epochs = 2;
        train::train_loop(partial, pairs, {}, ckpt);
        auto resumed = train::from_checkpoint(io::Checkpoint::load(ckpt));
        resumed.train_config.max_epochs = 3;
        train::train_loop(resumed, pairs, {});

        const auto want = models::named_params(continuous.params);
        const auto got = models::named_params(resumed.params);
        for (std::size_t p = 0; p < want.size(); ++p) {
            if (want[p].second->values != got[p].second->values) {
                ok = false;
                why << "resumed epoch diverged at " << want[p].first << "; ";
                break;
            }
        }
    }

    // CLI commands are bit-reproducible under a fixed seed
#ifdef SYMFORE_CLI_PATH
    {
        const std::string cli = SYMFORE_CLI_PATH;
        const fs::path data_dir = dir / "cli_data";
        fs::remove_all(data_dir);
        auto run = [&](const std::string& args) {
            const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
            return std::system(cmd.c_str());
        };
        const std::string synth_cmd = "export synth --kind switch --frames 160 --joints 4 "
                                      "--count 3 --test-count 1 --seed 5 --out " +
                                      data_dir.string();
        if (run(synth_cmd) != 0) {
            ok = false;
            why << "synth export failed; ";
        }
        const std::string cluster_cmd = "cluster --data " + data_dir.string() +
                                        " --k 2 --seed 9 --set pca_dim=8 --out " +
                                        (dir / "cli_run").string();
        if (run(cluster_cmd) != 0) {
            ok = false;
            why << "cluster failed; ";
        }
        const auto hash1 = io::fnv1a_file((dir / "cli_run" / "labeler.ckpt").string());
        const auto label_hash1 =
            io::fnv1a_file((data_dir / "train" / "switch_000.labels.csv").string());
        if (run(cluster_cmd) != 0) {
            ok = false;
            why << "cluster rerun failed; ";
        }
        const auto hash2 = io::fnv1a_file((dir / "cli_run" / "labeler.ckpt").string());
        const auto label_hash2 =
            io::fnv1a_file((data_dir / "train" / "switch_000.labels.csv").string());
        if (hash1 != hash2 || label_hash1 != label_hash2) {
            ok = false;
            why << "cluster outputs not byte-identical across reruns; ";
        }
    }
#endif

    fs::remove_all(dir);
    report("reproducibility", ok,
           ok ? "checkpoint byte round-trip, bit-identical resume, deterministic commands"
              : why.str());
}

}  // namespace

int main() {
    const auto start = Clock::now();
    criterion_gradient_correctness();
    criterion_tcn_causality_rf();
    criterion_architecture_conformance();
    criterion_labeling_oracle();
    criterion_metric_identities();
    criterion_training_oracle();
    criterion_warmup_ablation();
    criterion_ablation_machinery();
    criterion_reproducibility();
    std::printf("%d of 9 criteria passed in %.1f s\n", 9 - g_failures, seconds_since(start));
    return g_failures == 0 ? 0 : 1;
}
