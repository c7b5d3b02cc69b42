#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "symfore/checkpoint.hpp"
#include "symfore/models.hpp"
#include "symfore/rng.hpp"

namespace symfore::train {

struct TrainConfig {
    int batch_size = 16;
    double adam_lr = 5e-4;
    double sgd_lr = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int plateau_patience = 5;        // epochs without improvement before the switch
    double plateau_min_improve = 1e-4;
    double lambda_label = 1.0;
    double lambda_forecast = 1.0;
    double lambda_pose = 1.0;
    int max_epochs = 50;
    std::uint64_t seed = 1;
    bool loss_includes_warmup = true;  // warm-up estimates enter the pose loss
    double grad_clip = 0.0;            // global-norm clip, 0 disables
    double val_fraction = 0.1;

    void validate() const;
};

enum class Phase { adam, sgd };

// Per-parameter Adam moments plus the plateau bookkeeping that drives the
// one-way adam -> sgd transition.
struct OptimizerState {
    Phase phase = Phase::adam;
    long step = 0;
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_improve = 0;
    int switch_epoch = -1;  // -1 until the transition happened
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    void init_moments(const std::vector<std::pair<std::string, ad::TensorPtr>>& params);
};

// one training window: poses [T x d] plus one label id per frame
struct TrainPair {
    ad::TensorPtr poses;
    data::LabelSequence labels;
};

struct LossTerms {
    ad::TensorPtr total;
    ad::TensorPtr label;     // observed-label term
    ad::TensorPtr forecast;  // future-label term
    ad::TensorPtr pose;      // generated-pose term
};

LossTerms total_loss(ad::Tape& tape, const models::ForwardResult& out, const TrainPair& pair,
                     const models::ModelConfig& model_config, const TrainConfig& config);

// Optimizer steps walk the named parameter list in order. A non-finite
// gradient aborts with the parameter's name.
void adam_step(const std::vector<std::pair<std::string, ad::TensorPtr>>& params,
               OptimizerState& state, const TrainConfig& config);
void sgd_step(const std::vector<std::pair<std::string, ad::TensorPtr>>& params,
              OptimizerState& state, const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;
    Phase phase = Phase::adam;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double label_loss = 0.0;
    double forecast_loss = 0.0;
    double pose_loss = 0.0;
};

// Everything a resumed run needs to continue bit-identically.
struct TrainState {
    models::ModelConfig model_config;
    TrainConfig train_config;
    models::ModelParams params;
    OptimizerState opt;
    Rng rng;
    int next_epoch = 0;

    // carried for the CLI so forecasts can be written as proper sequences
    std::vector<std::string> joint_names;
    std::vector<std::string> class_names;
    std::vector<int> excluded_joints;
    double frame_rate_hz = 25.0;
};

TrainState make_train_state(const models::ModelConfig& model_config, const TrainConfig& config);

// Runs epochs next_epoch .. max_epochs-1. When checkpoint_path is non-empty
// the full state is written there after every epoch. A non-finite loss aborts
// with the last checkpoint intact.
std::vector<EpochRecord> train_loop(TrainState& state, const std::vector<TrainPair>& train_set,
                                    const std::vector<TrainPair>& val_set,
                                    const std::string& checkpoint_path = "",
                                    std::ostream* log = nullptr);

// full state into and out of the checkpoint container; load rebuilds the
// parameter tensors and verifies every stored shape
io::Checkpoint to_checkpoint(const TrainState& state);
TrainState from_checkpoint(const io::Checkpoint& ckpt);

// canonical key=value encodings (stored inside checkpoints)
std::string encode_model_config(const models::ModelConfig& c);
models::ModelConfig decode_model_config(const std::string& text);
std::string encode_train_config(const TrainConfig& c);
TrainConfig decode_train_config(const std::string& text);

const char* phase_name(Phase phase);

}  // namespace symfore::train
