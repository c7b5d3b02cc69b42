#pragma once

#include <string>
#include <utility>
#include <vector>

#include "symfore/ops.hpp"
#include "symfore/rng.hpp"
#include "symfore/sequence.hpp"

namespace symfore::models {

// Static shape of the whole network plus the ablation switches. Hidden sizes
// default to the full-scale configuration; desk-scale runs shrink them through
// the run config.
struct ModelConfig {
    int label_count = 11;      // n
    int pose_dim = 0;          // d = 3 * kept joints, must be set by the caller
    int observed_frames = 50;  // frames given to the model
    int total_frames = 75;     // observed + forecast horizon
    int warmup_frames = 24;    // generator re-estimates this many observed frames

    bool use_label_concat = true;   // label input to each generator step
    bool use_label_encoder = true;  // label-timeline half of the initial state
    bool use_pose_encoder = true;   // observed-pose half of the initial state
    bool decoder_feedback = false;  // feed previous label distribution into the decoder
    bool tcn_weight_norm = false;

    int tcn_channels = 256;
    int tcn_blocks = 5;  // dilation doubles per block: 1, 2, 4, 8, 16
    int tcn_kernel = 3;
    int forecaster_hidden = 512;    // sequence-to-sequence encoder and decoder
    int pose_encoder_hidden = 512;
    int label_encoder_hidden = 256;

    int horizon() const { return total_frames - observed_frames; }
    // sized to take the concatenated encoder states as its initial hidden state
    int generator_hidden() const { return label_encoder_hidden + pose_encoder_hidden; }

    void validate() const;
};

struct LinearParams {
    ad::TensorPtr weight;  // [in x out]
    ad::TensorPtr bias;    // [1 x out]
};

struct ConvParams {
    ad::TensorPtr kernel;  // [out x in x k]; direction vector when weight-normalized
    ad::TensorPtr gain;    // [out], only with weight norm
    ad::TensorPtr bias;    // [out x 1], broadcast over frames
};

struct TcnBlockParams {
    ConvParams conv1, conv2;
    int dilation = 1;
};

// Residual stack of dilated causal convolutions with a 1x1 input projection
// and a per-frame linear + softmax head.
struct TcnParams {
    ConvParams input_proj;  // 1x1, pose dim -> channels
    std::vector<TcnBlockParams> blocks;
    LinearParams output;    // channels -> label count
    bool weight_norm = false;
};

// Gate weights for one GRU cell; input weights are absent when the cell runs
// without input (the label decoder advances on hidden state alone).
struct GruParams {
    int input_size = 0;
    int hidden_size = 0;
    ad::TensorPtr w_update, u_update, b_update;
    ad::TensorPtr w_reset, u_reset, b_reset;
    ad::TensorPtr w_cand, u_cand, b_cand;
};

struct ModelParams {
    TcnParams label_predictor;
    GruParams forecast_encoder;   // consumes pose (+) label rows
    GruParams forecast_decoder;
    LinearParams forecast_head;   // hidden -> label logits
    GruParams label_encoder;      // full label timeline -> vector
    GruParams pose_encoder;       // observed poses -> vector
    GruParams generator;
    LinearParams generator_head;  // hidden -> pose
};

// Deterministic initialization: weights uniform in (-1/sqrt(width), ...),
// biases zero, draws consumed in named_params order.
ModelParams init_model(const ModelConfig& config, Rng& rng);

std::vector<std::pair<std::string, ad::TensorPtr>> named_params(const ModelParams& params);

// ---- forward functions (pure given parameters) ----

// [t x d] poses -> [t x n] per-frame label distributions, strictly causal
ad::TensorPtr tcn_forward(ad::Tape& tape, const TcnParams& params, const ad::TensorPtr& poses);

ad::TensorPtr gru_step(ad::Tape& tape, const GruParams& params, const ad::TensorPtr& hidden,
                       const ad::TensorPtr& input /* may be null for inputless cells */);

// run a GRU over the rows of [T x I], starting from zeros; returns the final
// hidden state [1 x H]
ad::TensorPtr encode_rows(ad::Tape& tape, const GruParams& params, const ad::TensorPtr& rows);

// encoder input is pose (+) label per frame
ad::TensorPtr encode_sequence(ad::Tape& tape, const GruParams& params, const ad::TensorPtr& poses,
                              const ad::TensorPtr& labels);

// autoregressive decoder: `steps` label distributions from the encoded state.
// Without feedback each step's input is empty; with feedback the previous
// distribution (seeded by `first_feedback`) is consumed.
ad::TensorPtr decode_labels(ad::Tape& tape, const GruParams& params, const LinearParams& head,
                            ad::TensorPtr hidden, int steps, bool feedback = false,
                            ad::TensorPtr first_feedback = nullptr);

// concatenated encoder states; disabled halves are zero-filled
ad::TensorPtr init_generator_state(ad::Tape& tape, const ModelParams& params,
                                   const ModelConfig& config, const ad::TensorPtr& full_labels,
                                   const ad::TensorPtr& observed_poses);

// rollout from the seed pose; step i consumes the previous estimate
// concatenated with step_labels row i
ad::TensorPtr generate_poses(ad::Tape& tape, const ModelParams& params, const ModelConfig& config,
                             ad::TensorPtr hidden, const ad::TensorPtr& seed_pose,
                             const ad::TensorPtr& step_labels);

enum class Mode { train, eval };

struct ForwardResult {
    ad::TensorPtr observed_label_probs;  // [t x n] softmax outputs
    ad::TensorPtr future_label_probs;    // [(T-t) x n] softmax outputs
    ad::TensorPtr generated_poses;       // [(T-t+w) x d], first w rows re-estimate observed frames
    ad::TensorPtr conditioning_labels;   // [T x n] rows actually fed downstream (one-hot)
};

// train mode: ground-truth labels (size T) are one-hot encoded and fed to the
// forecaster and the generator; eval mode feeds argmax outputs end-to-end.
ForwardResult full_forward(ad::Tape& tape, const ModelParams& params, const ModelConfig& config,
                           const ad::TensorPtr& observed_poses, Mode mode,
                           const data::LabelSequence* gt_labels = nullptr);

// perturbation probe: how many past frames (current included) can influence
// the last frame's output, measured on a propagation-friendly all-positive
// parameter set
std::size_t measure_receptive_field(const ModelConfig& config, std::size_t probe_frames);
std::size_t theoretical_receptive_field(const ModelConfig& config);

}  // namespace symfore::models
