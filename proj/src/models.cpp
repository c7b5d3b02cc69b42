#include "symfore/models.hpp"

#include <cmath>

#include "symfore/error.hpp"

namespace symfore::models {

namespace {

ad::TensorPtr init_uniform(std::vector<std::size_t> shape, double bound, Rng& rng) {
    std::vector<double> v(ad::shape_product(shape));
    for (double& x : v) x = rng.uniform(-bound, bound);
    return ad::Tensor::param(std::move(shape), std::move(v));
}

ad::TensorPtr zero_param(std::vector<std::size_t> shape) {
    auto t = ad::Tensor::zeros(std::move(shape));
    t->requires_grad = true;
    t->tracked = true;
    return t;
}

ConvParams init_conv(std::size_t c_out, std::size_t c_in, std::size_t k, bool weight_norm,
                     Rng& rng) {
    ConvParams conv;
    const double bound = 1.0 / std::sqrt(static_cast<double>(c_in * k));
    conv.kernel = init_uniform({c_out, c_in, k}, bound, rng);
    if (weight_norm) {
        // gain starts at the direction norms so the effective kernel equals it
        std::vector<double> g(c_out, 0.0);
        const std::size_t per = c_in * k;
        for (std::size_t o = 0; o < c_out; ++o) {
            double nsq = 0.0;
            for (std::size_t i = 0; i < per; ++i) {
                const double v = conv.kernel->values[o * per + i];
                nsq += v * v;
            }
            g[o] = std::sqrt(nsq);
        }
        conv.gain = ad::Tensor::param({c_out}, std::move(g));
    }
    conv.bias = zero_param({c_out, 1});
    return conv;
}

LinearParams init_linear(std::size_t in, std::size_t out, Rng& rng) {
    LinearParams lin;
    lin.weight = init_uniform({in, out}, 1.0 / std::sqrt(static_cast<double>(in)), rng);
    lin.bias = zero_param({1, out});
    return lin;
}

GruParams init_gru(int input_size, int hidden_size, Rng& rng) {
    GruParams gru;
    gru.input_size = input_size;
    gru.hidden_size = hidden_size;
    const auto in = static_cast<std::size_t>(input_size);
    const auto h = static_cast<std::size_t>(hidden_size);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    if (input_size > 0) {
        gru.w_update = init_uniform({in, h}, bound, rng);
        gru.w_reset = init_uniform({in, h}, bound, rng);
        gru.w_cand = init_uniform({in, h}, bound, rng);
    }
    gru.u_update = init_uniform({h, h}, bound, rng);
    gru.u_reset = init_uniform({h, h}, bound, rng);
    gru.u_cand = init_uniform({h, h}, bound, rng);
    gru.b_update = zero_param({1, h});
    gru.b_reset = zero_param({1, h});
    gru.b_cand = zero_param({1, h});
    return gru;
}

ad::TensorPtr linear(ad::Tape& tape, const LinearParams& lin, const ad::TensorPtr& x) {
    return ad::add(tape, ad::matmul(tape, x, lin.weight), lin.bias);
}

ad::TensorPtr conv_kernel(ad::Tape& tape, const ConvParams& conv) {
    if (conv.gain) return ad::weight_norm_conv(tape, conv.kernel, conv.gain);
    return conv.kernel;
}

// conv + channel bias on channels-first data [C x T]
ad::TensorPtr conv_layer(ad::Tape& tape, const ConvParams& conv, const ad::TensorPtr& x,
                         int dilation) {
    auto y = ad::dilated_causal_conv1d(tape, x, conv_kernel(tape, conv), dilation);
    return ad::add(tape, y, conv.bias);
}

void append_conv(std::vector<std::pair<std::string, ad::TensorPtr>>& out, const std::string& name,
                 const ConvParams& conv) {
    out.emplace_back(name + ".w", conv.kernel);
    if (conv.gain) out.emplace_back(name + ".g", conv.gain);
    out.emplace_back(name + ".b", conv.bias);
}

void append_linear(std::vector<std::pair<std::string, ad::TensorPtr>>& out,
                   const std::string& name, const LinearParams& lin) {
    out.emplace_back(name + ".w", lin.weight);
    out.emplace_back(name + ".b", lin.bias);
}

void append_gru(std::vector<std::pair<std::string, ad::TensorPtr>>& out, const std::string& name,
                const GruParams& gru) {
    const char* gates[] = {"update", "reset", "cand"};
    const ad::TensorPtr w[] = {gru.w_update, gru.w_reset, gru.w_cand};
    const ad::TensorPtr u[] = {gru.u_update, gru.u_reset, gru.u_cand};
    const ad::TensorPtr b[] = {gru.b_update, gru.b_reset, gru.b_cand};
    for (int i = 0; i < 3; ++i) {
        if (w[i]) out.emplace_back(name + "." + gates[i] + ".w", w[i]);
        out.emplace_back(name + "." + gates[i] + ".u", u[i]);
        out.emplace_back(name + "." + gates[i] + ".b", b[i]);
    }
}

}  // namespace

void ModelConfig::validate() const {
    if (label_count < 2) throw ParameterError("label_count must be >= 2");
    if (pose_dim < 3 || pose_dim % 3 != 0) {
        throw ParameterError("pose_dim must be a positive multiple of 3, got " +
                             std::to_string(pose_dim));
    }
    if (observed_frames < 1 || total_frames <= observed_frames) {
        throw ParameterError("need total_frames > observed_frames >= 1");
    }
    if (warmup_frames < 0 || warmup_frames > observed_frames) {
        throw ParameterError("warmup must satisfy 0 <= w <= observed frames, got " +
                             std::to_string(warmup_frames));
    }
    if (tcn_channels < 1 || tcn_blocks < 1 || tcn_kernel < 1 || forecaster_hidden < 1 ||
        pose_encoder_hidden < 1 || label_encoder_hidden < 1) {
        throw ParameterError("all layer sizes must be positive");
    }
}

ModelParams init_model(const ModelConfig& config, Rng& rng) {
    config.validate();
    const auto d = static_cast<std::size_t>(config.pose_dim);
    const auto n = static_cast<std::size_t>(config.label_count);
    const auto channels = static_cast<std::size_t>(config.tcn_channels);

    ModelParams m;
    m.label_predictor.weight_norm = config.tcn_weight_norm;
    m.label_predictor.input_proj = init_conv(channels, d, 1, config.tcn_weight_norm, rng);
    int dilation = 1;
    for (int b = 0; b < config.tcn_blocks; ++b) {
        TcnBlockParams block;
        block.dilation = dilation;
        block.conv1 = init_conv(channels, channels, static_cast<std::size_t>(config.tcn_kernel),
                                config.tcn_weight_norm, rng);
        block.conv2 = init_conv(channels, channels, static_cast<std::size_t>(config.tcn_kernel),
                                config.tcn_weight_norm, rng);
        m.label_predictor.blocks.push_back(std::move(block));
        dilation *= 2;
    }
    m.label_predictor.output = init_linear(channels, n, rng);

    m.forecast_encoder = init_gru(config.pose_dim + config.label_count, config.forecaster_hidden, rng);
    m.forecast_decoder = init_gru(config.decoder_feedback ? config.label_count : 0,
                                  config.forecaster_hidden, rng);
    m.forecast_head = init_linear(static_cast<std::size_t>(config.forecaster_hidden), n, rng);
    m.label_encoder = init_gru(config.label_count, config.label_encoder_hidden, rng);
    m.pose_encoder = init_gru(config.pose_dim, config.pose_encoder_hidden, rng);
    m.generator = init_gru(config.pose_dim + config.label_count, config.generator_hidden(), rng);
    m.generator_head = init_linear(static_cast<std::size_t>(config.generator_hidden()), d, rng);
    return m;
}

std::vector<std::pair<std::string, ad::TensorPtr>> named_params(const ModelParams& params) {
    std::vector<std::pair<std::string, ad::TensorPtr>> out;
    append_conv(out, "label_predictor.in_proj", params.label_predictor.input_proj);
    for (std::size_t b = 0; b < params.label_predictor.blocks.size(); ++b) {
        const std::string prefix = "label_predictor.block" + std::to_string(b);
        append_conv(out, prefix + ".conv1", params.label_predictor.blocks[b].conv1);
        append_conv(out, prefix + ".conv2", params.label_predictor.blocks[b].conv2);
    }
    append_linear(out, "label_predictor.out", params.label_predictor.output);
    append_gru(out, "forecast_encoder", params.forecast_encoder);
    append_gru(out, "forecast_decoder", params.forecast_decoder);
    append_linear(out, "forecast_head", params.forecast_head);
    append_gru(out, "label_encoder", params.label_encoder);
    append_gru(out, "pose_encoder", params.pose_encoder);
    append_gru(out, "generator", params.generator);
    append_linear(out, "generator_head", params.generator_head);
    return out;
}

ad::TensorPtr tcn_forward(ad::Tape& tape, const TcnParams& params, const ad::TensorPtr& poses) {
    if (poses->rank() != 2 || poses->cols() != params.input_proj.kernel->shape[1]) {
        throw DimensionError("pose matrix " + poses->shape_str() +
                             " does not match the label predictor input width " +
                             std::to_string(params.input_proj.kernel->shape[1]));
    }
    auto h = conv_layer(tape, params.input_proj, ad::transpose(tape, poses), 1);
    for (const TcnBlockParams& block : params.blocks) {
        auto f = ad::relu(tape, conv_layer(tape, block.conv1, h, block.dilation));
        f = ad::relu(tape, conv_layer(tape, block.conv2, f, block.dilation));
        h = ad::relu(tape, ad::add(tape, h, f));
    }
    auto logits = linear(tape, params.output, ad::transpose(tape, h));
    return ad::softmax(tape, logits);
}

ad::TensorPtr gru_step(ad::Tape& tape, const GruParams& params, const ad::TensorPtr& hidden,
                       const ad::TensorPtr& input) {
    const bool has_input = params.input_size > 0;
    if (has_input && !input) throw ContractError("gru_step: cell expects an input row");

    auto gate_pre = [&](const ad::TensorPtr& w, const ad::TensorPtr& u, const ad::TensorPtr& b,
                        const ad::TensorPtr& h_for_u) {
        auto pre = ad::add(tape, ad::matmul(tape, h_for_u, u), b);
        if (has_input) pre = ad::add(tape, pre, ad::matmul(tape, input, w));
        return pre;
    };

    auto update = ad::sigmoid(tape, gate_pre(params.w_update, params.u_update, params.b_update, hidden));
    auto reset = ad::sigmoid(tape, gate_pre(params.w_reset, params.u_reset, params.b_reset, hidden));
    auto gated = ad::mul(tape, reset, hidden);
    auto candidate = ad::tanh(tape, gate_pre(params.w_cand, params.u_cand, params.b_cand, gated));
    auto keep = ad::add_scalar(tape, ad::scale(tape, update, -1.0), 1.0);
    return ad::add(tape, ad::mul(tape, keep, hidden), ad::mul(tape, update, candidate));
}

ad::TensorPtr encode_rows(ad::Tape& tape, const GruParams& params, const ad::TensorPtr& rows) {
    if (rows->rank() != 2 || rows->cols() != static_cast<std::size_t>(params.input_size)) {
        throw DimensionError("encoder input " + rows->shape_str() + " does not match input size " +
                             std::to_string(params.input_size));
    }
    auto hidden = ad::Tensor::zeros({1, static_cast<std::size_t>(params.hidden_size)});
    for (std::size_t t = 0; t < rows->rows(); ++t) {
        hidden = gru_step(tape, params, hidden, ad::rows(tape, rows, t, t + 1));
    }
    return hidden;
}

ad::TensorPtr encode_sequence(ad::Tape& tape, const GruParams& params, const ad::TensorPtr& poses,
                              const ad::TensorPtr& labels) {
    if (poses->rows() != labels->rows()) {
        throw DimensionError("pose and label sequences differ in length: " + poses->shape_str() +
                             " vs " + labels->shape_str());
    }
    return encode_rows(tape, params, ad::concat(tape, poses, labels, 1));
}

ad::TensorPtr decode_labels(ad::Tape& tape, const GruParams& params, const LinearParams& head,
                            ad::TensorPtr hidden, int steps, bool feedback,
                            ad::TensorPtr first_feedback) {
    if (steps < 1) throw ParameterError("decode_labels needs steps >= 1");
    if (feedback && !first_feedback) {
        throw ContractError("decode_labels: feedback decoding needs the seed distribution");
    }
    std::vector<ad::TensorPtr> outputs;
    outputs.reserve(static_cast<std::size_t>(steps));
    ad::TensorPtr prev = std::move(first_feedback);
    for (int s = 0; s < steps; ++s) {
        hidden = gru_step(tape, params, hidden, feedback ? prev : nullptr);
        auto probs = ad::softmax(tape, linear(tape, head, hidden));
        outputs.push_back(probs);
        prev = probs;
    }
    return ad::vstack(tape, outputs);
}

ad::TensorPtr init_generator_state(ad::Tape& tape, const ModelParams& params,
                                   const ModelConfig& config, const ad::TensorPtr& full_labels,
                                   const ad::TensorPtr& observed_poses) {
    auto label_vec = config.use_label_encoder
                         ? encode_rows(tape, params.label_encoder, full_labels)
                         : ad::Tensor::zeros({1, static_cast<std::size_t>(config.label_encoder_hidden)});
    auto pose_vec = config.use_pose_encoder
                        ? encode_rows(tape, params.pose_encoder, observed_poses)
                        : ad::Tensor::zeros({1, static_cast<std::size_t>(config.pose_encoder_hidden)});
    return ad::concat(tape, label_vec, pose_vec, 1);
}

ad::TensorPtr generate_poses(ad::Tape& tape, const ModelParams& params, const ModelConfig& config,
                             ad::TensorPtr hidden, const ad::TensorPtr& seed_pose,
                             const ad::TensorPtr& step_labels) {
    if (config.warmup_frames > config.observed_frames) {
        throw ConfigError("warmup exceeds the observed window");
    }
    const std::size_t steps = step_labels->rows();
    const auto n = static_cast<std::size_t>(config.label_count);
    if (step_labels->cols() != n) {
        throw DimensionError("step labels " + step_labels->shape_str() + " need " +
                             std::to_string(n) + " columns");
    }
    std::vector<ad::TensorPtr> outputs;
    outputs.reserve(steps);
    ad::TensorPtr prev_pose = seed_pose;
    auto zero_label = ad::Tensor::zeros({1, n});
    for (std::size_t s = 0; s < steps; ++s) {
        auto label_row = config.use_label_concat ? ad::rows(tape, step_labels, s, s + 1) : zero_label;
        auto input = ad::concat(tape, prev_pose, label_row, 1);
        hidden = gru_step(tape, params.generator, hidden, input);
        auto pose = linear(tape, params.generator_head, hidden);
        outputs.push_back(pose);
        prev_pose = pose;
    }
    return ad::vstack(tape, outputs);
}

ForwardResult full_forward(ad::Tape& tape, const ModelParams& params, const ModelConfig& config,
                           const ad::TensorPtr& observed_poses, Mode mode,
                           const data::LabelSequence* gt_labels) {
    config.validate();
    const auto t = static_cast<std::size_t>(config.observed_frames);
    const auto total = static_cast<std::size_t>(config.total_frames);
    const auto n = config.label_count;
    if (observed_poses->rows() != t ||
        observed_poses->cols() != static_cast<std::size_t>(config.pose_dim)) {
        throw DimensionError("observed poses " + observed_poses->shape_str() + " must be [" +
                             std::to_string(t) + " x " + std::to_string(config.pose_dim) + "]");
    }
    if (config.warmup_frames >= config.observed_frames && config.warmup_frames > 0) {
        throw ConfigError("warmup must leave at least one observed frame as the rollout seed");
    }

    ForwardResult result;
    result.observed_label_probs = tcn_forward(tape, params.label_predictor, observed_poses);

    auto one_hot_rows = [&](const std::vector<int>& ids) {
        auto out = ad::Tensor::zeros({ids.size(), static_cast<std::size_t>(n)});
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] < 0 || ids[i] >= n) {
                throw RangeError("label id " + std::to_string(ids[i]) + " outside 0.." +
                                 std::to_string(n - 1));
            }
            out->values[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(ids[i])] = 1.0;
        }
        return out;
    };

    ad::TensorPtr cond_observed;  // [t x n] fed into the forecaster
    if (mode == Mode::train) {
        if (!gt_labels || gt_labels->size() != total) {
            throw ContractError("train mode needs one ground-truth label per frame");
        }
        cond_observed = one_hot_rows({gt_labels->begin(), gt_labels->begin() + t});
    } else {
        cond_observed = one_hot_rows(ad::argmax_rows(*result.observed_label_probs));
    }

    auto encoded = encode_sequence(tape, params.forecast_encoder, observed_poses, cond_observed);
    auto last_observed_label = ad::rows(tape, cond_observed, t - 1, t);
    result.future_label_probs =
        decode_labels(tape, params.forecast_decoder, params.forecast_head, encoded,
                      config.horizon(), config.decoder_feedback, last_observed_label);

    ad::TensorPtr cond_future;  // [(T-t) x n] fed into the generator path
    if (mode == Mode::train) {
        cond_future = one_hot_rows({gt_labels->begin() + t, gt_labels->end()});
    } else {
        cond_future = one_hot_rows(ad::argmax_rows(*result.future_label_probs));
    }
    result.conditioning_labels = ad::vstack(tape, {cond_observed, cond_future});

    auto state = init_generator_state(tape, params, config, result.conditioning_labels,
                                      observed_poses);
    const auto w = static_cast<std::size_t>(config.warmup_frames);
    auto seed = ad::rows(tape, observed_poses, t - w - 1, t - w);
    auto step_labels = ad::rows(tape, result.conditioning_labels, t - w, total);
    result.generated_poses = generate_poses(tape, params, config, state, seed, step_labels);
    return result;
}

std::size_t theoretical_receptive_field(const ModelConfig& config) {
    std::size_t field = 1;
    int dilation = 1;
    for (int b = 0; b < config.tcn_blocks; ++b) {
        field += 2 * static_cast<std::size_t>(config.tcn_kernel - 1) *
                 static_cast<std::size_t>(dilation);
        dilation *= 2;
    }
    return field;
}

std::size_t measure_receptive_field(const ModelConfig& config, std::size_t probe_frames) {
    // all-positive weights and active relus so any influence must propagate
    ModelConfig probe = config;
    probe.tcn_channels = 4;
    probe.tcn_weight_norm = false;
    Rng rng(1234);
    ModelParams params;
    auto positive_conv = [&](std::size_t c_out, std::size_t c_in, std::size_t k) {
        ConvParams conv;
        std::vector<double> v(c_out * c_in * k);
        for (double& x : v) x = rng.uniform(0.05, 0.15);
        conv.kernel = ad::Tensor::from({c_out, c_in, k}, std::move(v));
        conv.bias = ad::Tensor::full({c_out, 1}, 0.01);
        return conv;
    };
    const auto channels = static_cast<std::size_t>(probe.tcn_channels);
    params.label_predictor.input_proj = positive_conv(channels, 1, 1);
    int dilation = 1;
    for (int b = 0; b < probe.tcn_blocks; ++b) {
        TcnBlockParams block;
        block.dilation = dilation;
        block.conv1 = positive_conv(channels, channels, static_cast<std::size_t>(probe.tcn_kernel));
        block.conv2 = positive_conv(channels, channels, static_cast<std::size_t>(probe.tcn_kernel));
        params.label_predictor.blocks.push_back(std::move(block));
        dilation *= 2;
    }

    auto run_stack = [&](const ad::TensorPtr& x) {
        ad::Tape tape;
        auto h = conv_layer(tape, params.label_predictor.input_proj, ad::transpose(tape, x), 1);
        for (const TcnBlockParams& block : params.label_predictor.blocks) {
            auto f = ad::relu(tape, conv_layer(tape, block.conv1, h, block.dilation));
            f = ad::relu(tape, conv_layer(tape, block.conv2, f, block.dilation));
            h = ad::relu(tape, ad::add(tape, h, f));
        }
        return h;
    };

    auto x = ad::Tensor::zeros({probe_frames, 1});
    auto base = run_stack(x);
    const std::size_t last = probe_frames - 1;
    std::size_t field = 1;
    for (std::size_t back = 1; back < probe_frames; ++back) {
        auto perturbed = ad::Tensor::from(x->shape, x->values);
        perturbed->values[last - back] = 1.0;
        auto probed = run_stack(perturbed);
        bool changed = false;
        for (std::size_t c = 0; c < channels && !changed; ++c) {
            changed = probed->values[c * probe_frames + last] != base->values[c * probe_frames + last];
        }
        if (changed) field = back + 1;
    }
    return field;
}

}  // namespace symfore::models
