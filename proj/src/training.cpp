#include "symfore/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "symfore/checkpoint.hpp"
#include "symfore/error.hpp"

namespace symfore::train {

namespace {

std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double scalar(const ad::TensorPtr& t) { return t->values[0]; }

}  // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
    if (adam_lr <= 0 || sgd_lr <= 0) throw ParameterError("learning rates must be positive");
    if (adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 || adam_beta2 >= 1) {
        throw ParameterError("adam betas must lie in [0, 1)");
    }
    if (adam_eps <= 0) throw ParameterError("adam_eps must be positive");
    if (plateau_patience < 1) throw ParameterError("plateau_patience must be >= 1");
    if (max_epochs < 1) throw ParameterError("max_epochs must be >= 1");
    if (val_fraction < 0 || val_fraction >= 1) throw ParameterError("val_fraction must be in [0, 1)");
    if (grad_clip < 0) throw ParameterError("grad_clip must be >= 0");
}

void OptimizerState::init_moments(
    const std::vector<std::pair<std::string, ad::TensorPtr>>& params) {
    first_moment.clear();
    second_moment.clear();
    for (const auto& [name, tensor] : params) {
        first_moment.emplace_back(tensor->size(), 0.0);
        second_moment.emplace_back(tensor->size(), 0.0);
    }
}

LossTerms total_loss(ad::Tape& tape, const models::ForwardResult& out, const TrainPair& pair,
                     const models::ModelConfig& model_config, const TrainConfig& config) {
    const auto t = static_cast<std::size_t>(model_config.observed_frames);
    const auto total = static_cast<std::size_t>(model_config.total_frames);
    const auto w = static_cast<std::size_t>(model_config.warmup_frames);
    if (pair.labels.size() != total) {
        throw DimensionError("training pair needs " + std::to_string(total) + " labels, got " +
                             std::to_string(pair.labels.size()));
    }
    if (pair.poses->rows() != total) {
        throw DimensionError("training pair needs " + std::to_string(total) + " pose frames, got " +
                             std::to_string(pair.poses->rows()));
    }

    LossTerms terms;
    terms.label = ad::cross_entropy(tape, out.observed_label_probs,
                                    std::span<const int>(pair.labels.data(), t));
    terms.forecast = ad::cross_entropy(tape, out.future_label_probs,
                                       std::span<const int>(pair.labels.data() + t, total - t));

    ad::TensorPtr pred = out.generated_poses;
    ad::TensorPtr target;
    if (config.loss_includes_warmup) {
        target = ad::rows(tape, pair.poses, t - w, total);
    } else {
        pred = ad::rows(tape, pred, w, pred->rows());
        target = ad::rows(tape, pair.poses, t, total);
    }
    terms.pose = ad::l2_pose_loss(tape, pred, target);

    terms.total = ad::add(tape,
                          ad::add(tape, ad::scale(tape, terms.label, config.lambda_label),
                                  ad::scale(tape, terms.forecast, config.lambda_forecast)),
                          ad::scale(tape, terms.pose, config.lambda_pose));
    return terms;
}

namespace {

void check_gradients_finite(const std::vector<std::pair<std::string, ad::TensorPtr>>& params) {
    for (const auto& [name, tensor] : params) {
        for (double g : tensor->grad) {
            if (!std::isfinite(g)) {
                throw NumericError("non-finite gradient in parameter '" + name + "'");
            }
        }
    }
}

void clip_gradients(const std::vector<std::pair<std::string, ad::TensorPtr>>& params,
                    double max_norm) {
    if (max_norm <= 0) return;
    double norm_sq = 0.0;
    for (const auto& [name, tensor] : params)
        for (double g : tensor->grad) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (const auto& [name, tensor] : params)
        for (double& g : tensor->grad) g *= scale;
}

}  // namespace

void adam_step(const std::vector<std::pair<std::string, ad::TensorPtr>>& params,
               OptimizerState& state, const TrainConfig& config) {
    if (state.first_moment.size() != params.size()) state.init_moments(params);
    check_gradients_finite(params);
    clip_gradients(params, config.grad_clip);
    state.step += 1;
    const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& tensor = params[p].second;
        auto& m = state.first_moment[p];
        auto& v = state.second_moment[p];
        for (std::size_t i = 0; i < tensor->size(); ++i) {
            const double g = tensor->grad.empty() ? 0.0 : tensor->grad[i];
            m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g;
            v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g * g;
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            tensor->values[i] -= config.adam_lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
        }
    }
}

void sgd_step(const std::vector<std::pair<std::string, ad::TensorPtr>>& params,
              OptimizerState& state, const TrainConfig& config) {
    check_gradients_finite(params);
    clip_gradients(params, config.grad_clip);
    state.step += 1;
    for (const auto& [name, tensor] : params) {
        if (tensor->grad.empty()) continue;
        for (std::size_t i = 0; i < tensor->size(); ++i) {
            tensor->values[i] -= config.sgd_lr * tensor->grad[i];
        }
    }
}

TrainState make_train_state(const models::ModelConfig& model_config, const TrainConfig& config) {
    model_config.validate();
    config.validate();
    TrainState state;
    state.model_config = model_config;
    state.train_config = config;
    state.rng = Rng(config.seed);
    state.params = models::init_model(model_config, state.rng);
    state.opt.init_moments(models::named_params(state.params));
    return state;
}

namespace {

ad::TensorPtr observed_chunk(ad::Tape& tape, const TrainPair& pair,
                             const models::ModelConfig& mc) {
    return ad::rows(tape, pair.poses, 0, static_cast<std::size_t>(mc.observed_frames));
}

double evaluate_mean_loss(TrainState& state, const std::vector<TrainPair>& pairs) {
    if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (const TrainPair& pair : pairs) {
        ad::Tape tape;
        auto out = models::full_forward(tape, state.params, state.model_config,
                                        observed_chunk(tape, pair, state.model_config),
                                        models::Mode::train, &pair.labels);
        total += scalar(total_loss(tape, out, pair, state.model_config, state.train_config).total);
    }
    return total / static_cast<double>(pairs.size());
}

}  // namespace

std::vector<EpochRecord> train_loop(TrainState& state, const std::vector<TrainPair>& train_set,
                                    const std::vector<TrainPair>& val_set,
                                    const std::string& checkpoint_path, std::ostream* log) {
    state.model_config.validate();
    state.train_config.validate();
    if (train_set.empty()) throw DataError("training set is empty");
    const TrainConfig& cfg = state.train_config;
    auto params = models::named_params(state.params);
    if (state.opt.first_moment.size() != params.size()) state.opt.init_moments(params);

    std::vector<EpochRecord> history;
    std::vector<std::size_t> order(train_set.size());
    for (int epoch = state.next_epoch; epoch < cfg.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        state.rng.shuffle(order);

        double sum_total = 0, sum_label = 0, sum_forecast = 0, sum_pose = 0;
        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t batch_end =
                std::min(order.size(), batch_start + static_cast<std::size_t>(cfg.batch_size));
            for (const auto& [name, tensor] : params) tensor->zero_grad();

            ad::Tape tape;
            ad::TensorPtr batch_sum;
            for (std::size_t b = batch_start; b < batch_end; ++b) {
                const TrainPair& pair = train_set[order[b]];
                auto out = models::full_forward(tape, state.params, state.model_config,
                                                observed_chunk(tape, pair, state.model_config),
                                                models::Mode::train, &pair.labels);
                auto terms = total_loss(tape, out, pair, state.model_config, cfg);
                sum_total += scalar(terms.total);
                sum_label += scalar(terms.label);
                sum_forecast += scalar(terms.forecast);
                sum_pose += scalar(terms.pose);
                batch_sum = batch_sum ? ad::add(tape, batch_sum, terms.total) : terms.total;
            }
            auto batch_mean =
                ad::scale(tape, batch_sum, 1.0 / static_cast<double>(batch_end - batch_start));
            if (!std::isfinite(scalar(batch_mean))) {
                throw NumericError("training loss became non-finite in epoch " +
                                   std::to_string(epoch) + "; last checkpoint kept");
            }
            tape.backward(batch_mean);
            if (state.opt.phase == Phase::adam) {
                adam_step(params, state.opt, cfg);
            } else {
                sgd_step(params, state.opt, cfg);
            }
        }

        const auto n = static_cast<double>(train_set.size());
        EpochRecord rec;
        rec.epoch = epoch;
        rec.phase = state.opt.phase;
        rec.train_loss = sum_total / n;
        rec.label_loss = sum_label / n;
        rec.forecast_loss = sum_forecast / n;
        rec.pose_loss = sum_pose / n;
        const double val = evaluate_mean_loss(state, val_set);
        rec.val_loss = std::isnan(val) ? rec.train_loss : val;
        history.push_back(rec);

        if (log) {
            (*log) << "epoch=" << epoch << " phase=" << phase_name(rec.phase)
                   << " train=" << fmt_g17(rec.train_loss) << " val=" << fmt_g17(rec.val_loss)
                   << " label=" << fmt_g17(rec.label_loss)
                   << " forecast=" << fmt_g17(rec.forecast_loss)
                   << " pose=" << fmt_g17(rec.pose_loss) << "\n";
        }

        // plateau detection drives the single adam -> sgd transition
        if (state.opt.best_val - rec.val_loss >= cfg.plateau_min_improve) {
            state.opt.best_val = rec.val_loss;
            state.opt.epochs_since_improve = 0;
        } else {
            state.opt.epochs_since_improve += 1;
            if (state.opt.phase == Phase::adam &&
                state.opt.epochs_since_improve >= cfg.plateau_patience) {
                state.opt.phase = Phase::sgd;
                state.opt.switch_epoch = epoch + 1;
                state.opt.epochs_since_improve = 0;
            }
        }

        state.next_epoch = epoch + 1;
        if (!checkpoint_path.empty()) to_checkpoint(state).save(checkpoint_path);
    }
    return history;
}

const char* phase_name(Phase phase) { return phase == Phase::adam ? "adam" : "sgd"; }

// ---- config and state serialization ----

namespace {

std::vector<std::pair<std::string, std::string>> parse_kv_lines(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("malformed config line '" + line + "'");
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw DataError("expected a boolean, got '" + v + "'");
}

std::string join_list(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string encode_model_config(const models::ModelConfig& c) {
    std::ostringstream out;
    out << "label_count=" << c.label_count << "\npose_dim=" << c.pose_dim
        << "\nobserved_frames=" << c.observed_frames << "\ntotal_frames=" << c.total_frames
        << "\nwarmup_frames=" << c.warmup_frames
        << "\nuse_label_concat=" << (c.use_label_concat ? "true" : "false")
        << "\nuse_label_encoder=" << (c.use_label_encoder ? "true" : "false")
        << "\nuse_pose_encoder=" << (c.use_pose_encoder ? "true" : "false")
        << "\ndecoder_feedback=" << (c.decoder_feedback ? "true" : "false")
        << "\ntcn_weight_norm=" << (c.tcn_weight_norm ? "true" : "false")
        << "\ntcn_channels=" << c.tcn_channels << "\ntcn_blocks=" << c.tcn_blocks
        << "\ntcn_kernel=" << c.tcn_kernel << "\nforecaster_hidden=" << c.forecaster_hidden
        << "\npose_encoder_hidden=" << c.pose_encoder_hidden
        << "\nlabel_encoder_hidden=" << c.label_encoder_hidden << "\n";
    return out.str();
}

models::ModelConfig decode_model_config(const std::string& text) {
    models::ModelConfig c;
    for (const auto& [key, value] : parse_kv_lines(text)) {
        if (key == "label_count") c.label_count = std::stoi(value);
        else if (key == "pose_dim") c.pose_dim = std::stoi(value);
        else if (key == "observed_frames") c.observed_frames = std::stoi(value);
        else if (key == "total_frames") c.total_frames = std::stoi(value);
        else if (key == "warmup_frames") c.warmup_frames = std::stoi(value);
        else if (key == "use_label_concat") c.use_label_concat = parse_bool(value);
        else if (key == "use_label_encoder") c.use_label_encoder = parse_bool(value);
        else if (key == "use_pose_encoder") c.use_pose_encoder = parse_bool(value);
        else if (key == "decoder_feedback") c.decoder_feedback = parse_bool(value);
        else if (key == "tcn_weight_norm") c.tcn_weight_norm = parse_bool(value);
        else if (key == "tcn_channels") c.tcn_channels = std::stoi(value);
        else if (key == "tcn_blocks") c.tcn_blocks = std::stoi(value);
        else if (key == "tcn_kernel") c.tcn_kernel = std::stoi(value);
        else if (key == "forecaster_hidden") c.forecaster_hidden = std::stoi(value);
        else if (key == "pose_encoder_hidden") c.pose_encoder_hidden = std::stoi(value);
        else if (key == "label_encoder_hidden") c.label_encoder_hidden = std::stoi(value);
        else throw DataError("unknown model config key '" + key + "'");
    }
    return c;
}

std::string encode_train_config(const TrainConfig& c) {
    std::ostringstream out;
    out << "batch_size=" << c.batch_size << "\nadam_lr=" << fmt_g17(c.adam_lr)
        << "\nsgd_lr=" << fmt_g17(c.sgd_lr) << "\nadam_beta1=" << fmt_g17(c.adam_beta1)
        << "\nadam_beta2=" << fmt_g17(c.adam_beta2) << "\nadam_eps=" << fmt_g17(c.adam_eps)
        << "\nplateau_patience=" << c.plateau_patience
        << "\nplateau_min_improve=" << fmt_g17(c.plateau_min_improve)
        << "\nlambda_label=" << fmt_g17(c.lambda_label)
        << "\nlambda_forecast=" << fmt_g17(c.lambda_forecast)
        << "\nlambda_pose=" << fmt_g17(c.lambda_pose) << "\nmax_epochs=" << c.max_epochs
        << "\nseed=" << c.seed
        << "\nloss_includes_warmup=" << (c.loss_includes_warmup ? "true" : "false")
        << "\ngrad_clip=" << fmt_g17(c.grad_clip) << "\nval_fraction=" << fmt_g17(c.val_fraction)
        << "\n";
    return out.str();
}

TrainConfig decode_train_config(const std::string& text) {
    TrainConfig c;
    for (const auto& [key, value] : parse_kv_lines(text)) {
        if (key == "batch_size") c.batch_size = std::stoi(value);
        else if (key == "adam_lr") c.adam_lr = std::stod(value);
        else if (key == "sgd_lr") c.sgd_lr = std::stod(value);
        else if (key == "adam_beta1") c.adam_beta1 = std::stod(value);
        else if (key == "adam_beta2") c.adam_beta2 = std::stod(value);
        else if (key == "adam_eps") c.adam_eps = std::stod(value);
        else if (key == "plateau_patience") c.plateau_patience = std::stoi(value);
        else if (key == "plateau_min_improve") c.plateau_min_improve = std::stod(value);
        else if (key == "lambda_label") c.lambda_label = std::stod(value);
        else if (key == "lambda_forecast") c.lambda_forecast = std::stod(value);
        else if (key == "lambda_pose") c.lambda_pose = std::stod(value);
        else if (key == "max_epochs") c.max_epochs = std::stoi(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "loss_includes_warmup") c.loss_includes_warmup = parse_bool(value);
        else if (key == "grad_clip") c.grad_clip = std::stod(value);
        else if (key == "val_fraction") c.val_fraction = std::stod(value);
        else throw DataError("unknown train config key '" + key + "'");
    }
    return c;
}

io::Checkpoint to_checkpoint(const TrainState& state) {
    io::Checkpoint ckpt;
    ckpt.set_string("kind", "train_state");
    ckpt.set_string("model_config", encode_model_config(state.model_config));
    ckpt.set_string("train_config", encode_train_config(state.train_config));
    ckpt.set_string("rng_state", state.rng.state());
    ckpt.set_string("opt.phase", phase_name(state.opt.phase));
    ckpt.set_string("opt.step", std::to_string(state.opt.step));
    ckpt.set_string("opt.best_val", fmt_g17(state.opt.best_val));
    ckpt.set_string("opt.epochs_since_improve", std::to_string(state.opt.epochs_since_improve));
    ckpt.set_string("opt.switch_epoch", std::to_string(state.opt.switch_epoch));
    ckpt.set_string("next_epoch", std::to_string(state.next_epoch));
    ckpt.set_string("joint_names", join_list(state.joint_names));
    ckpt.set_string("class_names", join_list(state.class_names));
    ckpt.set_string("frame_rate_hz", fmt_g17(state.frame_rate_hz));
    std::string excluded;
    for (std::size_t i = 0; i < state.excluded_joints.size(); ++i) {
        if (i) excluded += ',';
        excluded += std::to_string(state.excluded_joints[i]);
    }
    ckpt.set_string("excluded_joints", excluded);

    const auto params = models::named_params(state.params);
    for (const auto& [name, tensor] : params) ckpt.set_array("param." + name, tensor);
    for (std::size_t p = 0; p < params.size(); ++p) {
        ckpt.set_array("opt.m." + params[p].first,
                       ad::Tensor::from({state.opt.first_moment[p].size()},
                                        state.opt.first_moment[p]));
        ckpt.set_array("opt.v." + params[p].first,
                       ad::Tensor::from({state.opt.second_moment[p].size()},
                                        state.opt.second_moment[p]));
    }
    return ckpt;
}

TrainState from_checkpoint(const io::Checkpoint& ckpt) {
    if (!ckpt.has_string("kind") || ckpt.string("kind") != "train_state") {
        throw DataError("checkpoint does not hold a training state");
    }
    TrainState state;
    state.model_config = decode_model_config(ckpt.string("model_config"));
    state.train_config = decode_train_config(ckpt.string("train_config"));
    Rng scratch(0);
    state.params = models::init_model(state.model_config, scratch);
    state.rng.restore(ckpt.string("rng_state"));
    state.opt.phase = ckpt.string("opt.phase") == std::string("sgd") ? Phase::sgd : Phase::adam;
    state.opt.step = std::stol(ckpt.string("opt.step"));
    state.opt.best_val = std::strtod(ckpt.string("opt.best_val").c_str(), nullptr);
    state.opt.epochs_since_improve = std::stoi(ckpt.string("opt.epochs_since_improve"));
    state.opt.switch_epoch = std::stoi(ckpt.string("opt.switch_epoch"));
    state.next_epoch = std::stoi(ckpt.string("next_epoch"));
    state.joint_names = split_list(ckpt.string("joint_names"));
    state.class_names = split_list(ckpt.string("class_names"));
    state.frame_rate_hz = std::strtod(ckpt.string("frame_rate_hz").c_str(), nullptr);
    for (const std::string& part : split_list(ckpt.string("excluded_joints"))) {
        state.excluded_joints.push_back(std::stoi(part));
    }

    const auto params = models::named_params(state.params);
    state.opt.first_moment.clear();
    state.opt.second_moment.clear();
    for (const auto& [name, tensor] : params) {
        const auto& stored = ckpt.array("param." + name);
        if (stored->shape != tensor->shape) {
            throw DataError("checkpoint array 'param." + name + "' has shape " +
                            stored->shape_str() + ", expected " + tensor->shape_str());
        }
        tensor->values = stored->values;
        tensor->zero_grad();
        state.opt.first_moment.push_back(ckpt.array("opt.m." + name)->values);
        state.opt.second_moment.push_back(ckpt.array("opt.v." + name)->values);
    }
    return state;
}

}  // namespace symfore::train
