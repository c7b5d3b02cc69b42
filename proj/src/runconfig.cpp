#include "symfore/runconfig.hpp"

#include <fstream>

#include "symfore/error.hpp"

namespace symfore::io {

namespace {

const std::map<std::string, std::string>& default_values() {
    static const std::map<std::string, std::string> defaults = {
        {"frame_rate_hz", "25"},
        {"observed_frames", "50"},
        {"total_frames", "75"},
        {"warmup_frames", "24"},
        {"label_count", "11"},
        {"pca_dim", "32"},
        {"kmeans_k", "11"},
        {"seed", "1"},
        {"tcn_channels", "256"},
        {"tcn_blocks", "5"},
        {"tcn_kernel", "3"},
        {"forecaster_hidden", "512"},
        {"pose_encoder_hidden", "512"},
        {"label_encoder_hidden", "256"},
        {"use_label_concat", "true"},
        {"use_label_encoder", "true"},
        {"use_pose_encoder", "true"},
        {"decoder_feedback", "false"},
        {"tcn_weight_norm", "false"},
        {"batch_size", "16"},
        {"adam_lr", "0.0005"},
        {"sgd_lr", "0.0001"},
        {"adam_beta1", "0.9"},
        {"adam_beta2", "0.999"},
        {"adam_eps", "1e-08"},
        {"plateau_patience", "5"},
        {"plateau_min_improve", "0.0001"},
        {"max_epochs", "50"},
        {"lambda_label", "1"},
        {"lambda_forecast", "1"},
        {"lambda_pose", "1"},
        {"loss_includes_warmup", "true"},
        {"grad_clip", "0"},
        {"val_fraction", "0.1"},
        {"train_stride", "10"},
        {"excluded_joints", ""},
        {"data_dir", "."},
        {"out_dir", "out"},
    };
    return defaults;
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    cfg.values_ = default_values();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    RunConfig cfg = defaults();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value, got '" +
                              line + "'");
        }
        cfg.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (default_values().find(key) == default_values().end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

const std::string& RunConfig::gets(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

int RunConfig::geti(const std::string& key) const {
    try {
        return std::stoi(gets(key));
    } catch (const std::logic_error&) {
        throw ConfigError("config key '" + key + "' is not an integer: '" + gets(key) + "'");
    }
}

std::uint64_t RunConfig::getu64(const std::string& key) const {
    try {
        return std::stoull(gets(key));
    } catch (const std::logic_error&) {
        throw ConfigError("config key '" + key + "' is not an unsigned integer: '" + gets(key) +
                          "'");
    }
}

double RunConfig::getd(const std::string& key) const {
    try {
        return std::stod(gets(key));
    } catch (const std::logic_error&) {
        throw ConfigError("config key '" + key + "' is not a number: '" + gets(key) + "'");
    }
}

bool RunConfig::getb(const std::string& key) const {
    const std::string& v = gets(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
    std::vector<int> out;
    const std::string& v = gets(key);
    std::string cur;
    for (char c : v + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    return out;
}

models::ModelConfig RunConfig::model_config(int pose_dim) const {
    models::ModelConfig c;
    c.label_count = geti("label_count");
    c.pose_dim = pose_dim;
    c.observed_frames = geti("observed_frames");
    c.total_frames = geti("total_frames");
    c.warmup_frames = geti("warmup_frames");
    c.use_label_concat = getb("use_label_concat");
    c.use_label_encoder = getb("use_label_encoder");
    c.use_pose_encoder = getb("use_pose_encoder");
    c.decoder_feedback = getb("decoder_feedback");
    c.tcn_weight_norm = getb("tcn_weight_norm");
    c.tcn_channels = geti("tcn_channels");
    c.tcn_blocks = geti("tcn_blocks");
    c.tcn_kernel = geti("tcn_kernel");
    c.forecaster_hidden = geti("forecaster_hidden");
    c.pose_encoder_hidden = geti("pose_encoder_hidden");
    c.label_encoder_hidden = geti("label_encoder_hidden");
    return c;
}

train::TrainConfig RunConfig::train_config() const {
    train::TrainConfig c;
    c.batch_size = geti("batch_size");
    c.adam_lr = getd("adam_lr");
    c.sgd_lr = getd("sgd_lr");
    c.adam_beta1 = getd("adam_beta1");
    c.adam_beta2 = getd("adam_beta2");
    c.adam_eps = getd("adam_eps");
    c.plateau_patience = geti("plateau_patience");
    c.plateau_min_improve = getd("plateau_min_improve");
    c.lambda_label = getd("lambda_label");
    c.lambda_forecast = getd("lambda_forecast");
    c.lambda_pose = getd("lambda_pose");
    c.max_epochs = geti("max_epochs");
    c.seed = getu64("seed");
    c.loss_includes_warmup = getb("loss_includes_warmup");
    c.grad_clip = getd("grad_clip");
    c.val_fraction = getd("val_fraction");
    return c;
}

std::string RunConfig::serialize() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

}  // namespace symfore::io
