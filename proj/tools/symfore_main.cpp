// symfore: symbolic-label human motion forecasting pipeline.
//
// Subcommands: cluster, train, forecast, eval, export. Every run writes its
// fully resolved configuration to a run log; fixed seeds make every command
// bit-reproducible. Exit codes: 0 ok, 2 config error, 3 data error,
// 4 numeric abort.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "symfore/checkpoint.hpp"
#include "symfore/error.hpp"
#include "symfore/labeling.hpp"
#include "symfore/metrics.hpp"
#include "symfore/models.hpp"
#include "symfore/runconfig.hpp"
#include "symfore/sampling.hpp"
#include "symfore/sequence.hpp"
#include "symfore/skeleton.hpp"
#include "symfore/synth.hpp"
#include "symfore/training.hpp"

namespace fs = std::filesystem;
using namespace symfore;

namespace {

struct CommonArgs {
    std::string config_file;
    std::vector<std::string> overrides;  // key=value, win over the file
    std::string data_dir;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "run configuration file (key=value lines)");
    cmd->add_option("--set", args.overrides, "override a config key, e.g. --set max_epochs=5");
    cmd->add_option("--data", args.data_dir, "data directory (overrides data_dir)");
    cmd->add_option("--out", args.out_dir, "output directory (overrides out_dir)");
    cmd->add_option("--seed", args.seed, "seed (overrides seed)")->each([&](const std::string&) {
        args.seed_set = true;
    });
}

io::RunConfig resolve_config(const CommonArgs& args) {
    io::RunConfig cfg = args.config_file.empty() ? io::RunConfig::defaults()
                                                 : io::RunConfig::from_file(args.config_file);
    for (const std::string& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!args.data_dir.empty()) cfg.set("data_dir", args.data_dir);
    if (!args.out_dir.empty()) cfg.set("out_dir", args.out_dir);
    if (args.seed_set) cfg.set("seed", std::to_string(args.seed));
    return cfg;
}

// relative data paths resolve against $SYMFORE_DATA_ROOT when it is set
fs::path data_root(const io::RunConfig& cfg) {
    fs::path dir = cfg.gets("data_dir");
    if (dir.is_relative()) {
        if (const char* root = std::getenv("SYMFORE_DATA_ROOT")) {
            dir = fs::path(root) / dir;
        }
    }
    return dir;
}

std::string action_of(const fs::path& file) {
    const std::string stem = file.stem().string();
    const auto underscore = stem.find('_');
    return underscore == std::string::npos ? stem : stem.substr(0, underscore);
}

bool is_pose_csv(const fs::path& p) {
    if (p.extension() != ".csv") return false;
    const std::string stem = p.stem().string();
    return stem.size() < 7 || stem.substr(stem.size() - 7) != ".labels";
}

std::vector<fs::path> list_pose_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("missing data directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_pose_csv(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no pose csv files in " + dir.string());
    return files;
}

fs::path labels_path_for(const fs::path& pose_csv) {
    fs::path p = pose_csv;
    p.replace_extension();
    p += ".labels.csv";
    return p;
}

data::PoseSequence ingest_pose_csv(const fs::path& file, double target_hz) {
    data::PoseSequence p = data::read_pose_csv(file.string());
    p.action = action_of(file);
    data::remove_global_transform(p);
    if (p.frame_rate_hz != target_hz) p = data::resample(p, target_hz);
    return p;
}

std::ofstream open_out_file(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void write_run_log(const io::RunConfig& cfg, const std::string& command,
                   const std::vector<std::string>& lines) {
    const fs::path path = fs::path(cfg.gets("out_dir")) / (command + ".log");
    auto out = open_out_file(path);
    out << "command=" << command << "\n" << cfg.serialize();
    for (const std::string& line : lines) out << line << "\n";
}

std::vector<std::string> kept_joint_names(const std::vector<std::string>& names,
                                          const std::vector<int>& excluded) {
    std::vector<bool> drop(names.size(), false);
    for (int j : excluded)
        if (j >= 0 && static_cast<std::size_t>(j) < names.size()) drop[j] = true;
    std::vector<std::string> kept;
    for (std::size_t j = 0; j < names.size(); ++j)
        if (!drop[j]) kept.push_back(names[j]);
    return kept;
}

// ---------------------------------------------------------------- cluster

int cmd_cluster(const CommonArgs& args) {
    const io::RunConfig cfg = resolve_config(args);
    const double hz = cfg.getd("frame_rate_hz");
    const auto excluded = cfg.get_int_list("excluded_joints");
    const fs::path root = data_root(cfg);
    const auto k = static_cast<std::size_t>(cfg.geti("kmeans_k"));
    const auto pca_dim = static_cast<std::size_t>(cfg.geti("pca_dim"));
    const std::uint64_t seed = cfg.getu64("seed");

    std::vector<data::PoseSequence> train_seqs;
    for (const fs::path& file : list_pose_files(root / "train")) {
        train_seqs.push_back(ingest_pose_csv(file, hz));
        train_seqs.back().source_file = file.string();
    }

    // fit on the training split only, tail frames dropped
    labeling::FeatureMatrix all;
    for (const data::PoseSequence& seq : train_seqs) {
        if (seq.frames < labeling::kWindowFrames) {
            std::cerr << "warning: skipping '" << seq.source_file << "' for fitting ("
                      << seq.frames << " frames)\n";
            continue;
        }
        const auto f = labeling::build_frame_features(seq, excluded);
        if (all.dim == 0) all.dim = f.dim;
        all.count += f.count;
        all.values.insert(all.values.end(), f.values.begin(), f.values.end());
    }
    if (all.count == 0) throw DataError("no training sequence is long enough for clustering");

    const auto pca = labeling::fit_pca(all, std::min(pca_dim, all.dim));
    const auto projected = pca.project_all(all);
    const auto cm = labeling::fit_kmeans(projected, k, seed);

    std::vector<std::string> class_names;
    for (std::size_t c = 0; c < k; ++c) class_names.push_back("c" + std::to_string(c));

    std::vector<std::string> log_lines;
    for (const char* split : {"train", "test"}) {
        const fs::path dir = root / split;
        if (!fs::is_directory(dir)) continue;
        for (const fs::path& file : list_pose_files(dir)) {
            const auto seq = ingest_pose_csv(file, hz);
            data::LabelFile lf;
            lf.class_names = class_names;
            lf.labels = labeling::assign_labels(seq, pca, cm, excluded);
            const fs::path out_path = labels_path_for(file);
            data::write_label_csv(lf, out_path.string());
            log_lines.push_back("labels=" + out_path.string());
        }
    }

    io::Checkpoint ckpt;
    ckpt.set_string("kind", "labeler");
    ckpt.set_string("class_names", [&] {
        std::string joined;
        for (std::size_t c = 0; c < class_names.size(); ++c) {
            if (c) joined += ',';
            joined += class_names[c];
        }
        return joined;
    }());
    ckpt.set_string("config", cfg.serialize());
    ckpt.set_array("pca.mean", ad::Tensor::from({pca.in_dim}, pca.mean));
    ckpt.set_array("pca.components", ad::Tensor::from({pca.out_dim, pca.in_dim}, pca.components));
    ckpt.set_array("pca.explained", ad::Tensor::from({pca.out_dim}, pca.explained));
    ckpt.set_array("kmeans.centers", ad::Tensor::from({cm.k, cm.dim}, cm.centers));
    ckpt.set_string("kmeans.seed", std::to_string(cm.seed));
    const fs::path ckpt_path = fs::path(cfg.gets("out_dir")) / "labeler.ckpt";
    fs::create_directories(fs::path(cfg.gets("out_dir")));
    ckpt.save(ckpt_path.string());
    log_lines.push_back("labeler=" + ckpt_path.string());
    log_lines.push_back("labeler_hash=" + std::to_string(io::fnv1a_file(ckpt_path.string())));

    write_run_log(cfg, "cluster", log_lines);
    std::cout << "fitted " << k << " clusters on " << all.count << " features; labeler at "
              << ckpt_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- train

struct LoadedDataset {
    std::vector<data::PoseSequence> sequences;
    std::vector<data::LabelFile> labels;  // aligned with sequences
    std::vector<std::string> class_names;
};

LoadedDataset load_labeled_split(const fs::path& dir, double hz) {
    LoadedDataset out;
    for (const fs::path& file : list_pose_files(dir)) {
        const fs::path label_file = labels_path_for(file);
        if (!fs::exists(label_file)) {
            throw DataError("missing label file " + label_file.string() +
                            " (run `symfore cluster` or provide annotations)");
        }
        auto seq = ingest_pose_csv(file, hz);
        seq.source_file = file.string();
        auto labels = data::read_label_csv(label_file.string());
        if (labels.labels.size() != seq.frames && labels.labels.size() > seq.frames) {
            // labels delivered at the source rate; decimate to match
            const std::size_t ratio = labels.labels.size() / seq.frames;
            data::LabelSequence down;
            for (std::size_t t = 0; t < labels.labels.size() && down.size() < seq.frames;
                 t += ratio)
                down.push_back(labels.labels[t]);
            labels.labels = down;
        }
        if (labels.labels.size() != seq.frames) {
            throw DataError(label_file.string() + ": " + std::to_string(labels.labels.size()) +
                            " labels do not align with " + std::to_string(seq.frames) + " frames");
        }
        if (out.class_names.empty()) {
            out.class_names = labels.class_names;
        } else if (out.class_names != labels.class_names) {
            throw DataError(label_file.string() + ": class table differs from the other files");
        }
        out.sequences.push_back(std::move(seq));
        out.labels.push_back(std::move(labels));
    }
    return out;
}

std::vector<train::TrainPair> window_pairs(const LoadedDataset& ds, int total, int stride,
                                           const std::vector<int>& excluded) {
    std::vector<train::TrainPair> pairs;
    for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
        const auto& seq = ds.sequences[s];
        if (seq.frames < static_cast<std::size_t>(total)) {
            std::cerr << "warning: skipping '" << seq.source_file << "' (" << seq.frames
                      << " frames < " << total << " needed)\n";
            continue;
        }
        const auto flat = data::to_feature_matrix(seq, excluded);
        const std::size_t d = flat->cols();
        for (std::size_t start = 0; start + static_cast<std::size_t>(total) <= seq.frames;
             start += static_cast<std::size_t>(stride)) {
            train::TrainPair pair;
            pair.poses = ad::Tensor::from(
                {static_cast<std::size_t>(total), d},
                {flat->values.begin() + start * d,
                 flat->values.begin() + (start + static_cast<std::size_t>(total)) * d});
            pair.labels.assign(ds.labels[s].labels.begin() + start,
                               ds.labels[s].labels.begin() + start + total);
            pairs.push_back(std::move(pair));
        }
    }
    if (pairs.empty()) throw DataError("no training windows could be built");
    return pairs;
}

int cmd_train(const CommonArgs& args, const std::string& resume_path) {
    const io::RunConfig cfg = resolve_config(args);
    const double hz = cfg.getd("frame_rate_hz");
    const auto excluded = cfg.get_int_list("excluded_joints");
    const fs::path root = data_root(cfg);
    const fs::path out_dir = cfg.gets("out_dir");
    fs::create_directories(out_dir);

    const LoadedDataset ds = load_labeled_split(root / "train", hz);
    const int n = cfg.geti("label_count");
    if (static_cast<int>(ds.class_names.size()) != n) {
        throw ConfigError("label files declare " + std::to_string(ds.class_names.size()) +
                          " classes but label_count=" + std::to_string(n));
    }

    auto pairs = window_pairs(ds, cfg.geti("total_frames"), cfg.geti("train_stride"), excluded);
    // deterministic validation split: every k-th window
    std::vector<train::TrainPair> train_set, val_set;
    const double val_fraction = cfg.getd("val_fraction");
    const std::size_t val_every =
        val_fraction > 0 ? static_cast<std::size_t>(1.0 / val_fraction) : 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (val_every > 0 && i % val_every == val_every - 1) {
            val_set.push_back(pairs[i]);
        } else {
            train_set.push_back(pairs[i]);
        }
    }

    train::TrainState state;
    if (!resume_path.empty()) {
        state = train::from_checkpoint(io::Checkpoint::load(resume_path));
        // hyperparameters continue from the checkpoint; only the stopping
        // point follows the current invocation
        state.train_config.max_epochs = cfg.geti("max_epochs");
    } else {
        const int pose_dim = static_cast<int>(pairs.front().poses->cols());
        state = train::make_train_state(cfg.model_config(pose_dim), cfg.train_config());
        state.joint_names = ds.sequences.front().joint_names;
        state.class_names = ds.class_names;
        state.excluded_joints = excluded;
        state.frame_rate_hz = hz;
    }

    const fs::path ckpt_path = out_dir / "ckpt_latest.bin";
    auto history_stream = open_out_file(out_dir / "history.log");
    const auto history =
        train::train_loop(state, train_set, val_set, ckpt_path.string(), &history_stream);
    history_stream.close();

    std::vector<std::string> log_lines;
    log_lines.push_back("train_windows=" + std::to_string(train_set.size()));
    log_lines.push_back("val_windows=" + std::to_string(val_set.size()));
    log_lines.push_back("epochs_run=" + std::to_string(history.size()));
    log_lines.push_back("switch_epoch=" + std::to_string(state.opt.switch_epoch));
    log_lines.push_back("checkpoint=" + ckpt_path.string());
    log_lines.push_back("checkpoint_hash=" + std::to_string(io::fnv1a_file(ckpt_path.string())));
    write_run_log(cfg, "train", log_lines);

    if (!history.empty()) {
        std::cout << "trained " << history.size() << " epochs; final train loss "
                  << history.back().train_loss << ", val loss " << history.back().val_loss
                  << "; checkpoint at " << ckpt_path.string() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- forecast

int cmd_forecast(const std::string& ckpt_path, const std::string& input_csv, int horizon,
                 const std::string& out_poses, const std::string& out_labels) {
    if (horizon < 1) throw ConfigError("forecast horizon must be >= 1");
    auto state = train::from_checkpoint(io::Checkpoint::load(ckpt_path));
    const auto t = static_cast<std::size_t>(state.model_config.observed_frames);

    data::PoseSequence obs = data::read_pose_csv(input_csv);
    data::remove_global_transform(obs);
    if (obs.frame_rate_hz != state.frame_rate_hz) obs = data::resample(obs, state.frame_rate_hz);
    if (obs.frames < t) {
        throw RangeError("observed sequence has " + std::to_string(obs.frames) +
                         " frames, the model needs " + std::to_string(t));
    }
    const auto window = obs.slice(obs.frames - t, t);  // most recent observed window
    const auto features = data::to_feature_matrix(window, state.excluded_joints);

    models::ModelConfig mc = state.model_config;
    mc.total_frames = mc.observed_frames + horizon;
    ad::Tape tape;
    const auto out = models::full_forward(tape, state.params, mc, features, models::Mode::eval);

    const auto w = static_cast<std::size_t>(mc.warmup_frames);
    auto future = ad::rows(tape, out.generated_poses, w, w + static_cast<std::size_t>(horizon));
    auto pred = data::from_feature_matrix(
        *future, state.frame_rate_hz, kept_joint_names(state.joint_names, state.excluded_joints));
    pred.action = obs.action;
    data::write_pose_csv(pred, out_poses);

    data::LabelFile lf;
    lf.class_names = state.class_names;
    if (lf.class_names.empty()) {
        for (int c = 0; c < mc.label_count; ++c) lf.class_names.push_back("c" + std::to_string(c));
    }
    lf.labels = ad::argmax_rows(*out.future_label_probs);
    data::write_label_csv(lf, out_labels);

    std::cout << "wrote " << horizon << " forecast frames to " << out_poses << " and labels to "
              << out_labels << "\n";
    return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const CommonArgs& args, const std::string& ckpt_path, const std::string& protocol,
             const std::string& metric, const std::string& predictor,
             const std::string& out_prefix) {
    const io::RunConfig cfg = resolve_config(args);
    if (protocol != "sub8" && protocol != "sub256") {
        throw ConfigError("protocol must be sub8 or sub256, got '" + protocol + "'");
    }
    if (metric != "mpjpe" && metric != "npss") {
        throw ConfigError("metric must be mpjpe or npss, got '" + metric + "'");
    }
    if (predictor != "model" && predictor != "zero-velocity" && predictor != "self") {
        throw ConfigError("predictor must be model, zero-velocity or self");
    }

    train::TrainState state;
    const bool use_model = predictor == "model";
    if (use_model) {
        if (ckpt_path.empty()) throw ConfigError("predictor=model needs --checkpoint");
        state = train::from_checkpoint(io::Checkpoint::load(ckpt_path));
    }
    const double hz = use_model ? state.frame_rate_hz : cfg.getd("frame_rate_hz");
    const int observed = use_model ? state.model_config.observed_frames : cfg.geti("observed_frames");
    const auto excluded = use_model ? state.excluded_joints : cfg.get_int_list("excluded_joints");
    const std::uint64_t seed = cfg.getu64("seed");

    const std::vector<double> horizons_ms{80, 160, 320, 400, 560, 1000};
    std::size_t horizon_frames;
    if (metric == "mpjpe") {
        horizon_frames = data::ms_to_frames(horizons_ms.back(), hz);
    } else {
        horizon_frames = metrics::npss_bucket_frames(metrics::NpssBucket::long_term, hz).second;
    }

    std::vector<data::PoseSequence> test_seqs;
    for (const fs::path& file : list_pose_files(data_root(cfg) / "test")) {
        auto seq = ingest_pose_csv(file, hz);
        seq.source_file = file.string();
        test_seqs.push_back(std::move(seq));
    }

    data::SubsequenceSpec spec;
    spec.seed = seed;
    spec.count = protocol == "sub8" ? 8 : 256;
    spec.observed = observed;
    spec.horizon = static_cast<int>(horizon_frames);
    const auto windows = data::sample_subsequences(test_seqs, spec);

    auto predict = [&](const data::PoseSequence& obs_window,
                       const data::PoseSequence& truth_window) {
        if (predictor == "self") return truth_window;
        if (predictor == "zero-velocity") {
            auto zv = metrics::zero_velocity(obs_window, horizon_frames);
            return data::from_feature_matrix(*data::to_feature_matrix(zv, excluded), hz);
        }
        models::ModelConfig mc = state.model_config;
        mc.total_frames = mc.observed_frames + static_cast<int>(horizon_frames);
        ad::Tape tape;
        const auto features = data::to_feature_matrix(obs_window, excluded);
        const auto out = models::full_forward(tape, state.params, mc, features, models::Mode::eval);
        const auto w = static_cast<std::size_t>(mc.warmup_frames);
        auto future = ad::rows(tape, out.generated_poses, w, w + horizon_frames);
        return data::from_feature_matrix(*future, hz);
    };

    metrics::MetricTable table;
    table.metric = metric;
    table.protocol = protocol;
    table.seed = seed;
    if (metric == "mpjpe") {
        for (double ms : horizons_ms) table.columns.push_back(std::to_string(static_cast<int>(ms)));
    } else {
        table.columns = {metrics::npss_bucket_name(metrics::NpssBucket::short_term),
                         metrics::npss_bucket_name(metrics::NpssBucket::medium_term),
                         metrics::npss_bucket_name(metrics::NpssBucket::long_term)};
    }

    std::vector<std::string> provenance;
    for (const auto& [action, picks] : windows) {
        std::vector<double> row(table.columns.size(), 0.0);
        std::vector<double> weights(table.columns.size(), 0.0);
        for (const data::Window& pick : picks) {
            const auto& seq = test_seqs[pick.sequence];
            provenance.push_back(action + "," + seq.source_file + "," +
                                 std::to_string(pick.start));
            auto obs_window = seq.slice(pick.start, static_cast<std::size_t>(observed));
            auto truth_full =
                seq.slice(pick.start + static_cast<std::size_t>(observed), horizon_frames);
            auto truth =
                data::from_feature_matrix(*data::to_feature_matrix(truth_full, excluded), hz);
            const auto pred = predict(obs_window, truth);
            if (metric == "mpjpe") {
                for (std::size_t c = 0; c < horizons_ms.size(); ++c) {
                    row[c] += metrics::mpjpe(pred, truth, data::ms_to_frames(horizons_ms[c], hz));
                    weights[c] += 1.0;
                }
            } else {
                const metrics::NpssBucket buckets[] = {metrics::NpssBucket::short_term,
                                                       metrics::NpssBucket::medium_term,
                                                       metrics::NpssBucket::long_term};
                for (std::size_t c = 0; c < 3; ++c) {
                    const auto [weighted, weight] = metrics::npss_terms(pred, truth, buckets[c]);
                    row[c] += weighted;
                    weights[c] += weight;
                }
            }
        }
        for (std::size_t c = 0; c < row.size(); ++c)
            row[c] = weights[c] > 0 ? row[c] / weights[c] : 0.0;
        table.rows[action] = row;
        table.counts[action] = static_cast<int>(picks.size());
    }
    table.add_average_row();

    fs::path prefix(out_prefix);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    table.write_csv(out_prefix + ".csv");
    table.write_json(out_prefix + ".json");
    {
        auto prov = open_out_file(out_prefix + ".provenance.csv");
        prov << "action,source,start\n";
        for (const std::string& line : provenance) prov << line << "\n";
    }

    std::vector<std::string> log_lines;
    log_lines.push_back("predictor=" + predictor);
    log_lines.push_back("table=" + out_prefix + ".csv");
    if (use_model) {
        log_lines.push_back("checkpoint=" + ckpt_path);
        log_lines.push_back("checkpoint_hash=" + std::to_string(io::fnv1a_file(ckpt_path)));
    }
    write_run_log(cfg, "eval", log_lines);
    std::cout << "wrote " << metric << " table (" << protocol << ", " << predictor << ") to "
              << out_prefix << ".csv\n";
    return 0;
}

// ---------------------------------------------------------------- export

int cmd_export_synth(const CommonArgs& args, const std::string& kind, int frames, int joints,
                     int count, int test_count, double noise_mm) {
    const io::RunConfig cfg = resolve_config(args);
    const fs::path out_dir = cfg.gets("out_dir");
    const std::uint64_t seed = cfg.getu64("seed");
    const data::SynthKind k = data::synth_kind_from_string(kind);

    std::vector<std::string> log_lines;
    int index = 0;
    for (const auto& [split, split_count] :
         std::vector<std::pair<std::string, int>>{{"train", count}, {"test", test_count}}) {
        for (int i = 0; i < split_count; ++i, ++index) {
            data::SynthParams params;
            params.frames = static_cast<std::size_t>(frames);
            params.joints = static_cast<std::size_t>(joints);
            params.seed = seed + static_cast<std::uint64_t>(index);
            params.noise_mm = noise_mm;
            params.frame_rate_hz = cfg.getd("frame_rate_hz");
            auto gen = data::synth_generate(k, params);

            char name[64];
            std::snprintf(name, sizeof(name), "%s_%03d.csv", kind.c_str(), index);
            const fs::path pose_path = out_dir / split / name;
            fs::create_directories(pose_path.parent_path());
            data::write_pose_csv(gen.poses, pose_path.string());

            data::LabelFile lf;
            lf.class_names = {"moving", "still"};
            lf.labels = gen.labels;
            data::write_label_csv(lf, labels_path_for(pose_path).string());
            log_lines.push_back("sequence=" + pose_path.string());
        }
    }
    write_run_log(cfg, "export", log_lines);
    std::cout << "wrote " << count << " train and " << test_count << " test '" << kind
              << "' sequences under " << out_dir.string() << "\n";
    return 0;
}

int cmd_export_poses(const std::string& skeleton_path, const std::string& angles_path,
                     const std::string& out_path, double target_hz) {
    const auto skel = kin::Skeleton::load(skeleton_path);
    auto angles = data::read_angle_csv(angles_path);
    data::remove_global_transform(angles, skel.root());
    auto poses = data::forward_kinematics(skel, angles);
    data::remove_global_transform(poses, skel.root());
    if (target_hz > 0 && target_hz != poses.frame_rate_hz) poses = data::resample(poses, target_hz);
    data::write_pose_csv(poses, out_path);
    std::cout << "wrote " << poses.frames << " frames (" << poses.joints << " joints) to "
              << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic-label human motion forecasting"};
    app.require_subcommand(1);

    CommonArgs cluster_args;
    auto* cluster = app.add_subcommand("cluster", "fit PCA + k-means labels on the train split");
    add_common(cluster, cluster_args);
    std::uint64_t cluster_k = 0;
    cluster->add_option("--k", cluster_k, "cluster count (overrides kmeans_k)");

    CommonArgs train_args;
    std::string resume_path;
    auto* train_cmd = app.add_subcommand("train", "train the forecasting model");
    add_common(train_cmd, train_args);
    train_cmd->add_option("--resume", resume_path, "resume from a checkpoint");

    std::string fc_ckpt, fc_input;
    std::string fc_out_poses = "forecast.csv", fc_out_labels = "forecast.labels.csv";
    int fc_horizon = 25;
    auto* forecast = app.add_subcommand("forecast", "forecast future poses from an observed csv");
    forecast->add_option("--checkpoint", fc_ckpt, "trained model checkpoint")->required();
    forecast->add_option("--input", fc_input, "observed pose csv")->required();
    forecast->add_option("--horizon", fc_horizon, "future frames to forecast");
    forecast->add_option("--out-poses", fc_out_poses, "output pose csv");
    forecast->add_option("--out-labels", fc_out_labels, "output label csv");

    CommonArgs eval_args;
    std::string ev_ckpt, ev_protocol = "sub8", ev_metric = "mpjpe", ev_predictor = "model";
    std::string ev_out = "eval";
    auto* eval_cmd = app.add_subcommand("eval", "evaluate on the test split");
    add_common(eval_cmd, eval_args);
    eval_cmd->add_option("--checkpoint", ev_ckpt, "trained model checkpoint");
    eval_cmd->add_option("--protocol", ev_protocol, "sub8 or sub256");
    eval_cmd->add_option("--metric", ev_metric, "mpjpe or npss");
    eval_cmd->add_option("--predictor", ev_predictor, "model, zero-velocity or self");
    eval_cmd->add_option("--out-prefix", ev_out, "output path prefix for table files");

    auto* export_cmd = app.add_subcommand("export", "data generation and conversion");
    export_cmd->require_subcommand(1);

    CommonArgs synth_args;
    std::string synth_kind = "switch";
    int synth_frames = 160, synth_joints = 4, synth_count = 8, synth_test = 2;
    double synth_noise = 0.5;
    auto* synth = export_cmd->add_subcommand("synth", "generate a synthetic motion corpus");
    add_common(synth, synth_args);
    synth->add_option("--kind", synth_kind, "sine-walk, still or switch");
    synth->add_option("--frames", synth_frames, "frames per sequence");
    synth->add_option("--joints", synth_joints, "joints per pose");
    synth->add_option("--count", synth_count, "training sequences");
    synth->add_option("--test-count", synth_test, "test sequences");
    synth->add_option("--noise", synth_noise, "noise in mm");

    std::string poses_skel, poses_angles, poses_out = "poses.csv";
    double poses_hz = 0.0;
    auto* poses = export_cmd->add_subcommand("poses", "angles + skeleton -> pose csv");
    poses->add_option("--skeleton", poses_skel, "skeleton file")->required();
    poses->add_option("--angles", poses_angles, "angle csv")->required();
    poses->add_option("--out", poses_out, "output pose csv");
    poses->add_option("--hz", poses_hz, "resample to this rate (integer decimation)");

    try {
        app.parse(argc, argv);
        if (cluster->parsed()) {
            if (cluster->count("--k")) {
                cluster_args.overrides.push_back("kmeans_k=" + std::to_string(cluster_k));
            }
            return cmd_cluster(cluster_args);
        }
        if (train_cmd->parsed()) return cmd_train(train_args, resume_path);
        if (forecast->parsed()) {
            return cmd_forecast(fc_ckpt, fc_input, fc_horizon, fc_out_poses, fc_out_labels);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_args, ev_ckpt, ev_protocol, ev_metric, ev_predictor, ev_out);
        }
        if (export_cmd->parsed()) {
            if (synth->parsed()) {
                return cmd_export_synth(synth_args, synth_kind, synth_frames, synth_joints,
                                        synth_count, synth_test, synth_noise);
            }
            return cmd_export_poses(poses_skel, poses_angles, poses_out, poses_hz);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
