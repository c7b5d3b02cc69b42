#include "symfore/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "symfore/error.hpp"

namespace symfore::metrics {

double mpjpe(const data::PoseSequence& pred, const data::PoseSequence& truth,
             std::size_t horizon_frames) {
    if (pred.joints != truth.joints) {
        throw DimensionError("mpjpe joint counts differ: " + std::to_string(pred.joints) + " vs " +
                             std::to_string(truth.joints));
    }
    if (horizon_frames < 1 || horizon_frames > pred.frames || horizon_frames > truth.frames) {
        throw RangeError("mpjpe horizon " + std::to_string(horizon_frames) +
                         " frames lies beyond the prediction length");
    }
    const std::size_t frame = horizon_frames - 1;
    double total = 0.0;
    for (std::size_t j = 0; j < pred.joints; ++j) {
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double diff = pred.at(frame, j, a) - truth.at(frame, j, a);
            d2 += diff * diff;
        }
        total += std::sqrt(d2);
    }
    return total / static_cast<double>(pred.joints);
}

data::PoseSequence zero_velocity(const data::PoseSequence& observed, std::size_t horizon) {
    if (observed.frames < 1) throw RangeError("zero_velocity needs at least one observed frame");
    if (horizon < 1) throw ParameterError("zero_velocity horizon must be >= 1");
    data::PoseSequence out = observed;
    out.frames = horizon;
    out.positions.clear();
    out.positions.reserve(horizon * observed.joints * 3);
    const auto last = observed.positions.end() - static_cast<std::ptrdiff_t>(observed.joints * 3);
    for (std::size_t t = 0; t < horizon; ++t) {
        out.positions.insert(out.positions.end(), last, observed.positions.end());
    }
    return out;
}

SpectrumDistribution power_spectrum(const std::vector<std::vector<double>>& series) {
    if (series.empty()) throw ParameterError("power_spectrum needs at least one feature");
    const std::size_t frames = series[0].size();
    if (frames < 2) throw ParameterError("power_spectrum needs at least two frames");

    SpectrumDistribution out;
    out.bins = frames;
    out.normalized.reserve(series.size());
    out.total_power.reserve(series.size());
    const double two_pi = 6.283185307179586;
    for (const auto& x : series) {
        if (x.size() != frames) throw DimensionError("power_spectrum features differ in length");
        std::vector<double> power(frames, 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < frames; ++k) {
            double re = 0.0, im = 0.0;
            for (std::size_t t = 0; t < frames; ++t) {
                // reduce k*t mod T before the trig call to keep phases accurate
                const std::size_t kt = (k * t) % frames;
                const double ang = -two_pi * static_cast<double>(kt) / static_cast<double>(frames);
                re += x[t] * std::cos(ang);
                im += x[t] * std::sin(ang);
            }
            power[k] = (re * re + im * im) / static_cast<double>(frames);
            total += power[k];
        }
        if (total == 0.0) {
            out.normalized.emplace_back(frames, 1.0 / static_cast<double>(frames));
            out.total_power.push_back(0.0);
        } else {
            for (double& p : power) p /= total;
            out.normalized.push_back(std::move(power));
            out.total_power.push_back(total);
        }
    }
    return out;
}

double emd_1d(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) {
        throw DimensionError("emd_1d bin counts differ: " + std::to_string(p.size()) + " vs " +
                             std::to_string(q.size()));
    }
    double sum_p = 0.0, sum_q = 0.0;
    for (double v : p) sum_p += v;
    for (double v : q) sum_q += v;
    if (std::abs(sum_p - 1.0) > 1e-6 || std::abs(sum_q - 1.0) > 1e-6) {
        throw ContractError("emd_1d inputs must be normalized distributions");
    }
    double cdf_gap = 0.0, total = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        cdf_gap += p[i] - q[i];
        total += std::abs(cdf_gap);
    }
    return total;
}

NpssBucket npss_bucket_from_string(const std::string& s) {
    if (s == "short" || s == "0-1s") return NpssBucket::short_term;
    if (s == "medium" || s == "1-2s") return NpssBucket::medium_term;
    if (s == "long" || s == "2-4s") return NpssBucket::long_term;
    throw ParameterError("unknown horizon bucket '" + s + "' (short, medium or long)");
}

const char* npss_bucket_name(NpssBucket bucket) {
    switch (bucket) {
        case NpssBucket::short_term: return "0-1s";
        case NpssBucket::medium_term: return "1-2s";
        default: return "2-4s";
    }
}

std::pair<std::size_t, std::size_t> npss_bucket_frames(NpssBucket bucket, double hz) {
    double lo_s = 0.0, hi_s = 1.0;
    if (bucket == NpssBucket::medium_term) {
        lo_s = 1.0;
        hi_s = 2.0;
    } else if (bucket == NpssBucket::long_term) {
        lo_s = 2.0;
        hi_s = 4.0;
    }
    return {data::ms_to_frames(lo_s * 1000.0, hz), data::ms_to_frames(hi_s * 1000.0, hz)};
}

std::pair<double, double> npss_terms(const data::PoseSequence& pred,
                                     const data::PoseSequence& truth, NpssBucket bucket) {
    if (pred.joints != truth.joints) {
        throw DimensionError("npss joint counts differ");
    }
    if (pred.frame_rate_hz != truth.frame_rate_hz) {
        throw DimensionError("npss frame rates differ");
    }
    const auto [begin, end] = npss_bucket_frames(bucket, pred.frame_rate_hz);
    if (end > pred.frames || end > truth.frames) {
        throw RangeError("sequences are shorter than the " + std::string(npss_bucket_name(bucket)) +
                         " bucket window (" + std::to_string(end) + " frames needed)");
    }

    const std::size_t features = pred.joints * 3;
    auto slice_series = [&](const data::PoseSequence& seq) {
        std::vector<std::vector<double>> series(features, std::vector<double>(end - begin));
        for (std::size_t t = begin; t < end; ++t)
            for (std::size_t f = 0; f < features; ++f)
                series[f][t - begin] = seq.positions[t * features + f];
        return series;
    };
    const auto pred_spec = power_spectrum(slice_series(pred));
    const auto truth_spec = power_spectrum(slice_series(truth));

    double weighted = 0.0, weight_sum = 0.0;
    for (std::size_t f = 0; f < features; ++f) {
        const double w = truth_spec.total_power[f];  // ground-truth power weighting
        if (w == 0.0) continue;
        weighted += w * emd_1d(pred_spec.normalized[f], truth_spec.normalized[f]);
        weight_sum += w;
    }
    return {weighted, weight_sum};
}

double npss(const data::PoseSequence& pred, const data::PoseSequence& truth, NpssBucket bucket) {
    const auto [weighted, weight] = npss_terms(pred, truth, bucket);
    return weight == 0.0 ? 0.0 : weighted / weight;
}

void MetricTable::add_average_row() {
    if (rows.empty() || rows.count("average")) return;
    std::vector<double> avg(columns.size(), 0.0);
    int count_sum = 0;
    for (const auto& [action, values] : rows) {
        for (std::size_t c = 0; c < columns.size(); ++c) avg[c] += values[c];
        count_sum += counts.count(action) ? counts.at(action) : 0;
    }
    for (double& v : avg) v /= static_cast<double>(rows.size());
    rows["average"] = avg;
    counts["average"] = count_sum;
}

void MetricTable::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write table: " + path);
    out << "action,count";
    for (const auto& c : columns) out << ',' << c;
    out << "\n";
    char buf[32];
    for (const auto& [action, values] : rows) {
        out << action << ',' << (counts.count(action) ? counts.at(action) : 0);
        for (double v : values) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

void MetricTable::write_json(const std::string& path) const {
    nlohmann::json doc;
    doc["metric"] = metric;
    doc["protocol"] = protocol;
    doc["seed"] = seed;
    doc["columns"] = columns;
    for (const auto& [action, values] : rows) {
        doc["rows"][action] = values;
        doc["counts"][action] = counts.count(action) ? counts.at(action) : 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write table: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace symfore::metrics
