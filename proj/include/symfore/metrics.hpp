#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "symfore/sequence.hpp"

namespace symfore::metrics {

// Mean over joints of the Euclidean distance at one future frame.
// `horizon_frames` counts from the forecast start, 1-based: horizon 1 is the
// first predicted frame. Both sequences must be aligned at that start.
double mpjpe(const data::PoseSequence& pred, const data::PoseSequence& truth,
             std::size_t horizon_frames);

// baseline forecaster: repeat the last observed frame
data::PoseSequence zero_velocity(const data::PoseSequence& observed, std::size_t horizon);

struct SpectrumDistribution {
    std::size_t bins = 0;
    std::vector<std::vector<double>> normalized;  // per feature; each sums to 1
    std::vector<double> total_power;              // per-feature weight (time-domain energy)
};

// Direct DFT per feature over the whole window, DC bin included. Power is
// |X_k|^2/T so the unnormalized total equals the time-domain energy. Features
// with zero power get a uniform distribution and zero weight.
SpectrumDistribution power_spectrum(const std::vector<std::vector<double>>& series);

// 1-D earth mover's distance with unit ground distance between adjacent bins.
// Inputs must be normalized distributions of equal length.
double emd_1d(const std::vector<double>& p, const std::vector<double>& q);

enum class NpssBucket { short_term, medium_term, long_term };  // 0-1 s, 1-2 s, 2-4 s

NpssBucket npss_bucket_from_string(const std::string& s);
const char* npss_bucket_name(NpssBucket bucket);

// frame range [begin, end) of a bucket at the given rate, relative to the
// forecast start
std::pair<std::size_t, std::size_t> npss_bucket_frames(NpssBucket bucket, double hz);

// Power-weighted EMD sum over per-coordinate spectra of the bucket window.
// Returns (sum of weight*emd, sum of weights) so callers can aggregate across
// subsequences with the same weighting.
std::pair<double, double> npss_terms(const data::PoseSequence& pred,
                                     const data::PoseSequence& truth, NpssBucket bucket);

double npss(const data::PoseSequence& pred, const data::PoseSequence& truth, NpssBucket bucket);

// action rows x named columns, exported as CSV and JSON
struct MetricTable {
    std::string metric;                 // "mpjpe" or "npss"
    std::string protocol;               // "sub8" or "sub256"
    std::uint64_t seed = 0;
    std::vector<std::string> columns;   // horizon labels ("80", ..) or bucket names
    std::map<std::string, std::vector<double>> rows;
    std::map<std::string, int> counts;  // subsequences per action

    void add_average_row();
    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

}  // namespace symfore::metrics
