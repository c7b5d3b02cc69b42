#include "symfore/sampling.hpp"

#include <iostream>

#include "symfore/error.hpp"
#include "symfore/rng.hpp"

namespace symfore::data {

std::map<std::string, std::vector<Window>> sample_subsequences(
    const std::vector<PoseSequence>& dataset, const SubsequenceSpec& spec) {
    if (spec.count < 1 || spec.observed < 1 || spec.horizon < 1 || spec.label_lookahead < 0) {
        throw ParameterError("subsequence spec fields must be positive");
    }
    const std::size_t need = static_cast<std::size_t>(spec.observed) +
                             static_cast<std::size_t>(spec.horizon) +
                             static_cast<std::size_t>(spec.label_lookahead);

    // valid (sequence, start) pairs grouped by action, in dataset order
    std::map<std::string, std::vector<Window>> starts;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const PoseSequence& seq = dataset[i];
        if (seq.frames < need) {
            std::cerr << "warning: skipping '" << seq.source_file << "' (" << seq.frames
                      << " frames < " << need << " needed)\n";
            continue;
        }
        auto& bucket = starts[seq.action];
        for (std::size_t s = 0; s + need <= seq.frames; ++s) bucket.push_back(Window{i, s});
    }
    if (starts.empty()) {
        throw DataError("no sequence is long enough for the requested windows");
    }

    Rng rng(spec.seed);
    std::map<std::string, std::vector<Window>> out;
    for (const auto& [action, candidates] : starts) {
        auto& picked = out[action];
        picked.reserve(static_cast<std::size_t>(spec.count));
        for (int c = 0; c < spec.count; ++c) {
            picked.push_back(candidates[rng.below(candidates.size())]);
        }
    }
    return out;
}

}  // namespace symfore::data
