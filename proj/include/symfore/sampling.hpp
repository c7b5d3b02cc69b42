#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "symfore/sequence.hpp"

namespace symfore::data {

struct SubsequenceSpec {
    std::uint64_t seed = 0;
    int count = 8;          // windows per action (8 or 256 in the protocols)
    int observed = 50;      // frames given to the model
    int horizon = 25;       // frames to forecast
    int label_lookahead = 10;  // margin so ground-truth labels exist for every frame
};

struct Window {
    std::size_t sequence = 0;  // index into the dataset
    std::size_t start = 0;     // first observed frame
};

// Deterministic under a fixed seed; uniform over all valid start frames of an
// action, stratified per action. Sequences too short for one window are
// skipped with a warning on stderr, never silently truncated.
std::map<std::string, std::vector<Window>> sample_subsequences(
    const std::vector<PoseSequence>& dataset, const SubsequenceSpec& spec);

}  // namespace symfore::data
