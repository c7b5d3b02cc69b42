#pragma once

#include <cstdint>
#include <string>

#include "symfore/sequence.hpp"

namespace symfore::data {

enum class SynthKind { sine_walk, still, switch_motion };

SynthKind synth_kind_from_string(const std::string& s);

// Parametric motions with known ground-truth labels, used as the desk-scale
// training and evaluation corpus.
//   sine-walk:  periodic limb oscillation around a rest pose (label 0)
//   still:      rest pose plus noise (label 1)
//   switch:     oscillation that decays into stillness at frame T/2; the
//               label steps 0 -> 1 exactly once, at the transition frame
struct SynthParams {
    std::size_t frames = 160;
    std::size_t joints = 4;
    std::uint64_t seed = 0;
    double noise_mm = 0.5;       // per-axis Gaussian noise on non-root joints
    double amplitude_mm = 100.0;
    std::size_t period_frames = 16;
    double frame_rate_hz = 25.0;
};

struct SynthResult {
    PoseSequence poses;
    LabelSequence labels;
};

SynthResult synth_generate(SynthKind kind, const SynthParams& params);

}  // namespace symfore::data
