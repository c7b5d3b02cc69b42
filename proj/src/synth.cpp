#include "symfore/synth.hpp"

#include <cmath>

#include "symfore/error.hpp"
#include "symfore/rng.hpp"

namespace symfore::data {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kBoneSpacingMm = 120.0;
constexpr double kStopRampFrames = 8.0;
constexpr double kLiftSinkFrames = 25.0;

// rest pose: a vertical chain, root (joint 0) pinned to the origin
void set_rest_pose(PoseSequence& p, std::size_t t) {
    for (std::size_t j = 0; j < p.joints; ++j) {
        p.at(t, j, 0) = 0.0;
        p.at(t, j, 1) = kBoneSpacingMm * static_cast<double>(j);
        p.at(t, j, 2) = 0.0;
    }
}

void add_noise(PoseSequence& p, std::size_t t, double noise_mm, Rng& rng) {
    if (noise_mm <= 0.0) return;
    for (std::size_t j = 1; j < p.joints; ++j)
        for (int a = 0; a < 3; ++a) p.at(t, j, a) += noise_mm * rng.normal();
}

}  // namespace

SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "sine-walk") return SynthKind::sine_walk;
    if (s == "still") return SynthKind::still;
    if (s == "switch") return SynthKind::switch_motion;
    throw ParameterError("unknown synthetic motion kind '" + s +
                         "' (expected sine-walk, still or switch)");
}

SynthResult synth_generate(SynthKind kind, const SynthParams& params) {
    if (params.frames < 1 || params.joints < 2) {
        throw ParameterError("synthetic motion needs frames >= 1 and joints >= 2");
    }
    SynthResult out;
    PoseSequence& p = out.poses;
    p.frames = params.frames;
    p.joints = params.joints;
    p.frame_rate_hz = params.frame_rate_hz;
    p.positions.assign(p.frames * p.joints * 3, 0.0);
    p.action = kind == SynthKind::sine_walk ? "sine-walk"
               : kind == SynthKind::still   ? "still"
                                            : "switch";
    p.actor = "synthetic";
    for (std::size_t j = 0; j < p.joints; ++j) p.joint_names.push_back("j" + std::to_string(j));

    Rng rng(params.seed);
    const double period = static_cast<double>(params.period_frames);
    const std::size_t transition = params.frames / 2;
    // per-sequence phase: the oscillation state must be read from the frames,
    // not memorized from a shared clock
    const double sequence_phase = rng.uniform(0.0, kTwoPi);

    for (std::size_t t = 0; t < params.frames; ++t) {
        set_rest_pose(p, t);
        switch (kind) {
            case SynthKind::sine_walk: {
                for (std::size_t j = 1; j < p.joints; ++j) {
                    const double phase = sequence_phase + kTwoPi * static_cast<double>(j) / 5.0;
                    const double arg = kTwoPi * static_cast<double>(t) / period + phase;
                    p.at(t, j, 0) += params.amplitude_mm * std::sin(arg);
                    p.at(t, j, 2) += 0.5 * params.amplitude_mm * std::sin(arg + kTwoPi / 4.0);
                }
                out.labels.push_back(0);
                break;
            }
            case SynthKind::still:
                out.labels.push_back(1);
                break;
            case SynthKind::switch_motion: {
                if (t < transition) {
                    // Moving half: a strong postural offset away from the rest
                    // pose plus a small oscillation. Deceleration is readable
                    // from the poses on two time scales: the offset ramps out
                    // over the last kStopRampFrames, and the gait lift sinks
                    // back to rest height over the last kLiftSinkFrames.
                    const double progress = static_cast<double>(t) / static_cast<double>(transition);
                    const double envelope = 0.3 + 0.7 * (1.0 - progress);
                    const double remaining = static_cast<double>(transition - t);
                    const double ramp = std::min(1.0, remaining / kStopRampFrames);
                    const double lift =
                        0.2 * params.amplitude_mm * std::min(1.0, remaining / kLiftSinkFrames);
                    const double arg = kTwoPi *
                                       (static_cast<double>(t) - static_cast<double>(transition)) /
                                       period;
                    const double osc = 0.4 * params.amplitude_mm;
                    for (std::size_t j = 1; j < p.joints; ++j) {
                        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                        p.at(t, j, 0) += sign * (1.5 * params.amplitude_mm * ramp +
                                                 osc * envelope * std::sin(arg));
                        p.at(t, j, 1) += lift;
                        p.at(t, j, 2) += sign * 0.5 * osc * envelope * std::sin(2.0 * arg);
                    }
                    out.labels.push_back(0);
                } else {
                    out.labels.push_back(1);
                }
                break;
            }
        }
        add_noise(p, t, params.noise_mm, rng);
    }
    return out;
}

}  // namespace symfore::data
