#pragma once

#include <string>
#include <vector>

#include "symfore/skeleton.hpp"
#include "symfore/tensor.hpp"

namespace symfore::data {

// T x J x 3 joint positions in millimeters. After remove_global_transform the
// root joint sits at the origin in every frame.
struct PoseSequence {
    std::size_t frames = 0;
    std::size_t joints = 0;
    std::vector<double> positions;  // frames * joints * 3, row-major
    double frame_rate_hz = 25.0;
    std::vector<std::string> joint_names;
    std::string actor, action, source_file;

    double& at(std::size_t frame, std::size_t joint, std::size_t axis) {
        return positions[(frame * joints + joint) * 3 + axis];
    }
    double at(std::size_t frame, std::size_t joint, std::size_t axis) const {
        return positions[(frame * joints + joint) * 3 + axis];
    }

    void validate() const;
    PoseSequence slice(std::size_t start, std::size_t count) const;
};

// T x J x 3 exponential-map rotations (radians * unit axis), stored raw.
// Optional per-frame global translation channels.
struct AngleSequence {
    std::size_t frames = 0;
    std::size_t joints = 0;
    std::vector<double> rotations;            // frames * joints * 3
    std::vector<double> global_translation;   // frames * 3 when present, else empty
    double frame_rate_hz = 50.0;
    std::vector<std::string> joint_names;

    double& rot(std::size_t frame, std::size_t joint, std::size_t axis) {
        return rotations[(frame * joints + joint) * 3 + axis];
    }
    double rot(std::size_t frame, std::size_t joint, std::size_t axis) const {
        return rotations[(frame * joints + joint) * 3 + axis];
    }
};

using LabelSequence = std::vector<int>;

struct LabelFile {
    std::vector<std::string> class_names;
    LabelSequence labels;
};

// positions from rotations along the hierarchy:
//   position(joint) = position(parent) + R_global(parent) * offset(joint)
PoseSequence forward_kinematics(const kin::Skeleton& skel, const AngleSequence& angles);

// Poses: translate every frame so the root joint is at the origin.
// Angles: zero the root rotation and drop global translation channels.
void remove_global_transform(PoseSequence& p, std::size_t root_joint = 0);
void remove_global_transform(AngleSequence& a, std::size_t root_joint = 0);

// Decimation only: the source rate must be an integer multiple of the target.
PoseSequence resample(const PoseSequence& p, double target_hz);

// millisecond horizons to frame counts at a given rate; must land on a frame
std::size_t ms_to_frames(double ms, double hz);

// ---- CSV formats (bit-exact value round-trips) ----
// Pose:    "# symfore-pose v1; hz=<r>; joints=<n0,n1,...>" then 3J columns/frame
// Angles:  "# symfore-angles v1; hz=<r>; joints=...; rep=<expmap|euler-xyz|euler-zyx>;
//           global=<none|trans>"  (euler input is converted to expmap on read)
// Labels:  "# symfore-labels v1; classes=<c0,c1,...>" then one id per line

void write_pose_csv(const PoseSequence& p, const std::string& path);
PoseSequence read_pose_csv(const std::string& path);

AngleSequence read_angle_csv(const std::string& path);

void write_label_csv(const LabelFile& l, const std::string& path);
LabelFile read_label_csv(const std::string& path);

// Flatten to the model feature matrix [T x d], d = 3 * (J - |excluded|).
// `excluded` lists joint indices dropped from the representation.
ad::TensorPtr to_feature_matrix(const PoseSequence& p, const std::vector<int>& excluded = {});
PoseSequence from_feature_matrix(const ad::Tensor& m, double hz,
                                 const std::vector<std::string>& joint_names = {});

}  // namespace symfore::data
