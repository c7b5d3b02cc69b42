#pragma once

#include <array>
#include <string>

namespace symfore::kin {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

Mat3 identity3();
Mat3 mat_mul(const Mat3& a, const Mat3& b);
Vec3 mat_apply(const Mat3& m, const Vec3& v);
Mat3 mat_transpose(const Mat3& m);

// Rodrigues formula; theta = |v|, with a series fallback below 1e-8 so the
// result stays orthonormal for tiny angles.
Mat3 expmap_to_rotation(const Vec3& v);

// log map back to an axis-angle 3-vector with |result| in [0, pi]
Vec3 rotation_to_expmap(const Mat3& r);

// Intrinsic rotations composed in the listed axis order ("xyz", "zyx", ...).
Mat3 euler_to_rotation(const Vec3& radians, const std::string& order);

}  // namespace symfore::kin
