#include "symfore/rotation.hpp"

#include <cmath>

#include "symfore/error.hpp"

namespace symfore::kin {

Mat3 identity3() {
    return {1, 0, 0, 0, 1, 0, 0, 0, 1};
}

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += a[i * 3 + k] * b[k * 3 + j];
            out[i * 3 + j] = acc;
        }
    return out;
}

Vec3 mat_apply(const Mat3& m, const Vec3& v) {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
            m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

Mat3 mat_transpose(const Mat3& m) {
    return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
}

Mat3 expmap_to_rotation(const Vec3& v) {
    const double theta = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    // K is the cross-product matrix of the raw (unnormalized) vector
    const Mat3 k{0, -v[2], v[1], v[2], 0, -v[0], -v[1], v[0], 0};
    const Mat3 k2 = mat_mul(k, k);
    double a, b;  // R = I + a*K + b*K^2
    if (theta < 1e-8) {
        const double t2 = theta * theta;
        a = 1.0 - t2 / 6.0;
        b = 0.5 - t2 / 24.0;
    } else {
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / (theta * theta);
    }
    Mat3 r = identity3();
    for (int i = 0; i < 9; ++i) r[i] += a * k[i] + b * k2[i];
    return r;
}

Vec3 rotation_to_expmap(const Mat3& r) {
    const double trace = r[0] + r[4] + r[8];
    const double c = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
    const double theta = std::acos(c);
    if (theta < 1e-8) {
        return {0.5 * (r[7] - r[5]), 0.5 * (r[2] - r[6]), 0.5 * (r[3] - r[1])};
    }
    if (theta > M_PI - 1e-6) {
        // near pi the skew part vanishes; recover the axis from R + I
        const double ax = std::sqrt(std::max(0.0, (r[0] + 1.0) / 2.0));
        const double ay = std::sqrt(std::max(0.0, (r[4] + 1.0) / 2.0));
        const double az = std::sqrt(std::max(0.0, (r[8] + 1.0) / 2.0));
        Vec3 axis{ax, ay, az};
        // fix signs against the off-diagonal sums
        if (r[1] + r[3] < 0) axis[1] = -axis[1];
        if (r[2] + r[6] < 0) axis[2] = -axis[2];
        if (axis[1] * (r[5] + r[7]) < 0 && axis[2] != 0.0) axis[2] = -axis[2];
        return {theta * axis[0], theta * axis[1], theta * axis[2]};
    }
    const double s = theta / (2.0 * std::sin(theta));
    return {s * (r[7] - r[5]), s * (r[2] - r[6]), s * (r[3] - r[1])};
}

Mat3 euler_to_rotation(const Vec3& radians, const std::string& order) {
    if (order.size() != 3) {
        throw ParameterError("euler order must name three axes, got '" + order + "'");
    }
    Mat3 r = identity3();
    for (int i = 0; i < 3; ++i) {
        const double ang = radians[i];
        const double cs = std::cos(ang), sn = std::sin(ang);
        Mat3 step;
        switch (order[i]) {
            case 'x':
                step = {1, 0, 0, 0, cs, -sn, 0, sn, cs};
                break;
            case 'y':
                step = {cs, 0, sn, 0, 1, 0, -sn, 0, cs};
                break;
            case 'z':
                step = {cs, -sn, 0, sn, cs, 0, 0, 0, 1};
                break;
            default:
                throw ParameterError("euler order axis '" + std::string(1, order[i]) +
                                     "' is not one of x, y, z");
        }
        r = mat_mul(r, step);  // intrinsic: compose in listed order
    }
    return r;
}

}  // namespace symfore::kin
