#include "symfore/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "symfore/error.hpp"

namespace symfore::data {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// header form: "# symfore-<kind> v1; key=value; key=value"
std::vector<std::pair<std::string, std::string>> parse_header(const std::string& line,
                                                              const std::string& kind,
                                                              const std::string& path) {
    const std::string magic = "# symfore-" + kind + " v1";
    if (line.rfind(magic, 0) != 0) {
        throw DataError(path + ": expected header '" + magic + "; ...'");
    }
    std::vector<std::pair<std::string, std::string>> kv;
    for (const std::string& part : split(line.substr(magic.size()), ';')) {
        std::string trimmed = part;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) throw DataError(path + ": malformed header field '" + trimmed + "'");
        kv.emplace_back(trimmed.substr(0, eq), trimmed.substr(eq + 1));
    }
    return kv;
}

std::string header_value(const std::vector<std::pair<std::string, std::string>>& kv,
                         const std::string& key, const std::string& path) {
    for (const auto& [k, v] : kv)
        if (k == key) return v;
    throw DataError(path + ": header is missing '" + key + "'");
}

std::string header_value_or(const std::vector<std::pair<std::string, std::string>>& kv,
                            const std::string& key, const std::string& fallback) {
    for (const auto& [k, v] : kv)
        if (k == key) return v;
    return fallback;
}

std::vector<double> parse_row(const std::string& line, std::size_t expected,
                              const std::string& path, std::size_t lineno) {
    std::vector<double> row;
    row.reserve(expected);
    const char* p = line.c_str();
    char* end = nullptr;
    while (*p) {
        const double v = std::strtod(p, &end);
        if (end == p) break;
        row.push_back(v);
        p = end;
        while (*p == ',' || *p == ' ' || *p == '\t' || *p == '\r') ++p;
    }
    if (row.size() != expected) {
        throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(expected) + " columns, got " + std::to_string(row.size()));
    }
    return row;
}

void append_g17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> default_joint_names(std::size_t n) {
    std::vector<std::string> names(n);
    for (std::size_t i = 0; i < n; ++i) names[i] = "j" + std::to_string(i);
    return names;
}

}  // namespace

void PoseSequence::validate() const {
    if (frames < 1) throw DataError("pose sequence must have at least one frame");
    if (positions.size() != frames * joints * 3) {
        throw DimensionError("pose sequence storage does not match frames*joints*3");
    }
    for (double v : positions) {
        if (std::isnan(v)) throw DataError("pose sequence contains NaN");
    }
}

PoseSequence PoseSequence::slice(std::size_t start, std::size_t count) const {
    if (start + count > frames) {
        throw RangeError("pose slice [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") exceeds " + std::to_string(frames) +
                         " frames");
    }
    PoseSequence out = *this;
    out.frames = count;
    out.positions.assign(positions.begin() + start * joints * 3,
                         positions.begin() + (start + count) * joints * 3);
    return out;
}

PoseSequence forward_kinematics(const kin::Skeleton& skel, const AngleSequence& angles) {
    skel.validate();
    if (angles.joints != skel.size()) {
        throw DimensionError("angle sequence has " + std::to_string(angles.joints) +
                             " joints but skeleton has " + std::to_string(skel.size()));
    }
    PoseSequence out;
    out.frames = angles.frames;
    out.joints = skel.size();
    out.frame_rate_hz = angles.frame_rate_hz;
    out.joint_names.reserve(skel.size());
    for (const auto& j : skel.joints) out.joint_names.push_back(j.name);
    out.positions.assign(out.frames * out.joints * 3, 0.0);

    const bool has_trans = !angles.global_translation.empty();
    std::vector<kin::Mat3> global_rot(skel.size());
    std::vector<kin::Vec3> pos(skel.size());
    for (std::size_t t = 0; t < angles.frames; ++t) {
        for (std::size_t j = 0; j < skel.size(); ++j) {
            const kin::Vec3 v{angles.rot(t, j, 0), angles.rot(t, j, 1), angles.rot(t, j, 2)};
            const kin::Mat3 local = kin::expmap_to_rotation(v);
            const int parent = skel.joints[j].parent;
            if (parent < 0) {
                global_rot[j] = local;
                pos[j] = has_trans ? kin::Vec3{angles.global_translation[t * 3],
                                               angles.global_translation[t * 3 + 1],
                                               angles.global_translation[t * 3 + 2]}
                                   : kin::Vec3{0, 0, 0};
            } else {
                global_rot[j] = kin::mat_mul(global_rot[parent], local);
                const kin::Vec3 arm = kin::mat_apply(global_rot[parent], skel.joints[j].offset);
                pos[j] = {pos[parent][0] + arm[0], pos[parent][1] + arm[1], pos[parent][2] + arm[2]};
            }
            for (int a = 0; a < 3; ++a) out.at(t, j, a) = pos[j][a];
        }
    }
    return out;
}

void remove_global_transform(PoseSequence& p, std::size_t root_joint) {
    for (std::size_t t = 0; t < p.frames; ++t) {
        const double rx = p.at(t, root_joint, 0);
        const double ry = p.at(t, root_joint, 1);
        const double rz = p.at(t, root_joint, 2);
        for (std::size_t j = 0; j < p.joints; ++j) {
            p.at(t, j, 0) -= rx;
            p.at(t, j, 1) -= ry;
            p.at(t, j, 2) -= rz;
        }
    }
}

void remove_global_transform(AngleSequence& a, std::size_t root_joint) {
    for (std::size_t t = 0; t < a.frames; ++t)
        for (int axis = 0; axis < 3; ++axis) a.rot(t, root_joint, axis) = 0.0;
    a.global_translation.clear();
}

PoseSequence resample(const PoseSequence& p, double target_hz) {
    if (target_hz <= 0) throw ParameterError("resample target rate must be positive");
    const double ratio = p.frame_rate_hz / target_hz;
    const auto step = static_cast<std::size_t>(std::llround(ratio));
    if (step < 1 || std::abs(ratio - static_cast<double>(step)) > 1e-9) {
        throw ParameterError("resample supports integer decimation only: " +
                             std::to_string(p.frame_rate_hz) + " Hz -> " +
                             std::to_string(target_hz) + " Hz");
    }
    PoseSequence out = p;
    out.frame_rate_hz = target_hz;
    out.frames = (p.frames + step - 1) / step;
    out.positions.clear();
    out.positions.reserve(out.frames * p.joints * 3);
    for (std::size_t t = 0; t < p.frames; t += step) {
        out.positions.insert(out.positions.end(), p.positions.begin() + t * p.joints * 3,
                             p.positions.begin() + (t + 1) * p.joints * 3);
    }
    return out;
}

std::size_t ms_to_frames(double ms, double hz) {
    const double frames = ms * hz / 1000.0;
    const auto rounded = static_cast<std::size_t>(std::llround(frames));
    if (std::abs(frames - static_cast<double>(rounded)) > 1e-6) {
        throw ParameterError("horizon " + std::to_string(ms) + " ms does not land on a frame at " +
                             std::to_string(hz) + " Hz");
    }
    return rounded;
}

void write_pose_csv(const PoseSequence& p, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write pose csv: " + path);
    const auto names = p.joint_names.empty() ? default_joint_names(p.joints) : p.joint_names;
    std::string header = "# symfore-pose v1; hz=";
    append_g17(header, p.frame_rate_hz);
    header += "; joints=" + join(names, ',') + "\n";
    out << header;
    std::string line;
    for (std::size_t t = 0; t < p.frames; ++t) {
        line.clear();
        for (std::size_t i = 0; i < p.joints * 3; ++i) {
            if (i) line += ',';
            append_g17(line, p.positions[t * p.joints * 3 + i]);
        }
        line += '\n';
        out << line;
    }
}

PoseSequence read_pose_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open pose csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto kv = parse_header(line, "pose", path);
    PoseSequence p;
    p.frame_rate_hz = std::strtod(header_value(kv, "hz", path).c_str(), nullptr);
    p.joint_names = split(header_value(kv, "joints", path), ',');
    p.joints = p.joint_names.size();
    p.source_file = path;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto row = parse_row(line, p.joints * 3, path, lineno);
        p.positions.insert(p.positions.end(), row.begin(), row.end());
        ++p.frames;
    }
    p.validate();
    return p;
}

AngleSequence read_angle_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open angle csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto kv = parse_header(line, "angles", path);
    AngleSequence a;
    a.frame_rate_hz = std::strtod(header_value(kv, "hz", path).c_str(), nullptr);
    a.joint_names = split(header_value(kv, "joints", path), ',');
    a.joints = a.joint_names.size();
    const std::string rep = header_value_or(kv, "rep", "expmap");
    const std::string global = header_value_or(kv, "global", "none");
    const bool has_trans = global == "trans";
    if (global != "none" && global != "trans") {
        throw DataError(path + ": global must be 'none' or 'trans', got '" + global + "'");
    }
    std::string euler_order;
    if (rep.rfind("euler-", 0) == 0) {
        euler_order = rep.substr(6);
    } else if (rep != "expmap") {
        throw DataError(path + ": rep must be 'expmap' or 'euler-<order>', got '" + rep + "'");
    }
    const std::size_t cols = a.joints * 3 + (has_trans ? 3 : 0);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto row = parse_row(line, cols, path, lineno);
        std::size_t offset = 0;
        if (has_trans) {
            a.global_translation.insert(a.global_translation.end(), row.begin(), row.begin() + 3);
            offset = 3;
        }
        for (std::size_t j = 0; j < a.joints; ++j) {
            kin::Vec3 v{row[offset + j * 3], row[offset + j * 3 + 1], row[offset + j * 3 + 2]};
            if (!euler_order.empty()) {
                v = kin::rotation_to_expmap(kin::euler_to_rotation(v, euler_order));
            }
            a.rotations.insert(a.rotations.end(), v.begin(), v.end());
        }
        ++a.frames;
    }
    return a;
}

void write_label_csv(const LabelFile& l, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write label csv: " + path);
    out << "# symfore-labels v1; classes=" << join(l.class_names, ',') << "\n";
    for (int id : l.labels) out << id << "\n";
}

LabelFile read_label_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open label csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto kv = parse_header(line, "labels", path);
    LabelFile l;
    l.class_names = split(header_value(kv, "classes", path), ',');
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const int id = std::atoi(line.c_str());
        if (id < 0 || static_cast<std::size_t>(id) >= l.class_names.size()) {
            throw DataError(path + ":" + std::to_string(lineno) + ": label id " +
                            std::to_string(id) + " outside the declared class table");
        }
        l.labels.push_back(id);
    }
    return l;
}

ad::TensorPtr to_feature_matrix(const PoseSequence& p, const std::vector<int>& excluded) {
    std::vector<bool> drop(p.joints, false);
    for (int j : excluded) {
        if (j < 0 || static_cast<std::size_t>(j) >= p.joints) {
            throw ParameterError("excluded joint index " + std::to_string(j) + " out of range");
        }
        drop[static_cast<std::size_t>(j)] = true;
    }
    std::size_t kept = 0;
    for (std::size_t j = 0; j < p.joints; ++j)
        if (!drop[j]) ++kept;
    if (kept == 0) throw ParameterError("all joints excluded from the feature representation");
    std::vector<double> values;
    values.reserve(p.frames * kept * 3);
    for (std::size_t t = 0; t < p.frames; ++t)
        for (std::size_t j = 0; j < p.joints; ++j) {
            if (drop[j]) continue;
            for (int a = 0; a < 3; ++a) values.push_back(p.at(t, j, a));
        }
    return ad::Tensor::from({p.frames, kept * 3}, std::move(values));
}

PoseSequence from_feature_matrix(const ad::Tensor& m, double hz,
                                 const std::vector<std::string>& joint_names) {
    if (m.rank() != 2 || m.shape[1] % 3 != 0) {
        throw DimensionError("feature matrix must be [T x 3J], got " + m.shape_str());
    }
    PoseSequence p;
    p.frames = m.shape[0];
    p.joints = m.shape[1] / 3;
    p.frame_rate_hz = hz;
    p.positions = m.values;
    p.joint_names = joint_names.empty() ? default_joint_names(p.joints) : joint_names;
    p.validate();
    return p;
}

}  // namespace symfore::data
