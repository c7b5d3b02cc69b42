#include "symfore/skeleton.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "symfore/error.hpp"

namespace symfore::kin {

std::size_t Skeleton::root() const {
    for (std::size_t i = 0; i < joints.size(); ++i) {
        if (joints[i].parent < 0) return i;
    }
    throw DataError("skeleton has no root joint");
}

void Skeleton::validate() const {
    if (joints.size() < 2) {
        throw DataError("skeleton needs at least 2 joints, got " + std::to_string(joints.size()));
    }
    int roots = 0;
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const Joint& j = joints[i];
        if (j.parent < 0) {
            ++roots;
        } else if (static_cast<std::size_t>(j.parent) >= i) {
            throw DataError("skeleton joint '" + j.name + "' references parent " +
                            std::to_string(j.parent) + " that does not precede it");
        }
        for (double v : j.offset) {
            if (!std::isfinite(v)) throw DataError("skeleton joint '" + j.name + "' has a non-finite offset");
        }
    }
    if (roots != 1) {
        throw DataError("skeleton must have exactly one root, found " + std::to_string(roots));
    }
}

Skeleton Skeleton::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open skeleton file: " + path);
    Skeleton skel;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Joint j;
        std::string parent;
        if (!(ls >> j.name >> parent >> j.offset[0] >> j.offset[1] >> j.offset[2])) {
            throw DataError("malformed skeleton line in " + path + ": '" + line + "'");
        }
        j.parent = parent == "-" ? -1 : std::stoi(parent);
        skel.joints.push_back(std::move(j));
    }
    skel.validate();
    return skel;
}

void Skeleton::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write skeleton file: " + path);
    char buf[96];
    for (const Joint& j : joints) {
        out << j.name << ' ';
        if (j.parent < 0) {
            out << '-';
        } else {
            out << j.parent;
        }
        std::snprintf(buf, sizeof(buf), " %.17g %.17g %.17g\n", j.offset[0], j.offset[1],
                      j.offset[2]);
        out << buf;
    }
}

}  // namespace symfore::kin
