#pragma once

#include <string>
#include <vector>

#include "symfore/rotation.hpp"

namespace symfore::kin {

struct Joint {
    std::string name;
    int parent = -1;  // -1 marks the root
    Vec3 offset{0, 0, 0};  // mm, relative to the parent
};

// Joint hierarchy in topological order: every parent index precedes its
// children. File format, one joint per line:
//   <name> <parent-index|-> <ox> <oy> <oz>
struct Skeleton {
    std::vector<Joint> joints;

    std::size_t size() const { return joints.size(); }
    std::size_t root() const;
    void validate() const;

    static Skeleton load(const std::string& path);
    void save(const std::string& path) const;
};

}  // namespace symfore::kin
