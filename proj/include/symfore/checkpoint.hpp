#pragma once

#include <string>
#include <utility>
#include <vector>

#include "symfore/tensor.hpp"

namespace symfore::io {

// Single-file container of named f64 arrays and named strings.
//
// Byte layout (all integers little-endian):
//   8 bytes magic "SYMFCKPT"
//   u32 version (currently 1)
//   u32 array count, then per array:
//     u32 name length, name bytes, u32 ndim, u64 dims..., f64 data...
//   u32 string count, then per string:
//     u32 key length, key bytes, u64 value length, value bytes
//
// Doubles are written as raw 64-bit words, so save/load round-trips are
// bit-exact. Loading rejects unknown versions explicitly.
class Checkpoint {
public:
    void set_array(const std::string& name, ad::TensorPtr tensor);
    void set_string(const std::string& key, std::string value);

    bool has_array(const std::string& name) const;
    bool has_string(const std::string& key) const;
    const ad::TensorPtr& array(const std::string& name) const;
    const std::string& string(const std::string& key) const;

    const std::vector<std::pair<std::string, ad::TensorPtr>>& arrays() const { return arrays_; }
    const std::vector<std::pair<std::string, std::string>>& strings() const { return strings_; }

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    static constexpr std::uint32_t kVersion = 1;

private:
    std::vector<std::pair<std::string, ad::TensorPtr>> arrays_;
    std::vector<std::pair<std::string, std::string>> strings_;
};

// FNV-1a over a file's bytes; run logs record this for provenance.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace symfore::io
