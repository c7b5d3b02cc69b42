#include "symfore/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "symfore/error.hpp"

namespace symfore::io {

namespace {

constexpr char kMagic[8] = {'S', 'Y', 'M', 'F', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError(path + ": truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw DataError(path + ": truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double get_f64(std::istream& in, const std::string& path) {
    const std::uint64_t bits = get_u64(in, path);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string get_bytes(std::istream& in, std::size_t len, const std::string& path) {
    std::string s(len, '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(len))) {
        throw DataError(path + ": truncated checkpoint");
    }
    return s;
}

}  // namespace

void Checkpoint::set_array(const std::string& name, ad::TensorPtr tensor) {
    for (auto& [k, v] : arrays_) {
        if (k == name) {
            v = std::move(tensor);
            return;
        }
    }
    arrays_.emplace_back(name, std::move(tensor));
}

void Checkpoint::set_string(const std::string& key, std::string value) {
    for (auto& [k, v] : strings_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    strings_.emplace_back(key, std::move(value));
}

bool Checkpoint::has_array(const std::string& name) const {
    for (const auto& [k, v] : arrays_)
        if (k == name) return true;
    return false;
}

bool Checkpoint::has_string(const std::string& key) const {
    for (const auto& [k, v] : strings_)
        if (k == key) return true;
    return false;
}

const ad::TensorPtr& Checkpoint::array(const std::string& name) const {
    for (const auto& [k, v] : arrays_)
        if (k == name) return v;
    throw DataError("checkpoint has no array '" + name + "'");
}

const std::string& Checkpoint::string(const std::string& key) const {
    for (const auto& [k, v] : strings_)
        if (k == key) return v;
    throw DataError("checkpoint has no entry '" + key + "'");
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(arrays_.size()));
    for (const auto& [name, tensor] : arrays_) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(tensor->shape.size()));
        for (std::size_t dim : tensor->shape) put_u64(out, dim);
        for (double v : tensor->values) put_f64(out, v);
    }
    put_u32(out, static_cast<std::uint32_t>(strings_.size()));
    for (const auto& [key, value] : strings_) {
        put_u32(out, static_cast<std::uint32_t>(key.size()));
        out.write(key.data(), static_cast<std::streamsize>(key.size()));
        put_u64(out, value.size());
        out.write(value.data(), static_cast<std::streamsize>(value.size()));
    }
    if (!out) throw DataError("short write on checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError(path + ": not a checkpoint file (bad magic)");
    }
    const std::uint32_t version = get_u32(in, path);
    if (version != kVersion) {
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version) +
                        " (this build reads version " + std::to_string(kVersion) + ")");
    }
    Checkpoint ckpt;
    const std::uint32_t n_arrays = get_u32(in, path);
    for (std::uint32_t a = 0; a < n_arrays; ++a) {
        const std::string name = get_bytes(in, get_u32(in, path), path);
        const std::uint32_t ndim = get_u32(in, path);
        std::vector<std::size_t> shape(ndim);
        for (auto& dim : shape) dim = static_cast<std::size_t>(get_u64(in, path));
        std::vector<double> values(ad::shape_product(shape));
        for (double& v : values) v = get_f64(in, path);
        ckpt.arrays_.emplace_back(name, ad::Tensor::from(std::move(shape), std::move(values)));
    }
    const std::uint32_t n_strings = get_u32(in, path);
    for (std::uint32_t s = 0; s < n_strings; ++s) {
        const std::string key = get_bytes(in, get_u32(in, path), path);
        const std::string value =
            get_bytes(in, static_cast<std::size_t>(get_u64(in, path)), path);
        ckpt.strings_.emplace_back(key, value);
    }
    return ckpt;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash missing file: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return h;
}

}  // namespace symfore::io
