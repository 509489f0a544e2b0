#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "har/errors.hpp"
#include "har/nn/tensor.hpp"

namespace har::nn {

// Parameter serialization: magic "HARSSL01", u16 format version,
// little-endian; then per-tensor (name, dims, f32 data), in store order.
// Round-trips are bit-exact.

namespace detail {

constexpr char kParamMagic[9] = "HARSSL01";
constexpr uint16_t kParamVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError("params: truncated stream");
    return v;
}

} // namespace detail

inline void save_params(std::ostream& os, const ParamStore<float>& store) {
    os.write(detail::kParamMagic, 8);
    detail::write_le<uint16_t>(os, detail::kParamVersion);
    detail::write_le<uint32_t>(os, static_cast<uint32_t>(store.size()));
    for (size_t i = 0; i < store.size(); ++i) {
        const std::string& name = store.names()[i];
        const Tensor<float>& t = store.tensor(i);
        detail::write_le<uint32_t>(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_le<uint32_t>(os, static_cast<uint32_t>(t.shape.size()));
        for (int d : t.shape) detail::write_le<uint32_t>(os, static_cast<uint32_t>(d));
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
}

inline void save_params(const std::string& path, const ParamStore<float>& store) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("params: cannot write '" + path + "'");
    save_params(os, store);
    if (!os) throw DataError("params: write failed for '" + path + "'");
}

inline ParamStore<float> load_params(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, detail::kParamMagic, 8) != 0)
        throw DataError("params: bad magic");
    const uint16_t version = detail::read_le<uint16_t>(is);
    if (version != detail::kParamVersion)
        throw DataError("params: unsupported format version " + std::to_string(version));
    const uint32_t count = detail::read_le<uint32_t>(is);
    ParamStore<float> store;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t nlen = detail::read_le<uint32_t>(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        const uint32_t ndim = detail::read_le<uint32_t>(is);
        std::vector<int> shape(ndim);
        for (uint32_t d = 0; d < ndim; ++d) shape[d] = static_cast<int>(detail::read_le<uint32_t>(is));
        Tensor<float> t = Tensor<float>::zeros(shape);
        is.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!is) throw DataError("params: truncated tensor data");
        store.add(name, std::move(t));
    }
    return store;
}

inline ParamStore<float> load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("params: cannot open '" + path + "'");
    return load_params(is);
}

} // namespace har::nn
