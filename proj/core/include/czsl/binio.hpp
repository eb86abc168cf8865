#pragma once

#include "czsl/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace czsl {

// Little-endian binary IO for the dataset and checkpoint formats.
static_assert(std::endian::native == std::endian::little,
              "big-endian hosts would need byte swapping here");

template <typename T>
void write_le(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
    if (!out) throw IoError("binary write failed");
}

template <typename T>
T read_le(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("binary read failed or file truncated");
    return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out) throw IoError("binary write failed");
}

inline std::string read_string(std::istream& in) {
    const auto n = read_le<std::uint64_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw IoError("binary read failed or file truncated");
    return s;
}

inline void write_f64_vec(std::ostream& out, const std::vector<double>& v) {
    write_le<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw IoError("binary write failed");
}

inline std::vector<double> read_f64_vec(std::istream& in) {
    const auto n = read_le<std::uint64_t>(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError("binary read failed or file truncated");
    return v;
}

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a(const void* bytes, std::size_t n,
                           std::uint64_t seed = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = kFnvOffset) {
    return fnv1a(s.data(), s.size(), seed);
}

// Digest of a parameter snapshot, e.g. for training traces.
inline std::uint64_t hash_spans(const std::vector<std::span<const double>>& spans) {
    std::uint64_t h = kFnvOffset;
    for (const auto& s : spans) {
        h = fnv1a(s.data(), s.size() * sizeof(double), h);
    }
    return h;
}

std::string to_hex(std::uint64_t value);
std::uint64_t file_checksum(const std::string& path);

} // namespace czsl
