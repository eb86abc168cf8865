#pragma once

#include "czsl/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace czsl {

// Precomputed feature vectors with integer labels and per-class attribute
// vectors. Image decoding and feature extraction happen upstream; this
// library only consumes the exported vectors.
struct FeatureDataset {
    Matrix features;   // N x d_x
    std::vector<std::uint32_t> labels; // N entries in [0, C)
    Matrix attributes; // C x d_a
    std::optional<std::vector<std::string>> class_names; // C entries
    // Classes known only through attributes; they may have zero samples.
    std::vector<std::uint32_t> attribute_only_classes;

    std::size_t num_samples() const { return features.rows; }
    std::size_t num_classes() const { return attributes.rows; }
    std::size_t feature_dim() const { return features.cols; }
    std::size_t attribute_dim() const { return attributes.cols; }

    // Sample indices per class, ascending. Size C.
    std::vector<std::vector<std::size_t>> indices_by_class() const;

    // Enforces every invariant; throws DataError/NumericError with the
    // offending row or class in the message. Never repairs.
    void validate() const;
};

struct SyntheticSpec {
    std::size_t num_classes = 20;
    std::size_t samples_per_class = 50;
    std::size_t feature_dim = 32;
    std::size_t attribute_dim = 16;
    double cluster_spread = 0.5;
    std::uint64_t seed = 1;
};

// Per class c: attribute prototype a_c ~ N(0, I), features ~ N(P a_c,
// spread^2 I) for one fixed random projection P (entries N(0, 1/d_a)).
// Attribute-feature correlation is built in, so zero-shot transfer through
// attributes is learnable. Deterministic given the seed.
FeatureDataset generate_synthetic(const SyntheticSpec& spec);

// Dataset directory format:
//   manifest.json   n, c, d_x, d_a, byte_order ("little"), checksums,
//                   optional class_names and attribute_only_classes
//   features.bin    N x d_x float32 little-endian, row-major
//   labels.bin      N uint32 little-endian
//   attributes.bin  C x d_a float32 little-endian, row-major
FeatureDataset load_dataset(const std::string& dir);
void save_dataset(const FeatureDataset& dataset, const std::string& dir);

// Reads features.csv / labels.csv / attributes.csv (plus optional
// class_names.csv, one name per line) and writes the binary directory
// format. Returns the converted dataset.
FeatureDataset convert_csv_dataset(const std::string& csv_dir,
                                   const std::string& out_dir);

} // namespace czsl
