#include "czsl/dataset.hpp"

#include "czsl/binio.hpp"
#include "czsl/errors.hpp"
#include "czsl/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace czsl {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::vector<std::size_t>> FeatureDataset::indices_by_class() const {
    std::vector<std::vector<std::size_t>> by_class(num_classes());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    return by_class;
}

void FeatureDataset::validate() const {
    const std::size_t n = num_samples();
    const std::size_t c = num_classes();
    if (labels.size() != n) {
        throw DataError("dataset: " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(n) + " feature rows");
    }
    if (c == 0) throw DataError("dataset: no classes");
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= c) {
            throw DataError("dataset: label " + std::to_string(labels[i]) +
                            " out of range at row " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < features.cols; ++j) {
            if (!std::isfinite(features.at(i, j))) {
                throw NumericError("dataset: non-finite feature at row " +
                                   std::to_string(i));
            }
        }
    }
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < attributes.cols; ++j) {
            if (!std::isfinite(attributes.at(i, j))) {
                throw NumericError("dataset: non-finite attribute for class " +
                                   std::to_string(i));
            }
        }
    }
    if (class_names && class_names->size() != c) {
        throw DataError("dataset: class_names size " +
                        std::to_string(class_names->size()) + " vs " +
                        std::to_string(c) + " classes");
    }
    std::vector<bool> referenced(c, false);
    for (std::uint32_t l : labels) referenced[l] = true;
    for (std::uint32_t cls : attribute_only_classes) {
        if (cls >= c) {
            throw DataError("dataset: attribute_only class " +
                            std::to_string(cls) + " out of range");
        }
        referenced[cls] = true;
    }
    for (std::size_t i = 0; i < c; ++i) {
        if (!referenced[i]) {
            throw DataError("dataset: class " + std::to_string(i) +
                            " has no samples and is not flagged attribute-only");
        }
    }
}

FeatureDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.num_classes < 1 || spec.samples_per_class < 1 ||
        spec.feature_dim < 1 || spec.attribute_dim < 1) {
        throw ConfigError("synthetic: all counts must be >= 1");
    }
    if (!(spec.cluster_spread > 0.0)) {
        throw ConfigError("synthetic: cluster_spread must be > 0");
    }
    Rng rng(spec.seed);
    const std::size_t n = spec.num_classes * spec.samples_per_class;

    // Fixed projection from attribute space to feature space; 1/d_a variance
    // keeps class centroid components near unit scale.
    Matrix projection(spec.feature_dim, spec.attribute_dim);
    const double pscale = 1.0 / std::sqrt(static_cast<double>(spec.attribute_dim));
    for (double& v : projection.data) v = pscale * rng.gaussian();

    FeatureDataset ds;
    ds.features = Matrix(n, spec.feature_dim);
    ds.labels.resize(n);
    ds.attributes = Matrix(spec.num_classes, spec.attribute_dim);

    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        for (std::size_t j = 0; j < spec.attribute_dim; ++j) {
            ds.attributes.at(c, j) = rng.gaussian();
        }
        std::vector<double> centroid(spec.feature_dim, 0.0);
        for (std::size_t i = 0; i < spec.feature_dim; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < spec.attribute_dim; ++j) {
                acc += projection.at(i, j) * ds.attributes.at(c, j);
            }
            centroid[i] = acc;
        }
        for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
            ds.labels[row] = static_cast<std::uint32_t>(c);
            for (std::size_t i = 0; i < spec.feature_dim; ++i) {
                ds.features.at(row, i) =
                    centroid[i] + spec.cluster_spread * rng.gaussian();
            }
        }
    }
    ds.validate();
    return ds;
}

namespace {

json read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("dataset: missing manifest.json at " + path);
    json m;
    try {
        in >> m;
    } catch (const json::exception& e) {
        throw DataError("dataset: malformed manifest.json: " + std::string(e.what()));
    }
    return m;
}

std::vector<char> read_binary_file(const std::string& path,
                                   std::size_t expected_bytes,
                                   const std::string& what) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw DataError("dataset: missing file " + path);
    const auto size = static_cast<std::size_t>(in.tellg());
    if (size != expected_bytes) {
        throw DataError("dataset: " + what + " holds " + std::to_string(size) +
                        " bytes, manifest implies " +
                        std::to_string(expected_bytes));
    }
    std::vector<char> buf(size);
    in.seekg(0);
    in.read(buf.data(), static_cast<std::streamsize>(size));
    if (!in) throw DataError("dataset: short read on " + path);
    return buf;
}

void check_file_checksum(const json& manifest, const std::string& dir,
                         const std::string& name) {
    if (!manifest.contains("checksums")) return;
    const auto& sums = manifest.at("checksums");
    if (!sums.contains(name)) return;
    const std::string want = sums.at(name).get<std::string>();
    const std::string got = to_hex(file_checksum(dir + "/" + name));
    if (want != got) {
        throw DataError("dataset: checksum mismatch for " + name + " (manifest " +
                        want + ", file " + got + ")");
    }
}

Matrix f32_to_matrix(const std::vector<char>& bytes, std::size_t rows,
                     std::size_t cols) {
    Matrix m(rows, cols);
    const float* src = reinterpret_cast<const float*>(bytes.data());
    for (std::size_t i = 0; i < rows * cols; ++i) {
        m.data[i] = static_cast<double>(src[i]);
    }
    return m;
}

} // namespace

FeatureDataset load_dataset(const std::string& dir) {
    const json manifest = read_manifest(dir + "/manifest.json");
    for (const char* key : {"n", "c", "d_x", "d_a"}) {
        if (!manifest.contains(key)) {
            throw DataError("dataset: manifest missing field '" + std::string(key) +
                            "'");
        }
    }
    const auto n = manifest.at("n").get<std::size_t>();
    const auto c = manifest.at("c").get<std::size_t>();
    const auto d_x = manifest.at("d_x").get<std::size_t>();
    const auto d_a = manifest.at("d_a").get<std::size_t>();
    if (manifest.value("byte_order", std::string("little")) != "little") {
        throw DataError("dataset: unsupported byte_order '" +
                        manifest.value("byte_order", std::string()) + "'");
    }

    check_file_checksum(manifest, dir, "features.bin");
    check_file_checksum(manifest, dir, "labels.bin");
    check_file_checksum(manifest, dir, "attributes.bin");

    const auto feature_bytes =
        read_binary_file(dir + "/features.bin", n * d_x * 4, "features.bin");
    const auto label_bytes =
        read_binary_file(dir + "/labels.bin", n * 4, "labels.bin");
    const auto attribute_bytes =
        read_binary_file(dir + "/attributes.bin", c * d_a * 4, "attributes.bin");

    FeatureDataset ds;
    ds.features = f32_to_matrix(feature_bytes, n, d_x);
    ds.attributes = f32_to_matrix(attribute_bytes, c, d_a);
    ds.labels.resize(n);
    const auto* lbl = reinterpret_cast<const std::uint32_t*>(label_bytes.data());
    std::copy(lbl, lbl + n, ds.labels.begin());

    if (manifest.contains("class_names")) {
        ds.class_names = manifest.at("class_names").get<std::vector<std::string>>();
    }
    if (manifest.contains("attribute_only_classes")) {
        ds.attribute_only_classes =
            manifest.at("attribute_only_classes").get<std::vector<std::uint32_t>>();
    }
    ds.validate();
    return ds;
}

namespace {

void write_f32_file(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("dataset: cannot write " + path);
    std::vector<float> buf(m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        buf[i] = static_cast<float>(m.data[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * 4));
    if (!out) throw IoError("dataset: write failed for " + path);
}

} // namespace

void save_dataset(const FeatureDataset& dataset, const std::string& dir) {
    dataset.validate();
    fs::create_directories(dir);
    write_f32_file(dir + "/features.bin", dataset.features);
    write_f32_file(dir + "/attributes.bin", dataset.attributes);
    {
        std::ofstream out(dir + "/labels.bin", std::ios::binary);
        if (!out) throw IoError("dataset: cannot write labels.bin");
        out.write(reinterpret_cast<const char*>(dataset.labels.data()),
                  static_cast<std::streamsize>(dataset.labels.size() * 4));
        if (!out) throw IoError("dataset: write failed for labels.bin");
    }

    json manifest;
    manifest["n"] = dataset.num_samples();
    manifest["c"] = dataset.num_classes();
    manifest["d_x"] = dataset.feature_dim();
    manifest["d_a"] = dataset.attribute_dim();
    manifest["byte_order"] = "little";
    if (dataset.class_names) manifest["class_names"] = *dataset.class_names;
    if (!dataset.attribute_only_classes.empty()) {
        manifest["attribute_only_classes"] = dataset.attribute_only_classes;
    }
    json sums;
    for (const char* name : {"features.bin", "labels.bin", "attributes.bin"}) {
        sums[name] = to_hex(file_checksum(dir + "/" + name));
    }
    manifest["checksums"] = sums;

    std::ofstream out(dir + "/manifest.json");
    if (!out) throw IoError("dataset: cannot write manifest.json");
    out << manifest.dump(2) << '\n';
}

namespace {

std::vector<std::vector<double>> read_csv_numeric(const std::string& path,
                                                  const std::string& what) {
    std::ifstream in(path);
    if (!in) throw DataError("convert: missing file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
            } catch (const std::exception&) {
                throw DataError("convert: " + what + " line " +
                                std::to_string(lineno) + ": bad value '" + cell +
                                "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError("convert: " + what + " line " +
                            std::to_string(lineno) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("convert: " + what + " is empty");
    return rows;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].begin(), rows[i].end(), m.data.begin() + i * m.cols);
    }
    return m;
}

} // namespace

FeatureDataset convert_csv_dataset(const std::string& csv_dir,
                                   const std::string& out_dir) {
    const auto feature_rows = read_csv_numeric(csv_dir + "/features.csv", "features.csv");
    const auto label_rows = read_csv_numeric(csv_dir + "/labels.csv", "labels.csv");
    const auto attribute_rows =
        read_csv_numeric(csv_dir + "/attributes.csv", "attributes.csv");

    FeatureDataset ds;
    ds.features = rows_to_matrix(feature_rows);
    ds.attributes = rows_to_matrix(attribute_rows);
    ds.labels.reserve(label_rows.size());
    for (std::size_t i = 0; i < label_rows.size(); ++i) {
        if (label_rows[i].size() != 1) {
            throw DataError("convert: labels.csv row " + std::to_string(i + 1) +
                            " must hold exactly one value");
        }
        const double v = label_rows[i][0];
        if (v < 0 || v != std::floor(v)) {
            throw DataError("convert: labels.csv row " + std::to_string(i + 1) +
                            ": label must be a nonnegative integer");
        }
        ds.labels.push_back(static_cast<std::uint32_t>(v));
    }

    std::ifstream names(csv_dir + "/class_names.csv");
    if (names) {
        std::vector<std::string> out;
        std::string line;
        while (std::getline(names, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) out.push_back(line);
        }
        if (!out.empty()) ds.class_names = std::move(out);
    }

    // Classes with attributes but no samples are the unseen side of a
    // standard ZSL export; flag them so validation accepts the dataset.
    std::vector<bool> referenced(ds.num_classes(), false);
    for (std::uint32_t l : ds.labels) {
        if (l < referenced.size()) referenced[l] = true;
    }
    for (std::size_t c = 0; c < referenced.size(); ++c) {
        if (!referenced[c]) {
            ds.attribute_only_classes.push_back(static_cast<std::uint32_t>(c));
        }
    }

    ds.validate();
    save_dataset(ds, out_dir);
    return ds;
}

} // namespace czsl
