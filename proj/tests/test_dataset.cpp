#include "czsl/dataset.hpp"
#include "czsl/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace czsl;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.num_classes = 6;
    spec.samples_per_class = 10;
    spec.feature_dim = 8;
    spec.attribute_dim = 4;
    spec.seed = 11;
    return spec;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("czsl_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    out << text;
}

} // namespace

TEST_CASE("synthetic generation is bitwise deterministic in the seed") {
    const FeatureDataset a = generate_synthetic(small_spec());
    const FeatureDataset b = generate_synthetic(small_spec());
    CHECK(a.features.data == b.features.data);
    CHECK(a.labels == b.labels);
    CHECK(a.attributes.data == b.attributes.data);

    SyntheticSpec other = small_spec();
    other.seed = 12;
    const FeatureDataset c = generate_synthetic(other);
    CHECK(a.features.data != c.features.data);
}

TEST_CASE("synthetic shapes and labels line up with the spec fields") {
    const SyntheticSpec spec = small_spec();
    const FeatureDataset d = generate_synthetic(spec);
    CHECK(d.num_samples() == spec.num_classes * spec.samples_per_class);
    CHECK(d.num_classes() == spec.num_classes);
    CHECK(d.feature_dim() == spec.feature_dim);
    CHECK(d.attribute_dim() == spec.attribute_dim);
    const auto by_class = d.indices_by_class();
    REQUIRE(by_class.size() == spec.num_classes);
    for (const auto& idx : by_class)
        CHECK(idx.size() == spec.samples_per_class);
    CHECK(d.attribute_only_classes.empty());
}

TEST_CASE("tight clusters sit on their class centroids") {
    SyntheticSpec spec = small_spec();
    spec.cluster_spread = 0.01;
    spec.samples_per_class = 30;
    const FeatureDataset d = generate_synthetic(spec);

    // Nearest class-mean classification should be essentially perfect.
    std::vector<std::vector<double>> means(
        spec.num_classes, std::vector<double>(spec.feature_dim, 0.0));
    std::vector<std::size_t> counts(spec.num_classes, 0);
    for (std::size_t i = 0; i < d.num_samples(); ++i) {
        const auto row = d.features.row(i);
        auto& m = means[d.labels[i]];
        for (std::size_t j = 0; j < row.size(); ++j) m[j] += row[j];
        ++counts[d.labels[i]];
    }
    for (std::size_t c = 0; c < spec.num_classes; ++c)
        for (double& v : means[c]) v /= static_cast<double>(counts[c]);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < d.num_samples(); ++i) {
        const auto row = d.features.row(i);
        double best = 1e300;
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < spec.num_classes; ++c) {
            double dist = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) {
                const double diff = row[j] - means[c][j];
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                best_c = c;
            }
        }
        if (best_c == d.labels[i]) ++correct;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(d.num_samples()) >
          0.99);
}

TEST_CASE("a single-class dataset is valid") {
    SyntheticSpec spec = small_spec();
    spec.num_classes = 1;
    const FeatureDataset d = generate_synthetic(spec);
    CHECK(d.num_classes() == 1);
    CHECK_NOTHROW(d.validate());
}

TEST_CASE("validate names the offending row") {
    FeatureDataset d = generate_synthetic(small_spec());
    d.labels[3] = 99;
    CHECK_THROWS_WITH_AS(d.validate(), "dataset: label 99 out of range at row 3",
                         DataError);

    FeatureDataset e = generate_synthetic(small_spec());
    e.features.at(2, 1) = std::nan("");
    CHECK_THROWS_WITH_AS(e.validate(), "dataset: non-finite feature at row 2",
                         NumericError);
}

TEST_CASE("save and load round-trips through the binary directory") {
    TempDir dir("dataset_roundtrip");
    FeatureDataset d = generate_synthetic(small_spec());
    d.class_names = std::vector<std::string>{"a", "b", "c", "d", "e", "f"};
    save_dataset(d, dir.str());

    const FeatureDataset back = load_dataset(dir.str());
    CHECK(back.labels == d.labels);
    REQUIRE(back.class_names.has_value());
    CHECK(*back.class_names == *d.class_names);
    // Storage is float32, so compare at that precision.
    REQUIRE(back.features.data.size() == d.features.data.size());
    for (std::size_t i = 0; i < d.features.data.size(); ++i)
        CHECK(back.features.data[i] ==
              static_cast<double>(static_cast<float>(d.features.data[i])));
    for (std::size_t i = 0; i < d.attributes.data.size(); ++i)
        CHECK(back.attributes.data[i] ==
              static_cast<double>(static_cast<float>(d.attributes.data[i])));
}

TEST_CASE("a corrupted payload fails its checksum") {
    TempDir dir("dataset_checksum");
    save_dataset(generate_synthetic(small_spec()), dir.str());

    std::fstream f(dir.path / "features.bin",
                   std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(8);
    char byte = 0;
    f.read(&byte, 1);
    byte = static_cast<char>(byte ^ 0x5a);
    f.seekp(8);
    f.write(&byte, 1);
    f.close();

    CHECK_THROWS_WITH_AS(load_dataset(dir.str()),
                         doctest::Contains("checksum mismatch for features.bin"),
                         DataError);
}

TEST_CASE("a truncated payload is rejected before parsing") {
    TempDir dir("dataset_truncated");
    const FeatureDataset d = generate_synthetic(small_spec());
    save_dataset(d, dir.str());

    fs::resize_file(dir.path / "labels.bin", 4 * (d.num_samples() - 1));
    CHECK_THROWS_AS(load_dataset(dir.str()), DataError);
}

TEST_CASE("csv conversion matches the rows and flags sample-free classes") {
    TempDir csv("dataset_csv_in");
    TempDir out("dataset_csv_out");

    write_text(csv.path / "features.csv",
               "1.0,2.0\n3.0,4.0\n5.0,6.0\n");
    write_text(csv.path / "labels.csv", "0\n0\n2\n");
    write_text(csv.path / "attributes.csv",
               "0.1,0.2,0.3\n0.4,0.5,0.6\n0.7,0.8,0.9\n");

    const FeatureDataset d = convert_csv_dataset(csv.str(), out.str());
    CHECK(d.num_samples() == 3);
    CHECK(d.num_classes() == 3);
    CHECK(d.feature_dim() == 2);
    CHECK(d.attribute_dim() == 3);
    CHECK(d.labels == std::vector<std::uint32_t>{0, 0, 2});
    // Class 1 exists only through its attribute vector.
    CHECK(d.attribute_only_classes == std::vector<std::uint32_t>{1});
    CHECK(d.features.at(1, 1) == doctest::Approx(4.0));

    const FeatureDataset back = load_dataset(out.str());
    CHECK(back.labels == d.labels);
    CHECK(back.attribute_only_classes == d.attribute_only_classes);
}

TEST_CASE("csv conversion reports the bad row") {
    TempDir csv("dataset_csv_bad");
    TempDir out("dataset_csv_bad_out");
    write_text(csv.path / "features.csv", "1.0,2.0\n3.0,4.0\n");
    write_text(csv.path / "labels.csv", "0\nbanana\n");
    write_text(csv.path / "attributes.csv", "0.1,0.2\n");
    CHECK_THROWS_AS(convert_csv_dataset(csv.str(), out.str()), DataError);
}
