#include "czsl/errors.hpp"
#include "czsl/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <set>
#include <vector>

using namespace czsl;

TEST_CASE("same seed reproduces the draw sequence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(42), d(43);
    bool any_diff = false;
    for (int i = 0; i < 10; ++i) {
        any_diff |= c.next_u64() != d.next_u64();
    }
    CHECK(any_diff);
}

TEST_CASE("uniform stays in [0, 1) and uniform_open in (0, 1]") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform_open();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("uniform_index covers [0, n) without bias artifacts") {
    Rng rng(11);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) {
        const std::size_t j = rng.uniform_index(5);
        REQUIRE(j < 5);
        ++counts[j];
    }
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
    CHECK(rng.uniform_index(1) == 0);
}

TEST_CASE("gaussian moments are close to standard normal") {
    Rng rng(13);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("shuffle permutes without losing elements") {
    Rng rng(5);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    std::vector<int> orig = v;
    rng.shuffle(v);
    CHECK(v != orig);
    std::sort(v.begin(), v.end());
    CHECK(v == orig);
}

TEST_CASE("state round-trip resumes the exact sequence") {
    Rng rng(99);
    rng.gaussian(); // leave a cached Box-Muller value in flight
    const std::string state = rng.serialize_state();

    std::vector<double> expected;
    for (int i = 0; i < 20; ++i) expected.push_back(rng.gaussian());

    Rng restored;
    restored.restore_state(state);
    for (int i = 0; i < 20; ++i) {
        CHECK(restored.gaussian() == expected[i]);
    }
}

TEST_CASE("restore_state rejects malformed text") {
    Rng rng;
    CHECK_THROWS_AS(rng.restore_state("not a state"), Error);
}

TEST_CASE("RngSet streams are independent") {
    RngSet a = RngSet::from_seed(1);
    RngSet b = RngSet::from_seed(1);
    // Draining one stream must not perturb any other.
    for (int i = 0; i < 1000; ++i) a.memory.next_u64();
    CHECK(a.training.next_u64() == b.training.next_u64());
    CHECK(a.generation.next_u64() == b.generation.next_u64());
    CHECK(a.classifier.next_u64() == b.classifier.next_u64());

    RngSet c = RngSet::from_seed(2);
    CHECK(c.training.next_u64() != b.training.next_u64());
}

TEST_CASE("rng algorithm tag is pinned") {
    CHECK(std::strcmp(kRngAlgorithm, "mt19937_64-boxmuller-v1") == 0);
}
