#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rulex/clustering.hpp"

using namespace rulex;
using rulex::testing::TempDir;

namespace {

// three tight gaussian blobs in 4-d, 60 points each; the spread-to-gap
// ratio (~0.7 vs 20) puts the expected silhouette near 0.97
std::pair<std::vector<std::vector<double>>, std::vector<int>> make_blobs(std::uint64_t seed) {
    const std::vector<std::vector<double>> centers = {
        {0, 0, 0, 0}, {20, 0, 0, 0}, {0, 20, 0, 0}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.25);
    std::vector<std::vector<double>> points;
    std::vector<int> truth;
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 60; ++i) {
            std::vector<double> p = centers[static_cast<std::size_t>(b)];
            for (double& v : p) v += noise(rng);
            points.push_back(std::move(p));
            truth.push_back(b);
        }
    return {points, truth};
}

}  // namespace

TEST_SUITE_BEGIN("clustering");

TEST_CASE("silhouette of the hand-computed 4-point example") {
    // 1-d pairs {0,1} vs {100,101}: mean of 99.5/100.5 and 98.5/99.5
    const std::vector<std::vector<double>> pts = {{0.0}, {1.0}, {100.0}, {101.0}};
    const std::vector<int> assignment = {0, 0, 1, 1};
    CHECK(silhouette_mean(pts, assignment) ==
          doctest::Approx(0.9899997499937498).epsilon(1e-9));
}

TEST_CASE("silhouette edge cases") {
    SUBCASE("two singleton clusters score zero") {
        CHECK(silhouette_mean({{0.0}, {5.0}}, {0, 1}) == 0.0);
    }
    SUBCASE("a point equidistant from both clusters contributes zero") {
        // 0 and 2 in one cluster, 4 alone: point 2 has a == b == 2
        const double s = silhouette_mean({{0.0}, {2.0}, {4.0}}, {0, 0, 1});
        CHECK(s == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
    }
    SUBCASE("coincident points across clusters hit the max(a,b)==0 guard") {
        CHECK(silhouette_mean({{1.0}, {1.0}, {1.0}, {1.0}}, {0, 0, 1, 1}) == 0.0);
    }
    SUBCASE("single cluster is rejected") {
        CHECK_THROWS_AS(silhouette_mean({{0.0}, {1.0}}, {0, 0}), std::invalid_argument);
    }
    SUBCASE("true split beats a shuffled one") {
        auto [points, truth] = make_blobs(4);
        std::vector<int> shuffled = truth;
        std::mt19937_64 rng(9);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(silhouette_mean(points, truth) > silhouette_mean(points, shuffled));
    }
}

TEST_CASE("k-means recovers well-separated blobs exactly") {
    auto [points, truth] = make_blobs(1);
    std::mt19937_64 rng(2);
    const ClusterAssignment ca = kmeans(points, 3, rng);

    REQUIRE(ca.assignment.size() == points.size());
    REQUIRE(ca.centroids.size() == 3);
    CHECK(ca.repairs == 0);

    // cluster ids must be a relabeling of the ground truth
    std::map<int, int> blob_of;
    bool pure = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [it, fresh] = blob_of.emplace(ca.assignment[i], truth[i]);
        if (!fresh && it->second != truth[i]) pure = false;
    }
    CHECK(pure);
    CHECK(blob_of.size() == 3);
    CHECK(silhouette_mean(points, ca.assignment) > 0.95);

    // Lloyd iterations only improve the winning restart
    REQUIRE(!ca.inertia_history.empty());
    for (std::size_t i = 1; i < ca.inertia_history.size(); ++i)
        CHECK(ca.inertia_history[i] <= ca.inertia_history[i - 1] + 1e-9);
    CHECK(ca.inertia == doctest::Approx(ca.inertia_history.back()));
}

TEST_CASE("k-means input validation") {
    const std::vector<std::vector<double>> pts = {{0.0}, {0.0}, {1.0}, {2.0}};
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(kmeans(pts, 1, rng), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(pts, 4, rng), std::invalid_argument);  // only 3 distinct points
    CHECK_THROWS_AS(kmeans({}, 2, rng), std::invalid_argument);

    // k == number of distinct points: every centroid lands on a point
    const ClusterAssignment exact = kmeans(pts, 3, rng);
    CHECK(exact.inertia == doctest::Approx(0.0));
    CHECK(exact.assignment[0] == exact.assignment[1]);
}

TEST_CASE("k-means is deterministic given the generator state") {
    auto [points, truth] = make_blobs(7);
    std::mt19937_64 a(11), b(11);
    const ClusterAssignment ca = kmeans(points, 5, a);
    const ClusterAssignment cb = kmeans(points, 5, b);
    CHECK(ca.assignment == cb.assignment);
    CHECK(ca.centroids == cb.centroids);
    CHECK(ca.inertia == cb.inertia);
}

TEST_CASE("nearest-centroid ties pick the lowest cluster id") {
    CHECK(assign_to_centroid({{1.0}, {3.0}}, {2.0}) == 0);
    CHECK(assign_to_centroid({{3.0}, {1.0}}, {2.0}) == 0);
    CHECK(assign_to_centroid({{0.0}, {0.0}}, {5.0}) == 0);
    CHECK(assign_to_centroid({{0.0}, {4.9}}, {5.0}) == 1);
}

TEST_CASE("subsampling is uniform, sorted and degenerate-safe") {
    std::mt19937_64 rng(13);
    const auto all = uniform_subsample_indices(10, 20, rng);
    REQUIRE(all.size() == 10);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

    const auto some = uniform_subsample_indices(1000, 50, rng);
    REQUIRE(some.size() == 50);
    CHECK(std::is_sorted(some.begin(), some.end()));
    CHECK(std::set<std::size_t>(some.begin(), some.end()).size() == 50);
    CHECK(some.back() < 1000);
}

TEST_CASE("assignment and centroid files") {
    TempDir dir;
    auto [points, truth] = make_blobs(5);
    std::mt19937_64 rng(6);
    const ClusterAssignment ca = kmeans(points, 3, rng);

    std::vector<std::string> labels(points.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = "B" + std::to_string(i);
    const auto csv = dir.path() / "assignment.csv";
    write_assignment_csv(ca, labels, csv);
    std::ifstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "index,label,cluster");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == points.size());

    const auto table = dir.path() / "centroids.txt";
    write_centroids(ca, table);
    std::ifstream tin(table);
    std::size_t centroid_rows = 0;
    while (std::getline(tin, line)) {
        if (line.empty()) continue;
        ++centroid_rows;
        std::istringstream fields(line);
        double v;
        int dims = 0;
        while (fields >> v) ++dims;
        CHECK(dims == 4);
    }
    CHECK(centroid_rows == 3);
}

TEST_SUITE_END();
