#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace rulex {

// "list-clusters": one cluster id per hidden pattern, plus the centroids.
struct ClusterAssignment {
    int k = 0;
    std::vector<int> assignment;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    std::vector<double> inertia_history;  // per Lloyd iteration of the winning restart
    int repairs = 0;                      // empty-cluster reseeds in the winning restart
};

struct KmeansOptions {
    int n_init = 10;
    int max_iter = 300;
};

// Lloyd's algorithm with k-means++ seeding, Euclidean metric, best of
// n_init restarts by inertia. Distance ties go to the lowest cluster id.
// Throws std::invalid_argument if k < 2 or k exceeds the number of
// distinct patterns.
ClusterAssignment kmeans(const std::vector<std::vector<double>>& patterns, int k,
                         std::mt19937_64& rng, const KmeansOptions& opts = {});

// Mean of (b-a)/max(a,b) over all points; size-1 clusters contribute 0.
// Throws std::invalid_argument unless the assignment uses >= 2 clusters.
double silhouette_mean(const std::vector<std::vector<double>>& patterns,
                       const std::vector<int>& assignment);

int assign_to_centroid(const std::vector<std::vector<double>>& centroids,
                       const std::vector<double>& point);

// Ascending indices; all of [0,n) when n <= max_count, else a uniform
// draw without replacement.
std::vector<std::size_t> uniform_subsample_indices(std::size_t n, std::size_t max_count,
                                                   std::mt19937_64& rng);

// CSV "index,label,cluster" and a plain k x dim centroid table.
void write_assignment_csv(const ClusterAssignment& ca, const std::vector<std::string>& labels,
                          const std::filesystem::path& path);
void write_centroids(const ClusterAssignment& ca, const std::filesystem::path& path);

}  // namespace rulex
