#include "rulex/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace rulex {

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        d += t * t;
    }
    return d;
}

std::size_t count_distinct(const std::vector<std::vector<double>>& patterns) {
    std::set<std::vector<double>> seen(patterns.begin(), patterns.end());
    return seen.size();
}

// k-means++: first centroid uniform, the rest D^2-weighted.
std::vector<std::vector<double>> seed_plusplus(const std::vector<std::vector<double>>& pts, int k,
                                               std::mt19937_64& rng) {
    const std::size_t n = pts.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centroids.push_back(pts[first(rng)]);
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sqdist(pts[i], centroids[0]);
            for (std::size_t j = 1; j < centroids.size(); ++j)
                best = std::min(best, sqdist(pts[i], centroids[j]));
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all remaining mass on existing centroids: any point works
            centroids.push_back(pts[first(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            r -= d2[i];
            if (r <= 0.0) {
                pick = i;
                break;
            }
        }
        centroids.push_back(pts[pick]);
    }
    return centroids;
}

ClusterAssignment lloyd_once(const std::vector<std::vector<double>>& pts, int k,
                             std::mt19937_64& rng, int max_iter) {
    const std::size_t n = pts.size();
    const std::size_t dim = pts[0].size();
    ClusterAssignment ca;
    ca.k = k;
    ca.centroids = seed_plusplus(pts, k, rng);
    ca.assignment.assign(n, -1);
    std::vector<std::size_t> counts(k);
    std::vector<double> dist_to_own(n);

    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = sqdist(pts[i], ca.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sqdist(pts[i], ca.centroids[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (best != ca.assignment[i]) changed = true;
            ca.assignment[i] = best;
            dist_to_own[i] = bd;
        }

        std::fill(counts.begin(), counts.end(), 0);
        for (int c : ca.assignment) ++counts[c];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            // reseed to the point that fits its cluster worst
            std::size_t far = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (dist_to_own[i] > dist_to_own[far]) far = i;
            --counts[ca.assignment[far]];
            ca.assignment[far] = c;
            counts[c] = 1;
            dist_to_own[far] = 0.0;
            ++ca.repairs;
            changed = true;
        }

        for (auto& cen : ca.centroids) std::fill(cen.begin(), cen.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dim; ++j) ca.centroids[ca.assignment[i]][j] += pts[i][j];
        for (int c = 0; c < k; ++c)
            for (std::size_t j = 0; j < dim; ++j) ca.centroids[c][j] /= counts[c];

        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += sqdist(pts[i], ca.centroids[ca.assignment[i]]);
        ca.inertia = inertia;
        ca.inertia_history.push_back(inertia);
        if (!changed) break;
    }
    return ca;
}

}  // namespace

ClusterAssignment kmeans(const std::vector<std::vector<double>>& patterns, int k,
                         std::mt19937_64& rng, const KmeansOptions& opts) {
    if (k < 2) throw std::invalid_argument("kmeans: k must be at least 2");
    if (patterns.empty()) throw std::invalid_argument("kmeans: no patterns");
    if (static_cast<std::size_t>(k) > count_distinct(patterns))
        throw std::invalid_argument("kmeans: k exceeds the number of distinct patterns");

    ClusterAssignment best;
    for (int r = 0; r < opts.n_init; ++r) {
        ClusterAssignment ca = lloyd_once(patterns, k, rng, opts.max_iter);
        if (r == 0 || ca.inertia < best.inertia) best = std::move(ca);
    }
    return best;
}

double silhouette_mean(const std::vector<std::vector<double>>& patterns,
                       const std::vector<int>& assignment) {
    const std::size_t n = patterns.size();
    if (assignment.size() != n) throw std::invalid_argument("silhouette: size mismatch");
    const int k = n ? *std::max_element(assignment.begin(), assignment.end()) + 1 : 0;
    std::vector<std::size_t> counts(k, 0);
    for (int c : assignment) ++counts[c];
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
        throw std::invalid_argument("silhouette: need at least 2 clusters");

    // dsum[i*k + c] = total distance from point i to cluster c
    std::vector<double> dsum(n * static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(sqdist(patterns[i], patterns[j]));
            dsum[i * k + assignment[j]] += d;
            dsum[j * k + assignment[i]] += d;
        }
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int own = assignment[i];
        if (counts[own] == 1) continue;  // s = 0 by convention
        const double a = dsum[i * k + own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[c] == 0) continue;
            b = std::min(b, dsum[i * k + c] / static_cast<double>(counts[c]));
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

int assign_to_centroid(const std::vector<std::vector<double>>& centroids,
                       const std::vector<double>& point) {
    if (centroids.empty()) throw std::invalid_argument("assign_to_centroid: no centroids");
    int best = 0;
    double bd = sqdist(point, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = sqdist(point, centroids[c]);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<std::size_t> uniform_subsample_indices(std::size_t n, std::size_t max_count,
                                                   std::mt19937_64& rng) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    if (n <= max_count) return all;
    std::vector<std::size_t> out;
    out.reserve(max_count);
    std::sample(all.begin(), all.end(), std::back_inserter(out), max_count, rng);
    return out;  // std::sample keeps ascending order
}

void write_assignment_csv(const ClusterAssignment& ca, const std::vector<std::string>& labels,
                          const std::filesystem::path& path) {
    if (labels.size() != ca.assignment.size())
        throw std::invalid_argument("write_assignment_csv: label/assignment size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "index,label,cluster\n";
    for (std::size_t i = 0; i < ca.assignment.size(); ++i)
        out << i << ',' << labels[i] << ',' << ca.assignment[i] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_centroids(const ClusterAssignment& ca, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.precision(17);
    for (const auto& cen : ca.centroids) {
        for (std::size_t j = 0; j < cen.size(); ++j) out << (j ? " " : "") << cen[j];
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace rulex
