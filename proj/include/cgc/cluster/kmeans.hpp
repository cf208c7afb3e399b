#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cgc/util/rng.hpp"

namespace cgc {

struct KMeansModel {
    Eigen::MatrixXd centroids;  // k x dim
    std::vector<long long> update_counts;
    uint64_t seed = 0;

    int k() const { return static_cast<int>(centroids.rows()); }
    int dim() const { return static_cast<int>(centroids.cols()); }

    void save(const std::string& path) const;
    static KMeansModel load(const std::string& path);
};

// k-means++ seeding.
Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& points, int k, Rng& rng);

// One online mini-batch update (Sculley): sample batch_size points, assign,
// and move each centroid with per-centroid rate 1/count. Centroids never hit
// by a batch keep their position.
void minibatch_iterate(KMeansModel& model, const Eigen::MatrixXd& points, int batch_size, Rng& rng);

// One full-batch Lloyd refinement step; empty clusters keep their position.
void lloyd_iterate(KMeansModel& model, const Eigen::MatrixXd& points);

// Mini-batch k-means, deterministic under seed. batch_size >= n switches to
// full-batch Lloyd updates. Throws TooFewPoints when n < k.
KMeansModel fit_minibatch_kmeans(const Eigen::MatrixXd& points, int k, int batch_size,
                                 int iterations, uint64_t seed);

// Nearest centroid by squared Euclidean distance, ties to the lowest index.
int assign_cluster(const KMeansModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
std::vector<int> assign_clusters(const KMeansModel& model, const Eigen::MatrixXd& points);

// Total min squared distance over all points.
double kmeans_inertia(const KMeansModel& model, const Eigen::MatrixXd& points);

std::vector<std::pair<int, double>> elbow_scan(const Eigen::MatrixXd& points,
                                               const std::vector<int>& k_values,
                                               int batch_size, int iterations, uint64_t seed);

}  // namespace cgc
