#pragma once

// Independent full-batch Lloyd k-means used as the clustering oracle. Plain
// loops, its own farthest-point seeding, no shared code with the library's
// mini-batch path.

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "cgc/util/rng.hpp"

namespace oracle {

struct LloydResult {
    Eigen::MatrixXd centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
};

inline LloydResult lloyd_kmeans(const Eigen::MatrixXd& points, int k, int max_iter, uint64_t seed) {
    const Eigen::Index n = points.rows();
    cgc::Rng rng(seed);

    Eigen::MatrixXd centroids(k, points.cols());
    // seed with a random point, then repeatedly take the farthest point
    centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.bounded(static_cast<uint64_t>(n))));
    for (int c = 1; c < k; ++c) {
        Eigen::Index farthest = 0;
        double far_dist = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (int b = 0; b < c; ++b)
                nearest = std::min(nearest, (points.row(i) - centroids.row(b)).squaredNorm());
            if (nearest > far_dist) {
                far_dist = nearest;
                farthest = i;
            }
        }
        centroids.row(c) = points.row(farthest);
    }

    std::vector<int> assignment(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = (points.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_dist) {
                    best_dist = d;
                    best = c;
                }
            }
            if (assignment[static_cast<std::size_t>(i)] != best) {
                assignment[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<long> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        if (!changed && iter > 0) break;
    }

    LloydResult result;
    result.centroids = centroids;
    result.assignment = assignment;
    for (Eigen::Index i = 0; i < n; ++i)
        result.inertia += (points.row(i) - centroids.row(result.assignment[static_cast<std::size_t>(i)]))
                              .squaredNorm();
    return result;
}

}  // namespace oracle
