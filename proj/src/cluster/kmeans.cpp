#include "cgc/cluster/kmeans.hpp"

#include <limits>

#include "cgc/io/tensor_container.hpp"
#include "cgc/util/errors.hpp"

namespace cgc {

namespace {

int nearest(const Eigen::MatrixXd& centroids, const Eigen::Ref<const Eigen::VectorXd>& x,
            double* dist_out = nullptr) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int c = 0; c < centroids.rows(); ++c) {
        double d = (centroids.row(c).transpose() - x).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = c;
        }
    }
    if (dist_out) *dist_out = best_dist;
    return best;
}

}  // namespace

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centroids(k, points.cols());
    Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

    Eigen::Index first = static_cast<Eigen::Index>(rng.bounded(static_cast<uint64_t>(n)));
    centroids.row(0) = points.row(first);
    for (int c = 1; c < k; ++c) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = (points.row(i) - centroids.row(c - 1)).squaredNorm();
            if (d < dist2(i)) dist2(i) = d;
        }
        double total = dist2.sum();
        Eigen::Index chosen;
        if (total <= 0.0) {
            chosen = static_cast<Eigen::Index>(rng.bounded(static_cast<uint64_t>(n)));
        } else {
            double target = rng.uniform01() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2(i);
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        centroids.row(c) = points.row(chosen);
    }
    return centroids;
}

void minibatch_iterate(KMeansModel& model, const Eigen::MatrixXd& points, int batch_size, Rng& rng) {
    const Eigen::Index n = points.rows();
    std::vector<Eigen::Index> batch(static_cast<std::size_t>(batch_size));
    for (auto& idx : batch) idx = static_cast<Eigen::Index>(rng.bounded(static_cast<uint64_t>(n)));

    std::vector<int> assignment(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
        assignment[i] = nearest(model.centroids, points.row(batch[i]).transpose());

    for (std::size_t i = 0; i < batch.size(); ++i) {
        int c = assignment[i];
        double eta = 1.0 / static_cast<double>(++model.update_counts[static_cast<std::size_t>(c)]);
        model.centroids.row(c) += eta * (points.row(batch[i]) - model.centroids.row(c));
    }
}

void lloyd_iterate(KMeansModel& model, const Eigen::MatrixXd& points) {
    const int k = model.k();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<long long> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        int c = nearest(model.centroids, points.row(i).transpose());
        sums.row(c) += points.row(i);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) continue;  // empty cluster keeps position
        model.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        model.update_counts[static_cast<std::size_t>(c)] += counts[static_cast<std::size_t>(c)];
    }
}

KMeansModel fit_minibatch_kmeans(const Eigen::MatrixXd& points, int k, int batch_size,
                                 int iterations, uint64_t seed) {
    if (k < 1) throw TooFewPoints("k must be at least 1");
    if (points.rows() < k)
        throw TooFewPoints("need at least " + std::to_string(k) + " points, got " +
                           std::to_string(points.rows()));
    KMeansModel model;
    model.seed = seed;
    Rng rng(seed);
    model.centroids = kmeanspp_init(points, k, rng);
    model.update_counts.assign(static_cast<std::size_t>(k), 0);

    bool full_batch = batch_size >= points.rows();
    for (int it = 0; it < iterations; ++it) {
        if (full_batch)
            lloyd_iterate(model, points);
        else
            minibatch_iterate(model, points, batch_size, rng);
    }
    return model;
}

int assign_cluster(const KMeansModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != model.dim())
        throw DimensionMismatch("assign: embedding has dim " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.dim()));
    return nearest(model.centroids, x);
}

std::vector<int> assign_clusters(const KMeansModel& model, const Eigen::MatrixXd& points) {
    std::vector<int> out(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out[static_cast<std::size_t>(i)] = assign_cluster(model, points.row(i).transpose());
    return out;
}

double kmeans_inertia(const KMeansModel& model, const Eigen::MatrixXd& points) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        double d;
        nearest(model.centroids, points.row(i).transpose(), &d);
        total += d;
    }
    return total;
}

std::vector<std::pair<int, double>> elbow_scan(const Eigen::MatrixXd& points,
                                               const std::vector<int>& k_values,
                                               int batch_size, int iterations, uint64_t seed) {
    std::vector<std::pair<int, double>> out;
    out.reserve(k_values.size());
    for (int k : k_values) {
        KMeansModel model = fit_minibatch_kmeans(points, k, batch_size, iterations, seed);
        out.emplace_back(k, kmeans_inertia(model, points));
    }
    return out;
}

void KMeansModel::save(const std::string& path) const {
    TensorContainer c;
    c.schema = "kmeans/1";
    c.meta = {{"k", k()}, {"dim", dim()}, {"seed", seed}};
    c.add("centroids", centroids);
    Eigen::VectorXd counts(update_counts.size());
    for (std::size_t i = 0; i < update_counts.size(); ++i)
        counts(static_cast<Eigen::Index>(i)) = static_cast<double>(update_counts[i]);
    c.add("update_counts", counts);
    c.save(path);
}

KMeansModel KMeansModel::load(const std::string& path) {
    TensorContainer c = TensorContainer::load(path);
    if (c.schema != "kmeans/1") throw IoError("not a kmeans/1 container: " + path);
    KMeansModel m;
    m.centroids = c.get("centroids");
    m.seed = c.meta.at("seed").get<uint64_t>();
    Eigen::VectorXd counts = c.get_vector("update_counts");
    m.update_counts.resize(static_cast<std::size_t>(counts.size()));
    for (Eigen::Index i = 0; i < counts.size(); ++i)
        m.update_counts[static_cast<std::size_t>(i)] = static_cast<long long>(counts(i));
    if (m.centroids.rows() != c.meta.at("k").get<int>())
        throw IoError("centroid count does not match manifest in " + path);
    return m;
}

}  // namespace cgc
