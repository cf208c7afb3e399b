#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "cgc/cluster/kmeans.hpp"
#include "cgc/cluster/labeled_graph.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/rng.hpp"
#include "oracles/lloyd.hpp"

using namespace cgc;

TEST_SUITE_BEGIN("kmeans");

namespace {

// three Gaussian blobs in 2-D
Eigen::MatrixXd blobs(int per_blob, double sigma, uint64_t seed) {
    Rng rng(seed);
    const double centers[3][2] = {{0.0, 0.0}, {3.0, 0.0}, {0.0, 3.0}};
    Eigen::MatrixXd points(3 * per_blob, 2);
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < per_blob; ++i) {
            points(b * per_blob + i, 0) = centers[b][0] + sigma * rng.gaussian();
            points(b * per_blob + i, 1) = centers[b][1] + sigma * rng.gaussian();
        }
    return points;
}

double agreement_after_matching(const std::vector<int>& a, const std::vector<int>& b, int k) {
    REQUIRE(a.size() == b.size());
    std::vector<int> perm(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
    double best = 0.0;
    std::sort(perm.begin(), perm.end());
    do {
        long matches = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (perm[static_cast<std::size_t>(a[i])] == b[i]) ++matches;
        best = std::max(best, static_cast<double>(matches) / static_cast<double>(a.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("points at k distinct locations are recovered exactly") {
    Eigen::MatrixXd points(8, 2);
    for (int i = 0; i < 8; ++i) {
        points(i, 0) = static_cast<double>(i % 4) * 10.0;
        points(i, 1) = static_cast<double>(i / 4) * 10.0;
    }
    // duplicate each location once so k < n
    Eigen::MatrixXd doubled(16, 2);
    doubled << points, points;
    KMeansModel model = fit_minibatch_kmeans(doubled, 8, 16, 50, 3);
    CHECK(kmeans_inertia(model, doubled) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("k=1 minibatch converges toward the mean") {
    Eigen::MatrixXd points = blobs(60, 0.3, 10);
    KMeansModel model = fit_minibatch_kmeans(points, 1, 32, 3000, 4);
    Eigen::VectorXd mean = points.colwise().mean();
    CHECK((model.centroids.row(0).transpose() - mean).norm() < 1e-3 * (1.0 + mean.norm()));
}

TEST_CASE("k=1 full batch lands on the mean") {
    Eigen::MatrixXd points = blobs(40, 0.5, 11);
    KMeansModel model = fit_minibatch_kmeans(points, 1, points.rows(), 3, 4);
    Eigen::VectorXd mean = points.colwise().mean();
    CHECK((model.centroids.row(0).transpose() - mean).norm() < 1e-12);
}

TEST_CASE("minibatch agrees with the Lloyd oracle on blobs") {
    Eigen::MatrixXd points = blobs(100, 0.1, 7);
    KMeansModel model = fit_minibatch_kmeans(points, 3, 64, 400, 21);
    oracle::LloydResult reference = oracle::lloyd_kmeans(points, 3, 100, 22);
    std::vector<int> ours = assign_clusters(model, points);
    CHECK(agreement_after_matching(ours, reference.assignment, 3) >= 0.95);
}

TEST_CASE("assign matches an exhaustive scan and breaks ties low") {
    KMeansModel model;
    model.centroids = Eigen::MatrixXd(3, 2);
    model.centroids << 0, 0, 2, 0, 5, 5;
    model.update_counts = {0, 0, 0};

    Eigen::VectorXd q(2);
    q << 0.1, 0.0;
    CHECK(assign_cluster(model, q) == 0);
    q << 1.0, 0.0;  // exactly between centroids 0 and 1
    CHECK(assign_cluster(model, q) == 0);
    q << 1.9, 0.0;
    CHECK(assign_cluster(model, q) == 1);

    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        Eigen::VectorXd x(2);
        x << rng.uniform(-6, 8), rng.uniform(-6, 8);
        int got = assign_cluster(model, x);
        int want = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 3; ++c) {
            double d = (model.centroids.row(c).transpose() - x).squaredNorm();
            if (d < best) {
                best = d;
                want = c;
            }
        }
        CHECK(got == want);
    }

    Eigen::VectorXd bad(3);
    bad.setZero();
    CHECK_THROWS_AS(assign_cluster(model, bad), DimensionMismatch);
}

TEST_CASE("too few points is rejected") {
    Eigen::MatrixXd points = Eigen::MatrixXd::Random(4, 2);
    CHECK_THROWS_AS(fit_minibatch_kmeans(points, 5, 4, 10, 1), TooFewPoints);
}

TEST_CASE("determinism under a fixed seed") {
    Eigen::MatrixXd points = blobs(50, 0.2, 5);
    KMeansModel a = fit_minibatch_kmeans(points, 4, 32, 100, 777);
    KMeansModel b = fit_minibatch_kmeans(points, 4, 32, 100, 777);
    CHECK(a.centroids == b.centroids);
    CHECK(a.update_counts == b.update_counts);
}

TEST_CASE("full-batch Lloyd inertia is non-increasing") {
    Eigen::MatrixXd points = blobs(60, 0.6, 13);
    Rng rng(3);
    KMeansModel model;
    model.centroids = kmeanspp_init(points, 4, rng);
    model.update_counts.assign(4, 0);
    double last = kmeans_inertia(model, points);
    for (int it = 0; it < 12; ++it) {
        lloyd_iterate(model, points);
        double now = kmeans_inertia(model, points);
        CHECK(now <= last + 1e-9);
        last = now;
    }
}

TEST_CASE("elbow scan") {
    Eigen::MatrixXd points = blobs(40, 0.15, 19);
    const int n = static_cast<int>(points.rows());

    // k = n with distinct points: every point becomes its own centroid
    auto full = elbow_scan(points, {n}, n, 5, 2);
    CHECK(full[0].second == doctest::Approx(0.0).epsilon(1e-12));

    // k = 1 closed form: total variance times point count
    auto single = elbow_scan(points, {1}, n, 3, 2);
    Eigen::VectorXd mean = points.colwise().mean();
    double direct = (points.rowwise() - mean.transpose()).squaredNorm();
    CHECK(single[0].second == doctest::Approx(direct).epsilon(1e-6));

    // non-increasing in k for most seeds
    int monotone = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto scan = elbow_scan(points, {1, 2, 3, 5, 8}, 64, 150, seed);
        bool ok = true;
        for (std::size_t i = 1; i < scan.size(); ++i)
            if (scan[i].second > scan[i - 1].second * 1.001) ok = false;
        if (ok) ++monotone;
    }
    CHECK(monotone >= 19);
}

TEST_CASE("label_graph assigns cluster and import labels") {
    KMeansModel model;
    model.centroids = Eigen::MatrixXd::Zero(6, 2);
    for (int c = 0; c < 6; ++c) model.centroids(c, 0) = static_cast<double>(c);
    model.update_counts.assign(6, 0);

    FunctionRecord fn;
    fn.name = "main";
    fn.section = ".text";
    fn.tokens = {"push ebp"};
    fn.callee_names = {"CreateFileA"};
    CallGraph g = build_call_graph({fn}, "file1");

    std::unordered_map<int, Eigen::VectorXd> embeddings;
    Eigen::VectorXd e(2);
    e << 5.1, 0.0;  // nearest centroid 5
    embeddings[g.find("main")->id] = e;

    LabeledGraph labeled = label_graph(g, model, embeddings);
    CHECK(labeled.labels[static_cast<std::size_t>(g.find("main")->id)] == "C5");
    CHECK(labeled.labels[static_cast<std::size_t>(g.find("CreateFileA")->id)] == "CreateFileA");

    // missing embedding names the vertex
    std::unordered_map<int, Eigen::VectorXd> empty;
    CHECK_THROWS_WITH_AS(label_graph(g, model, empty),
                         doctest::Contains("main"), MissingEmbedding);

    // empty graph -> empty labeling
    CallGraph none = build_call_graph({}, "empty");
    CHECK(label_graph(none, model, empty).labels.empty());
}

TEST_CASE("external labels never collide with cluster labels") {
    CHECK(external_label("CreateFileA") == "CreateFileA");
    CHECK(external_label("C5") == "C5_ext");
    CHECK(external_label("C123") == "C123_ext");
    CHECK(external_label("Cx") == "Cx");
    CHECK(external_label("#3") == "ext_#3");
}

TEST_CASE("kmeans model container round trip") {
    Eigen::MatrixXd points = blobs(30, 0.2, 2);
    KMeansModel model = fit_minibatch_kmeans(points, 3, 16, 40, 9);
    std::string path = (std::filesystem::temp_directory_path() / "cgc_kmeans.cgct").string();
    model.save(path);
    KMeansModel loaded = KMeansModel::load(path);
    CHECK(loaded.centroids == model.centroids);
    CHECK(loaded.update_counts == model.update_counts);
    std::remove(path.c_str());
}

TEST_SUITE_END();
