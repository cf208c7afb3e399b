#include "doctest.h"

#include "cgc/nn/gru.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/rng.hpp"
#include "oracles/gru_scalar.hpp"

using namespace cgc;

TEST_SUITE_BEGIN("gru");

namespace {

GruCellParams random_cell(int hidden, int input, Rng& rng, double scale = 0.5) {
    GruCellParams p = GruCellParams::zeros(hidden, input);
    p.for_each("cell", [&](const std::string&, auto& tensor) {
        for (Eigen::Index i = 0; i < tensor.size(); ++i)
            tensor.data()[i] = rng.uniform(-scale, scale);
    });
    return p;
}

}  // namespace

TEST_CASE("zero parameters give z=0.5 and h=0.5*h_prev") {
    GruCellParams p = GruCellParams::zeros(4, 3);
    Eigen::VectorXd x = Eigen::VectorXd::Random(3);
    Eigen::VectorXd v(4);
    v << 0.2, -0.6, 1.4, -0.1;
    Eigen::VectorXd h = gru_step(p, x, v);
    for (int i = 0; i < 4; ++i) CHECK(h(i) == doctest::Approx(0.5 * v(i)).epsilon(1e-15));
}

TEST_CASE("saturated update gate forgets the previous state") {
    GruCellParams p = GruCellParams::zeros(4, 3);
    p.b_z.setConstant(10.0);  // z ~ 1, candidate tanh(0) = 0
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd h = gru_step(p, x, v);
    CHECK(h.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("matches the scalar-loop reference to 1e-12") {
    Rng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        GruCellParams p = random_cell(3, 3, rng);
        std::vector<double> x(3), h_prev(3);
        for (auto& value : x) value = rng.uniform(-2.0, 2.0);
        for (auto& value : h_prev) value = rng.uniform(-2.0, 2.0);

        Eigen::VectorXd xe = Eigen::Map<Eigen::VectorXd>(x.data(), 3);
        Eigen::VectorXd he = Eigen::Map<Eigen::VectorXd>(h_prev.data(), 3);
        Eigen::VectorXd h = gru_step(p, xe, he);
        std::vector<double> ref = oracle::gru_step_scalar(p, x, h_prev);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(h(i) - ref[static_cast<std::size_t>(i)]) < 1e-12);
    }
}

TEST_CASE("each component stays within the convex mixing bound") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        int hidden = static_cast<int>(rng.uniform_int(1, 6));
        int input = static_cast<int>(rng.uniform_int(1, 6));
        GruCellParams p = random_cell(hidden, input, rng, 2.0);
        Eigen::VectorXd x(input), h_prev(hidden);
        for (int i = 0; i < input; ++i) x(i) = rng.uniform(-3.0, 3.0);
        for (int i = 0; i < hidden; ++i) h_prev(i) = rng.uniform(-3.0, 3.0);
        Eigen::VectorXd h = gru_step(p, x, h_prev);
        for (int i = 0; i < hidden; ++i)
            CHECK(std::abs(h(i)) <= std::max(std::abs(h_prev(i)), 1.0) + 1e-12);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    GruCellParams p = GruCellParams::zeros(4, 3);
    Eigen::VectorXd x3 = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd x4 = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(gru_step(p, x4, x4), DimensionMismatch);
    CHECK_THROWS_AS(gru_step(p, x3, x3), DimensionMismatch);
    GruCellParams bad = GruCellParams::zeros(4, 3);
    bad.U_h = Eigen::MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(gru_step(bad, x3, x4), DimensionMismatch);
}

TEST_CASE("layer forward matches repeated single steps") {
    Rng rng(5);
    GruCellParams p = random_cell(5, 4, rng);
    std::vector<Eigen::VectorXd> inputs;
    for (int t = 0; t < 7; ++t) {
        Eigen::VectorXd x(4);
        for (int i = 0; i < 4; ++i) x(i) = rng.uniform(-1.0, 1.0);
        inputs.push_back(x);
    }
    Eigen::VectorXd h0 = Eigen::VectorXd::Zero(5);
    Eigen::VectorXd layer = gru_layer_forward(p, inputs, h0, nullptr);
    Eigen::VectorXd manual = h0;
    for (const auto& x : inputs) manual = gru_step(p, x, manual);
    CHECK((layer - manual).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_SUITE_END();
