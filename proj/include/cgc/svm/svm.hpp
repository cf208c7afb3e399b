#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace cgc {

// Soft-margin dual SVM on a precomputed kernel. dual_coef holds alpha_i y_i
// for the support vectors; decision(x) = sum_i dual_coef_i K(x_i, x) + bias.
struct BinarySvmModel {
    std::vector<int> support_indices;  // into the training kernel
    std::vector<double> dual_coef;
    double bias = 0.0;
    double C = 1.0;
    int n_train = 0;
    long iterations = 0;
};

// SMO with maximal-violating-pair working set selection, KKT tolerance tol.
// Throws SingleClassInput when one class is absent.
BinarySvmModel train_binary_svm(const Eigen::MatrixXd& K, const std::vector<int>& y, double C,
                                double tol = 1e-3, int64_t max_iter = 1000000);

double svm_decision(const BinarySvmModel& model,
                    const Eigen::Ref<const Eigen::VectorXd>& kernel_row);

// Largest KKT violation of the trained model; used by tests and acceptance.
double max_kkt_violation(const Eigen::MatrixXd& K, const std::vector<int>& y,
                         const BinarySvmModel& model);

// P(y=+1 | f) = 1 / (1 + exp(A f + B)).
struct PlattCalibrator {
    double A = -1.0;
    double B = 0.0;
    double probability(double decision) const;
};

// Newton fit of the sigmoid parameters with smoothed targets
// t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2). Throws DegenerateLabels.
PlattCalibrator fit_platt(const std::vector<double>& decisions, const std::vector<int>& labels,
                          int max_iter = 100);

struct OneVsAllClassifier {
    std::vector<std::string> classes;  // sorted
    std::vector<BinarySvmModel> models;
    std::vector<PlattCalibrator> calibrators;
    int n_train = 0;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    static OneVsAllClassifier from_json(const nlohmann::json& j);
};

// Per class: binary SVM (class vs rest) on the full kernel plus a Platt
// calibrator fitted on out-of-fold decision values. Degenerate folds reduce
// the fold count with a recorded warning.
OneVsAllClassifier train_one_vs_all(const Eigen::MatrixXd& K, const std::vector<std::string>& labels,
                                    double C, int platt_folds = 3, uint64_t seed = 0);

struct Prediction {
    std::string cls;
    Eigen::VectorXd probabilities;  // aligned with classifier.classes, sums to 1
};

Prediction predict_one(const OneVsAllClassifier& classifier,
                       const Eigen::Ref<const Eigen::VectorXd>& kernel_row);

struct GridSearchSpec {
    std::vector<double> c_values;
    int folds = 5;
    uint64_t seed = 0;
};

struct GridSearchReport {
    struct Cell {
        double c = 0.0;
        std::vector<double> fold_accuracy;
        double mean_accuracy = 0.0;
    };
    std::vector<Cell> cells;
    double best_c = 0.0;

    nlohmann::json to_json() const;
};

// Stratified k-fold accuracy per C; best = highest mean, ties to smallest C.
GridSearchReport grid_search(const Eigen::MatrixXd& K, const std::vector<std::string>& labels,
                             const GridSearchSpec& spec);

// Stratified fold assignment, deterministic under seed.
std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, uint64_t seed);

// Diagonal jitter of 1e-10 * trace / n when the smallest eigenvalue is below
// -1e-8 * trace; returns a warning string when repair was applied.
std::string repair_kernel_psd(Eigen::MatrixXd& K);

}  // namespace cgc
