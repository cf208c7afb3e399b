#pragma once

#include <Eigen/Dense>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace cgc {

struct ClassMetrics {
    std::string name;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    long support = 0;  // tp + fn
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct EvaluationReport {
    std::vector<ClassMetrics> per_class;  // sorted by class name
    std::vector<std::string> classes;
    double accuracy = 0.0;               // sum TP / sum support
    Eigen::MatrixXd confusion;           // row-normalized (rows = actual); 0x0 when unknown
    nlohmann::json metadata = nlohmann::json::object();

    nlohmann::json to_json() const;  // schema "evalreport/1"
    static EvaluationReport from_json(const nlohmann::json& j);
};

// Pure arithmetic over per-class counts (name, tp, fp, fn, tn); no confusion
// matrix is derivable from counts alone.
EvaluationReport report_from_counts(
    const std::vector<std::tuple<std::string, long, long, long, long>>& counts);

// Per-class counts plus the row-normalized confusion matrix from paired
// actual/predicted labels.
EvaluationReport evaluate_predictions(const std::vector<std::string>& actual,
                                      const std::vector<std::string>& predicted);

std::string render_report_table(const EvaluationReport& report);
// Throws InvalidReport when the report has no classes or no confusion matrix.
std::string render_confusion_svg(const EvaluationReport& report);

// Writes report.json plus report.txt, and confusion.svg when derivable.
void emit_report(const EvaluationReport& report, const std::string& dir);

}  // namespace cgc
