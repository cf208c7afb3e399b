#include "cgc/pipeline/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "cgc/util/errors.hpp"
#include "cgc/util/fs_io.hpp"

namespace cgc {

namespace {

ClassMetrics finish(ClassMetrics m) {
    m.support = m.tp + m.fn;
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

double overall_accuracy(const std::vector<ClassMetrics>& per_class) {
    long tp = 0, support = 0;
    for (const auto& m : per_class) {
        tp += m.tp;
        support += m.support;
    }
    return support > 0 ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
}

}  // namespace

EvaluationReport report_from_counts(
    const std::vector<std::tuple<std::string, long, long, long, long>>& counts) {
    if (counts.empty()) throw InvalidReport("no classes");
    EvaluationReport report;
    for (const auto& [name, tp, fp, fn, tn] : counts) {
        ClassMetrics m;
        m.name = name;
        m.tp = tp;
        m.fp = fp;
        m.fn = fn;
        m.tn = tn;
        report.per_class.push_back(finish(std::move(m)));
    }
    std::sort(report.per_class.begin(), report.per_class.end(),
              [](const ClassMetrics& a, const ClassMetrics& b) { return a.name < b.name; });
    for (const auto& m : report.per_class) report.classes.push_back(m.name);
    report.accuracy = overall_accuracy(report.per_class);
    return report;
}

EvaluationReport evaluate_predictions(const std::vector<std::string>& actual,
                                      const std::vector<std::string>& predicted) {
    if (actual.size() != predicted.size())
        throw DimensionMismatch("actual/predicted size mismatch");
    if (actual.empty()) throw InvalidReport("no predictions to evaluate");

    std::set<std::string> class_set(actual.begin(), actual.end());
    class_set.insert(predicted.begin(), predicted.end());
    std::vector<std::string> classes(class_set.begin(), class_set.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;

    const std::size_t k = classes.size();
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < actual.size(); ++i)
        raw(static_cast<Eigen::Index>(index.at(actual[i])),
            static_cast<Eigen::Index>(index.at(predicted[i]))) += 1.0;

    EvaluationReport report;
    report.classes = classes;
    const long total = static_cast<long>(actual.size());
    for (std::size_t c = 0; c < k; ++c) {
        ClassMetrics m;
        m.name = classes[c];
        Eigen::Index ci = static_cast<Eigen::Index>(c);
        m.tp = static_cast<long>(raw(ci, ci));
        m.fn = static_cast<long>(raw.row(ci).sum()) - m.tp;
        m.fp = static_cast<long>(raw.col(ci).sum()) - m.tp;
        m.tn = total - m.tp - m.fn - m.fp;
        report.per_class.push_back(finish(std::move(m)));
    }
    report.accuracy = overall_accuracy(report.per_class);

    report.confusion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                             static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < k; ++r) {
        Eigen::Index ri = static_cast<Eigen::Index>(r);
        double row_sum = raw.row(ri).sum();
        if (row_sum > 0.0) report.confusion.row(ri) = raw.row(ri) / row_sum;
    }
    return report;
}

nlohmann::json EvaluationReport::to_json() const {
    auto per_class_json = nlohmann::json::array();
    for (const auto& m : per_class)
        per_class_json.push_back({{"class", m.name},
                                  {"precision", m.precision},
                                  {"recall", m.recall},
                                  {"f1", m.f1},
                                  {"tp", m.tp},
                                  {"fp", m.fp},
                                  {"fn", m.fn},
                                  {"tn", m.tn},
                                  {"support", m.support}});
    nlohmann::json j{{"schema", "evalreport/1"},
                     {"classes", classes},
                     {"accuracy", accuracy},
                     {"per_class", per_class_json},
                     {"metadata", metadata}};
    if (confusion.size() > 0) {
        auto rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
            auto row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < confusion.cols(); ++c) row.push_back(confusion(r, c));
            rows.push_back(std::move(row));
        }
        j["confusion"] = std::move(rows);
    } else {
        j["confusion"] = nullptr;
    }
    return j;
}

EvaluationReport EvaluationReport::from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "evalreport/1") throw IoError("not an evalreport/1 document");
    EvaluationReport report;
    report.classes = j.at("classes").get<std::vector<std::string>>();
    report.accuracy = j.at("accuracy").get<double>();
    report.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& mj : j.at("per_class")) {
        ClassMetrics m;
        m.name = mj.at("class").get<std::string>();
        m.precision = mj.at("precision").get<double>();
        m.recall = mj.at("recall").get<double>();
        m.f1 = mj.at("f1").get<double>();
        m.tp = mj.at("tp").get<long>();
        m.fp = mj.at("fp").get<long>();
        m.fn = mj.at("fn").get<long>();
        m.tn = mj.at("tn").get<long>();
        m.support = mj.at("support").get<long>();
        report.per_class.push_back(std::move(m));
    }
    if (!j.at("confusion").is_null()) {
        const auto& rows = j.at("confusion");
        Eigen::Index k = static_cast<Eigen::Index>(rows.size());
        report.confusion = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index r = 0; r < k; ++r)
            for (Eigen::Index c = 0; c < k; ++c)
                report.confusion(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                                             .get<double>();
    }
    return report;
}

std::string render_report_table(const EvaluationReport& report) {
    if (report.per_class.empty()) throw InvalidReport("report has no classes");
    std::size_t name_width = 12;
    for (const auto& m : report.per_class) name_width = std::max(name_width, m.name.size());

    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-*s %9s %9s %9s %6s %6s %6s %6s %8s\n",
                  static_cast<int>(name_width), "Family", "Precision", "Recall", "F1-Score", "TP",
                  "FP", "FN", "TN", "Support");
    out += line;
    out += std::string(name_width + 1 + 9 * 3 + 3 + 6 * 4 + 4 + 8, '-') + "\n";
    for (const auto& m : report.per_class) {
        std::snprintf(line, sizeof(line), "%-*s %9.3f %9.3f %9.3f %6ld %6ld %6ld %6ld %8ld\n",
                      static_cast<int>(name_width), m.name.c_str(), m.precision, m.recall, m.f1,
                      m.tp, m.fp, m.fn, m.tn, m.support);
        out += line;
    }
    std::snprintf(line, sizeof(line), "\nOverall accuracy: %.4f\n", report.accuracy);
    out += line;
    return out;
}

std::string render_confusion_svg(const EvaluationReport& report) {
    if (report.classes.empty()) throw InvalidReport("report has no classes");
    if (report.confusion.size() == 0) throw InvalidReport("report carries no confusion matrix");

    const int k = static_cast<int>(report.classes.size());
    const int cell = 48, margin = 120;
    const int size = margin + k * cell + 20;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
                      "\" height=\"" + std::to_string(size) + "\">\n";
    char buf[512];
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            double v = report.confusion(r, c);
            int shade = static_cast<int>(255.0 * (1.0 - v));
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" "
                          "fill=\"rgb(%d,%d,255)\" stroke=\"gray\"/>\n",
                          margin + c * cell, margin + r * cell, cell, cell, shade, shade);
            svg += buf;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%d\" y=\"%d\" font-size=\"10\" text-anchor=\"middle\">%.2f</text>\n",
                          margin + c * cell + cell / 2, margin + r * cell + cell / 2 + 4, v);
            svg += buf;
        }
    }
    for (int i = 0; i < k; ++i) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%d\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                      margin - 6, margin + i * cell + cell / 2 + 4, report.classes[static_cast<std::size_t>(i)].c_str());
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%d\" font-size=\"11\" text-anchor=\"start\" "
                      "transform=\"rotate(-60 %d %d)\">%s</text>\n",
                      margin + i * cell + cell / 2, margin - 8, margin + i * cell + cell / 2,
                      margin - 8, report.classes[static_cast<std::size_t>(i)].c_str());
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

void emit_report(const EvaluationReport& report, const std::string& dir) {
    if (report.per_class.empty()) throw InvalidReport("refusing to emit an empty report");
    ensure_dir(dir);
    write_json_file(dir + "/report.json", report.to_json());
    write_file_atomic(dir + "/report.txt", render_report_table(report));
    if (report.confusion.size() > 0)
        write_file_atomic(dir + "/confusion.svg", render_confusion_svg(report));
}

}  // namespace cgc
