#include "cgc/svm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "cgc/util/errors.hpp"
#include "cgc/util/hash.hpp"
#include "cgc/util/rng.hpp"
#include "cgc/wl/wl_kernel.hpp"

namespace cgc {

namespace {
constexpr double kTau = 1e-12;
constexpr double kSupportEps = 1e-12;
}  // namespace

BinarySvmModel train_binary_svm(const Eigen::MatrixXd& K, const std::vector<int>& y, double C,
                                double tol, int64_t max_iter) {
    const int n = static_cast<int>(y.size());
    if (K.rows() != n || K.cols() != n)
        throw DimensionMismatch("kernel matrix does not match label count");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw SingleClassInput("labels must be +1/-1");
    }
    if (!has_pos || !has_neg) throw SingleClassInput("both classes must be present");

    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    // gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij; alpha = 0 gives -e
    std::vector<double> grad(static_cast<std::size_t>(n), -1.0);

    auto in_up = [&](int t) {
        return (y[static_cast<std::size_t>(t)] == 1 && alpha[static_cast<std::size_t>(t)] < C - kSupportEps) ||
               (y[static_cast<std::size_t>(t)] == -1 && alpha[static_cast<std::size_t>(t)] > kSupportEps);
    };
    auto in_low = [&](int t) {
        return (y[static_cast<std::size_t>(t)] == -1 && alpha[static_cast<std::size_t>(t)] < C - kSupportEps) ||
               (y[static_cast<std::size_t>(t)] == 1 && alpha[static_cast<std::size_t>(t)] > kSupportEps);
    };

    BinarySvmModel model;
    model.C = C;
    model.n_train = n;

    long iter = 0;
    double m_final = 0.0, M_final = 0.0;
    for (;; ++iter) {
        // maximal violating pair
        int i = -1, j = -1;
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; ++t) {
            double v = -y[static_cast<std::size_t>(t)] * grad[static_cast<std::size_t>(t)];
            if (in_up(t) && v > m) {
                m = v;
                i = t;
            }
            if (in_low(t) && v < M) {
                M = v;
                j = t;
            }
        }
        m_final = m;
        M_final = M;
        if (i < 0 || j < 0 || m - M <= tol || iter >= max_iter) break;

        const double yi = y[static_cast<std::size_t>(i)], yj = y[static_cast<std::size_t>(j)];
        const double Kii = K(i, i), Kjj = K(j, j), Kij = K(i, j);
        double old_ai = alpha[static_cast<std::size_t>(i)], old_aj = alpha[static_cast<std::size_t>(j)];

        if (yi != yj) {
            double quad = Kii + Kjj + 2.0 * Kij;
            if (quad <= 0.0) quad = kTau;
            double delta = (-grad[static_cast<std::size_t>(i)] - grad[static_cast<std::size_t>(j)]) / quad;
            double diff = old_ai - old_aj;
            double ai = old_ai + delta, aj = old_aj + delta;
            if (diff > 0) {
                if (aj < 0) { aj = 0; ai = diff; }
            } else {
                if (ai < 0) { ai = 0; aj = -diff; }
            }
            if (diff > 0) {
                if (ai > C) { ai = C; aj = C - diff; }
            } else {
                if (aj > C) { aj = C; ai = C + diff; }
            }
            alpha[static_cast<std::size_t>(i)] = ai;
            alpha[static_cast<std::size_t>(j)] = aj;
        } else {
            double quad = Kii + Kjj - 2.0 * Kij;
            if (quad <= 0.0) quad = kTau;
            double delta = (grad[static_cast<std::size_t>(i)] - grad[static_cast<std::size_t>(j)]) / quad;
            double sum = old_ai + old_aj;
            double ai = old_ai - delta, aj = old_aj + delta;
            if (sum > C) {
                if (ai > C) { ai = C; aj = sum - C; }
            } else {
                if (aj < 0) { aj = 0; ai = sum; }
            }
            if (sum > C) {
                if (aj > C) { aj = C; ai = sum - C; }
            } else {
                if (ai < 0) { ai = 0; aj = sum; }
            }
            alpha[static_cast<std::size_t>(i)] = ai;
            alpha[static_cast<std::size_t>(j)] = aj;
        }

        double dai = yi * (alpha[static_cast<std::size_t>(i)] - old_ai);
        double daj = yj * (alpha[static_cast<std::size_t>(j)] - old_aj);
        for (int t = 0; t < n; ++t)
            grad[static_cast<std::size_t>(t)] +=
                y[static_cast<std::size_t>(t)] * (K(t, i) * dai + K(t, j) * daj);
    }
    model.iterations = iter;

    // bias from free support vectors, falling back to the violation midpoint
    double b_sum = 0.0;
    int b_count = 0;
    for (int t = 0; t < n; ++t) {
        double a = alpha[static_cast<std::size_t>(t)];
        if (a > kSupportEps && a < C - kSupportEps) {
            b_sum += -y[static_cast<std::size_t>(t)] * grad[static_cast<std::size_t>(t)];
            ++b_count;
        }
    }
    model.bias = b_count > 0 ? b_sum / b_count : (m_final + M_final) / 2.0;

    for (int t = 0; t < n; ++t) {
        double a = alpha[static_cast<std::size_t>(t)];
        if (a > kSupportEps) {
            model.support_indices.push_back(t);
            model.dual_coef.push_back(a * y[static_cast<std::size_t>(t)]);
        }
    }
    return model;
}

double svm_decision(const BinarySvmModel& model,
                    const Eigen::Ref<const Eigen::VectorXd>& kernel_row) {
    if (kernel_row.size() != model.n_train)
        throw DimensionMismatch("kernel row has " + std::to_string(kernel_row.size()) +
                                " entries, expected " + std::to_string(model.n_train));
    double sum = model.bias;
    for (std::size_t s = 0; s < model.support_indices.size(); ++s)
        sum += model.dual_coef[s] * kernel_row(model.support_indices[s]);
    return sum;
}

double max_kkt_violation(const Eigen::MatrixXd& K, const std::vector<int>& y,
                         const BinarySvmModel& model) {
    const int n = model.n_train;
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    for (std::size_t s = 0; s < model.support_indices.size(); ++s)
        alpha[static_cast<std::size_t>(model.support_indices[s])] =
            model.dual_coef[s] * y[static_cast<std::size_t>(model.support_indices[s])];

    double worst = 0.0;
    for (int t = 0; t < n; ++t) {
        double f = svm_decision(model, K.row(t).transpose());
        double margin = y[static_cast<std::size_t>(t)] * f;
        double a = alpha[static_cast<std::size_t>(t)];
        double violation = 0.0;
        if (a <= kSupportEps)
            violation = std::max(0.0, 1.0 - margin);
        else if (a >= model.C - kSupportEps)
            violation = std::max(0.0, margin - 1.0);
        else
            violation = std::abs(margin - 1.0);
        worst = std::max(worst, violation);
    }
    return worst;
}

double PlattCalibrator::probability(double decision) const {
    double fApB = A * decision + B;
    // stable sigmoid
    if (fApB >= 0.0)
        return std::exp(-fApB) / (1.0 + std::exp(-fApB));
    return 1.0 / (1.0 + std::exp(fApB));
}

PlattCalibrator fit_platt(const std::vector<double>& decisions, const std::vector<int>& labels,
                          int max_iter) {
    if (decisions.size() != labels.size())
        throw DimensionMismatch("decision/label size mismatch in Platt fit");
    long prior1 = 0, prior0 = 0;
    for (int l : labels) (l == 1 ? prior1 : prior0)++;
    if (prior1 == 0 || prior0 == 0)
        throw DegenerateLabels("Platt fit needs both classes");

    const std::size_t n = decisions.size();
    const double hi_target = (static_cast<double>(prior1) + 1.0) / (static_cast<double>(prior1) + 2.0);
    const double lo_target = 1.0 / (static_cast<double>(prior0) + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == 1 ? hi_target : lo_target;

    double A = 0.0;
    double B = std::log((static_cast<double>(prior0) + 1.0) / (static_cast<double>(prior1) + 1.0));

    auto objective = [&](double a, double b) {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double fApB = a * decisions[i] + b;
            if (fApB >= 0.0)
                obj += t[i] * fApB + std::log(1.0 + std::exp(-fApB));
            else
                obj += (t[i] - 1.0) * fApB + std::log(1.0 + std::exp(fApB));
        }
        return obj;
    };

    constexpr double sigma = 1e-12;  // Hessian ridge
    constexpr double eps = 1e-10;
    double fval = objective(A, B);
    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double fApB = A * decisions[i] + B;
            double p, q;
            if (fApB >= 0.0) {
                p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
                q = 1.0 / (1.0 + std::exp(-fApB));
            } else {
                p = 1.0 / (1.0 + std::exp(fApB));
                q = std::exp(fApB) / (1.0 + std::exp(fApB));
            }
            double d2 = p * q;
            h11 += decisions[i] * decisions[i] * d2;
            h22 += d2;
            h21 += decisions[i] * d2;
            double d1 = t[i] - p;
            g1 += decisions[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;

        double det = h11 * h22 - h21 * h21;
        double dA = -(h22 * g1 - h21 * g2) / det;
        double dB = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * dA + g2 * dB;

        double step = 1.0;
        bool advanced = false;
        while (step >= 1e-10) {
            double newA = A + step * dA;
            double newB = B + step * dB;
            double newf = objective(newA, newB);
            if (newf < fval + 1e-4 * step * gd) {
                A = newA;
                B = newB;
                fval = newf;
                advanced = true;
                break;
            }
            step /= 2.0;
        }
        if (!advanced) break;  // line search failed
    }
    return PlattCalibrator{A, B};
}

std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, uint64_t seed) {
    std::map<std::string, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));

    std::vector<int> fold_of(labels.size(), 0);
    int cursor = 0;
    for (auto& [cls, members] : by_class) {
        Rng rng = Rng::substream(seed, "folds:" + cls);
        rng.shuffle(members);
        for (int idx : members) {
            fold_of[static_cast<std::size_t>(idx)] = cursor % folds;
            ++cursor;
        }
    }
    return fold_of;
}

namespace {

std::vector<int> binary_labels(const std::vector<std::string>& labels, const std::string& positive) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == positive ? 1 : -1;
    return y;
}

// out-of-fold decision values for Platt calibration
bool oof_decisions(const Eigen::MatrixXd& K, const std::vector<int>& y, double C, int folds,
                   uint64_t seed, const std::string& cls, std::vector<double>& out) {
    const int n = static_cast<int>(y.size());
    std::vector<std::string> fold_labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        fold_labels[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] == 1 ? "+" : "-";
    std::vector<int> fold_of = stratified_folds(fold_labels, folds, splitmix64(seed ^ fnv1a64(cls)));

    // every fold's training part needs both classes
    for (int f = 0; f < folds; ++f) {
        bool pos = false, neg = false;
        for (int i = 0; i < n; ++i) {
            if (fold_of[static_cast<std::size_t>(i)] == f) continue;
            (y[static_cast<std::size_t>(i)] == 1 ? pos : neg) = true;
        }
        if (!pos || !neg) return false;
    }

    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train_idx;
        for (int i = 0; i < n; ++i)
            if (fold_of[static_cast<std::size_t>(i)] != f) train_idx.push_back(i);
        Eigen::MatrixXd sub(train_idx.size(), train_idx.size());
        std::vector<int> sub_y(train_idx.size());
        for (std::size_t a = 0; a < train_idx.size(); ++a) {
            sub_y[a] = y[static_cast<std::size_t>(train_idx[a])];
            for (std::size_t b = 0; b < train_idx.size(); ++b)
                sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    K(train_idx[a], train_idx[b]);
        }
        BinarySvmModel m = train_binary_svm(sub, sub_y, C);
        for (int i = 0; i < n; ++i) {
            if (fold_of[static_cast<std::size_t>(i)] != f) continue;
            Eigen::VectorXd row(train_idx.size());
            for (std::size_t a = 0; a < train_idx.size(); ++a)
                row(static_cast<Eigen::Index>(a)) = K(i, train_idx[a]);
            out[static_cast<std::size_t>(i)] = svm_decision(m, row);
        }
    }
    return true;
}

}  // namespace

OneVsAllClassifier train_one_vs_all(const Eigen::MatrixXd& K, const std::vector<std::string>& labels,
                                    double C, int platt_folds, uint64_t seed) {
    std::set<std::string> class_set(labels.begin(), labels.end());
    if (class_set.size() < 2) throw SingleClassInput("one-vs-all needs at least two classes");

    OneVsAllClassifier clf;
    clf.classes.assign(class_set.begin(), class_set.end());
    clf.n_train = static_cast<int>(labels.size());

    for (const auto& cls : clf.classes) {
        std::vector<int> y = binary_labels(labels, cls);
        BinarySvmModel model = train_binary_svm(K, y, C);

        std::vector<double> decisions;
        int folds = platt_folds;
        bool ok = false;
        while (folds >= 2 && !(ok = oof_decisions(K, y, C, folds, seed, cls, decisions))) {
            clf.warnings.push_back("class '" + cls + "': degenerate fold at k=" +
                                   std::to_string(folds) + ", reducing");
            --folds;
        }
        if (!ok) {
            clf.warnings.push_back("class '" + cls + "': calibrating on in-sample decisions");
            decisions.resize(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i)
                decisions[i] = svm_decision(model, K.row(static_cast<Eigen::Index>(i)).transpose());
        }
        clf.calibrators.push_back(fit_platt(decisions, y));
        clf.models.push_back(std::move(model));
    }
    return clf;
}

Prediction predict_one(const OneVsAllClassifier& classifier,
                       const Eigen::Ref<const Eigen::VectorXd>& kernel_row) {
    const std::size_t n_classes = classifier.classes.size();
    Eigen::VectorXd probs(static_cast<Eigen::Index>(n_classes));
    for (std::size_t c = 0; c < n_classes; ++c) {
        double f = svm_decision(classifier.models[c], kernel_row);
        probs(static_cast<Eigen::Index>(c)) = classifier.calibrators[c].probability(f);
    }
    double total = probs.sum();
    if (total <= 0.0)
        probs.setConstant(1.0 / static_cast<double>(n_classes));
    else
        probs /= total;

    // strict > keeps the lexicographically first class on ties
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.size(); ++c)
        if (probs(c) > probs(best)) best = c;
    return Prediction{classifier.classes[static_cast<std::size_t>(best)], probs};
}

GridSearchReport grid_search(const Eigen::MatrixXd& K, const std::vector<std::string>& labels,
                             const GridSearchSpec& spec) {
    if (spec.c_values.empty()) throw ConfigError("grid search needs at least one C candidate");
    if (spec.folds < 2) throw ConfigError("grid search needs at least 2 folds");

    std::vector<int> fold_of = stratified_folds(labels, spec.folds, spec.seed);
    const int n = static_cast<int>(labels.size());

    GridSearchReport report;
    std::vector<double> cs = spec.c_values;
    std::sort(cs.begin(), cs.end());

    for (double c : cs) {
        GridSearchReport::Cell cell;
        cell.c = c;
        for (int f = 0; f < spec.folds; ++f) {
            std::vector<int> train_idx, test_idx;
            for (int i = 0; i < n; ++i)
                (fold_of[static_cast<std::size_t>(i)] == f ? test_idx : train_idx).push_back(i);
            if (test_idx.empty()) {
                cell.fold_accuracy.push_back(0.0);
                continue;
            }
            Eigen::MatrixXd sub(train_idx.size(), train_idx.size());
            std::vector<std::string> sub_labels(train_idx.size());
            for (std::size_t a = 0; a < train_idx.size(); ++a) {
                sub_labels[a] = labels[static_cast<std::size_t>(train_idx[a])];
                for (std::size_t b = 0; b < train_idx.size(); ++b)
                    sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                        K(train_idx[a], train_idx[b]);
            }
            OneVsAllClassifier clf = train_one_vs_all(sub, sub_labels, c, 3, spec.seed);
            long correct = 0;
            for (int i : test_idx) {
                Eigen::VectorXd row(train_idx.size());
                for (std::size_t a = 0; a < train_idx.size(); ++a)
                    row(static_cast<Eigen::Index>(a)) = K(i, train_idx[a]);
                if (predict_one(clf, row).cls == labels[static_cast<std::size_t>(i)]) ++correct;
            }
            cell.fold_accuracy.push_back(static_cast<double>(correct) /
                                         static_cast<double>(test_idx.size()));
        }
        double mean = 0.0;
        for (double a : cell.fold_accuracy) mean += a;
        cell.mean_accuracy = mean / static_cast<double>(cell.fold_accuracy.size());
        report.cells.push_back(std::move(cell));
    }

    report.best_c = report.cells.front().c;
    double best = report.cells.front().mean_accuracy;
    for (const auto& cell : report.cells) {
        if (cell.mean_accuracy > best) {  // strict >: ties keep the smallest C
            best = cell.mean_accuracy;
            report.best_c = cell.c;
        }
    }
    return report;
}

std::string repair_kernel_psd(Eigen::MatrixXd& K) {
    double trace = K.trace();
    double min_eig = min_eigenvalue(K);
    if (min_eig >= -1e-8 * trace) return "";
    double jitter = 1e-10 * trace / static_cast<double>(K.rows());
    K.diagonal().array() += jitter;
    return "kernel not PSD (min eigenvalue " + std::to_string(min_eig) + "), added diagonal jitter " +
           std::to_string(jitter);
}

nlohmann::json OneVsAllClassifier::to_json() const {
    auto per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < classes.size(); ++c) {
        per_class.push_back({{"class", classes[c]},
                             {"support_indices", models[c].support_indices},
                             {"dual_coef", models[c].dual_coef},
                             {"bias", models[c].bias},
                             {"C", models[c].C},
                             {"platt_a", calibrators[c].A},
                             {"platt_b", calibrators[c].B}});
    }
    return nlohmann::json{{"classes", classes},
                          {"n_train", n_train},
                          {"per_class", per_class},
                          {"warnings", warnings}};
}

OneVsAllClassifier OneVsAllClassifier::from_json(const nlohmann::json& j) {
    OneVsAllClassifier clf;
    clf.classes = j.at("classes").get<std::vector<std::string>>();
    clf.n_train = j.at("n_train").get<int>();
    clf.warnings = j.value("warnings", std::vector<std::string>{});
    for (const auto& cj : j.at("per_class")) {
        BinarySvmModel m;
        m.support_indices = cj.at("support_indices").get<std::vector<int>>();
        m.dual_coef = cj.at("dual_coef").get<std::vector<double>>();
        m.bias = cj.at("bias").get<double>();
        m.C = cj.at("C").get<double>();
        m.n_train = clf.n_train;
        clf.models.push_back(std::move(m));
        clf.calibrators.push_back(PlattCalibrator{cj.at("platt_a").get<double>(),
                                                  cj.at("platt_b").get<double>()});
    }
    return clf;
}

nlohmann::json GridSearchReport::to_json() const {
    auto cells_json = nlohmann::json::array();
    for (const auto& cell : cells)
        cells_json.push_back({{"C", cell.c},
                              {"fold_accuracy", cell.fold_accuracy},
                              {"mean_accuracy", cell.mean_accuracy}});
    return nlohmann::json{{"cells", cells_json}, {"best_c", best_c}};
}

}  // namespace cgc
