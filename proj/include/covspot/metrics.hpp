#pragma once

#include <string>
#include <utility>
#include <vector>

#include "covspot/coverage.hpp"

namespace covspot {

/// One scored test sample; score is the predicted probability of fake.
struct ScoredSample {
    double score = 0.0;
    Label truth = Label::real;
};

/// Fake is the positive class throughout.
struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    long total() const { return tp + fp + tn + fn; }
};

struct Curve {
    enum class Kind { roc, pr };
    Kind kind = Kind::roc;
    std::vector<std::pair<double, double>> points;  // roc: (fpr, tpr); pr: (recall, precision)
};

struct BasicMetrics {
    double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0, fpr = 0.0, fnr = 0.0;
    std::vector<std::string> degenerate;  // 0/0 ratios that were defined as 0
};

struct MetricsReport {
    double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0;
    double ap = 0.0, auc = 0.0, fpr = 0.0, fnr = 0.0;
    std::vector<std::string> degenerate;
};

/// Positive iff score strictly above the threshold.
ConfusionCounts confusion(const std::vector<ScoredSample>& samples, double threshold = 0.5);

/// Any 0/0 ratio is defined as 0 and listed in `degenerate`.
BasicMetrics basic_metrics(const ConfusionCounts& c);

/// ROC swept over all distinct score thresholds (descending), tied scores
/// stepped jointly; AUC by trapezoidal integration. Equivalent to the
/// pairwise Mann-Whitney statistic with ties counted 1/2.
std::pair<double, Curve> roc_auc(const std::vector<ScoredSample>& samples);

/// Precision-recall points at every distinct threshold; AP is the
/// step-wise sum  sum_k (R_k - R_{k-1}) * P_k  with R_0 = 0.
std::pair<double, Curve> pr_ap(const std::vector<ScoredSample>& samples);

/// All eight metrics; the thresholded six use threshold 0.5.
MetricsReport full_report(const std::vector<ScoredSample>& samples);

void write_curve_csv(const Curve& curve, const std::string& path);
void write_report_json(const MetricsReport& report, const std::string& path);

}  // namespace covspot
