#include "covspot/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

#include "covspot/error.hpp"
#include "covspot/util.hpp"

namespace covspot {

using nlohmann::json;

ConfusionCounts confusion(const std::vector<ScoredSample>& samples, double threshold) {
    if (samples.empty()) throw Error("confusion: no samples");
    ConfusionCounts c;
    for (const auto& s : samples) {
        const bool said_fake = s.score > threshold;
        const bool is_fake = s.truth == Label::fake;
        if (said_fake && is_fake) {
            ++c.tp;
        } else if (said_fake && !is_fake) {
            ++c.fp;
        } else if (!said_fake && is_fake) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

namespace {

double ratio_or_zero(long num, long den, const char* name, std::vector<std::string>& degenerate) {
    if (den == 0) {
        degenerate.push_back(name);
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

// Sample indices sorted by score descending; groups of tied scores stay
// adjacent so sweeps can step them jointly.
std::vector<size_t> sorted_by_score_desc(const std::vector<ScoredSample>& samples) {
    std::vector<size_t> order(samples.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&samples](size_t a, size_t b) {
        return samples[a].score > samples[b].score;
    });
    return order;
}

}  // namespace

BasicMetrics basic_metrics(const ConfusionCounts& c) {
    if (c.total() <= 0) throw Error("basic_metrics: empty confusion counts");
    BasicMetrics m;
    m.precision = ratio_or_zero(c.tp, c.tp + c.fp, "precision", m.degenerate);
    m.recall = ratio_or_zero(c.tp, c.tp + c.fn, "recall", m.degenerate);
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.f1 = 0.0;
        m.degenerate.push_back("f1");
    }
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    m.fpr = ratio_or_zero(c.fp, c.fp + c.tn, "fpr", m.degenerate);
    m.fnr = ratio_or_zero(c.fn, c.fn + c.tp, "fnr", m.degenerate);
    return m;
}

std::pair<double, Curve> roc_auc(const std::vector<ScoredSample>& samples) {
    long pos = 0, neg = 0;
    for (const auto& s : samples) (s.truth == Label::fake ? pos : neg)++;
    if (pos == 0 || neg == 0) {
        throw Error("roc_auc: need both classes, got " + std::to_string(pos) + " fake and " +
                    std::to_string(neg) + " real samples");
    }

    const std::vector<size_t> order = sorted_by_score_desc(samples);
    Curve curve;
    curve.kind = Curve::Kind::roc;
    curve.points.emplace_back(0.0, 0.0);

    double auc = 0.0;
    long tp = 0, fp = 0;
    double prev_x = 0.0, prev_y = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && samples[order[j]].score == samples[order[i]].score) ++j;
        for (size_t k = i; k < j; ++k) {
            (samples[order[k]].truth == Label::fake ? tp : fp)++;
        }
        const double x = static_cast<double>(fp) / static_cast<double>(neg);
        const double y = static_cast<double>(tp) / static_cast<double>(pos);
        auc += (x - prev_x) * (y + prev_y) * 0.5;
        curve.points.emplace_back(x, y);
        prev_x = x;
        prev_y = y;
        i = j;
    }
    return {auc, curve};
}

std::pair<double, Curve> pr_ap(const std::vector<ScoredSample>& samples) {
    long pos = 0;
    for (const auto& s : samples) {
        if (s.truth == Label::fake) ++pos;
    }
    if (pos == 0) throw Error("pr_ap: no positive (fake) samples");

    const std::vector<size_t> order = sorted_by_score_desc(samples);
    Curve curve;
    curve.kind = Curve::Kind::pr;

    double ap = 0.0;
    double prev_recall = 0.0;
    long tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && samples[order[j]].score == samples[order[i]].score) ++j;
        for (size_t k = i; k < j; ++k) {
            (samples[order[k]].truth == Label::fake ? tp : fp)++;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        curve.points.emplace_back(recall, precision);
        prev_recall = recall;
        i = j;
    }
    return {ap, curve};
}

MetricsReport full_report(const std::vector<ScoredSample>& samples) {
    const BasicMetrics basic = basic_metrics(confusion(samples, 0.5));
    MetricsReport r;
    r.precision = basic.precision;
    r.recall = basic.recall;
    r.f1 = basic.f1;
    r.accuracy = basic.accuracy;
    r.fpr = basic.fpr;
    r.fnr = basic.fnr;
    r.degenerate = basic.degenerate;
    r.auc = roc_auc(samples).first;
    r.ap = pr_ap(samples).first;
    return r;
}

void write_curve_csv(const Curve& curve, const std::string& path) {
    std::string out = curve.kind == Curve::Kind::roc ? "fpr,tpr\n" : "recall,precision\n";
    for (const auto& [x, y] : curve.points) {
        out += format_double(x) + "," + format_double(y) + "\n";
    }
    write_file_text(path, out);
}

void write_report_json(const MetricsReport& report, const std::string& path) {
    json j;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    j["accuracy"] = report.accuracy;
    j["ap"] = report.ap;
    j["auc"] = report.auc;
    j["fpr"] = report.fpr;
    j["fnr"] = report.fnr;
    j["degenerate"] = report.degenerate;
    write_file_text(path, j.dump(2) + "\n");
}

}  // namespace covspot
