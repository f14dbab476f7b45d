#include "solaris/metrics.hpp"

#include "solaris/docio.hpp"
#include "solaris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace solaris::metrics {

using numerics::Vector;

namespace {

void check_lengths(const Vector& pred, const Vector& actual, std::size_t min_n) {
    if (pred.size() != actual.size())
        throw ParseError("metrics: prediction length " + std::to_string(pred.size()) +
                         " differs from actual length " + std::to_string(actual.size()));
    if (pred.size() < min_n)
        throw ParseError("metrics: need at least " + std::to_string(min_n) + " points");
}

double mean_of(const Vector& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

std::string g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

double rmse(const Vector& pred, const Vector& actual) {
    check_lengths(pred, actual, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(const Vector& pred, const Vector& actual) {
    check_lengths(pred, actual, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(actual[i] - pred[i]);
    return acc / static_cast<double>(pred.size());
}

double mbe(const Vector& pred, const Vector& actual) {
    check_lengths(pred, actual, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += pred[i] - actual[i];
    return acc / static_cast<double>(pred.size());
}

double pearson(const Vector& pred, const Vector& actual) {
    check_lengths(pred, actual, 2);
    const double mp = mean_of(pred), ma = mean_of(actual);
    double cov = 0.0, vp = 0.0, va = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dp = pred[i] - mp, da = actual[i] - ma;
        cov += dp * da;
        vp += dp * dp;
        va += da * da;
    }
    if (vp == 0.0 || va == 0.0)
        throw ParseError("pearson: correlation undefined for a constant vector");
    return cov / (std::sqrt(vp) * std::sqrt(va));
}

MetricsReport evaluate(const Vector& pred, const Vector& actual, const std::string& label) {
    MetricsReport r;
    r.model_label = label;
    r.rmse = rmse(pred, actual);
    r.mae = mae(pred, actual);
    r.mbe = mbe(pred, actual);
    r.pearson_rho = pearson(pred, actual);
    r.n = pred.size();
    return r;
}

std::vector<MetricsReport> compare(std::vector<MetricsReport> reports) {
    if (reports.empty())
        throw ParseError("compare: no reports");
    std::stable_sort(reports.begin(), reports.end(),
                     [](const MetricsReport& a, const MetricsReport& b) {
                         if (a.rmse != b.rmse) return a.rmse < b.rmse;
                         return a.model_label < b.model_label;
                     });
    return reports;
}

std::string comparison_csv(const std::vector<MetricsReport>& reports) {
    std::string out = "model,rmse,mae,mbe,pearson_rho,n\n";
    for (const MetricsReport& r : reports)
        out += r.model_label + "," + g6(r.rmse) + "," + g6(r.mae) + "," + g6(r.mbe) + "," +
               g6(r.pearson_rho) + "," + std::to_string(r.n) + "\n";
    return out;
}

std::string report_json(const MetricsReport& report) {
    std::ostringstream out;
    out << "{\"model\":" << docio::json_string(report.model_label)
        << ",\"rmse\":" << docio::format_g17(report.rmse)
        << ",\"mae\":" << docio::format_g17(report.mae)
        << ",\"mbe\":" << docio::format_g17(report.mbe)
        << ",\"pearson_rho\":" << docio::format_g17(report.pearson_rho)
        << ",\"n\":" << report.n << "}\n";
    return out.str();
}

} // namespace solaris::metrics
