#pragma once

#include "solaris/numerics.hpp"

#include <string>
#include <vector>

namespace solaris::metrics {

struct MetricsReport {
    std::string model_label;
    double rmse = 0.0;        // MJ m^-2 day^-1
    double mae = 0.0;         // MJ m^-2 day^-1
    double mbe = 0.0;         // signed, positive means overestimation
    double pearson_rho = 0.0; // in [-1, 1]
    std::size_t n = 0;
};

double rmse(const numerics::Vector& pred, const numerics::Vector& actual);
double mae(const numerics::Vector& pred, const numerics::Vector& actual);
/// Mean bias, sum(pred - actual) / n.
double mbe(const numerics::Vector& pred, const numerics::Vector& actual);
/// Pearson correlation; throws when either vector is constant.
double pearson(const numerics::Vector& pred, const numerics::Vector& actual);

MetricsReport evaluate(const numerics::Vector& pred, const numerics::Vector& actual,
                       const std::string& label);

/// Rows sorted by rmse ascending, ties by label.
std::vector<MetricsReport> compare(std::vector<MetricsReport> reports);

/// CSV `model,rmse,mae,mbe,pearson_rho,n` with 6 significant digits.
std::string comparison_csv(const std::vector<MetricsReport>& reports);

std::string report_json(const MetricsReport& report);

} // namespace solaris::metrics
