#pragma once

#include "solaris/dataio.hpp"
#include "solaris/lm.hpp"
#include "solaris/numerics.hpp"

#include <cstdint>
#include <string>

namespace solaris::baselines {

/// Daily solar geometry for one latitude/day pair (FAO-56 style formulas,
/// Gsc = 0.0820 MJ m^-2 min^-1).
struct SolarGeometry {
    int day_of_year = 1;
    double declination = 0.0;               // radians
    double sunset_hour_angle = 0.0;         // radians, in [0, pi]
    double inverse_relative_distance = 1.0; // dimensionless
    double extraterrestrial_mj = 0.0;       // H0, MJ m^-2 day^-1
    double daylight_hours = 0.0;            // N, hours
    bool polar_clamped = false;             // |tan(lat) tan(decl)| > 1
};

SolarGeometry solar_geometry(double latitude_rad, int day_of_year);

/// H/H0 = a + b * (n/N), fitted by ordinary least squares.
struct AngstromModel {
    double a = 0.0;
    double b = 0.0;
    double latitude_rad = 0.0;
};

AngstromModel fit_angstrom(const dataio::Dataset& d, double latitude_rad);
numerics::Vector predict_angstrom(const AngstromModel& m, const dataio::Dataset& d);

std::string serialize(const AngstromModel& m);
AngstromModel deserialize_angstrom(const std::string& document);

/// Plain single-hidden-layer perceptron (inputs -> hidden tansig -> linear),
/// trained with the same LM engine as the deep network.
struct AnnConfig {
    std::size_t hidden = 10;
    lm::TrainConfig train;
};

struct AnnModel {
    std::size_t input_count = 3;
    std::size_t hidden = 10;
    numerics::Vector params;
    dataio::Standardizer standardizer;
    std::uint64_t seed = 0;
    int iterations = 0;
    double final_sse = 0.0;
};

AnnModel fit_ann_baseline(const dataio::Standardizer& standardizer,
                          const numerics::Matrix& features, const numerics::Vector& targets,
                          const AnnConfig& cfg, lm::FitResult* fit_info = nullptr);
numerics::Vector predict_ann_baseline(const AnnModel& m, const dataio::Dataset& d);

std::string serialize(const AnnModel& m);
AnnModel deserialize_ann(const std::string& document);

} // namespace solaris::baselines
