#pragma once

#include "solaris/numerics.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace solaris::dataio {

/// Calendar date, ISO-8601 `YYYY-MM-DD` on the wire.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    static Date parse(const std::string& text);
    std::string to_string() const;
    Date next() const;
    int day_of_year() const; // 1..366
};

/// One day of weather features plus the daily GSR target.
/// gsr is MJ m^-2 day^-1 and optional for prediction-only data.
struct MeteoRecord {
    Date date;
    double tmax = 0.0;     // deg C
    double tmin = 0.0;     // deg C
    double sunshine = 0.0; // hours, in [0, 24]
    std::vector<double> extras;
    std::optional<double> gsr;
};

/// Generative ground truth recorded alongside synthetic datasets:
/// gsr = c0 + c1*sunshine + c2*tmax - c3*tmin + eps, eps ~ N(0, noise_sd^2),
/// clipped afterwards to [gsr_min, gsr_max].
struct SynthMeta {
    std::string profile;
    std::uint64_t seed = 0;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double noise_sd = 0.0;
    double gsr_min = 0.0, gsr_max = 0.0;
    double latitude_degrees = 0.0;
    // |coefficient| * target feature stddev, the scale each feature moves gsr by.
    double std_effect_sunshine = 0.0, std_effect_tmax = 0.0, std_effect_tmin = 0.0;
    std::vector<std::size_t> clipped_rows;
};

struct Dataset {
    std::string name;
    std::vector<std::string> extra_names;
    std::vector<MeteoRecord> records;
    std::optional<SynthMeta> synth_meta;

    std::size_t size() const { return records.size(); }
    bool has_gsr() const;
    /// Feature column names in model order: tmax_c, tmin_c, sunshine_h, extras.
    std::vector<std::string> feature_names() const;
};

/// Check record invariants (tmax >= tmin, sunshine in [0,24], gsr > 0,
/// strictly increasing dates, consistent extras). Throws ParseError.
void validate(const Dataset& d);

Dataset parse_csv(const std::string& text, const std::string& name = "dataset");
std::string emit_csv(const Dataset& d);

Dataset load_csv_file(const std::string& path, const std::string& name = "");
void write_csv_file(const Dataset& d, const std::string& path);

/// Pyranometer calibration: millivolt reading to W m^-2 given the sensor
/// sensitivity in microvolts per W m^-2.
double mv_to_flux(double reading_mv, double sensitivity_uv_per_wm2);

/// 24 hourly flux values (W m^-2) to the daily total in MJ m^-2 day^-1.
double cumulate_daily(const std::vector<double>& hourly_flux_wm2);

/// Centered moving average with edge-replication padding. Window must be
/// odd and no longer than the series.
std::vector<double> lowpass(const std::vector<double>& series, std::size_t window);

/// Return a copy of the dataset with the gsr column low-pass filtered.
Dataset denoise_gsr(const Dataset& d, std::size_t window);

/// Per-feature z-scoring state plus the removed target mean. Statistics
/// always come from the training split only; population (1/N) stddev.
struct Standardizer {
    std::vector<std::string> feature_names;
    std::vector<double> means;
    std::vector<double> stddevs;
    double target_mean = 0.0;
};

struct StandardizedData {
    numerics::Matrix features; // one row per record, z-scored
    numerics::Vector targets;  // centered gsr; empty when the dataset has none
    bool has_targets = false;
};

Standardizer fit_standardizer(const Dataset& train);
StandardizedData apply_standardizer(const Standardizer& s, const Dataset& d);

/// Undo the feature z-scoring (row-wise inverse of apply_standardizer).
numerics::Matrix inverse_standardize(const Standardizer& s, const numerics::Matrix& z);

enum class SplitMode { Chronological, SeededRandom };

struct SplitSpec {
    double train_fraction = 0.8;
    SplitMode mode = SplitMode::Chronological;
    std::uint64_t seed = 0; // used by SeededRandom only
};

/// Split into train/test with train size floor(train_fraction * N).
/// Chronological mode takes the earliest records as train; seeded-random mode
/// picks a reproducible subset but keeps each side in date order.
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

struct SynthOptions {
    double noise_sd = 0.5; // MJ m^-2 day^-1
    // Generative coefficient overrides, mainly for sensitivity fixtures.
    std::optional<double> c1, c2, c3;
};

/// Seeded synthetic dataset whose feature sample moments are calibrated to
/// the ds1/ds2 descriptive-statistics targets. The ground-truth gsr function
/// and the seed are recorded in synth_meta.
Dataset synth_generate(const std::string& profile, std::size_t days, std::uint64_t seed,
                       const SynthOptions& options = {});

/// The calibration targets behind a profile name (ds1 or ds2).
struct SynthProfile {
    std::string name;
    double tmax_mean, tmax_var;
    double tmin_mean, tmin_var;
    double sun_mean, sun_var;
    double gsr_min, gsr_max;
    double c0, c1, c2, c3;
    double latitude_degrees;
    Date start_date;
};

const SynthProfile& synth_profile(const std::string& name);

} // namespace solaris::dataio
