#include "solaris/dataio.hpp"

#include "solaris/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

namespace solaris::dataio {

namespace {

constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    if (month == 2 && is_leap(year)) return 29;
    return kDaysInMonth[static_cast<std::size_t>(month - 1)];
}

std::string format_double(double v) {
    // shortest representation that round-trips exactly
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc())
        throw FitError("format_double: conversion failed");
    return std::string(buf.data(), end);
}

double parse_double(const std::string& token, std::size_t line, const std::string& column) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError("line " + std::to_string(line) + ": cannot parse '" + token +
                         "' as a number in column " + column);
    return value;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void check_record(const MeteoRecord& r, std::size_t line) {
    const std::string at = line ? "line " + std::to_string(line) + ": " : "";
    if (!(r.tmax >= r.tmin))
        throw ParseError(at + "tmax " + format_double(r.tmax) + " < tmin " +
                         format_double(r.tmin));
    if (!(r.sunshine >= 0.0 && r.sunshine <= 24.0))
        throw ParseError(at + "sunshine " + format_double(r.sunshine) +
                         " outside [0, 24]");
    if (r.gsr && !(*r.gsr > 0.0))
        throw ParseError(at + "gsr " + format_double(*r.gsr) + " is not positive");
    if (!std::isfinite(r.tmax) || !std::isfinite(r.tmin) || !std::isfinite(r.sunshine))
        throw ParseError(at + "non-finite feature value");
    for (double x : r.extras)
        if (!std::isfinite(x)) throw ParseError(at + "non-finite extra value");
}

} // namespace

Date Date::parse(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ParseError("date '" + text + "' is not YYYY-MM-DD");
    auto digits = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (text[i] < '0' || text[i] > '9')
                throw ParseError("date '" + text + "' is not YYYY-MM-DD");
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    Date d{digits(0, 4), digits(5, 2), digits(8, 2)};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw ParseError("date '" + text + "' is out of range");
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::next() const {
    Date d = *this;
    if (++d.day > days_in_month(d.year, d.month)) {
        d.day = 1;
        if (++d.month > 12) {
            d.month = 1;
            ++d.year;
        }
    }
    return d;
}

int Date::day_of_year() const {
    int doy = day;
    for (int m = 1; m < month; ++m) doy += days_in_month(year, m);
    return doy;
}

bool Dataset::has_gsr() const {
    return !records.empty() &&
           std::all_of(records.begin(), records.end(),
                       [](const MeteoRecord& r) { return r.gsr.has_value(); });
}

std::vector<std::string> Dataset::feature_names() const {
    std::vector<std::string> names = {"tmax_c", "tmin_c", "sunshine_h"};
    names.insert(names.end(), extra_names.begin(), extra_names.end());
    return names;
}

void validate(const Dataset& d) {
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        check_record(d.records[i], 0);
        if (d.records[i].extras.size() != d.extra_names.size())
            throw ParseError("record " + std::to_string(i) + " has " +
                             std::to_string(d.records[i].extras.size()) + " extras, header has " +
                             std::to_string(d.extra_names.size()));
        if (i > 0 && !(d.records[i - 1].date < d.records[i].date))
            throw ParseError("dates not strictly increasing at record " + std::to_string(i) +
                             " (" + d.records[i].date.to_string() + ")");
    }
}

Dataset parse_csv(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&](std::string& out) {
        if (!std::getline(in, out)) return false;
        if (!out.empty() && out.back() == '\r') out.pop_back();
        ++line_no;
        return true;
    };

    if (!next_line(line) || line.empty())
        throw ParseError("empty input: missing header row");

    const std::vector<std::string> header = split_fields(line);
    const std::vector<std::string> required = {"date", "tmax_c", "tmin_c", "sunshine_h"};
    if (header.size() < required.size())
        throw ParseError("header has " + std::to_string(header.size()) +
                         " columns, expected at least 4");
    for (std::size_t i = 0; i < required.size(); ++i)
        if (header[i] != required[i])
            throw ParseError("header column " + std::to_string(i + 1) + " is '" + header[i] +
                             "', expected '" + required[i] + "'");

    const bool has_gsr_col = header.back() == "gsr_mj_m2_day";
    Dataset d;
    d.name = name;
    d.extra_names.assign(header.begin() + 4, has_gsr_col ? header.end() - 1 : header.end());
    for (const std::string& extra : d.extra_names)
        if (extra.empty() || extra == "gsr_mj_m2_day" || extra == "date")
            throw ParseError("invalid extra column name '" + extra + "'");

    while (next_line(line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(header.size()));
        MeteoRecord r;
        try {
            r.date = Date::parse(fields[0]);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        r.tmax = parse_double(fields[1], line_no, "tmax_c");
        r.tmin = parse_double(fields[2], line_no, "tmin_c");
        r.sunshine = parse_double(fields[3], line_no, "sunshine_h");
        for (std::size_t i = 0; i < d.extra_names.size(); ++i)
            r.extras.push_back(parse_double(fields[4 + i], line_no, d.extra_names[i]));
        if (has_gsr_col)
            r.gsr = parse_double(fields.back(), line_no, "gsr_mj_m2_day");
        check_record(r, line_no);
        if (!d.records.empty() && !(d.records.back().date < r.date))
            throw ParseError("line " + std::to_string(line_no) + ": date " +
                             r.date.to_string() + " does not increase");
        d.records.push_back(std::move(r));
    }
    return d;
}

std::string emit_csv(const Dataset& d) {
    std::string out = "date,tmax_c,tmin_c,sunshine_h";
    for (const std::string& extra : d.extra_names) out += "," + extra;
    const bool with_gsr = d.has_gsr();
    if (with_gsr) out += ",gsr_mj_m2_day";
    out += "\n";
    for (const MeteoRecord& r : d.records) {
        out += r.date.to_string();
        out += "," + format_double(r.tmax);
        out += "," + format_double(r.tmin);
        out += "," + format_double(r.sunshine);
        for (double x : r.extras) out += "," + format_double(x);
        if (with_gsr) out += "," + format_double(*r.gsr);
        out += "\n";
    }
    return out;
}

Dataset load_csv_file(const std::string& path, const std::string& name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), name.empty() ? path : name);
}

void write_csv_file(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << emit_csv(d);
    if (!out) throw IoError("write to '" + path + "' failed");
}

double mv_to_flux(double reading_mv, double sensitivity_uv_per_wm2) {
    if (!(sensitivity_uv_per_wm2 > 0.0))
        throw ParseError("mv_to_flux: sensitivity must be positive");
    if (reading_mv < 0.0)
        throw ParseError("mv_to_flux: reading must be non-negative");
    return reading_mv * 1000.0 / sensitivity_uv_per_wm2;
}

double cumulate_daily(const std::vector<double>& hourly_flux_wm2) {
    if (hourly_flux_wm2.size() != 24)
        throw ParseError("cumulate_daily: expected 24 hourly values, got " +
                         std::to_string(hourly_flux_wm2.size()));
    double total = 0.0;
    for (double f : hourly_flux_wm2) {
        if (f < 0.0) throw ParseError("cumulate_daily: negative flux");
        total += f;
    }
    return total * 3600.0 / 1e6;
}

std::vector<double> lowpass(const std::vector<double>& series, std::size_t window) {
    if (window % 2 == 0 || window < 1)
        throw ParseError("lowpass: window must be odd");
    if (window > series.size())
        throw ParseError("lowpass: window " + std::to_string(window) +
                         " exceeds series length " + std::to_string(series.size()));
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(series.size());
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
    std::vector<double> out(series.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t k = i - half; k <= i + half; ++k)
            acc += series[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, n - 1))];
        out[static_cast<std::size_t>(i)] = acc / static_cast<double>(window);
    }
    return out;
}

Dataset denoise_gsr(const Dataset& d, std::size_t window) {
    if (!d.has_gsr())
        throw ParseError("denoise_gsr: dataset has no gsr column");
    std::vector<double> series;
    series.reserve(d.size());
    for (const MeteoRecord& r : d.records) series.push_back(*r.gsr);
    const std::vector<double> smoothed = lowpass(series, window);
    Dataset out = d;
    for (std::size_t i = 0; i < out.records.size(); ++i)
        out.records[i].gsr = std::max(smoothed[i], 1e-9); // keep gsr > 0
    return out;
}

namespace {

std::vector<double> feature_column(const Dataset& d, std::size_t idx) {
    std::vector<double> col;
    col.reserve(d.size());
    for (const MeteoRecord& r : d.records) {
        switch (idx) {
            case 0: col.push_back(r.tmax); break;
            case 1: col.push_back(r.tmin); break;
            case 2: col.push_back(r.sunshine); break;
            default: col.push_back(r.extras[idx - 3]); break;
        }
    }
    return col;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_var_of(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

} // namespace

Standardizer fit_standardizer(const Dataset& train) {
    validate(train);
    if (train.size() < 2)
        throw ParseError("fit_standardizer: need at least 2 records, got " +
                         std::to_string(train.size()));
    if (!train.has_gsr())
        throw ParseError("fit_standardizer: training data has no gsr column");

    Standardizer s;
    s.feature_names = train.feature_names();
    for (std::size_t j = 0; j < s.feature_names.size(); ++j) {
        const std::vector<double> col = feature_column(train, j);
        const double m = mean_of(col);
        const double var = pop_var_of(col, m);
        if (!(var > 0.0))
            throw ParseError("fit_standardizer: feature '" + s.feature_names[j] +
                             "' has zero variance");
        s.means.push_back(m);
        s.stddevs.push_back(std::sqrt(var));
    }
    std::vector<double> targets;
    targets.reserve(train.size());
    for (const MeteoRecord& r : train.records) targets.push_back(*r.gsr);
    s.target_mean = mean_of(targets);
    return s;
}

StandardizedData apply_standardizer(const Standardizer& s, const Dataset& d) {
    if (d.feature_names() != s.feature_names)
        throw ParseError("apply_standardizer: dataset features do not match the "
                         "standardizer (trained on " +
                         std::to_string(s.feature_names.size()) + " features)");
    StandardizedData out;
    out.features = numerics::Matrix(d.size(), s.feature_names.size());
    out.has_targets = d.has_gsr();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const MeteoRecord& r = d.records[i];
        for (std::size_t j = 0; j < s.feature_names.size(); ++j) {
            const double raw = j == 0   ? r.tmax
                               : j == 1 ? r.tmin
                               : j == 2 ? r.sunshine
                                        : r.extras[j - 3];
            out.features(i, j) = (raw - s.means[j]) / s.stddevs[j];
        }
        if (out.has_targets) out.targets.push_back(*r.gsr - s.target_mean);
    }
    return out;
}

numerics::Matrix inverse_standardize(const Standardizer& s, const numerics::Matrix& z) {
    if (z.cols() != s.feature_names.size())
        throw ParseError("inverse_standardize: column count mismatch");
    numerics::Matrix raw(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j)
            raw(i, j) = z(i, j) * s.stddevs[j] + s.means[j];
    return raw;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
    validate(d);
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ParseError("split: train_fraction must be in (0, 1)");
    const std::size_t n = d.size();
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n)
        throw ParseError("split: " + std::to_string(n) + " records with fraction " +
                         format_double(spec.train_fraction) + " leaves an empty side");

    std::vector<std::size_t> train_idx;
    if (spec.mode == SplitMode::Chronological) {
        train_idx.resize(n_train);
        std::iota(train_idx.begin(), train_idx.end(), 0);
    } else {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        std::mt19937_64 rng(spec.seed);
        std::shuffle(all.begin(), all.end(), rng);
        train_idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
        std::sort(train_idx.begin(), train_idx.end()); // keep each side in date order
    }

    Dataset train, test;
    train.name = d.name + "-train";
    test.name = d.name + "-test";
    train.extra_names = test.extra_names = d.extra_names;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (next < train_idx.size() && train_idx[next] == i) {
            train.records.push_back(d.records[i]);
            ++next;
        } else {
            test.records.push_back(d.records[i]);
        }
    }
    return {std::move(train), std::move(test)};
}

const SynthProfile& synth_profile(const std::string& name) {
    // Feature moment targets and GSR ranges follow the two-station
    // descriptive statistics this generator is calibrated against.
    static const SynthProfile ds1{
        "ds1", 31.92, 4.49, 21.11, 6.30, 6.42, 3.11,
        9.69,  25.70, 4.75, 1.35,  0.22, 0.13, 22.97, Date{2013, 1, 1}};
    static const SynthProfile ds2{
        "ds2", 32.23, 4.41, 23.29, 5.08, 5.13, 2.98,
        5.60,  23.50, 3.56, 1.35,  0.22, 0.13, 22.52, Date{2014, 1, 1}};
    if (name == "ds1") return ds1;
    if (name == "ds2") return ds2;
    throw ParseError("unknown synthetic profile '" + name + "' (expected ds1 or ds2)");
}

namespace {

// Rescale a column so its sample mean/population variance hit the targets.
void calibrate_moments(std::vector<double>& col, double target_mean, double target_var) {
    const double m = mean_of(col);
    const double var = pop_var_of(col, m);
    const double scale = std::sqrt(target_var / var);
    for (double& x : col) x = target_mean + (x - m) * scale;
}

} // namespace

Dataset synth_generate(const std::string& profile_name, std::size_t days, std::uint64_t seed,
                       const SynthOptions& options) {
    const SynthProfile& p = synth_profile(profile_name);
    if (days < 2)
        throw ParseError("synth_generate: need at least 2 days, got " + std::to_string(days));
    if (options.noise_sd < 0.0)
        throw ParseError("synth_generate: noise_sd must be non-negative");

    const double c1 = options.c1.value_or(p.c1);
    const double c2 = options.c2.value_or(p.c2);
    const double c3 = options.c3.value_or(p.c3);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Shared seasonal driver carries 60% of each feature's variance,
    // independent Gaussian noise the remaining 40%.
    constexpr double kSeasonalShare = 0.6;
    std::vector<Date> dates(days);
    std::vector<double> tmax(days), tmin(days), sun(days);
    Date date = p.start_date;
    for (std::size_t t = 0; t < days; ++t) {
        dates[t] = date;
        const double season =
            std::cos(2.0 * M_PI * (date.day_of_year() - 135) / 365.25);
        tmax[t] = std::sqrt(kSeasonalShare * p.tmax_var) * season +
                  std::sqrt((1.0 - kSeasonalShare) * p.tmax_var) * gauss(rng);
        tmin[t] = std::sqrt(kSeasonalShare * p.tmin_var) * season +
                  std::sqrt((1.0 - kSeasonalShare) * p.tmin_var) * gauss(rng);
        sun[t] = std::sqrt(kSeasonalShare * p.sun_var) * season +
                 std::sqrt((1.0 - kSeasonalShare) * p.sun_var) * gauss(rng);
        date = date.next();
    }

    calibrate_moments(tmax, p.tmax_mean, p.tmax_var);
    calibrate_moments(tmin, p.tmin_mean, p.tmin_var);
    calibrate_moments(sun, p.sun_mean, p.sun_var);
    for (std::size_t t = 0; t < days; ++t) {
        sun[t] = std::clamp(sun[t], 0.0, 24.0);
        if (tmax[t] < tmin[t]) std::swap(tmax[t], tmin[t]);
    }

    Dataset d;
    d.name = p.name + "-synth";
    SynthMeta meta;
    meta.profile = p.name;
    meta.seed = seed;
    meta.c0 = p.c0;
    meta.c1 = c1;
    meta.c2 = c2;
    meta.c3 = c3;
    meta.noise_sd = options.noise_sd;
    meta.gsr_min = p.gsr_min;
    meta.gsr_max = p.gsr_max;
    meta.latitude_degrees = p.latitude_degrees;
    meta.std_effect_sunshine = std::abs(c1) * std::sqrt(p.sun_var);
    meta.std_effect_tmax = std::abs(c2) * std::sqrt(p.tmax_var);
    meta.std_effect_tmin = std::abs(c3) * std::sqrt(p.tmin_var);

    for (std::size_t t = 0; t < days; ++t) {
        MeteoRecord r;
        r.date = dates[t];
        r.tmax = tmax[t];
        r.tmin = tmin[t];
        r.sunshine = sun[t];
        double gsr = p.c0 + c1 * sun[t] + c2 * tmax[t] - c3 * tmin[t];
        if (options.noise_sd > 0.0) gsr += options.noise_sd * gauss(rng);
        if (gsr < p.gsr_min || gsr > p.gsr_max) {
            gsr = std::clamp(gsr, p.gsr_min, p.gsr_max);
            meta.clipped_rows.push_back(t);
        }
        r.gsr = gsr;
        d.records.push_back(std::move(r));
    }
    d.synth_meta = std::move(meta);
    validate(d);
    return d;
}

} // namespace solaris::dataio
