#include "solaris/baselines.hpp"

#include "solaris/docio.hpp"
#include "solaris/errors.hpp"
#include "solaris/netcore.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace solaris::baselines {

using numerics::Matrix;
using numerics::Vector;

SolarGeometry solar_geometry(double latitude_rad, int day_of_year) {
    if (latitude_rad < -M_PI / 2.0 || latitude_rad > M_PI / 2.0)
        throw ParseError("solar_geometry: latitude outside [-pi/2, pi/2]");
    if (day_of_year < 1 || day_of_year > 366)
        throw ParseError("solar_geometry: day_of_year outside 1..366");

    SolarGeometry g;
    g.day_of_year = day_of_year;
    const double b = 2.0 * M_PI * static_cast<double>(day_of_year) / 365.0;
    g.declination = 0.409 * std::sin(b - 1.39);
    g.inverse_relative_distance = 1.0 + 0.033 * std::cos(b);

    const double cos_ws = -std::tan(latitude_rad) * std::tan(g.declination);
    if (cos_ws >= 1.0) {
        g.sunset_hour_angle = 0.0; // polar night
        g.polar_clamped = cos_ws > 1.0;
    } else if (cos_ws <= -1.0) {
        g.sunset_hour_angle = M_PI; // midnight sun
        g.polar_clamped = cos_ws < -1.0;
    } else {
        g.sunset_hour_angle = std::acos(cos_ws);
    }

    constexpr double kGsc = 0.0820; // MJ m^-2 min^-1
    g.extraterrestrial_mj =
        (24.0 * 60.0 / M_PI) * kGsc * g.inverse_relative_distance *
        (g.sunset_hour_angle * std::sin(latitude_rad) * std::sin(g.declination) +
         std::cos(latitude_rad) * std::cos(g.declination) * std::sin(g.sunset_hour_angle));
    g.extraterrestrial_mj = std::max(g.extraterrestrial_mj, 0.0);
    g.daylight_hours = 24.0 * g.sunset_hour_angle / M_PI;
    return g;
}

AngstromModel fit_angstrom(const dataio::Dataset& d, double latitude_rad) {
    dataio::validate(d);
    if (d.size() < 2)
        throw ParseError("fit_angstrom: need at least 2 records");
    if (!d.has_gsr())
        throw ParseError("fit_angstrom: every record needs a gsr value");

    // OLS of clearness index H/H0 on sunshine fraction n/N.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(d.size());
    for (const dataio::MeteoRecord& r : d.records) {
        const SolarGeometry g = solar_geometry(latitude_rad, r.date.day_of_year());
        if (!(g.extraterrestrial_mj > 0.0) || !(g.daylight_hours > 0.0))
            throw ParseError("fit_angstrom: H0 or N vanishes on " + r.date.to_string());
        const double frac = r.sunshine / g.daylight_hours;
        const double clearness = *r.gsr / g.extraterrestrial_mj;
        sx += frac;
        sy += clearness;
        sxx += frac * frac;
        sxy += frac * clearness;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12 * n * std::max(sxx, 1.0))
        throw ParseError("fit_angstrom: sunshine fraction is constant, slope undetermined");

    AngstromModel m;
    m.b = (n * sxy - sx * sy) / denom;
    m.a = (sy - m.b * sx) / n;
    m.latitude_rad = latitude_rad;
    return m;
}

Vector predict_angstrom(const AngstromModel& m, const dataio::Dataset& d) {
    Vector out;
    out.reserve(d.size());
    for (const dataio::MeteoRecord& r : d.records) {
        const SolarGeometry g = solar_geometry(m.latitude_rad, r.date.day_of_year());
        const double frac = g.daylight_hours > 0.0 ? r.sunshine / g.daylight_hours : 0.0;
        out.push_back(std::max(g.extraterrestrial_mj * (m.a + m.b * frac), 0.0));
    }
    return out;
}

std::string serialize(const AngstromModel& m) {
    std::ostringstream out;
    out << "{\"schema_version\":1,\"model_type\":\"angstrom\""
        << ",\"a\":" << docio::format_g17(m.a) << ",\"b\":" << docio::format_g17(m.b)
        << ",\"latitude_degrees\":" << docio::format_g17(m.latitude_rad * 180.0 / M_PI)
        << "}\n";
    return out.str();
}

AngstromModel deserialize_angstrom(const std::string& document) {
    const nlohmann::json doc = docio::parse_document(document, "angstrom", 1);
    AngstromModel m;
    m.a = doc.at("a").get<double>();
    m.b = doc.at("b").get<double>();
    m.latitude_rad = doc.at("latitude_degrees").get<double>() * M_PI / 180.0;
    if (!std::isfinite(m.a) || !std::isfinite(m.b))
        throw ParseError("angstrom document: non-finite coefficients");
    return m;
}

namespace {

netcore::StackSpec ann_stack(std::size_t inputs, std::size_t hidden) {
    netcore::StackSpec s;
    s.widths = {inputs, hidden, 1};
    s.acts = {netcore::Act::Tansig, netcore::Act::Linear};
    return s;
}

} // namespace

AnnModel fit_ann_baseline(const dataio::Standardizer& standardizer, const Matrix& features,
                          const Vector& targets, const AnnConfig& cfg,
                          lm::FitResult* fit_info) {
    if (features.rows() != targets.size() || features.rows() < 1)
        throw ParseError("fit_ann_baseline: feature rows and target length differ");
    const netcore::StackSpec stack = ann_stack(features.cols(), cfg.hidden);
    const std::size_t p = netcore::param_count(stack);

    Vector params0(p);
    std::mt19937_64 rng(cfg.train.seed);
    netcore::init_uniform(stack, params0, rng);

    auto residual = [&](const Vector& params) {
        Vector e(features.rows());
        Vector x(features.cols());
        for (std::size_t i = 0; i < features.rows(); ++i) {
            for (std::size_t j = 0; j < features.cols(); ++j) x[j] = features(i, j);
            e[i] = netcore::stack_forward(stack, params, x)[0] - targets[i];
        }
        return e;
    };
    auto jac_fn = [&](const Vector& params) {
        Matrix jac(features.rows(), p);
        Vector x(features.cols());
        for (std::size_t i = 0; i < features.rows(); ++i) {
            for (std::size_t j = 0; j < features.cols(); ++j) x[j] = features(i, j);
            netcore::StackTape tape;
            netcore::stack_forward(stack, params, x, &tape);
            netcore::stack_backward(stack, params, tape, Vector{1.0},
                                    std::span<double>(&jac(i, 0), p));
        }
        return jac;
    };

    lm::FitResult fit = lm::lm_optimize(residual, jac_fn, std::move(params0), cfg.train);

    AnnModel m;
    m.input_count = features.cols();
    m.hidden = cfg.hidden;
    m.params = fit.params;
    m.standardizer = standardizer;
    m.seed = cfg.train.seed;
    m.iterations = fit.iterations;
    m.final_sse = fit.sse;
    if (fit_info) *fit_info = std::move(fit);
    return m;
}

Vector predict_ann_baseline(const AnnModel& m, const dataio::Dataset& d) {
    const dataio::StandardizedData sd = dataio::apply_standardizer(m.standardizer, d);
    const netcore::StackSpec stack = ann_stack(m.input_count, m.hidden);
    Vector out(d.size());
    Vector x(m.input_count);
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < m.input_count; ++j) x[j] = sd.features(i, j);
        out[i] = netcore::stack_forward(stack, m.params, x)[0] + m.standardizer.target_mean;
    }
    return out;
}

std::string serialize(const AnnModel& m) {
    std::ostringstream out;
    out << "{\"schema_version\":1,\"model_type\":\"ann\""
        << ",\"input_count\":" << m.input_count << ",\"hidden\":" << m.hidden
        << ",\"params\":" << docio::json_array_g17(m.params)
        << ",\"standardizer\":" << docio::standardizer_json(m.standardizer)
        << ",\"train_meta\":{\"seed\":" << m.seed << ",\"iterations\":" << m.iterations
        << ",\"final_sse\":" << docio::format_g17(m.final_sse) << "}}\n";
    return out.str();
}

AnnModel deserialize_ann(const std::string& document) {
    const nlohmann::json doc = docio::parse_document(document, "ann", 1);
    AnnModel m;
    m.input_count = doc.at("input_count").get<std::size_t>();
    m.hidden = doc.at("hidden").get<std::size_t>();
    m.params = doc.at("params").get<std::vector<double>>();
    const std::size_t expected = netcore::param_count(ann_stack(m.input_count, m.hidden));
    if (m.params.size() != expected)
        throw ParseError("ann document has " + std::to_string(m.params.size()) +
                         " params, expected " + std::to_string(expected));
    numerics::require_finite(m.params, "ann params");
    m.standardizer = docio::standardizer_from_json(doc.at("standardizer"));
    const nlohmann::json& meta = doc.at("train_meta");
    m.seed = meta.at("seed").get<std::uint64_t>();
    m.iterations = meta.at("iterations").get<int>();
    m.final_sse = meta.at("final_sse").get<double>();
    return m;
}

} // namespace solaris::baselines
