#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "solaris/errors.hpp"
#include "solaris/metrics.hpp"

#include <cmath>
#include <random>

using namespace solaris;
using numerics::Vector;

TEST_CASE("identical vectors score perfectly") {
    const Vector v = {1.0, 2.5, 3.0, 4.25};
    CHECK(metrics::rmse(v, v) == 0.0);
    CHECK(metrics::mae(v, v) == 0.0);
    CHECK(metrics::mbe(v, v) == 0.0);
    CHECK(metrics::pearson(v, v) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("constant offset gives unit errors with positive bias") {
    const Vector pred = {2.0, 4.0, 6.0};
    const Vector actual = {1.0, 3.0, 5.0};
    CHECK(metrics::rmse(pred, actual) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(metrics::mae(pred, actual) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(metrics::mbe(pred, actual) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(metrics::pearson(pred, actual) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("reversal gives perfect anticorrelation and hand-worked errors") {
    const Vector pred = {1.0, 2.0, 3.0};
    const Vector actual = {3.0, 2.0, 1.0};
    CHECK(metrics::pearson(pred, actual) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(metrics::mbe(pred, actual) == 0.0);
    CHECK(metrics::mae(pred, actual) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(metrics::rmse(pred, actual) == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(metrics::rmse({1.0}, {1.0, 2.0}), ParseError);
    CHECK_THROWS_AS(metrics::pearson({1.0}, {1.0}), ParseError);
    CHECK_THROWS_AS(metrics::pearson({1.0, 1.0}, {1.0, 2.0}), ParseError);
    CHECK_THROWS_AS(metrics::pearson({1.0, 2.0}, {3.0, 3.0}), ParseError);
}

TEST_CASE("rmse dominates mae and correlation stays bounded on random pairs") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g(0.0, 3.0);
    std::uniform_int_distribution<std::size_t> len(2, 40);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = len(rng);
        Vector pred(n), actual(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = g(rng);
            actual[i] = g(rng);
        }
        CHECK(metrics::rmse(pred, actual) >= metrics::mae(pred, actual) - 1e-12);
        CHECK(std::abs(metrics::mbe(pred, actual) + metrics::mbe(actual, pred)) < 1e-12);
        try {
            const double rho = metrics::pearson(pred, actual);
            CHECK(std::abs(rho) <= 1.0 + 1e-12);
        } catch (const ParseError&) {
            // constant draws are legitimately rejected
        }
    }
}

TEST_CASE("rmse equals mae exactly when all absolute errors are equal") {
    const Vector pred = {1.0, 5.0, -1.0};
    const Vector actual = {0.0, 4.0, 0.0}; // absolute error 1 everywhere
    CHECK(metrics::rmse(pred, actual) == doctest::Approx(metrics::mae(pred, actual)));
}

TEST_CASE("pearson is invariant under positive affine transforms") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector a(20), b(20);
    for (std::size_t i = 0; i < 20; ++i) {
        a[i] = g(rng);
        b[i] = g(rng);
    }
    const double base = metrics::pearson(a, b);
    Vector a_scaled = a;
    for (double& v : a_scaled) v = 2.5 * v + 7.0;
    Vector b_scaled = b;
    for (double& v : b_scaled) v = 0.3 * v - 2.0;
    CHECK(std::abs(metrics::pearson(a_scaled, b) - base) < 1e-12);
    CHECK(std::abs(metrics::pearson(a, b_scaled) - base) < 1e-12);
}

TEST_CASE("evaluate fills a labelled report") {
    const metrics::MetricsReport r = metrics::evaluate({2.0, 4.0, 6.0}, {1.0, 3.0, 5.0}, "m1");
    CHECK(r.model_label == "m1");
    CHECK(r.rmse == doctest::Approx(1.0));
    CHECK(r.n == 3);
}

TEST_CASE("compare sorts by rmse with label tie-break") {
    metrics::MetricsReport a = metrics::evaluate({2.0, 4.0}, {1.0, 3.0}, "zeta");
    metrics::MetricsReport b = metrics::evaluate({1.5, 3.5}, {1.0, 3.0}, "alpha");
    metrics::MetricsReport c = metrics::evaluate({2.0, 4.0}, {1.0, 3.0}, "beta");

    const auto sorted = metrics::compare({a, b, c});
    CHECK(sorted[0].model_label == "alpha");
    CHECK(sorted[1].model_label == "beta"); // ties on rmse resolve by label
    CHECK(sorted[2].model_label == "zeta");

    CHECK_THROWS_AS(metrics::compare({}), ParseError);
}

TEST_CASE("comparison csv uses the documented header and six significant digits") {
    const metrics::MetricsReport r =
        metrics::evaluate({2.123456789, 4.0}, {1.0, 3.0}, "solarisnet");
    const std::string csv = metrics::comparison_csv({r});
    CHECK(csv.find("model,rmse,mae,mbe,pearson_rho,n\n") == 0);
    CHECK(csv.find("solarisnet,") != std::string::npos);
    // 6 significant digits: 1.06173 (rmse of the pair above)
    CHECK(csv.find("1.06173") != std::string::npos);
}

TEST_CASE("report json round-trips through a parser") {
    const metrics::MetricsReport r = metrics::evaluate({2.0, 4.0}, {1.0, 3.0}, "gpr");
    const std::string json_text = metrics::report_json(r);
    CHECK(json_text.find("\"model\":\"gpr\"") != std::string::npos);
    CHECK(json_text.find("\"n\":2") != std::string::npos);
}
