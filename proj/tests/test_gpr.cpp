#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "solaris/errors.hpp"
#include "solaris/gpr.hpp"

#include <cmath>
#include <random>

using namespace solaris;
using numerics::Matrix;
using numerics::Vector;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Gauss-Jordan inverse, written independently of the Cholesky machinery.
Matrix brute_inverse(Matrix a) {
    const std::size_t n = a.rows();
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        for (std::size_t c = 0; c < n; ++c) {
            std::swap(a(col, c), a(pivot, c));
            std::swap(inv(col, c), inv(pivot, c));
        }
        const double d = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

// Determinant by cofactor-free LU-style elimination (test-only oracle).
double brute_det(Matrix a) {
    const std::size_t n = a.rows();
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
            det = -det;
        }
        det *= a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
        }
    }
    return det;
}

Matrix random_design(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = g(rng);
    return x;
}

// y drawn from the GP prior with the given hyperparameters.
Vector sample_gp(const Matrix& x, const gpr::KernelParams& p, std::mt19937_64& rng) {
    Matrix c = gpr::gram(x, p);
    for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += p.noise_variance;
    const numerics::CholeskyFactor f = numerics::cholesky_auto(c);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector z(x.rows());
    for (double& v : z) v = g(rng);
    Vector y(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t k = 0; k <= i; ++k) y[i] += f.lower(i, k) * z[k];
    return y;
}

} // namespace

TEST_CASE("kernel at zero distance, long length scale, and a reference point") {
    gpr::KernelParams p;
    p.signal_variance = 2.5;
    p.length_scales = {1.3};
    p.noise_variance = 0.1;
    const Vector x = {0.4, -1.0};
    CHECK(gpr::kernel(x, x, p) == 2.5);

    p.length_scales = {1e8};
    CHECK(gpr::kernel({0.0, 0.0}, {3.0, -4.0}, p) == doctest::Approx(2.5).epsilon(1e-12));

    p.signal_variance = 1.0;
    p.length_scales = {1.0};
    // exp(-1/2) from an extended-precision evaluation
    CHECK(std::abs(gpr::kernel({0.0}, {1.0}, p) - 0.60653065971263342) < 1e-15);

    CHECK_THROWS_AS(gpr::kernel({0.0}, {1.0, 2.0}, p), ParseError);
    p.length_scales = {-1.0};
    CHECK_THROWS_AS(gpr::kernel({0.0}, {1.0}, p), ParseError);
}

TEST_CASE("ARD kernel weights each coordinate by its own scale") {
    gpr::KernelParams p;
    p.signal_variance = 1.0;
    p.length_scales = {1.0, 10.0};
    const double k = gpr::kernel({0.0, 0.0}, {1.0, 1.0}, p);
    CHECK(k == doctest::Approx(std::exp(-0.5 - 0.5 / 100.0)).epsilon(1e-14));
}

TEST_CASE("gram matrix is symmetric with values in (0, sigma_f^2]") {
    std::mt19937_64 rng(2);
    const Matrix x = random_design(12, 3, rng);
    gpr::KernelParams p;
    p.signal_variance = 1.7;
    p.length_scales = {0.8, 1.1, 2.0};
    const Matrix c = gpr::gram(x, p);
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) {
            CHECK(std::abs(c(i, j) - c(j, i)) < 1e-12);
            CHECK(c(i, j) > 0.0);
            CHECK(c(i, j) <= 1.7 + 1e-12);
        }
}

TEST_CASE("single-point LML reduces to the normalization constant") {
    // n=1, y=0, sf2+sn2=1: data term vanishes, log det vanishes
    Matrix x(1, 1, {0.0});
    gpr::KernelParams p;
    p.signal_variance = 0.4;
    p.length_scales = {1.0};
    p.noise_variance = 0.6;
    // the stabilizing jitter (1e-10 on the diagonal) bounds the deviation
    CHECK(std::abs(gpr::log_marginal_likelihood(x, {0.0}, p) - (-0.5 * kLog2Pi)) < 1e-9);
}

TEST_CASE("LML matches the direct inverse/determinant route") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<std::size_t> nd(1, 5);
        const std::size_t n = nd(rng);
        const Matrix x = random_design(n, 2, rng);
        gpr::KernelParams p;
        std::uniform_real_distribution<double> u(0.3, 2.0);
        p.signal_variance = u(rng);
        p.length_scales = {u(rng), u(rng)};
        p.noise_variance = u(rng) * 0.3;
        Vector y(n);
        std::normal_distribution<double> g(0.0, 1.0);
        for (double& v : y) v = g(rng);

        Matrix c = gpr::gram(x, p);
        for (std::size_t i = 0; i < n; ++i) c(i, i) += p.noise_variance;
        const Matrix cinv = brute_inverse(c);
        double quad = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) quad += y[i] * cinv(i, j) * y[j];
        const double direct = -0.5 * quad - 0.5 * std::log(brute_det(c)) -
                              0.5 * static_cast<double>(n) * kLog2Pi;
        CHECK(gpr::log_marginal_likelihood(x, y, p) == doctest::Approx(direct).epsilon(1e-8));
    }
}

TEST_CASE("zero targets leave only determinant and constant terms") {
    std::mt19937_64 rng(3);
    const Matrix x = random_design(4, 2, rng);
    gpr::KernelParams p;
    Matrix c = gpr::gram(x, p);
    for (std::size_t i = 0; i < 4; ++i) c(i, i) += p.noise_variance;
    const double expected = -0.5 * std::log(brute_det(c)) - 2.0 * kLog2Pi;
    CHECK(gpr::log_marginal_likelihood(x, Vector(4, 0.0), p) ==
          doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("LML is invariant under row reordering") {
    std::mt19937_64 rng(10);
    const Matrix x = random_design(6, 2, rng);
    Vector y(6);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& v : y) v = g(rng);
    gpr::KernelParams p;
    p.length_scales = {0.9, 1.4};

    Matrix x_rev(6, 2);
    Vector y_rev(6);
    for (std::size_t i = 0; i < 6; ++i) {
        y_rev[i] = y[5 - i];
        for (std::size_t j = 0; j < 2; ++j) x_rev(i, j) = x(5 - i, j);
    }
    CHECK(gpr::log_marginal_likelihood(x, y, p) ==
          doctest::Approx(gpr::log_marginal_likelihood(x_rev, y_rev, p)).epsilon(1e-12));
}

TEST_CASE("lml_gradient matches central finite differences in log space") {
    std::mt19937_64 rng(14);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = random_design(8, 2, rng);
        Vector y(8);
        std::normal_distribution<double> g(0.0, 1.0);
        for (double& v : y) v = g(rng);

        std::uniform_real_distribution<double> u(-0.7, 0.7);
        Vector theta = {u(rng), u(rng), u(rng), u(rng) - 1.0}; // log l1, log l2, log sf2, log sn2
        auto params_at = [&](const Vector& t) {
            gpr::KernelParams p;
            p.length_scales = {std::exp(t[0]), std::exp(t[1])};
            p.signal_variance = std::exp(t[2]);
            p.noise_variance = std::exp(t[3]);
            return p;
        };

        const Vector grad = gpr::lml_gradient(x, y, params_at(theta));
        REQUIRE(grad.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            Vector tp = theta, tm = theta;
            tp[i] += h;
            tm[i] -= h;
            const double fd = (gpr::log_marginal_likelihood(x, y, params_at(tp)) -
                               gpr::log_marginal_likelihood(x, y, params_at(tm))) /
                              (2.0 * h);
            const double scale = std::max({1.0, std::abs(grad[i]), std::abs(fd)});
            CHECK(std::abs(grad[i] - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("fit recovers known hyperparameters within half a nat") {
    std::mt19937_64 rng(20);
    const Matrix x = random_design(200, 2, rng);
    gpr::KernelParams truth;
    truth.signal_variance = 1.5;
    truth.length_scales = {0.7, 1.4};
    truth.noise_variance = 0.05;
    const Vector y = sample_gp(x, truth, rng);

    gpr::FitConfig cfg;
    cfg.seed = 1;
    const gpr::GprModel m = gpr::fit(x, y, cfg);
    CHECK(std::abs(std::log(m.params.length_scales[0] / truth.length_scales[0])) < 0.5);
    CHECK(std::abs(std::log(m.params.length_scales[1] / truth.length_scales[1])) < 0.5);
    CHECK(std::abs(std::log(m.params.signal_variance / truth.signal_variance)) < 0.5);
    CHECK(std::abs(std::log(m.params.noise_variance / truth.noise_variance)) < 0.5);

    // stationarity at the chosen optimum
    const Vector grad = gpr::lml_gradient(x, y, m.params);
    CHECK(numerics::norm_inf(grad) < 10.0 * cfg.grad_tol * 200.0);
}

TEST_CASE("pure-noise targets drive the fitted length scales large") {
    int large = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(100 + seed);
        const Matrix x = random_design(60, 2, rng);
        Vector y(60);
        std::normal_distribution<double> g(0.0, 1.0);
        for (double& v : y) v = g(rng);

        gpr::FitConfig cfg;
        cfg.seed = seed;
        const gpr::GprModel m = gpr::fit(x, y, cfg);
        const double min_l =
            *std::min_element(m.params.length_scales.begin(), m.params.length_scales.end());
        if (min_l > 10.0) ++large; // features are standard normal, stddev 1
    }
    CHECK(large >= 8);
}

TEST_CASE("fit is deterministic per seed") {
    std::mt19937_64 rng(30);
    const Matrix x = random_design(40, 2, rng);
    gpr::KernelParams truth;
    const Vector y = sample_gp(x, truth, rng);
    gpr::FitConfig cfg;
    cfg.seed = 77;
    const gpr::GprModel a = gpr::fit(x, y, cfg);
    const gpr::GprModel b = gpr::fit(x, y, cfg);
    CHECK(a.params.length_scales == b.params.length_scales);
    CHECK(a.params.signal_variance == b.params.signal_variance);
    CHECK(a.params.noise_variance == b.params.noise_variance);
}

TEST_CASE("posterior interpolates a single training point") {
    Matrix x(1, 1, {0.0});
    gpr::KernelParams p;
    p.signal_variance = 1.0;
    p.length_scales = {1.0};
    p.noise_variance = 1e-12;
    const gpr::GprModel m = gpr::condition(x, {1.0}, p, gpr::KernelMode::Isotropic);
    const gpr::Prediction pred = gpr::predict(m, Matrix(1, 1, {0.0}));
    CHECK(pred.mean[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(pred.variance[0] == doctest::Approx(0.0));

    // far from the data the posterior reverts to the prior
    const gpr::Prediction far = gpr::predict(m, Matrix(1, 1, {100.0}));
    CHECK(std::abs(far.mean[0]) < 1e-10);
    CHECK(far.variance[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("posterior matches a direct two-point inversion") {
    Matrix x(2, 1, {0.0, 1.0});
    const Vector y = {1.0, 2.0};
    gpr::KernelParams p;
    p.signal_variance = 1.0;
    p.length_scales = {1.0};
    p.noise_variance = 0.1;
    const gpr::GprModel m = gpr::condition(x, y, p, gpr::KernelMode::Isotropic);
    const gpr::Prediction pred = gpr::predict(m, Matrix(1, 1, {0.5}), true);

    // direct 2x2 route
    const double k01 = std::exp(-0.5);
    Matrix c(2, 2, {1.1, k01, k01, 1.1});
    const Matrix cinv = brute_inverse(c);
    const double ks = std::exp(-0.5 * 0.25);
    const Vector kstar = {ks, ks};
    double mean = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) mean += kstar[i] * cinv(i, j) * y[j];
    double reduce = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) reduce += kstar[i] * cinv(i, j) * kstar[j];
    CHECK(pred.mean[0] == doctest::Approx(mean).epsilon(1e-10));
    CHECK(pred.variance[0] == doctest::Approx(1.0 - reduce + 0.1).epsilon(1e-10));
}

TEST_CASE("posterior variance stays within [0, sigma_f^2] after clamping") {
    std::mt19937_64 rng(44);
    const Matrix x = random_design(30, 2, rng);
    gpr::KernelParams p;
    p.signal_variance = 2.0;
    p.length_scales = {0.6, 1.0};
    p.noise_variance = 1e-6;
    Vector y(30);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& v : y) v = g(rng);
    const gpr::GprModel m = gpr::condition(x, y, p, gpr::KernelMode::Ard);
    const gpr::Prediction pred = gpr::predict(m, random_design(50, 2, rng));
    for (double v : pred.variance) {
        CHECK(v >= 0.0);
        CHECK(v <= 2.0 + 1e-10);
    }
}

TEST_CASE("rank_from_scales sorts ascending with index tie-break") {
    const auto ranking = gpr::rank_from_scales({2.0, 0.5, 5.0}, {"f1", "f2", "f3"});
    REQUIRE(ranking.size() == 3);
    CHECK(ranking[0].name == "f2");
    CHECK(ranking[1].name == "f1");
    CHECK(ranking[2].name == "f3");
    CHECK(ranking[0].log_length_scale == doctest::Approx(std::log(0.5)));

    const auto tied = gpr::rank_from_scales({1.0, 1.0}, {"a", "b"});
    CHECK(tied[0].name == "a");
    CHECK(tied[1].index == 1);
}

TEST_CASE("sunshine-only targets rank sunshine first in at least 9 of 10 runs") {
    int sunshine_first = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        dataio::SynthOptions opt;
        opt.noise_sd = 0.3;
        opt.c2 = 0.0; // only sunshine drives the target
        opt.c3 = 0.0;
        const dataio::Dataset d = dataio::synth_generate("ds1", 200, 1000 + seed, opt);
        const dataio::Standardizer s = dataio::fit_standardizer(d);
        const dataio::StandardizedData sd = dataio::apply_standardizer(s, d);

        gpr::FitConfig cfg;
        cfg.seed = seed;
        cfg.starts = 3;
        cfg.max_iterations = 40;
        const auto ranking =
            gpr::sensitivity_rank(sd.features, sd.targets, d.feature_names(), cfg);
        if (ranking.front().name == "sunshine_h") ++sunshine_first;
    }
    CHECK(sunshine_first >= 9);
}

TEST_CASE("gpr regressor document round-trips predictions bit-exactly") {
    const dataio::Dataset data = dataio::synth_generate("ds1", 80, 55);
    const dataio::Standardizer s = dataio::fit_standardizer(data);
    const dataio::StandardizedData sd = dataio::apply_standardizer(s, data);

    gpr::GprRegressor r;
    gpr::FitConfig cfg;
    cfg.seed = 5;
    r.model = gpr::fit(sd.features, sd.targets, cfg);
    r.standardizer = s;
    r.seed = 5;

    const std::string doc = gpr::serialize(r);
    const gpr::GprRegressor back = gpr::deserialize(doc);
    CHECK(gpr::predict_gsr(back, data) == gpr::predict_gsr(r, data));
    CHECK(back.model.params.length_scales == r.model.params.length_scales);

    CHECK_THROWS_AS(gpr::deserialize(doc.substr(0, doc.size() / 2)), ParseError);
}
