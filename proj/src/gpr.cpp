#include "solaris/gpr.hpp"

#include "solaris/docio.hpp"
#include "solaris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

namespace solaris::gpr {

using numerics::Matrix;
using numerics::Vector;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double variance_of(const Vector& y) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double acc = 0.0;
    for (double v : y) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(y.size());
}

std::size_t scale_count(KernelMode mode, std::size_t dim) {
    return mode == KernelMode::Ard ? dim : 1;
}

// Per-dimension squared-difference matrices, computed once per design matrix.
std::vector<Matrix> squared_distances(const Matrix& x) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<Matrix> sq(d, Matrix(n, n));
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double diff = x(i, k) - x(j, k);
                sq[k](i, j) = diff * diff;
            }
    return sq;
}

// Log-space hyperparameter order: [log l_1..l_k, log sf2, log sn2].
KernelParams from_log(const Vector& theta) {
    KernelParams p;
    p.length_scales.assign(theta.size() - 2, 0.0);
    for (std::size_t i = 0; i + 2 < theta.size(); ++i) p.length_scales[i] = std::exp(theta[i]);
    p.signal_variance = std::exp(theta[theta.size() - 2]);
    p.noise_variance = std::exp(theta[theta.size() - 1]);
    return p;
}

Matrix gram_from_sq(const std::vector<Matrix>& sq, std::size_t n, std::size_t dim,
                    const KernelParams& p) {
    const std::size_t k = p.length_scales.size();
    Vector inv_two_l2(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const double l = p.length_scales[k == 1 ? 0 : d];
        inv_two_l2[d] = 1.0 / (2.0 * l * l);
    }
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double expo = 0.0;
            for (std::size_t d = 0; d < dim; ++d) expo += sq[d](i, j) * inv_two_l2[d];
            const double v = p.signal_variance * std::exp(-expo);
            c(i, j) = v;
            c(j, i) = v;
        }
    return c;
}

struct LmlWorkspace {
    const Matrix& x;
    const Vector& y;
    std::vector<Matrix> sq;

    LmlWorkspace(const Matrix& x_in, const Vector& y_in)
        : x(x_in), y(y_in), sq(squared_distances(x_in)) {}

    struct Eval {
        double lml = 0.0;
        Matrix c; // noise-free gram
        numerics::CholeskyFactor chol;
        Vector alpha;
    };

    Eval evaluate(const KernelParams& p) const {
        Eval ev;
        ev.c = gram_from_sq(sq, x.rows(), x.cols(), p);
        Matrix noisy = ev.c;
        for (std::size_t i = 0; i < noisy.rows(); ++i) noisy(i, i) += p.noise_variance;
        ev.chol = numerics::cholesky_auto(noisy);
        ev.alpha = numerics::solve_cholesky(ev.chol, y);
        const double n = static_cast<double>(y.size());
        ev.lml = -0.5 * numerics::dot(y, ev.alpha) - 0.5 * numerics::log_det(ev.chol) -
                 0.5 * n * kLog2Pi;
        return ev;
    }

    // LML gradient in log space at p, reusing a prior evaluation.
    Vector gradient(const KernelParams& p, const Eval& ev) const {
        const std::size_t n = x.rows();
        const std::size_t k = p.length_scales.size();

        // M = alpha alpha^T - C~^-1
        Matrix m(n, n);
        Vector e(n, 0.0);
        for (std::size_t col = 0; col < n; ++col) {
            e[col] = 1.0;
            Vector inv_col = numerics::solve_cholesky(ev.chol, e);
            e[col] = 0.0;
            for (std::size_t row = 0; row < n; ++row) m(row, col) = -inv_col[row];
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) += ev.alpha[i] * ev.alpha[j];

        Vector grad(k + 2, 0.0);
        // d C~/d log l_d = C o sq_d / l_d^2 (summed over tied dimensions)
        for (std::size_t d = 0; d < x.cols(); ++d) {
            const std::size_t slot = (k == 1) ? 0 : d;
            const double inv_l2 = 1.0 / (p.length_scales[slot] * p.length_scales[slot]);
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    acc += m(i, j) * ev.c(i, j) * sq[d](i, j) * inv_l2;
            grad[slot] += 0.5 * acc;
        }
        // d C~/d log sf2 = C
        double acc_sf = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) acc_sf += m(i, j) * ev.c(i, j);
        grad[k] = 0.5 * acc_sf;
        // d C~/d log sn2 = sn2 I
        double acc_sn = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc_sn += m(i, i);
        grad[k + 1] = 0.5 * p.noise_variance * acc_sn;
        return grad;
    }
};

void clamp_theta(Vector& theta, double bound) {
    for (double& t : theta) t = std::clamp(t, -bound, bound);
}

} // namespace

std::string mode_name(KernelMode mode) {
    return mode == KernelMode::Ard ? "ard" : "isotropic";
}

KernelMode mode_from_name(const std::string& name) {
    if (name == "ard") return KernelMode::Ard;
    if (name == "isotropic") return KernelMode::Isotropic;
    throw ParseError("unknown kernel mode '" + name + "'");
}

void validate(const KernelParams& p, std::size_t dim) {
    if (!(p.signal_variance > 0.0) || !std::isfinite(p.signal_variance))
        throw ParseError("kernel: signal variance must be positive and finite");
    if (!(p.noise_variance > 0.0) || !std::isfinite(p.noise_variance))
        throw ParseError("kernel: noise variance must be positive and finite");
    if (p.length_scales.size() != 1 && p.length_scales.size() != dim)
        throw ParseError("kernel: " + std::to_string(p.length_scales.size()) +
                         " length scales for " + std::to_string(dim) + " features");
    for (double l : p.length_scales)
        if (!(l > 0.0) || !std::isfinite(l))
            throw ParseError("kernel: length scales must be positive and finite");
}

double kernel(const Vector& x, const Vector& xt, const KernelParams& p) {
    if (x.size() != xt.size())
        throw ParseError("kernel: input dimensions differ");
    validate(p, x.size());
    const std::size_t k = p.length_scales.size();
    double expo = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double l = p.length_scales[k == 1 ? 0 : d];
        const double diff = x[d] - xt[d];
        expo += diff * diff / (2.0 * l * l);
    }
    return p.signal_variance * std::exp(-expo);
}

Matrix gram(const Matrix& x, const KernelParams& p) {
    validate(p, x.cols());
    return gram_from_sq(squared_distances(x), x.rows(), x.cols(), p);
}

double log_marginal_likelihood(const Matrix& x, const Vector& y, const KernelParams& p) {
    if (x.rows() != y.size() || y.empty())
        throw ParseError("log_marginal_likelihood: rows and targets differ");
    validate(p, x.cols());
    const LmlWorkspace ws(x, y);
    return ws.evaluate(p).lml;
}

Vector lml_gradient(const Matrix& x, const Vector& y, const KernelParams& p) {
    if (x.rows() != y.size() || y.empty())
        throw ParseError("lml_gradient: rows and targets differ");
    validate(p, x.cols());
    const LmlWorkspace ws(x, y);
    const LmlWorkspace::Eval ev = ws.evaluate(p);
    return ws.gradient(p, ev);
}

GprModel condition(const Matrix& x, const Vector& y, const KernelParams& p, KernelMode mode) {
    if (x.rows() != y.size() || y.empty())
        throw ParseError("condition: rows and targets differ");
    validate(p, x.cols());
    const LmlWorkspace ws(x, y);
    LmlWorkspace::Eval ev = ws.evaluate(p);

    GprModel m;
    m.params = p;
    m.mode = mode;
    m.x_train = x;
    m.y_train = y;
    m.chol = std::move(ev.chol);
    m.alpha = std::move(ev.alpha);
    m.lml = ev.lml;
    return m;
}

GprModel fit(const Matrix& x, const Vector& y, const FitConfig& cfg,
             std::vector<FitTraceEntry>* trace) {
    if (x.rows() != y.size() || x.rows() < 2)
        throw ParseError("fit: need at least 2 training rows");
    const std::size_t dim = x.cols();
    const std::size_t k = scale_count(cfg.mode, dim);

    // Hyperparameter search set: seeded subsample when the data is large.
    Matrix xs = x;
    Vector ys = y;
    if (x.rows() > cfg.max_hyperfit_points) {
        std::vector<std::size_t> idx(x.rows());
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(cfg.max_hyperfit_points);
        std::sort(idx.begin(), idx.end());
        xs = Matrix(idx.size(), dim);
        ys.assign(idx.size(), 0.0);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) xs(i, j) = x(idx[i], j);
            ys[i] = y[idx[i]];
        }
    }

    const LmlWorkspace ws(xs, ys);
    const double y_var = std::max(variance_of(ys), 1e-8);

    // Start 0: unit length scales, signal at the target variance, noise at a
    // tenth of it. Start 1: a deliberately smooth start so a no-signal
    // explanation is always reachable. Remaining starts are seeded draws.
    std::vector<Vector> starts;
    {
        Vector theta(k + 2, 0.0);
        theta[k] = std::log(y_var);
        theta[k + 1] = std::log(0.1 * y_var);
        starts.push_back(theta);
    }
    if (cfg.starts > 1) {
        Vector theta(k + 2, 4.0);
        theta[k] = std::log(0.5 * y_var);
        theta[k + 1] = std::log(y_var);
        starts.push_back(theta);
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u_scale(-1.0, 2.0);
    std::uniform_real_distribution<double> u_sig(-1.0, 1.0);
    std::uniform_real_distribution<double> u_noise(-3.0, 0.0);
    while (starts.size() < static_cast<std::size_t>(std::max(cfg.starts, 1))) {
        Vector theta(k + 2, 0.0);
        for (std::size_t i = 0; i < k; ++i) theta[i] = u_scale(rng);
        theta[k] = std::log(y_var) + u_sig(rng);
        theta[k + 1] = std::log(y_var) + u_noise(rng);
        starts.push_back(theta);
    }

    struct StartResult {
        Vector theta;
        double lml;
        bool ok;
    };
    std::vector<StartResult> results;

    for (std::size_t s = 0; s < starts.size(); ++s) {
        Vector theta = starts[s];
        clamp_theta(theta, cfg.log_bound);
        StartResult res{theta, -std::numeric_limits<double>::infinity(), false};
        try {
            LmlWorkspace::Eval ev = ws.evaluate(from_log(theta));
            Vector grad = ws.gradient(from_log(theta), ev);
            double lml = ev.lml;
            double step = 1.0;
            int stalled = 0;
            if (trace) trace->push_back({static_cast<int>(s), 0, lml, 0.0});

            for (int it = 1; it <= cfg.max_iterations; ++it) {
                if (numerics::norm_inf(grad) < cfg.grad_tol) break;
                const double gnorm = numerics::norm_inf(grad);
                double trial = std::min(step, 1.0 / gnorm); // cap the first move per coordinate
                bool improved = false;
                Vector theta_c;
                LmlWorkspace::Eval ev_c;
                while (trial > 1e-12) {
                    theta_c = theta;
                    for (std::size_t i = 0; i < theta.size(); ++i) theta_c[i] += trial * grad[i];
                    clamp_theta(theta_c, cfg.log_bound);
                    try {
                        ev_c = ws.evaluate(from_log(theta_c));
                        if (ev_c.lml > lml) {
                            improved = true;
                            break;
                        }
                    } catch (const FitError&) {
                        // factorization failed at this trial point; shrink
                    }
                    trial *= 0.5;
                }
                if (!improved) break;
                const double gain = ev_c.lml - lml;
                double move = 0.0;
                for (std::size_t i = 0; i < theta.size(); ++i)
                    move = std::max(move, std::abs(theta_c[i] - theta[i]));
                theta = theta_c;
                lml = ev_c.lml;
                step = trial * 2.0;
                grad = ws.gradient(from_log(theta), ev_c);
                if (trace) trace->push_back({static_cast<int>(s), it, lml, trial});
                // two consecutive negligible iterations end the ascent
                stalled = (gain < 1e-6 * (1.0 + std::abs(lml)) || move < 1e-3) ? stalled + 1 : 0;
                if (stalled >= 2) break;
            }
            res.theta = theta;
            res.lml = lml;
            res.ok = true;
        } catch (const FitError&) {
            res.ok = false;
        }
        results.push_back(std::move(res));
    }

    // Best LML wins; within a 0.5-nat tie the smoothest explanation (largest
    // minimum length scale) wins, so unidentifiable scales rank as irrelevant.
    const StartResult* best = nullptr;
    for (const StartResult& r : results)
        if (r.ok && (!best || r.lml > best->lml)) best = &r;
    if (!best)
        throw FitError("gpr fit: every start failed to factorize the Gram matrix");
    const StartResult* chosen = best;
    for (const StartResult& r : results) {
        if (!r.ok || r.lml < best->lml - 0.5) continue;
        const double min_l = *std::min_element(r.theta.begin(), r.theta.end() - 2);
        const double chosen_min_l = *std::min_element(chosen->theta.begin(), chosen->theta.end() - 2);
        if (min_l > chosen_min_l) chosen = &r;
    }

    // A fitted signal must beat the noise-only explanation by more than one
    // nat per hyperparameter (the marginal likelihood's overfitting budget),
    // else length scales are unidentifiable and the no-signal model is
    // reported: scales at the smooth bound, signal variance at the floor.
    Vector null_theta(k + 2, cfg.log_bound);
    null_theta[k] = -cfg.log_bound;
    null_theta[k + 1] = std::log(y_var);
    try {
        const double null_lml = ws.evaluate(from_log(null_theta)).lml;
        if (chosen->lml - null_lml <= static_cast<double>(k) + 2.0)
            return condition(x, y, from_log(null_theta), cfg.mode);
    } catch (const FitError&) {
        // keep the fitted start if the null candidate cannot factorize
    }

    return condition(x, y, from_log(chosen->theta), cfg.mode);
}

Prediction predict(const GprModel& m, const Matrix& x_star, bool add_noise) {
    if (x_star.cols() != m.x_train.cols())
        throw ParseError("predict: feature dimension mismatch");
    const std::size_t n = m.x_train.rows();
    Prediction out;
    out.mean.resize(x_star.rows());
    out.variance.resize(x_star.rows());

    Vector xrow(x_star.cols()), trow(x_star.cols()), kstar(n);
    for (std::size_t i = 0; i < x_star.rows(); ++i) {
        for (std::size_t d = 0; d < x_star.cols(); ++d) xrow[d] = x_star(i, d);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t d = 0; d < x_star.cols(); ++d) trow[d] = m.x_train(j, d);
            kstar[j] = kernel(xrow, trow, m.params);
        }
        out.mean[i] = numerics::dot(kstar, m.alpha);
        const Vector v = numerics::solve_lower(m.chol, kstar);
        double var = m.params.signal_variance - numerics::sum_squares(v);
        if (var < -1e-10)
            throw FitError("predict: latent variance " + std::to_string(var) +
                           " below the clamping tolerance");
        var = std::max(var, 0.0);
        if (add_noise) var += m.params.noise_variance;
        out.variance[i] = var;
    }
    return out;
}

std::vector<RankedFeature> rank_from_scales(const std::vector<double>& length_scales,
                                            const std::vector<std::string>& feature_names) {
    if (feature_names.size() != length_scales.size())
        throw ParseError("rank_from_scales: name count does not match scales");
    std::vector<RankedFeature> ranking;
    for (std::size_t d = 0; d < length_scales.size(); ++d)
        ranking.push_back({d, feature_names[d], length_scales[d], std::log(length_scales[d])});
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedFeature& a, const RankedFeature& b) {
                         if (a.length_scale != b.length_scale)
                             return a.length_scale < b.length_scale;
                         return a.index < b.index;
                     });
    return ranking;
}

std::vector<RankedFeature> sensitivity_rank(const Matrix& x, const Vector& y,
                                            const std::vector<std::string>& feature_names,
                                            const FitConfig& cfg) {
    if (feature_names.size() != x.cols())
        throw ParseError("sensitivity_rank: name count does not match features");
    if (x.cols() < 2)
        throw ParseError("sensitivity_rank: need at least 2 features");
    FitConfig ard_cfg = cfg;
    ard_cfg.mode = KernelMode::Ard;
    const GprModel m = fit(x, y, ard_cfg);
    return rank_from_scales(m.params.length_scales, feature_names);
}

Vector predict_gsr(const GprRegressor& r, const dataio::Dataset& d) {
    const dataio::StandardizedData sd = dataio::apply_standardizer(r.standardizer, d);
    const Prediction p = predict(r.model, sd.features);
    Vector out = p.mean;
    for (double& v : out) v += r.standardizer.target_mean;
    return out;
}

std::string serialize(const GprRegressor& r) {
    std::ostringstream out;
    out << "{\"schema_version\":1,\"model_type\":\"gpr\""
        << ",\"kernel_mode\":" << docio::json_string(mode_name(r.model.mode))
        << ",\"hyperparameters\":{"
        << "\"signal_variance\":" << docio::format_g17(r.model.params.signal_variance)
        << ",\"length_scales\":" << docio::json_array_g17(r.model.params.length_scales)
        << ",\"noise_variance\":" << docio::format_g17(r.model.params.noise_variance)
        << "},\"standardizer\":" << docio::standardizer_json(r.standardizer)
        << ",\"seed\":" << r.seed << ",\"train\":{\"rows\":" << r.model.x_train.rows()
        << ",\"cols\":" << r.model.x_train.cols()
        << ",\"x\":" << docio::json_array_g17(r.model.x_train.data())
        << ",\"y\":" << docio::json_array_g17(r.model.y_train) << "}}\n";
    return out.str();
}

GprRegressor deserialize(const std::string& document) {
    const nlohmann::json doc = docio::parse_document(document, "gpr", 1);
    GprRegressor r;
    r.model.mode = mode_from_name(doc.at("kernel_mode").get<std::string>());
    const nlohmann::json& hp = doc.at("hyperparameters");
    KernelParams p;
    p.signal_variance = hp.at("signal_variance").get<double>();
    p.length_scales = hp.at("length_scales").get<std::vector<double>>();
    p.noise_variance = hp.at("noise_variance").get<double>();
    r.standardizer = docio::standardizer_from_json(doc.at("standardizer"));
    r.seed = doc.at("seed").get<std::uint64_t>();

    const nlohmann::json& train = doc.at("train");
    const std::size_t rows = train.at("rows").get<std::size_t>();
    const std::size_t cols = train.at("cols").get<std::size_t>();
    Matrix x(rows, cols, train.at("x").get<std::vector<double>>());
    Vector y = train.at("y").get<std::vector<double>>();
    if (y.size() != rows)
        throw ParseError("gpr document: target length does not match rows");
    r.model = condition(x, y, p, r.model.mode);
    return r;
}

} // namespace solaris::gpr
