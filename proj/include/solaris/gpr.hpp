#pragma once

#include "solaris/dataio.hpp"
#include "solaris/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace solaris::gpr {

enum class KernelMode { Isotropic, Ard };

std::string mode_name(KernelMode mode);
KernelMode mode_from_name(const std::string& name);

/// Squared-exponential kernel hyperparameters. One length scale ties all
/// dimensions (isotropic); one per feature is ARD.
struct KernelParams {
    double signal_variance = 1.0; // sigma_f^2
    std::vector<double> length_scales = {1.0};
    double noise_variance = 0.1; // sigma_n^2
};

void validate(const KernelParams& p, std::size_t dim);

/// k(x, x~) = sigma_f^2 exp(-sum_d (x_d - x~_d)^2 / (2 l_d^2)).
double kernel(const numerics::Vector& x, const numerics::Vector& xt, const KernelParams& p);

/// Noise-free Gram matrix C(X, X).
numerics::Matrix gram(const numerics::Matrix& x, const KernelParams& p);

/// log p(y|X) = -1/2 y^T C~^-1 y - 1/2 log|C~| - n/2 log(2 pi), with
/// C~ = C(X,X) + sigma_n^2 I, evaluated through a Cholesky factorization.
double log_marginal_likelihood(const numerics::Matrix& x, const numerics::Vector& y,
                               const KernelParams& p);

/// Gradient of the log marginal likelihood with respect to the
/// log-hyperparameters, ordered [log l_1 .. log l_k, log sigma_f^2,
/// log sigma_n^2], via d/dtheta = 1/2 tr((alpha alpha^T - C~^-1) dC~/dtheta).
numerics::Vector lml_gradient(const numerics::Matrix& x, const numerics::Vector& y,
                              const KernelParams& p);

struct FitConfig {
    KernelMode mode = KernelMode::Ard;
    std::uint64_t seed = 0;
    int starts = 5;
    int max_iterations = 100;
    double grad_tol = 1e-4;
    double log_bound = 10.0; // log-hyperparameters stay in [-bound, bound]
    // Hyperparameter search runs on a seeded subsample when the training set
    // is larger than this; the returned model still conditions on everything.
    std::size_t max_hyperfit_points = 320;
};

struct FitTraceEntry {
    int start;
    int iteration;
    double lml;
    double step;
};

struct GprModel {
    KernelParams params;
    KernelMode mode = KernelMode::Ard;
    numerics::Matrix x_train; // standardized features
    numerics::Vector y_train; // centered targets
    numerics::CholeskyFactor chol;
    numerics::Vector alpha; // C~^-1 y
    double lml = 0.0;
};

/// Cache the factorization and alpha for fixed hyperparameters.
GprModel condition(const numerics::Matrix& x, const numerics::Vector& y,
                   const KernelParams& p, KernelMode mode);

/// Maximize the log marginal likelihood over log-hyperparameters with
/// seeded multi-start projected gradient ascent and backtracking line search.
GprModel fit(const numerics::Matrix& x, const numerics::Vector& y, const FitConfig& cfg,
             std::vector<FitTraceEntry>* trace = nullptr);

struct Prediction {
    numerics::Vector mean;
    numerics::Vector variance; // latent; add_noise adds sigma_n^2 per point
};

Prediction predict(const GprModel& m, const numerics::Matrix& x_star, bool add_noise = false);

struct RankedFeature {
    std::size_t index; // original feature index
    std::string name;
    double length_scale;
    double log_length_scale;
};

/// Ascending sort on length scale (small scale first, i.e. most influential
/// first); ties break on feature index.
std::vector<RankedFeature> rank_from_scales(const std::vector<double>& length_scales,
                                            const std::vector<std::string>& feature_names);

/// ARD fit followed by rank_from_scales on the fitted length scales.
std::vector<RankedFeature> sensitivity_rank(const numerics::Matrix& x, const numerics::Vector& y,
                                            const std::vector<std::string>& feature_names,
                                            const FitConfig& cfg);

/// A fitted GPR plus the feature/target scaling it was trained behind.
struct GprRegressor {
    GprModel model;
    dataio::Standardizer standardizer;
    std::uint64_t seed = 0;
};

numerics::Vector predict_gsr(const GprRegressor& r, const dataio::Dataset& d);

std::string serialize(const GprRegressor& r);
GprRegressor deserialize(const std::string& document);

} // namespace solaris::gpr
