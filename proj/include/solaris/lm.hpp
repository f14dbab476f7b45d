#pragma once

#include "solaris/numerics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace solaris::lm {

struct TrainConfig {
    int max_iterations = 1000;
    double mu_init = 1e-3;
    double mu_factor = 10.0;
    double grad_tol = 1e-7;
    double mu_max = 1e10;
    std::uint64_t seed = 0; // drives initialization only, not the step sequence
};

struct HistoryEntry {
    int iteration;
    double sse;
    double mu;
    bool accepted;
};

struct LmState {
    numerics::Vector params;
    double mu = 1e-3;
    double sse = 0.0;
    int iteration = 0;
    std::vector<HistoryEntry> history;
    bool damping_exhausted = false; // set when mu passed mu_max with no accepted step
};

using ResidualFn = std::function<numerics::Vector(const numerics::Vector&)>;
using JacobianFn = std::function<numerics::Matrix(const numerics::Vector&)>;

/// Evaluate the residual at params0 and package the starting state.
LmState make_state(numerics::Vector params0, const ResidualFn& residual,
                   const TrainConfig& cfg);

/// One damped Gauss-Newton step: solve (J^T J + mu I) delta = J^T e and try
/// params - delta. Rejections escalate mu by mu_factor and retry within the
/// same step; acceptance divides mu by mu_factor. When mu passes mu_max with
/// nothing accepted the returned state has damping_exhausted set and the
/// parameters are unchanged.
LmState lm_step(LmState state, const numerics::Matrix& jac, const numerics::Vector& errors,
                const ResidualFn& residual, const TrainConfig& cfg);

struct FitResult {
    numerics::Vector params; // best (= last accepted) parameters
    double sse = 0.0;
    int iterations = 0;
    std::vector<HistoryEntry> history;
    std::string stop_reason;
};

/// Full LM loop: iterate lm_step until max_iterations, the gradient infinity
/// norm falls below grad_tol, or damping is exhausted.
FitResult lm_optimize(const ResidualFn& residual, const JacobianFn& jacobian,
                      numerics::Vector params0, const TrainConfig& cfg);

} // namespace solaris::lm
