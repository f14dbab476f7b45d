#include "solaris/lm.hpp"

#include "solaris/errors.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace solaris::lm {

using numerics::Matrix;
using numerics::Vector;

LmState make_state(Vector params0, const ResidualFn& residual, const TrainConfig& cfg) {
    LmState state;
    state.params = std::move(params0);
    state.mu = cfg.mu_init;
    Vector e = residual(state.params);
    numerics::require_finite(e, "lm: initial residual");
    state.sse = numerics::sum_squares(e);
    return state;
}

namespace {

constexpr double kMuMin = 1e-20;

// Normal-equations matrix J^T J without forming the transpose.
Matrix gram(const Matrix& jac) {
    const std::size_t n = jac.rows(), p = jac.cols();
    Matrix g(p, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a) {
            const double v = jac(i, a);
            if (v == 0.0) continue;
            for (std::size_t b = a; b < p; ++b) g(a, b) += v * jac(i, b);
        }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) g(a, b) = g(b, a);
    return g;
}

Vector gradient(const Matrix& jac, const Vector& e) {
    const std::size_t n = jac.rows(), p = jac.cols();
    Vector g(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a) g[a] += jac(i, a) * e[i];
    return g;
}

} // namespace

LmState lm_step(LmState state, const Matrix& jac, const Vector& errors,
                const ResidualFn& residual, const TrainConfig& cfg) {
    if (jac.rows() != errors.size() || jac.cols() != state.params.size())
        throw ParseError("lm_step: Jacobian is " + std::to_string(jac.rows()) + "x" +
                         std::to_string(jac.cols()) + " for " +
                         std::to_string(errors.size()) + " residuals and " +
                         std::to_string(state.params.size()) + " parameters");

    const Matrix jtj = gram(jac);
    const Vector g = gradient(jac, errors);
    const std::size_t p = state.params.size();

    while (state.mu <= cfg.mu_max) {
        Matrix damped = jtj;
        for (std::size_t a = 0; a < p; ++a) damped(a, a) += state.mu;

        bool solved = true;
        Vector candidate = state.params;
        double candidate_sse = std::numeric_limits<double>::infinity();
        try {
            Vector delta = numerics::solve_cholesky(numerics::cholesky(damped), g);
            for (std::size_t a = 0; a < p; ++a) candidate[a] = state.params[a] - delta[a];
            Vector e = residual(candidate);
            candidate_sse = numerics::all_finite(e)
                                ? numerics::sum_squares(e)
                                : std::numeric_limits<double>::infinity();
        } catch (const FitError&) {
            solved = false; // treat a failed factorization like a rejected step
        }

        if (solved && candidate_sse < state.sse) {
            state.params = std::move(candidate);
            state.sse = candidate_sse;
            state.mu = std::max(state.mu / cfg.mu_factor, kMuMin);
            state.history.push_back({state.iteration, state.sse, state.mu, true});
            state.iteration += 1;
            return state;
        }

        state.history.push_back({state.iteration, state.sse, state.mu, false});
        state.mu *= cfg.mu_factor;
    }

    state.damping_exhausted = true;
    state.iteration += 1;
    return state;
}

FitResult lm_optimize(const ResidualFn& residual, const JacobianFn& jacobian,
                      Vector params0, const TrainConfig& cfg) {
    LmState state = make_state(std::move(params0), residual, cfg);
    std::string stop_reason = "max_iterations";

    for (int it = 0; it < cfg.max_iterations; ++it) {
        Vector e = residual(state.params);
        if (!numerics::all_finite(e))
            throw FitError("lm: non-finite loss at iteration " + std::to_string(state.iteration) +
                           ", mu=" + std::to_string(state.mu));
        Matrix jac = jacobian(state.params);
        numerics::require_finite(jac.data(), "lm: Jacobian");

        if (numerics::norm_inf(gradient(jac, e)) < cfg.grad_tol) {
            stop_reason = "grad_tol";
            break;
        }

        state = lm_step(std::move(state), jac, e, residual, cfg);
        if (state.damping_exhausted) {
            stop_reason = "damping_exhausted";
            break;
        }
    }

    FitResult result;
    result.params = std::move(state.params);
    result.sse = state.sse;
    result.iterations = state.iteration;
    result.history = std::move(state.history);
    result.stop_reason = stop_reason;
    return result;
}

} // namespace solaris::lm
