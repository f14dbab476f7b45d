#include "solaris/netcore.hpp"

#include "solaris/errors.hpp"

#include <cmath>

namespace solaris::netcore {

std::string act_name(Act a) {
    switch (a) {
        case Act::Tansig: return "tansig";
        case Act::Logsig: return "logsig";
        case Act::Linear: return "linear";
    }
    return "linear";
}

Act act_from_name(const std::string& name) {
    if (name == "tansig") return Act::Tansig;
    if (name == "logsig") return Act::Logsig;
    if (name == "linear") return Act::Linear;
    throw ParseError("unknown activation '" + name + "'");
}

double logsig(double n) {
    if (n >= 0.0) return 1.0 / (1.0 + std::exp(-n));
    const double e = std::exp(n);
    return e / (1.0 + e);
}

double tansig(double n) {
    return 2.0 * logsig(2.0 * n) - 1.0;
}

double activate(Act act, double pre) {
    switch (act) {
        case Act::Tansig: return tansig(pre);
        case Act::Logsig: return logsig(pre);
        case Act::Linear: return pre;
    }
    return pre;
}

double activate_deriv(Act act, double activated) {
    switch (act) {
        case Act::Tansig: return 1.0 - activated * activated;
        case Act::Logsig: return activated * (1.0 - activated);
        case Act::Linear: return 1.0;
    }
    return 1.0;
}

std::size_t param_count(const StackSpec& spec) {
    if (spec.widths.size() != spec.acts.size() + 1)
        throw ParseError("StackSpec: widths/activations length mismatch");
    std::size_t total = 0;
    for (std::size_t l = 0; l < spec.acts.size(); ++l)
        total += spec.widths[l + 1] * spec.widths[l] + spec.widths[l + 1];
    return total;
}

numerics::Vector stack_forward(const StackSpec& spec, std::span<const double> params,
                               const numerics::Vector& input, StackTape* tape) {
    if (input.size() != spec.widths[0])
        throw ParseError("stack_forward: input length " + std::to_string(input.size()) +
                         ", expected " + std::to_string(spec.widths[0]));
    if (tape) {
        tape->activations.assign(1, input);
        tape->preacts.clear();
    }
    numerics::Vector a = input;
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec.acts.size(); ++l) {
        const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
        numerics::Vector pre(out);
        for (std::size_t i = 0; i < out; ++i) {
            double acc = params[off + in * out + i]; // bias
            const double* w = &params[off + i * in];
            for (std::size_t j = 0; j < in; ++j) acc += w[j] * a[j];
            pre[i] = acc;
        }
        numerics::Vector act(out);
        for (std::size_t i = 0; i < out; ++i) act[i] = activate(spec.acts[l], pre[i]);
        if (tape) {
            tape->preacts.push_back(pre);
            tape->activations.push_back(act);
        }
        a = std::move(act);
        off += in * out + out;
    }
    return a;
}

numerics::Vector stack_backward(const StackSpec& spec, std::span<const double> params,
                                const StackTape& tape, const numerics::Vector& dout,
                                std::span<double> grad) {
    const std::size_t layers = spec.acts.size();
    if (tape.activations.size() != layers + 1)
        throw ParseError("stack_backward: tape does not match spec");

    // layer parameter offsets
    std::vector<std::size_t> offsets(layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offsets[l] = off;
        off += spec.widths[l + 1] * spec.widths[l] + spec.widths[l + 1];
    }

    numerics::Vector delta = dout; // d(loss)/d(activation of current layer)
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
        const numerics::Vector& a_in = tape.activations[l];
        const numerics::Vector& a_out = tape.activations[l + 1];
        // to pre-activation space
        for (std::size_t i = 0; i < out; ++i)
            delta[i] *= activate_deriv(spec.acts[l], a_out[i]);
        // parameter gradients
        for (std::size_t i = 0; i < out; ++i) {
            double* gw = &grad[offsets[l] + i * in];
            for (std::size_t j = 0; j < in; ++j) gw[j] += delta[i] * a_in[j];
            grad[offsets[l] + in * out + i] += delta[i];
        }
        // propagate to the layer input
        numerics::Vector dprev(in, 0.0);
        for (std::size_t i = 0; i < out; ++i) {
            const double* w = &params[offsets[l] + i * in];
            for (std::size_t j = 0; j < in; ++j) dprev[j] += w[j] * delta[i];
        }
        delta = std::move(dprev);
    }
    return delta;
}

void init_uniform(const StackSpec& spec, std::span<double> params, std::mt19937_64& rng) {
    std::size_t off = 0;
    for (std::size_t l = 0; l < spec.acts.size(); ++l) {
        const std::size_t in = spec.widths[l], out = spec.widths[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> uniform(-bound, bound);
        for (std::size_t k = 0; k < in * out + out; ++k) params[off + k] = uniform(rng);
        off += in * out + out;
    }
}

} // namespace solaris::netcore
