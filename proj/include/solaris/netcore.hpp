#pragma once

#include "solaris/numerics.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace solaris::netcore {

enum class Act { Tansig, Logsig, Linear };

std::string act_name(Act a);
Act act_from_name(const std::string& name);

/// logsig(n) = 1 / (1 + e^-n), computed stably on both sides.
double logsig(double n);
/// tansig(n) = 2 / (1 + e^-2n) - 1, saturating for large |n|.
double tansig(double n);

double activate(Act act, double pre);
/// Activation derivative d(act)/d(pre), given the already-computed activation.
double activate_deriv(Act act, double activated);

/// A stack of dense layers: widths[0] inputs, one dense layer per activation,
/// parameters laid out layer by layer as row-major weights then biases.
struct StackSpec {
    std::vector<std::size_t> widths; // widths.size() == acts.size() + 1
    std::vector<Act> acts;
};

std::size_t param_count(const StackSpec& spec);

struct StackTape {
    std::vector<numerics::Vector> activations; // activations[0] is the input
    std::vector<numerics::Vector> preacts;
};

/// Forward pass reading parameters from `params` (length param_count).
/// Fills `tape` when non-null.
numerics::Vector stack_forward(const StackSpec& spec, std::span<const double> params,
                               const numerics::Vector& input, StackTape* tape = nullptr);

/// Reverse pass: given d(loss)/d(output), accumulate d(loss)/d(params) into
/// `grad` (same layout/length as params) and return d(loss)/d(input).
numerics::Vector stack_backward(const StackSpec& spec, std::span<const double> params,
                                const StackTape& tape, const numerics::Vector& dout,
                                std::span<double> grad);

/// Seeded uniform initialization in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer.
void init_uniform(const StackSpec& spec, std::span<double> params, std::mt19937_64& rng);

} // namespace solaris::netcore
