#pragma once

#include "solaris/dataio.hpp"
#include "solaris/lm.hpp"
#include "solaris/netcore.hpp"
#include "solaris/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace solaris::solarisnet {

/// Layer plan: each input runs through its own chain of small tansig layers
/// (no feature mixing), the branch outputs are concatenated into a narrow
/// logsig embedding, then two logsig layers and a direct linear output.
struct NetworkSpec {
    std::size_t input_count = 3;
    std::vector<std::size_t> branch_widths = {2, 2};
    std::size_t embedding_width = 2;
    std::vector<std::size_t> fc_widths = {3, 2};
    std::size_t output_count = 1;
    netcore::Act branch_activation = netcore::Act::Tansig;
    netcore::Act hidden_activation = netcore::Act::Logsig;
    netcore::Act output_activation = netcore::Act::Linear;
};

/// Throws if the spec breaks a structural rule (embedding must be narrower
/// than the input count; single output; positive widths).
void validate(const NetworkSpec& spec);

std::size_t parameter_count(const NetworkSpec& spec);

struct TrainMeta {
    std::uint64_t seed = 0;
    int iterations = 0;
    double final_sse = 0.0;
};

struct SolarisNetModel {
    NetworkSpec spec;
    numerics::Vector params; // branch blocks in input order, then trunk; weights before biases
    dataio::Standardizer standardizer;
    TrainMeta train_meta;
};

/// Network output for one standardized feature vector.
double forward(const NetworkSpec& spec, const numerics::Vector& params,
               const numerics::Vector& x);

/// Per-sample errors e_i = forward(x_i) - y_i and the N x P Jacobian
/// J[i][p] = d(e_i)/d(params_p), via reverse-mode accumulation.
std::pair<numerics::Matrix, numerics::Vector> jacobian(const NetworkSpec& spec,
                                                       const numerics::Vector& params,
                                                       const numerics::Matrix& features,
                                                       const numerics::Vector& targets);

/// Seeded parameter initialization, uniform in +-1/sqrt(fan_in) per layer.
numerics::Vector init_params(const NetworkSpec& spec, std::uint64_t seed);

/// LM training on standardized features/centered targets. Deterministic per
/// cfg.seed (the seed drives initialization only).
SolarisNetModel train(const NetworkSpec& spec, const dataio::Standardizer& standardizer,
                      const numerics::Matrix& features, const numerics::Vector& targets,
                      const lm::TrainConfig& cfg, lm::FitResult* fit_info = nullptr);

/// Multi-restart wrapper, off by default in the pipeline: runs `restarts`
/// trainings with seeds derived from cfg.seed and keeps the best SSE on the
/// validation set (or the best final training SSE when none is given).
SolarisNetModel train_restarts(const NetworkSpec& spec,
                               const dataio::Standardizer& standardizer,
                               const numerics::Matrix& features,
                               const numerics::Vector& targets, const lm::TrainConfig& cfg,
                               int restarts, const numerics::Matrix* val_features = nullptr,
                               const numerics::Vector* val_targets = nullptr,
                               lm::FitResult* fit_info = nullptr);

/// Standardize, run the network per record, and add the removed target mean
/// back, yielding raw-unit GSR.
numerics::Vector predict(const SolarisNetModel& model, const dataio::Dataset& d);

std::string serialize(const SolarisNetModel& model);
SolarisNetModel deserialize(const std::string& document);

} // namespace solaris::solarisnet
