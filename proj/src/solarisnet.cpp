#include "solaris/solarisnet.hpp"

#include "solaris/docio.hpp"
#include "solaris/errors.hpp"
#include "solaris/seeding.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <span>
#include <sstream>
#include <utility>

namespace solaris::solarisnet {

using numerics::Matrix;
using numerics::Vector;

namespace {

netcore::StackSpec branch_stack(const NetworkSpec& spec) {
    netcore::StackSpec s;
    s.widths.push_back(1);
    for (std::size_t w : spec.branch_widths) s.widths.push_back(w);
    s.acts.assign(spec.branch_widths.size(), spec.branch_activation);
    return s;
}

netcore::StackSpec trunk_stack(const NetworkSpec& spec) {
    netcore::StackSpec s;
    s.widths.push_back(spec.input_count * spec.branch_widths.back());
    s.widths.push_back(spec.embedding_width);
    for (std::size_t w : spec.fc_widths) s.widths.push_back(w);
    s.widths.push_back(spec.output_count);
    s.acts.assign(1 + spec.fc_widths.size(), spec.hidden_activation);
    s.acts.push_back(spec.output_activation);
    return s;
}

struct NetTape {
    std::vector<netcore::StackTape> branches;
    netcore::StackTape trunk;
};

double forward_tape(const NetworkSpec& spec, const Vector& params, const Vector& x,
                    NetTape* tape) {
    const netcore::StackSpec branch = branch_stack(spec);
    const netcore::StackSpec trunk = trunk_stack(spec);
    const std::size_t branch_params = netcore::param_count(branch);

    if (tape) tape->branches.resize(spec.input_count);
    Vector concat;
    concat.reserve(trunk.widths[0]);
    for (std::size_t i = 0; i < spec.input_count; ++i) {
        std::span<const double> slice(params.data() + i * branch_params, branch_params);
        Vector out = netcore::stack_forward(branch, slice, Vector{x[i]},
                                            tape ? &tape->branches[i] : nullptr);
        concat.insert(concat.end(), out.begin(), out.end());
    }
    std::span<const double> trunk_slice(params.data() + spec.input_count * branch_params,
                                        netcore::param_count(trunk));
    Vector out = netcore::stack_forward(trunk, trunk_slice, concat,
                                        tape ? &tape->trunk : nullptr);
    return out[0];
}

// d(output)/d(params) for the sample recorded on the tape.
void backward_into(const NetworkSpec& spec, const Vector& params, const NetTape& tape,
                   std::span<double> grad) {
    const netcore::StackSpec branch = branch_stack(spec);
    const netcore::StackSpec trunk = trunk_stack(spec);
    const std::size_t branch_params = netcore::param_count(branch);
    const std::size_t trunk_off = spec.input_count * branch_params;

    std::span<const double> trunk_slice(params.data() + trunk_off, netcore::param_count(trunk));
    Vector dconcat = netcore::stack_backward(trunk, trunk_slice, tape.trunk, Vector{1.0},
                                             grad.subspan(trunk_off));

    const std::size_t branch_out = spec.branch_widths.back();
    for (std::size_t i = 0; i < spec.input_count; ++i) {
        Vector dbranch(dconcat.begin() + static_cast<std::ptrdiff_t>(i * branch_out),
                       dconcat.begin() + static_cast<std::ptrdiff_t>((i + 1) * branch_out));
        std::span<const double> slice(params.data() + i * branch_params, branch_params);
        netcore::stack_backward(branch, slice, tape.branches[i], dbranch,
                                grad.subspan(i * branch_params, branch_params));
    }
}

std::uint64_t seeded_restart(std::uint64_t seed, unsigned restart) {
    return splitmix64(seed + 1 + restart);
}

} // namespace

void validate(const NetworkSpec& spec) {
    if (spec.input_count < 1 || spec.branch_widths.empty() || spec.fc_widths.empty())
        throw ParseError("NetworkSpec: empty layer plan");
    if (spec.output_count != 1)
        throw ParseError("NetworkSpec: output_count must be 1");
    // mixing layer stays narrower than the inputs it merges
    if (!(spec.embedding_width < spec.input_count))
        throw ParseError("NetworkSpec: embedding width " + std::to_string(spec.embedding_width) +
                         " must be smaller than input count " +
                         std::to_string(spec.input_count));
    for (std::size_t w : spec.branch_widths)
        if (w < 1) throw ParseError("NetworkSpec: zero branch width");
    for (std::size_t w : spec.fc_widths)
        if (w < 1) throw ParseError("NetworkSpec: zero fc width");
}

std::size_t parameter_count(const NetworkSpec& spec) {
    return spec.input_count * netcore::param_count(branch_stack(spec)) +
           netcore::param_count(trunk_stack(spec));
}

double forward(const NetworkSpec& spec, const Vector& params, const Vector& x) {
    if (x.size() != spec.input_count)
        throw ParseError("forward: expected " + std::to_string(spec.input_count) +
                         " features, got " + std::to_string(x.size()));
    if (params.size() != parameter_count(spec))
        throw ParseError("forward: parameter vector length " + std::to_string(params.size()) +
                         ", expected " + std::to_string(parameter_count(spec)));
    return forward_tape(spec, params, x, nullptr);
}

std::pair<Matrix, Vector> jacobian(const NetworkSpec& spec, const Vector& params,
                                   const Matrix& features, const Vector& targets) {
    if (features.rows() != targets.size() || features.rows() < 1)
        throw ParseError("jacobian: feature rows and target length differ");
    if (features.cols() != spec.input_count)
        throw ParseError("jacobian: feature columns do not match input count");
    const std::size_t n = features.rows();
    const std::size_t p = parameter_count(spec);

    Matrix jac(n, p);
    Vector errors(n);
    Vector x(spec.input_count);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < spec.input_count; ++j) x[j] = features(i, j);
        NetTape tape;
        const double out = forward_tape(spec, params, x, &tape);
        if (!std::isfinite(out))
            throw FitError("jacobian: non-finite network output at sample " +
                           std::to_string(i));
        errors[i] = out - targets[i];
        backward_into(spec, params, tape, std::span<double>(&jac(i, 0), p));
    }
    numerics::require_finite(jac.data(), "jacobian");
    return {std::move(jac), std::move(errors)};
}

Vector init_params(const NetworkSpec& spec, std::uint64_t seed) {
    validate(spec);
    Vector params(parameter_count(spec));
    std::mt19937_64 rng(seed);
    const netcore::StackSpec branch = branch_stack(spec);
    const std::size_t branch_params = netcore::param_count(branch);
    for (std::size_t i = 0; i < spec.input_count; ++i)
        netcore::init_uniform(branch, std::span<double>(params.data() + i * branch_params,
                                                        branch_params),
                              rng);
    const netcore::StackSpec trunk = trunk_stack(spec);
    netcore::init_uniform(trunk,
                          std::span<double>(params.data() + spec.input_count * branch_params,
                                            netcore::param_count(trunk)),
                          rng);
    return params;
}

SolarisNetModel train(const NetworkSpec& spec, const dataio::Standardizer& standardizer,
                      const Matrix& features, const Vector& targets,
                      const lm::TrainConfig& cfg, lm::FitResult* fit_info) {
    validate(spec);
    const std::size_t p = parameter_count(spec);
    if (features.rows() < p / 2)
        std::cerr << "warning: " << features.rows() << " training samples for " << p
                  << " parameters; fits may be underdetermined\n";

    auto residual = [&](const Vector& params) {
        Vector e(features.rows());
        Vector x(spec.input_count);
        for (std::size_t i = 0; i < features.rows(); ++i) {
            for (std::size_t j = 0; j < spec.input_count; ++j) x[j] = features(i, j);
            e[i] = forward_tape(spec, params, x, nullptr) - targets[i];
        }
        return e;
    };
    auto jac_fn = [&](const Vector& params) {
        return jacobian(spec, params, features, targets).first;
    };

    lm::FitResult fit = lm::lm_optimize(residual, jac_fn, init_params(spec, cfg.seed), cfg);

    SolarisNetModel model;
    model.spec = spec;
    model.params = fit.params;
    model.standardizer = standardizer;
    model.train_meta = {cfg.seed, fit.iterations, fit.sse};
    if (fit_info) *fit_info = std::move(fit);
    return model;
}

SolarisNetModel train_restarts(const NetworkSpec& spec,
                               const dataio::Standardizer& standardizer,
                               const Matrix& features, const Vector& targets,
                               const lm::TrainConfig& cfg, int restarts,
                               const Matrix* val_features, const Vector* val_targets,
                               lm::FitResult* fit_info) {
    if (restarts < 1)
        throw ParseError("train_restarts: restarts must be at least 1");
    if ((val_features == nullptr) != (val_targets == nullptr))
        throw ParseError("train_restarts: validation features and targets go together");

    SolarisNetModel best;
    lm::FitResult best_fit;
    double best_score = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        lm::TrainConfig restart_cfg = cfg;
        restart_cfg.seed = restarts == 1 ? cfg.seed
                                         : seeded_restart(cfg.seed, static_cast<unsigned>(r));
        lm::FitResult fit;
        SolarisNetModel model =
            train(spec, standardizer, features, targets, restart_cfg, &fit);
        double score = fit.sse;
        if (val_features) {
            Vector x(spec.input_count);
            score = 0.0;
            for (std::size_t i = 0; i < val_features->rows(); ++i) {
                for (std::size_t j = 0; j < spec.input_count; ++j) x[j] = (*val_features)(i, j);
                const double e = forward_tape(spec, model.params, x, nullptr) - (*val_targets)[i];
                score += e * e;
            }
        }
        if (score < best_score) {
            best_score = score;
            best = std::move(model);
            best_fit = std::move(fit);
        }
    }
    if (fit_info) *fit_info = std::move(best_fit);
    return best;
}

Vector predict(const SolarisNetModel& model, const dataio::Dataset& d) {
    const dataio::StandardizedData sd = dataio::apply_standardizer(model.standardizer, d);
    if (sd.features.cols() != model.spec.input_count)
        throw ParseError("predict: dataset has " + std::to_string(sd.features.cols()) +
                         " features, model expects " +
                         std::to_string(model.spec.input_count));
    Vector out(d.size());
    Vector x(model.spec.input_count);
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < model.spec.input_count; ++j) x[j] = sd.features(i, j);
        out[i] = forward_tape(model.spec, model.params, x, nullptr) +
                 model.standardizer.target_mean;
    }
    return out;
}

namespace {

std::string json_size_array(const std::vector<std::size_t>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

} // namespace

std::string serialize(const SolarisNetModel& model) {
    std::ostringstream out;
    out << "{\"schema_version\":1,\"model_type\":\"solarisnet\",\"spec\":{"
        << "\"input_count\":" << model.spec.input_count
        << ",\"branch_widths\":" << json_size_array(model.spec.branch_widths)
        << ",\"embedding_width\":" << model.spec.embedding_width
        << ",\"fc_widths\":" << json_size_array(model.spec.fc_widths)
        << ",\"output_count\":" << model.spec.output_count
        << ",\"branch_activation\":" << docio::json_string(netcore::act_name(model.spec.branch_activation))
        << ",\"hidden_activation\":" << docio::json_string(netcore::act_name(model.spec.hidden_activation))
        << ",\"output_activation\":" << docio::json_string(netcore::act_name(model.spec.output_activation))
        << "},\"params\":" << docio::json_array_g17(model.params)
        << ",\"standardizer\":" << docio::standardizer_json(model.standardizer)
        << ",\"train_meta\":{\"seed\":" << model.train_meta.seed
        << ",\"iterations\":" << model.train_meta.iterations
        << ",\"final_sse\":" << docio::format_g17(model.train_meta.final_sse) << "}}\n";
    return out.str();
}

SolarisNetModel deserialize(const std::string& document) {
    const nlohmann::json doc = docio::parse_document(document, "solarisnet", 1);
    SolarisNetModel model;
    const nlohmann::json& spec = doc.at("spec");
    model.spec.input_count = spec.at("input_count").get<std::size_t>();
    model.spec.branch_widths = spec.at("branch_widths").get<std::vector<std::size_t>>();
    model.spec.embedding_width = spec.at("embedding_width").get<std::size_t>();
    model.spec.fc_widths = spec.at("fc_widths").get<std::vector<std::size_t>>();
    model.spec.output_count = spec.at("output_count").get<std::size_t>();
    model.spec.branch_activation = netcore::act_from_name(spec.at("branch_activation").get<std::string>());
    model.spec.hidden_activation = netcore::act_from_name(spec.at("hidden_activation").get<std::string>());
    model.spec.output_activation = netcore::act_from_name(spec.at("output_activation").get<std::string>());
    validate(model.spec);

    model.params = doc.at("params").get<std::vector<double>>();
    if (model.params.size() != parameter_count(model.spec))
        throw ParseError("model document has " + std::to_string(model.params.size()) +
                         " params, spec needs " + std::to_string(parameter_count(model.spec)));
    numerics::require_finite(model.params, "model params");

    model.standardizer = docio::standardizer_from_json(doc.at("standardizer"));
    const nlohmann::json& meta = doc.at("train_meta");
    model.train_meta.seed = meta.at("seed").get<std::uint64_t>();
    model.train_meta.iterations = meta.at("iterations").get<int>();
    model.train_meta.final_sse = meta.at("final_sse").get<double>();
    return model;
}

} // namespace solaris::solarisnet
