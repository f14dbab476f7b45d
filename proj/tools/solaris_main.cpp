// solaris: daily global solar radiation forecasting toolkit.
//
// Subcommands: synth, train, predict, evaluate, sensitivity, compare.
// Logs go to stderr; every data artifact is a file. Exit codes: 0 success,
// 1 usage or invalid input, 2 numerical/fit failure, 3 I/O failure.

#include "solaris/baselines.hpp"
#include "solaris/dataio.hpp"
#include "solaris/docio.hpp"
#include "solaris/errors.hpp"
#include "solaris/gpr.hpp"
#include "solaris/metrics.hpp"
#include "solaris/seeding.hpp"
#include "solaris/solarisnet.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace solaris;

struct CommonTrainFlags {
    std::string data_path;
    double split_fraction = 0.8;
    std::string split_mode = "chronological";
    std::uint64_t seed = 0;
    std::size_t denoise_window = 0; // 0 = off
};

struct LmFlags {
    int restarts = 1;
    int max_iterations = 1000;
    double mu_init = 1e-3;
    double mu_factor = 10.0;
    double grad_tol = 1e-7;
    double mu_max = 1e10;
};

struct GprFlags {
    std::string kernel = "ard";
    int starts = 5;
    int max_iterations = 100;
    std::size_t hyperfit_cap = 320;
};

dataio::SplitSpec make_split_spec(const CommonTrainFlags& flags) {
    dataio::SplitSpec spec;
    spec.train_fraction = flags.split_fraction;
    if (flags.split_mode == "chronological") {
        spec.mode = dataio::SplitMode::Chronological;
    } else if (flags.split_mode == "random") {
        spec.mode = dataio::SplitMode::SeededRandom;
        spec.seed = derive_seed(flags.seed, "split");
    } else {
        throw CLI::ValidationError("--split-mode must be chronological or random");
    }
    return spec;
}

lm::TrainConfig make_lm_config(const LmFlags& flags, std::uint64_t stage_seed) {
    lm::TrainConfig cfg;
    cfg.max_iterations = flags.max_iterations;
    cfg.mu_init = flags.mu_init;
    cfg.mu_factor = flags.mu_factor;
    cfg.grad_tol = flags.grad_tol;
    cfg.mu_max = flags.mu_max;
    cfg.seed = stage_seed;
    return cfg;
}

gpr::FitConfig make_gpr_config(const GprFlags& flags, std::uint64_t stage_seed) {
    gpr::FitConfig cfg;
    cfg.mode = gpr::mode_from_name(flags.kernel);
    cfg.seed = stage_seed;
    cfg.starts = flags.starts;
    cfg.max_iterations = flags.max_iterations;
    cfg.max_hyperfit_points = flags.hyperfit_cap;
    return cfg;
}

std::string lm_log_csv(const lm::FitResult& fit) {
    std::string out = "iteration,sse,mu,accepted\n";
    for (const lm::HistoryEntry& h : fit.history)
        out += std::to_string(h.iteration) + "," + docio::format_g17(h.sse) + "," +
               docio::format_g17(h.mu) + "," + (h.accepted ? "1" : "0") + "\n";
    return out;
}

std::string gpr_log_csv(const std::vector<gpr::FitTraceEntry>& trace) {
    std::string out = "start,iteration,lml,step\n";
    for (const gpr::FitTraceEntry& t : trace)
        out += std::to_string(t.start) + "," + std::to_string(t.iteration) + "," +
               docio::format_g17(t.lml) + "," + docio::format_g17(t.step) + "\n";
    return out;
}

dataio::Dataset load_training_data(const CommonTrainFlags& flags) {
    dataio::Dataset d = dataio::load_csv_file(flags.data_path, "train-data");
    if (!d.has_gsr())
        throw ParseError("dataset '" + flags.data_path + "' has no gsr column");
    if (flags.denoise_window > 0) d = dataio::denoise_gsr(d, flags.denoise_window);
    return d;
}

struct TrainedModel {
    std::string document;
    std::string log_csv;
};

TrainedModel train_one_model(const std::string& model_type, const dataio::Dataset& train,
                             std::uint64_t master_seed, const LmFlags& lm_flags,
                             const GprFlags& gpr_flags, std::optional<double> latitude_deg) {
    TrainedModel out;
    if (model_type == "angstrom") {
        if (!latitude_deg)
            throw CLI::ValidationError("--latitude is required for the angstrom model");
        const baselines::AngstromModel m =
            baselines::fit_angstrom(train, *latitude_deg * M_PI / 180.0);
        out.document = baselines::serialize(m);
        const numerics::Vector pred = baselines::predict_angstrom(m, train);
        numerics::Vector actual;
        for (const dataio::MeteoRecord& r : train.records) actual.push_back(*r.gsr);
        out.log_csv = "iteration,sse\n0," +
                      docio::format_g17(metrics::rmse(pred, actual) * metrics::rmse(pred, actual) *
                                        static_cast<double>(pred.size())) +
                      "\n";
        return out;
    }

    const dataio::Standardizer standardizer = dataio::fit_standardizer(train);
    const dataio::StandardizedData sd = dataio::apply_standardizer(standardizer, train);

    if (model_type == "solarisnet") {
        solarisnet::NetworkSpec spec;
        spec.input_count = sd.features.cols();
        lm::FitResult fit;
        const lm::TrainConfig cfg =
            make_lm_config(lm_flags, derive_seed(master_seed, "solarisnet"));
        const solarisnet::SolarisNetModel m =
            lm_flags.restarts > 1
                ? solarisnet::train_restarts(spec, standardizer, sd.features, sd.targets, cfg,
                                             lm_flags.restarts, nullptr, nullptr, &fit)
                : solarisnet::train(spec, standardizer, sd.features, sd.targets, cfg, &fit);
        out.document = solarisnet::serialize(m);
        out.log_csv = lm_log_csv(fit);
    } else if (model_type == "ann") {
        baselines::AnnConfig cfg;
        cfg.train = make_lm_config(lm_flags, derive_seed(master_seed, "ann"));
        lm::FitResult fit;
        const baselines::AnnModel m =
            baselines::fit_ann_baseline(standardizer, sd.features, sd.targets, cfg, &fit);
        out.document = baselines::serialize(m);
        out.log_csv = lm_log_csv(fit);
    } else if (model_type == "gpr") {
        std::vector<gpr::FitTraceEntry> trace;
        gpr::GprRegressor r;
        r.seed = derive_seed(master_seed, "gpr");
        r.model = gpr::fit(sd.features, sd.targets, make_gpr_config(gpr_flags, r.seed), &trace);
        r.standardizer = standardizer;
        out.document = gpr::serialize(r);
        out.log_csv = gpr_log_csv(trace);
    } else {
        throw CLI::ValidationError("unknown model type '" + model_type + "'");
    }
    return out;
}

numerics::Vector predict_with_document(const std::string& document,
                                       const dataio::Dataset& data) {
    const std::string type = docio::peek_model_type(document);
    if (type == "solarisnet") return solarisnet::predict(solarisnet::deserialize(document), data);
    if (type == "gpr") return gpr::predict_gsr(gpr::deserialize(document), data);
    if (type == "ann")
        return baselines::predict_ann_baseline(baselines::deserialize_ann(document), data);
    if (type == "angstrom")
        return baselines::predict_angstrom(baselines::deserialize_angstrom(document), data);
    throw ParseError("model document has unsupported type '" + type + "'");
}

std::string predictions_csv(const dataio::Dataset& data, const numerics::Vector& pred) {
    std::string out = "date,gsr_pred\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        out += data.records[i].date.to_string() + "," + docio::format_g17(pred[i]) + "\n";
    return out;
}

std::string plot_csv(const numerics::Vector& observed, const numerics::Vector& predicted) {
    std::string out = "index,observed,predicted\n";
    for (std::size_t i = 0; i < observed.size(); ++i)
        out += std::to_string(i) + "," + docio::format_g17(observed[i]) + "," +
               docio::format_g17(predicted[i]) + "\n";
    return out;
}

std::string synth_sidecar_json(const dataio::SynthMeta& m, std::size_t days) {
    std::ostringstream out;
    out << "{\"profile\":" << docio::json_string(m.profile) << ",\"seed\":" << m.seed
        << ",\"days\":" << days << ",\"coefficients\":{\"c0\":" << docio::format_g17(m.c0)
        << ",\"c1\":" << docio::format_g17(m.c1) << ",\"c2\":" << docio::format_g17(m.c2)
        << ",\"c3\":" << docio::format_g17(m.c3) << "}"
        << ",\"noise_sd\":" << docio::format_g17(m.noise_sd)
        << ",\"gsr_range\":[" << docio::format_g17(m.gsr_min) << ","
        << docio::format_g17(m.gsr_max) << "]"
        << ",\"latitude_degrees\":" << docio::format_g17(m.latitude_degrees)
        << ",\"std_effects\":{\"sunshine_h\":" << docio::format_g17(m.std_effect_sunshine)
        << ",\"tmax_c\":" << docio::format_g17(m.std_effect_tmax)
        << ",\"tmin_c\":" << docio::format_g17(m.std_effect_tmin) << "}"
        << ",\"clipped_rows\":[";
    for (std::size_t i = 0; i < m.clipped_rows.size(); ++i) {
        if (i) out << ",";
        out << m.clipped_rows[i];
    }
    out << "]}\n";
    return out.str();
}

std::string ranking_json(const std::vector<gpr::RankedFeature>& ranking, std::uint64_t seed) {
    std::ostringstream out;
    out << "{\"kernel_mode\":\"ard\",\"seed\":" << seed << ",\"ranking\":[";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (i) out << ",";
        out << "{\"rank\":" << (i + 1) << ",\"feature\":" << docio::json_string(ranking[i].name)
            << ",\"feature_index\":" << ranking[i].index
            << ",\"length_scale\":" << docio::format_g17(ranking[i].length_scale)
            << ",\"log_length_scale\":" << docio::format_g17(ranking[i].log_length_scale)
            << "}";
    }
    out << "]}\n";
    return out.str();
}

int run(int argc, char** argv) {
    CLI::App app{"solaris: daily global solar radiation forecasting toolkit"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
    std::string synth_profile = "ds1";
    std::size_t synth_days = 1461;
    std::uint64_t synth_seed = 0;
    double synth_noise = 0.5;
    std::string synth_out;
    synth->add_option("--profile", synth_profile, "Dataset profile (ds1 or ds2)")
        ->capture_default_str();
    synth->add_option("--days", synth_days, "Number of consecutive days")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Generator seed")->required();
    synth->add_option("--noise", synth_noise, "Gsr noise stddev, MJ m^-2 day^-1")
        ->capture_default_str();
    synth->add_option("--out", synth_out, "Output CSV path")->required();

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train a model and write its document");
    std::string train_model = "solarisnet";
    CommonTrainFlags train_flags;
    LmFlags lm_flags;
    GprFlags gpr_flags;
    std::string train_out;
    std::string train_log;
    std::optional<double> train_latitude;
    train->add_option("--model", train_model, "solarisnet, gpr, ann, or angstrom")
        ->capture_default_str();
    train->add_option("--data", train_flags.data_path, "Training CSV")->required();
    train->add_option("--out", train_out, "Model document path")->required();
    train->add_option("--log", train_log, "Training log CSV (default <out>.log.csv)");
    train->add_option("--split", train_flags.split_fraction, "Training fraction")
        ->capture_default_str();
    train->add_option("--split-mode", train_flags.split_mode, "chronological or random")
        ->capture_default_str();
    train->add_option("--seed", train_flags.seed, "Master seed for all stages")
        ->capture_default_str();
    train->add_option("--denoise-window", train_flags.denoise_window,
                      "Odd moving-average window for gsr, 0 disables")
        ->capture_default_str();
    train->add_option("--latitude", train_latitude, "Site latitude in degrees (angstrom)");
    train->add_option("--lm-max-iterations", lm_flags.max_iterations, "LM iteration cap")
        ->capture_default_str();
    train->add_option("--restarts", lm_flags.restarts,
                      "LM restarts for solarisnet, best training SSE kept")
        ->capture_default_str();
    train->add_option("--lm-mu-init", lm_flags.mu_init, "Initial LM damping")
        ->capture_default_str();
    train->add_option("--lm-mu-factor", lm_flags.mu_factor, "LM damping factor")
        ->capture_default_str();
    train->add_option("--lm-grad-tol", lm_flags.grad_tol, "LM gradient tolerance")
        ->capture_default_str();
    train->add_option("--lm-mu-max", lm_flags.mu_max, "LM damping ceiling")
        ->capture_default_str();
    train->add_option("--kernel", gpr_flags.kernel, "GPR kernel mode (ard or isotropic)")
        ->capture_default_str();
    train->add_option("--gpr-starts", gpr_flags.starts, "GPR multi-start count")
        ->capture_default_str();
    train->add_option("--gpr-max-iterations", gpr_flags.max_iterations,
                      "GPR ascent iteration cap")
        ->capture_default_str();
    train->add_option("--gpr-hyperfit-cap", gpr_flags.hyperfit_cap,
                      "Subsample cap for the GPR hyperparameter search")
        ->capture_default_str();

    // ---- predict ----
    auto* predict = app.add_subcommand("predict", "Write predictions for a dataset");
    std::string predict_model_file, predict_data, predict_out;
    predict->add_option("--model-file", predict_model_file, "Model document")->required();
    predict->add_option("--data", predict_data, "Input CSV")->required();
    predict->add_option("--out", predict_out, "Predictions CSV path")->required();

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on labelled data");
    std::string eval_model_file, eval_data, eval_report, eval_plot;
    evaluate->add_option("--model-file", eval_model_file, "Model document")->required();
    evaluate->add_option("--data", eval_data, "Labelled CSV")->required();
    evaluate->add_option("--report", eval_report, "Metrics report JSON path")->required();
    evaluate->add_option("--plot", eval_plot, "Observed-vs-predicted CSV path")->required();

    // ---- sensitivity ----
    auto* sensitivity =
        app.add_subcommand("sensitivity", "ARD length-scale ranking of the features");
    std::string sens_data, sens_out, sens_plot;
    std::uint64_t sens_seed = 0;
    GprFlags sens_gpr_flags;
    sensitivity->add_option("--data", sens_data, "Labelled CSV")->required();
    sensitivity->add_option("--seed", sens_seed, "Master seed")->capture_default_str();
    sensitivity->add_option("--out", sens_out, "Ranking JSON path")->required();
    sensitivity->add_option("--plot", sens_plot, "Length-scale plot CSV path")->required();
    sensitivity->add_option("--gpr-starts", sens_gpr_flags.starts, "GPR multi-start count")
        ->capture_default_str();
    sensitivity
        ->add_option("--gpr-max-iterations", sens_gpr_flags.max_iterations,
                     "GPR ascent iteration cap")
        ->capture_default_str();
    sensitivity
        ->add_option("--gpr-hyperfit-cap", sens_gpr_flags.hyperfit_cap,
                     "Subsample cap for the GPR hyperparameter search")
        ->capture_default_str();

    // ---- compare ----
    auto* compare = app.add_subcommand("compare", "Train several models on one split and rank them");
    CommonTrainFlags compare_flags;
    std::vector<std::string> compare_models = {"solarisnet", "gpr", "ann", "angstrom"};
    std::string compare_out;
    std::optional<double> compare_latitude;
    LmFlags compare_lm_flags;
    GprFlags compare_gpr_flags;
    compare->add_option("--data", compare_flags.data_path, "Labelled CSV")->required();
    compare->add_option("--models", compare_models, "Models to include")
        ->delimiter(',')
        ->capture_default_str();
    compare->add_option("--out", compare_out, "Comparison CSV path")->required();
    compare->add_option("--split", compare_flags.split_fraction, "Training fraction")
        ->capture_default_str();
    compare->add_option("--split-mode", compare_flags.split_mode, "chronological or random")
        ->capture_default_str();
    compare->add_option("--seed", compare_flags.seed, "Master seed for all stages")
        ->capture_default_str();
    compare->add_option("--denoise-window", compare_flags.denoise_window,
                        "Odd moving-average window for gsr, 0 disables")
        ->capture_default_str();
    compare->add_option("--latitude", compare_latitude, "Site latitude in degrees (angstrom)");
    compare->add_option("--gpr-hyperfit-cap", compare_gpr_flags.hyperfit_cap,
                        "Subsample cap for the GPR hyperparameter search")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the usage error
        return code == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
        dataio::SynthOptions options;
        options.noise_sd = synth_noise;
        const dataio::Dataset d =
            dataio::synth_generate(synth_profile, synth_days, synth_seed, options);
        dataio::write_csv_file(d, synth_out);
        docio::write_file(synth_out + ".meta.json", synth_sidecar_json(*d.synth_meta, synth_days));
        std::cerr << "wrote " << d.size() << " days to " << synth_out << "\n";
        return 0;
    }

    if (train->parsed()) {
        const dataio::Dataset data = load_training_data(train_flags);
        const auto [train_split, test_split] = dataio::split(data, make_split_spec(train_flags));
        std::cerr << "training " << train_model << " on " << train_split.size() << "/"
                  << test_split.size() << " split\n";
        const TrainedModel result = train_one_model(train_model, train_split, train_flags.seed,
                                                    lm_flags, gpr_flags, train_latitude);
        docio::write_file(train_out, result.document);
        docio::write_file(train_log.empty() ? train_out + ".log.csv" : train_log,
                          result.log_csv);
        return 0;
    }

    if (predict->parsed()) {
        const std::string document = docio::read_file(predict_model_file);
        const dataio::Dataset data = dataio::load_csv_file(predict_data, "predict-data");
        const numerics::Vector pred = predict_with_document(document, data);
        docio::write_file(predict_out, predictions_csv(data, pred));
        return 0;
    }

    if (evaluate->parsed()) {
        const std::string document = docio::read_file(eval_model_file);
        const dataio::Dataset data = dataio::load_csv_file(eval_data, "evaluate-data");
        if (!data.has_gsr())
            throw ParseError("dataset '" + eval_data + "' has no gsr column to evaluate against");
        const numerics::Vector pred = predict_with_document(document, data);
        numerics::Vector actual;
        for (const dataio::MeteoRecord& r : data.records) actual.push_back(*r.gsr);
        const metrics::MetricsReport report =
            metrics::evaluate(pred, actual, docio::peek_model_type(document));
        docio::write_file(eval_report, metrics::report_json(report));
        docio::write_file(eval_plot, plot_csv(actual, pred));
        std::cerr << report.model_label << ": rmse " << report.rmse << ", mae " << report.mae
                  << ", mbe " << report.mbe << ", rho " << report.pearson_rho << "\n";
        return 0;
    }

    if (sensitivity->parsed()) {
        const dataio::Dataset data = dataio::load_csv_file(sens_data, "sensitivity-data");
        if (!data.has_gsr())
            throw ParseError("dataset '" + sens_data + "' has no gsr column");
        const dataio::Standardizer standardizer = dataio::fit_standardizer(data);
        const dataio::StandardizedData sd = dataio::apply_standardizer(standardizer, data);
        const std::uint64_t stage_seed = derive_seed(sens_seed, "sensitivity");
        const auto ranking = gpr::sensitivity_rank(
            sd.features, sd.targets, data.feature_names(),
            make_gpr_config(sens_gpr_flags, stage_seed));
        docio::write_file(sens_out, ranking_json(ranking, sens_seed));

        // plot series in original feature order
        std::vector<gpr::RankedFeature> by_index = ranking;
        std::sort(by_index.begin(), by_index.end(),
                  [](const gpr::RankedFeature& a, const gpr::RankedFeature& b) {
                      return a.index < b.index;
                  });
        std::string plot = "feature_index,feature_name,log_length_scale\n";
        for (const gpr::RankedFeature& f : by_index)
            plot += std::to_string(f.index) + "," + f.name + "," +
                    docio::format_g17(f.log_length_scale) + "\n";
        docio::write_file(sens_plot, plot);
        std::cerr << "most sensitive feature: " << ranking.front().name << "\n";
        return 0;
    }

    if (compare->parsed()) {
        const dataio::Dataset data = load_training_data(compare_flags);
        const auto [train_split, test_split] = dataio::split(data, make_split_spec(compare_flags));
        numerics::Vector actual;
        for (const dataio::MeteoRecord& r : test_split.records) actual.push_back(*r.gsr);

        std::vector<metrics::MetricsReport> reports;
        bool any_failed = false;
        for (const std::string& model : compare_models) {
            try {
                const TrainedModel trained =
                    train_one_model(model, train_split, compare_flags.seed, compare_lm_flags,
                                    compare_gpr_flags, compare_latitude);
                const numerics::Vector pred = predict_with_document(trained.document, test_split);
                reports.push_back(metrics::evaluate(pred, actual, model));
            } catch (const std::exception& e) {
                any_failed = true;
                std::cerr << model << " failed: " << e.what() << "\n";
            }
        }
        if (reports.empty())
            throw FitError("compare: every requested model failed");
        docio::write_file(compare_out, metrics::comparison_csv(metrics::compare(reports)));
        if (any_failed) std::cerr << "comparison written without the failed models\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1; // post-parse validation (unknown model, missing --latitude)
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
