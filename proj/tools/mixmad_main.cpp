// mixmad: multilevel anomaly detection for mixed tabular data.
// Subcommands: synth, train, score, eval.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "mixmad/baselines.hpp"
#include "mixmad/csv.hpp"
#include "mixmad/dataset.hpp"
#include "mixmad/ensemble.hpp"
#include "mixmad/metrics.hpp"
#include "mixmad/model_io.hpp"
#include "mixmad/synthetic.hpp"

namespace {

using nlohmann::json;

json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("invalid JSON in config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
    return j;
}

// Flags override the config file: a config key applies only when the flag
// was not given on the command line.
template <typename T>
void config_override(const json& cfg, const char* key, const CLI::Option* opt, T& value) {
    if (opt->count() == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

std::vector<double> parse_p_list(const std::vector<std::string>& texts) {
    std::vector<double> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(mixmad::parse_p(t));
    if (out.empty()) throw std::runtime_error("empty p list");
    return out;
}

std::vector<int> per_level_sizes(std::vector<int> sizes, int levels, const char* what) {
    if (levels <= 0) return {};
    if (sizes.size() == 1) sizes.assign(static_cast<std::size_t>(levels), sizes.front());
    if (sizes.size() != static_cast<std::size_t>(levels))
        throw std::runtime_error(std::string(what) + ": expected " + std::to_string(levels) +
                                 " sizes (or one to repeat), got " + std::to_string(sizes.size()));
    for (int k : sizes)
        if (k < 1) throw std::runtime_error(std::string(what) + ": sizes must be >= 1");
    return sizes;
}

struct SynthArgs {
    std::string out;
    std::string schema_out;
    mixmad::SynthConfig config;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& args) {
    const mixmad::Dataset data = mixmad::generate_synthetic(args.config, args.seed);
    mixmad::save_csv(args.out, data);
    mixmad::save_schema(args.schema_out, data.schema);
    std::cout << "wrote " << data.num_rows() << " rows (" << args.config.num_outliers
              << " labeled anomalies) to " << args.out << "\n";
    std::cout << "wrote schema (" << data.schema.size() << " columns) to " << args.schema_out
              << "\n";
    return 0;
}

struct TrainArgs {
    std::string data_path, schema_path, model_path;
    int depth = 2;
    std::vector<int> ka{50};
    std::vector<int> kd{10};
    std::string p_text = "1";
    mixmad::TrainConfig cfg;
};

int run_train(const TrainArgs& args) {
    const mixmad::Schema schema = mixmad::load_schema(args.schema_path);
    const mixmad::Dataset raw = mixmad::load_csv(args.data_path, schema);
    const mixmad::Schema fitted = mixmad::fit_normalizer(raw);
    const mixmad::Dataset data = mixmad::apply_normalizer(raw, fitted);

    const std::vector<int> kd = per_level_sizes(args.kd, args.depth, "--kd");
    const std::vector<int> ka = per_level_sizes(args.ka, args.depth - 1, "--ka");
    const double p = mixmad::parse_p(args.p_text);

    int clamp_warnings = 0;
    auto observer = [&](const mixmad::FitEvent& ev) {
        clamp_warnings += ev.stats.poisson_clamp_events;
        if (ev.epoch != args.cfg.epochs) return;
        std::cout << "level " << ev.level << ": "
                  << (ev.role == mixmad::RbmRole::Detection ? "detection" : "abstraction")
                  << " rbm K=" << ev.num_hidden << " epochs=" << ev.epoch
                  << " free_energy=" << ev.stats.mean_free_energy
                  << " recon_gap=" << ev.stats.gap() << "\n";
    };
    const mixmad::EnsembleModel model =
        mixmad::EnsembleModel::fit(data, args.depth, ka, kd, args.cfg, p, observer);
    if (clamp_warnings > 0)
        std::cerr << "warning: poisson rate clamped at e^30 in " << clamp_warnings
                  << " sampling events\n";
    mixmad::save_ensemble(args.model_path, model);
    std::cout << "trained " << model.depth() << " detection and " << model.depth() - 1
              << " abstraction RBMs on " << data.num_rows() << " rows; model written to "
              << args.model_path << "\n";
    return 0;
}

struct ScoreArgs {
    std::string model_path, data_path, out_path;
    std::vector<std::string> p_texts{"0.5", "1", "2", "inf"};
    double contamination = 0.1;
    int threads = 1;
};

int run_score(const ScoreArgs& args) {
    const mixmad::EnsembleModel model = mixmad::load_ensemble(args.model_path);
    const mixmad::Dataset raw = mixmad::load_csv(args.data_path, model.schema());
    const mixmad::Dataset data = mixmad::apply_normalizer(raw, model.schema());
    const mixmad::ScoreReport report = model.score(data, args.threads);
    const std::vector<double> p_values = parse_p_list(args.p_texts);
    mixmad::write_scores_csv(args.out_path, report, p_values, args.contamination);
    std::cout << "scored " << report.num_instances() << " rows at depth " << report.depth()
              << "; wrote " << args.out_path << "\n";
    return 0;
}

struct EvalArgs {
    std::string scores_path, data_path, schema_path;
    std::vector<std::string> p_texts;  // empty = every agg column in the file
    std::vector<std::string> baselines;
    double contamination = 0.1;
    int ndcg_t = 20;
    int knn_k = 10;
};

std::vector<double> numeric_column(const mixmad::CsvTable& table, int index,
                                   const std::string& name) {
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            out.push_back(std::stod(table.rows[r][static_cast<std::size_t>(index)]));
        } catch (const std::exception&) {
            throw std::runtime_error("scores file: cannot parse column '" + name + "' at row " +
                                     std::to_string(r + 2));
        }
    }
    return out;
}

void print_metrics_row(const std::string& method, double auc_value, double ndcg_value,
                       double f_value) {
    std::printf("%-14s %8.4f %10.4f %9.4f\n", method.c_str(), auc_value, ndcg_value, f_value);
}

int run_eval(const EvalArgs& args) {
    const mixmad::CsvTable scores = mixmad::read_csv_table(args.scores_path);
    const mixmad::Schema schema = mixmad::load_schema(args.schema_path);
    const mixmad::Dataset data = mixmad::load_csv(args.data_path, schema);
    if (!data.has_labels())
        throw std::runtime_error("eval needs ground truth: data file '" + args.data_path +
                                 "' has no label column");
    if (scores.rows.size() != data.num_rows())
        throw std::runtime_error("scores file has " + std::to_string(scores.rows.size()) +
                                 " rows but data has " + std::to_string(data.num_rows()));

    std::vector<std::string> p_labels;
    if (args.p_texts.empty()) {
        for (const auto& column : scores.header)
            if (column.rfind("agg_p", 0) == 0) p_labels.push_back(column.substr(5));
    } else {
        for (const auto& t : args.p_texts) p_labels.push_back(mixmad::format_p(mixmad::parse_p(t)));
    }
    if (p_labels.empty()) throw std::runtime_error("no aggregate columns to evaluate");

    std::printf("%-14s %8s %10s %9s\n", "method", "AUC", ("NDCG@" + std::to_string(args.ndcg_t)).c_str(),
                "F-score");
    for (const auto& label : p_labels) {
        const std::string column = "agg_p" + label;
        const int index = scores.find(column);
        if (index < 0)
            throw std::runtime_error("scores file has no column '" + column +
                                     "' (re-run score with --p " + label + ")");
        const std::vector<double> agg = numeric_column(scores, index, column);
        const auto flags = mixmad::top_fraction_flags(agg, args.contamination);
        print_metrics_row("mixmad-p" + label, mixmad::auc(agg, data.labels),
                          mixmad::ndcg_at_t(agg, data.labels, args.ndcg_t),
                          mixmad::f_score(flags, data.labels));
    }

    if (!args.baselines.empty()) {
        // baselines run on the evaluated set itself: self-excluded kNN, PCA
        // fit on the same rows, gaussian columns normalized by the schema's
        // bounds when fitted (otherwise fit here)
        mixmad::Schema fitted = schema;
        bool needs_fit = false;
        for (const auto& c : fitted.columns)
            if (c.kind == mixmad::ColumnKind::Gaussian && !c.has_norm_bounds()) needs_fit = true;
        if (needs_fit) fitted = mixmad::fit_normalizer(data);
        const mixmad::Dataset normalized = mixmad::apply_normalizer(data, fitted);
        const Eigen::MatrixXd matrix = mixmad::to_numeric_matrix(normalized);
        for (const auto& name : args.baselines) {
            std::vector<double> scores_vec;
            if (name == "knn") {
                scores_vec = mixmad::knn_score(matrix, matrix, args.knn_k, /*exclude_self=*/true);
            } else if (name == "pca") {
                scores_vec = mixmad::pca_score(matrix, matrix, args.contamination);
            } else {
                throw std::runtime_error("unknown baseline '" + name + "' (expected knn, pca)");
            }
            const auto flags = mixmad::top_fraction_flags(scores_vec, args.contamination);
            print_metrics_row(name, mixmad::auc(scores_vec, data.labels),
                              mixmad::ndcg_at_t(scores_vec, data.labels, args.ndcg_t),
                              mixmad::f_score(flags, data.labels));
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIXMAD: multilevel anomaly detection for mixed tabular data"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic mixed dataset");
    synth_cmd->add_option("--out", synth.out, "output data CSV")->required();
    synth_cmd->add_option("--schema-out", synth.schema_out, "output schema JSON")->required();
    synth_cmd->add_option("--inliers", synth.config.num_inliers, "inlier count");
    synth_cmd->add_option("--outliers", synth.config.num_outliers, "outlier count");
    synth_cmd->add_option("--binary", synth.config.num_binary, "binary columns");
    synth_cmd->add_option("--gaussian", synth.config.num_gaussian, "gaussian columns");
    synth_cmd->add_option("--nominal", synth.config.num_nominal, "nominal columns");
    synth_cmd->add_option("--cardinality", synth.config.nominal_cardinality, "nominal cardinality");
    synth_cmd->add_option("--poisson", synth.config.num_poisson, "poisson columns");
    synth_cmd->add_option("--seed", synth.seed, "RNG seed");

    TrainArgs train;
    std::string train_config_path;
    auto* train_cmd = app.add_subcommand("train", "fit a MIXMAD ensemble");
    auto* t_data = train_cmd->add_option("--data", train.data_path, "training data CSV")->required();
    train_cmd->add_option("--schema", train.schema_path, "schema JSON")->required();
    train_cmd->add_option("--model", train.model_path, "output model file")->required();
    auto* t_depth = train_cmd->add_option("--depth", train.depth, "ensemble depth L");
    auto* t_ka = train_cmd->add_option("--ka", train.ka, "abstraction sizes (one per level below the top)")
                     ->delimiter(',');
    auto* t_kd = train_cmd->add_option("--kd", train.kd, "detector sizes (one per level)")->delimiter(',');
    auto* t_p = train_cmd->add_option("--p", train.p_text, "aggregation exponent stored in the model");
    auto* t_epochs = train_cmd->add_option("--epochs", train.cfg.epochs, "CD-1 epochs");
    auto* t_lr = train_cmd->add_option("--lr", train.cfg.learning_rate, "learning rate");
    auto* t_batch = train_cmd->add_option("--batch", train.cfg.batch_size, "mini-batch size");
    auto* t_seed = train_cmd->add_option("--seed", train.cfg.seed, "RNG seed");
    train_cmd->add_option("--config", train_config_path, "JSON config file (flags override)");

    ScoreArgs score;
    std::string score_config_path;
    auto* score_cmd = app.add_subcommand("score", "score a dataset with a trained model");
    score_cmd->add_option("--model", score.model_path, "model file")->required();
    score_cmd->add_option("--data", score.data_path, "data CSV")->required();
    score_cmd->add_option("--out", score.out_path, "output scores CSV")->required();
    auto* s_p = score_cmd->add_option("--p", score.p_texts, "aggregation sweep (inf allowed)")
                    ->delimiter(',');
    auto* s_cont = score_cmd->add_option("--contamination", score.contamination,
                                         "assumed anomaly fraction for flags");
    auto* s_threads = score_cmd->add_option("--threads", score.threads, "scoring threads");
    score_cmd->add_option("--config", score_config_path, "JSON config file (flags override)");

    EvalArgs eval;
    std::string eval_config_path;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate scores against labels");
    eval_cmd->add_option("--scores", eval.scores_path, "scores CSV from `score`")->required();
    eval_cmd->add_option("--data", eval.data_path, "labeled data CSV")->required();
    eval_cmd->add_option("--schema", eval.schema_path, "schema JSON")->required();
    auto* e_p = eval_cmd->add_option("--p", eval.p_texts, "p values to evaluate")->delimiter(',');
    auto* e_cont = eval_cmd->add_option("--contamination", eval.contamination,
                                        "flag fraction for the F-score");
    auto* e_ndcg = eval_cmd->add_option("--ndcg-t", eval.ndcg_t, "NDCG cut");
    eval_cmd->add_option("--baselines", eval.baselines, "baseline detectors to add (knn, pca)")
        ->delimiter(',');
    eval_cmd->add_option("--knn-k", eval.knn_k, "neighbors for the knn baseline");
    eval_cmd->add_option("--config", eval_config_path, "JSON config file (flags override)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return run_synth(synth);
        if (train_cmd->parsed()) {
            if (!train_config_path.empty()) {
                const json cfg = load_config_file(train_config_path);
                config_override(cfg, "depth", t_depth, train.depth);
                config_override(cfg, "ka", t_ka, train.ka);
                config_override(cfg, "kd", t_kd, train.kd);
                config_override(cfg, "p", t_p, train.p_text);
                config_override(cfg, "epochs", t_epochs, train.cfg.epochs);
                config_override(cfg, "lr", t_lr, train.cfg.learning_rate);
                config_override(cfg, "batch", t_batch, train.cfg.batch_size);
                config_override(cfg, "seed", t_seed, train.cfg.seed);
                (void)t_data;
            }
            return run_train(train);
        }
        if (score_cmd->parsed()) {
            if (!score_config_path.empty()) {
                const json cfg = load_config_file(score_config_path);
                config_override(cfg, "p", s_p, score.p_texts);
                config_override(cfg, "contamination", s_cont, score.contamination);
                config_override(cfg, "threads", s_threads, score.threads);
            }
            return run_score(score);
        }
        if (eval_cmd->parsed()) {
            if (!eval_config_path.empty()) {
                const json cfg = load_config_file(eval_config_path);
                config_override(cfg, "p", e_p, eval.p_texts);
                config_override(cfg, "contamination", e_cont, eval.contamination);
                config_override(cfg, "ndcg-t", e_ndcg, eval.ndcg_t);
            }
            return run_eval(eval);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
