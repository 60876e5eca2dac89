// fraudlab: train fraud classifiers, craft FGSM adversarial examples against
// the logistic-regression model, and measure white-box damage plus black-box
// transfer to a random forest.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime/numeric error.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fraudlab/errors.hpp"
#include "fraudlab/experiment.hpp"

namespace {

using fraudlab::ExperimentConfig;
using fraudlab::RunReport;

std::vector<std::string> split_csv_tokens(const std::string& joined) {
    std::vector<std::string> tokens;
    std::string token;
    std::istringstream in(joined);
    while (std::getline(in, token, ',')) tokens.push_back(token);
    return tokens;
}

void apply_synthetic_spec(ExperimentConfig& cfg, const std::string& spec) {
    const auto tokens = split_csv_tokens(spec);
    if (tokens.size() != 4)
        throw CLI::ValidationError("--synthetic expects N,FRAC,D,SEP");
    try {
        cfg.synthetic.n_total = std::stoull(tokens[0]);
        cfg.synthetic.fraud_fraction = std::stod(tokens[1]);
        cfg.synthetic.d = std::stoull(tokens[2]);
        cfg.synthetic.separation = std::stod(tokens[3]);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--synthetic expects numeric N,FRAC,D,SEP");
    }
}

void apply_epsilon_list(ExperimentConfig& cfg, const std::string& joined) {
    std::vector<double> values;
    for (const auto& token : split_csv_tokens(joined)) {
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--epsilon-list expects comma-separated numbers");
        }
    }
    cfg.epsilon_list = std::move(values);
}

void print_metrics_line(const char* name, const fraudlab::MetricsReport& m) {
    std::printf("%-4s accuracy %.2f  precision %.2f  recall %.2f  "
                "(tp %llu fp %llu tn %llu fn %llu)\n",
                name, m.accuracy, m.precision, m.recall,
                static_cast<unsigned long long>(m.matrix.tp),
                static_cast<unsigned long long>(m.matrix.fp),
                static_cast<unsigned long long>(m.matrix.tn),
                static_cast<unsigned long long>(m.matrix.fn));
}

void print_report(const RunReport& report) {
    if (report.clean_lr) {
        std::printf("== clean test metrics ==\n");
        print_metrics_line("LR", *report.clean_lr);
        if (report.clean_rf) print_metrics_line("RF", *report.clean_rf);
    }
    for (const auto& a : report.adversarial) {
        std::printf("== attack (epsilon %.2f) ==\n", a.epsilon);
        std::printf("targets %llu  flipped %llu\n",
                    static_cast<unsigned long long>(a.targets),
                    static_cast<unsigned long long>(a.flipped));
        print_metrics_line("LR", a.metrics);
    }
    if (!report.sweep.empty()) {
        std::printf("== epsilon sweep ==\n");
        std::printf("%8s %8s %10s %9s\n", "epsilon", "recall", "precision", "accuracy");
        for (const auto& row : report.sweep)
            std::printf("%8.2f %8.2f %10.2f %9.2f\n", row.epsilon, row.recall, row.precision,
                        row.accuracy);
    }
    if (report.transfer) {
        const auto& t = *report.transfer;
        std::printf("== transfer LR -> RF (epsilon %.2f) ==\n", t.epsilon);
        std::printf("attempted %llu  successful %llu  failed %llu  rate %.2f\n",
                    static_cast<unsigned long long>(t.result.attempted),
                    static_cast<unsigned long long>(t.result.successful),
                    static_cast<unsigned long long>(t.result.failed), t.result.rate);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraud-detection adversarial-attack experiment runner"};
    app.require_subcommand(1);
    app.set_config("--config")->description(
        "flat key=value file; keys match the long option names");

    ExperimentConfig cfg;
    std::string data_path;
    std::string synthetic_spec;
    std::string epsilon_list_spec;
    std::string immutable_spec;
    double clip_min = 0.0, clip_max = 0.0;
    std::string rf_features = "sqrt";

    app.add_option("--data", data_path, "CSV file with a 0/1 label column");
    app.add_option("--synthetic", synthetic_spec,
                   "synthetic data as N,FRAC,D,SEP (used when --data is absent)");
    app.add_option("--label-column", cfg.label_column, "label column name")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--train-fraction", cfg.split.train_fraction)->capture_default_str();
    app.add_flag("--no-stratify", [&cfg](std::int64_t) { cfg.split.stratified = false; },
                 "split without per-class stratification");
    app.add_option("--smote-k", cfg.smote.k_neighbors)->capture_default_str();
    app.add_option("--smote-ratio", cfg.smote.target_ratio)->capture_default_str();
    app.add_option("--lr-rate", cfg.lr.learning_rate)->capture_default_str();
    app.add_option("--lr-epochs", cfg.lr.epochs)->capture_default_str();
    app.add_option("--lr-l2", cfg.lr.l2_lambda)->capture_default_str();
    app.add_option("--lr-tolerance", cfg.lr.tolerance)->capture_default_str();
    app.add_flag("--standardize", cfg.lr.standardize,
                 "z-score features for LR training (folded back into raw-space weights)");
    app.add_option("--rf-trees", cfg.rf.n_trees)->capture_default_str();
    app.add_option("--rf-depth", cfg.rf.max_depth)->capture_default_str();
    app.add_option("--rf-min-leaf", cfg.rf.min_samples_leaf)->capture_default_str();
    app.add_option("--rf-features", rf_features, "features per split, or \"sqrt\"")
        ->capture_default_str();
    app.add_option("--epsilon-list", epsilon_list_spec, "comma-separated sweep epsilons");
    app.add_option("--immutable", immutable_spec,
                   "comma-separated feature indices or names exempt from perturbation");
    auto* opt_clip_min = app.add_option("--clip-min", clip_min,
                                        "lower bound applied to every perturbed feature");
    auto* opt_clip_max = app.add_option("--clip-max", clip_max,
                                        "upper bound applied to every perturbed feature");

    double epsilon = cfg.attack.epsilon;
    auto add_epsilon = [&epsilon](CLI::App* sub) {
        sub->add_option("--epsilon", epsilon, "perturbation budget")->capture_default_str();
    };

    CLI::App* cmd_baseline = app.add_subcommand("baseline", "train LR and RF, score clean test");
    CLI::App* cmd_attack = app.add_subcommand("attack", "FGSM attack on the LR model");
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "recall curve over the epsilon list");
    CLI::App* cmd_transfer = app.add_subcommand("transfer", "LR adversarials against the RF");
    CLI::App* cmd_full = app.add_subcommand("full", "baseline + attack + sweep + transfer");
    add_epsilon(cmd_attack);
    add_epsilon(cmd_transfer);
    add_epsilon(cmd_full);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (!data_path.empty()) cfg.data_path = data_path;
        if (!synthetic_spec.empty()) apply_synthetic_spec(cfg, synthetic_spec);
        if (!epsilon_list_spec.empty()) apply_epsilon_list(cfg, epsilon_list_spec);
        if (!immutable_spec.empty()) cfg.immutable_tokens = split_csv_tokens(immutable_spec);
        if (*opt_clip_min) cfg.clip_min_all = clip_min;
        if (*opt_clip_max) cfg.clip_max_all = clip_max;
        if (rf_features == "sqrt") {
            cfg.rf.features_per_split = 0;
        } else {
            try {
                cfg.rf.features_per_split = std::stoi(rf_features);
            } catch (const std::exception&) {
                throw CLI::ValidationError("--rf-features expects an integer or \"sqrt\"");
            }
        }
        cfg.attack.epsilon = epsilon;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }

    try {
        fraudlab::ExperimentRunner runner(cfg);
        RunReport report;
        if (cmd_baseline->parsed()) {
            runner.run_baseline(report);
        } else if (cmd_attack->parsed()) {
            runner.run_baseline(report);
            runner.run_attack(report, cfg.attack.epsilon);
        } else if (cmd_sweep->parsed()) {
            runner.run_baseline(report);
            runner.run_epsilon_sweep(report);
        } else if (cmd_transfer->parsed()) {
            runner.run_baseline(report);
            runner.run_attack(report, cfg.attack.epsilon);
            runner.run_transfer(report, cfg.attack.epsilon);
        } else if (cmd_full->parsed()) {
            runner.run_baseline(report);
            runner.run_attack(report, cfg.attack.epsilon);
            runner.run_epsilon_sweep(report);
            runner.run_transfer(report, cfg.attack.epsilon);
        }
        fraudlab::write_report(report, runner.config().out_dir);
        print_report(report);
        std::printf("report written to %s\n", runner.config().out_dir.c_str());
        return 0;
    } catch (const fraudlab::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const fraudlab::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
