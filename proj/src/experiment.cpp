#include "fraudlab/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fraudlab/errors.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

namespace {

class Stopwatch {
public:
    explicit Stopwatch(std::map<std::string, double>& sink, std::string key)
        : sink_(sink), key_(std::move(key)), start_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        sink_[key_] = std::chrono::duration<double>(elapsed).count();
    }

private:
    std::map<std::string, double>& sink_;
    std::string key_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

ExperimentConfig normalize(ExperimentConfig cfg) {
    if (cfg.epsilon_list.empty()) throw DataError("config: epsilon_list must not be empty");
    for (std::size_t i = 0; i < cfg.epsilon_list.size(); ++i) {
        if (cfg.epsilon_list[i] < 0.0)
            throw DataError("config: epsilon_list entries must be >= 0");
        if (i > 0 && cfg.epsilon_list[i] <= cfg.epsilon_list[i - 1])
            throw DataError("config: epsilon_list must be strictly increasing");
    }
    if (cfg.attack.epsilon < 0.0) throw DataError("config: attack epsilon must be >= 0");
    if (!std::binary_search(cfg.epsilon_list.begin(), cfg.epsilon_list.end(),
                            cfg.attack.epsilon)) {
        cfg.epsilon_list.insert(std::upper_bound(cfg.epsilon_list.begin(),
                                                 cfg.epsilon_list.end(), cfg.attack.epsilon),
                                cfg.attack.epsilon);
    }
    cfg.split.seed = derive_seed(cfg.seed, "split");
    cfg.smote.seed = derive_seed(cfg.seed, "smote");
    cfg.lr.seed = derive_seed(cfg.seed, "lr");
    cfg.rf.seed = derive_seed(cfg.seed, "rf");
    return cfg;
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["data"] = cfg.data_path ? nlohmann::json(*cfg.data_path) : nlohmann::json();
    j["label_column"] = cfg.label_column;
    j["synthetic"] = {{"n_total", cfg.synthetic.n_total},
                      {"fraud_fraction", cfg.synthetic.fraud_fraction},
                      {"d", cfg.synthetic.d},
                      {"separation", cfg.synthetic.separation}};
    j["split"] = {{"train_fraction", cfg.split.train_fraction},
                  {"seed", cfg.split.seed},
                  {"stratified", cfg.split.stratified}};
    j["smote"] = {{"k_neighbors", cfg.smote.k_neighbors},
                  {"target_ratio", cfg.smote.target_ratio},
                  {"seed", cfg.smote.seed}};
    j["lr"] = {{"learning_rate", cfg.lr.learning_rate},
               {"epochs", cfg.lr.epochs},
               {"l2_lambda", cfg.lr.l2_lambda},
               {"tolerance", cfg.lr.tolerance},
               {"seed", cfg.lr.seed},
               {"standardize", cfg.lr.standardize}};
    nlohmann::json fps;
    if (cfg.rf.features_per_split == 0)
        fps = "sqrt";
    else
        fps = cfg.rf.features_per_split;
    j["rf"] = {{"n_trees", cfg.rf.n_trees},
               {"max_depth", cfg.rf.max_depth},
               {"min_samples_leaf", cfg.rf.min_samples_leaf},
               {"features_per_split", fps},
               {"seed", cfg.rf.seed},
               {"bootstrap", cfg.rf.bootstrap}};
    j["attack"] = {{"epsilon", cfg.attack.epsilon},
                   {"immutable_features", cfg.immutable_tokens},
                   {"clip_min", cfg.clip_min_all ? nlohmann::json(*cfg.clip_min_all)
                                                 : nlohmann::json()},
                   {"clip_max", cfg.clip_max_all ? nlohmann::json(*cfg.clip_max_all)
                                                 : nlohmann::json()}};
    j["epsilon_list"] = cfg.epsilon_list;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    return j;
}

}  // namespace

nlohmann::json metrics_to_json(const MetricsReport& r) {
    nlohmann::json j{{"accuracy", r.accuracy},
                     {"precision", r.precision},
                     {"recall", r.recall},
                     {"confusion_matrix",
                      {{"tp", r.matrix.tp}, {"fp", r.matrix.fp}, {"tn", r.matrix.tn},
                       {"fn", r.matrix.fn}}},
                     {"n", r.n}};
    if (r.precision_degenerate) j["precision_degenerate"] = true;
    if (r.recall_degenerate) j["recall_degenerate"] = true;
    return j;
}

nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["config"] = report.config;
    j["clean_lr"] = report.clean_lr ? metrics_to_json(*report.clean_lr) : nlohmann::json();
    j["clean_rf"] = report.clean_rf ? metrics_to_json(*report.clean_rf) : nlohmann::json();
    j["adversarial"] = nlohmann::json::array();
    for (const auto& a : report.adversarial)
        j["adversarial"].push_back({{"epsilon", a.epsilon},
                                    {"metrics", metrics_to_json(a.metrics)},
                                    {"targets", a.targets},
                                    {"flipped", a.flipped}});
    j["sweep"] = nlohmann::json::array();
    for (const auto& row : report.sweep)
        j["sweep"].push_back({{"epsilon", row.epsilon},
                              {"recall", row.recall},
                              {"precision", row.precision},
                              {"accuracy", row.accuracy}});
    if (report.transfer) {
        const auto& t = *report.transfer;
        j["transfer"] = {{"epsilon", t.epsilon},
                         {"attempted", t.result.attempted},
                         {"successful", t.result.successful},
                         {"failed", t.result.failed},
                         {"rate", t.result.rate}};
    } else {
        j["transfer"] = nlohmann::json();
    }
    if (report.exemplar) {
        nlohmann::json features = nlohmann::json::array();
        for (const auto& f : report.exemplar->features)
            features.push_back({{"name", f.name},
                                {"before", f.before},
                                {"after", f.after},
                                {"perturbation", f.perturbation}});
        j["exemplar"] = {{"epsilon", report.exemplar->epsilon},
                         {"index_in_test", report.exemplar->index_in_test},
                         {"features", std::move(features)}};
    } else {
        j["exemplar"] = nlohmann::json();
    }
    return j;
}

ExperimentRunner::ExperimentRunner(const ExperimentConfig& cfg) : cfg_(normalize(cfg)) {}

void ExperimentRunner::prepare(RunReport& report) {
    if (prepared_) return;
    report.config = config_to_json(cfg_);

    Dataset full;
    {
        Stopwatch sw(report.timings_sec, "data");
        if (cfg_.data_path) {
            full = load_csv(*cfg_.data_path, cfg_.label_column);
        } else {
            full = generate_synthetic(cfg_.synthetic.n_total, cfg_.synthetic.fraud_fraction,
                                      cfg_.synthetic.d, cfg_.synthetic.separation,
                                      derive_seed(cfg_.seed, "synthetic"));
        }
    }
    {
        Stopwatch sw(report.timings_sec, "split");
        auto [train, test] = stratified_split(full, cfg_.split);
        train_ = std::move(train);
        test_ = std::move(test);
    }
    {
        Stopwatch sw(report.timings_sec, "smote");
        train_ = smote_oversample(train_, cfg_.smote);
    }
    {
        Stopwatch sw(report.timings_sec, "train_lr");
        lr_ = train(train_, cfg_.lr);
    }
    {
        Stopwatch sw(report.timings_sec, "train_rf");
        rf_ = train_forest(train_, cfg_.rf);
    }

    // Resolve immutable-feature tokens (indices or names) and scalar clips.
    attack_ = cfg_.attack;
    for (const auto& token : cfg_.immutable_tokens) {
        int idx = -1;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
        if (ec == std::errc() && ptr == token.data() + token.size()) {
            attack_.immutable_features.push_back(idx);
            continue;
        }
        const auto it = std::find(full.feature_names.begin(), full.feature_names.end(), token);
        if (it == full.feature_names.end())
            throw DataError("unknown immutable feature \"" + token + "\"");
        attack_.immutable_features.push_back(
            static_cast<int>(it - full.feature_names.begin()));
    }
    if (cfg_.clip_min_all)
        attack_.clip_min = std::vector<double>(full.dim(), *cfg_.clip_min_all);
    if (cfg_.clip_max_all)
        attack_.clip_max = std::vector<double>(full.dim(), *cfg_.clip_max_all);

    prepared_ = true;
}

const Dataset& ExperimentRunner::train_set() {
    RunReport scratch;
    prepare(scratch);
    return train_;
}
const Dataset& ExperimentRunner::test_set() {
    RunReport scratch;
    prepare(scratch);
    return test_;
}
const LinearModel& ExperimentRunner::linear() {
    RunReport scratch;
    prepare(scratch);
    return lr_;
}
const RandomForestModel& ExperimentRunner::forest() {
    RunReport scratch;
    prepare(scratch);
    return rf_;
}

void ExperimentRunner::check_epsilon(double epsilon) const {
    if (!std::binary_search(cfg_.epsilon_list.begin(), cfg_.epsilon_list.end(), epsilon))
        throw DataError("epsilon " + std::to_string(epsilon) +
                        " is not in config.epsilon_list");
}

AdversarialSet ExperimentRunner::make_adversarial_set(double epsilon) {
    AttackConfig cfg = attack_;
    cfg.epsilon = epsilon;
    return generate_adversarial_set(lr_, test_, cfg);
}

void ExperimentRunner::run_baseline(RunReport& report) {
    prepare(report);
    Stopwatch sw(report.timings_sec, "baseline_scoring");
    report.clean_lr = evaluate(as_classifier(lr_), test_);
    report.clean_rf = evaluate(as_classifier(rf_), test_);
    report.lr_model = to_json(lr_);
    report.rf_model = to_json(rf_);
}

void ExperimentRunner::run_attack(RunReport& report, double epsilon) {
    prepare(report);
    check_epsilon(epsilon);
    Stopwatch sw(report.timings_sec, "attack");

    AdversarialSet set = make_adversarial_set(epsilon);

    AttackOutcome outcome;
    outcome.epsilon = epsilon;
    outcome.metrics = replace_and_score(as_classifier(lr_), test_, set);
    outcome.targets = set.samples.size();
    for (const auto& a : set.samples)
        if (a.source_pred_after == 0) ++outcome.flipped;
    report.adversarial.push_back(outcome);

    // Exemplar: first flipped target, or the first target when none flipped.
    const AdversarialSample* pick = &set.samples.front();
    for (const auto& a : set.samples) {
        if (a.source_pred_after == 0) {
            pick = &a;
            break;
        }
    }
    ExemplarRecord ex;
    ex.epsilon = epsilon;
    ex.index_in_test = pick->index_in_test;
    for (std::size_t j = 0; j < test_.feature_names.size(); ++j)
        ex.features.push_back({test_.feature_names[j], pick->original.features[j],
                               pick->perturbed_features[j], pick->perturbation[j]});
    report.exemplar = std::move(ex);
    report.adversarial_set = std::move(set);
}

void ExperimentRunner::run_epsilon_sweep(RunReport& report) {
    prepare(report);
    Stopwatch sw(report.timings_sec, "sweep");
    for (double epsilon : cfg_.epsilon_list) {
        const AdversarialSet set = make_adversarial_set(epsilon);
        const MetricsReport m = replace_and_score(as_classifier(lr_), test_, set);
        report.sweep.push_back({epsilon, m.recall, m.precision, m.accuracy});
    }
}

void ExperimentRunner::run_transfer(RunReport& report, double epsilon) {
    prepare(report);
    check_epsilon(epsilon);
    Stopwatch sw(report.timings_sec, "transfer");
    const AdversarialSet set = make_adversarial_set(epsilon);
    TransferOutcome t;
    t.epsilon = epsilon;
    t.result = transfer_attack(as_classifier(rf_), set, /*only_source_successes=*/true);
    report.transfer = t;
}

RunReport ExperimentRunner::run_full() {
    RunReport report;
    run_baseline(report);
    run_attack(report, cfg_.attack.epsilon);
    run_epsilon_sweep(report);
    run_transfer(report, cfg_.attack.epsilon);
    return report;
}

namespace {

// Shortest decimal form that round-trips; matches the JSON encoding.
std::string format_double(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void write_report(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory " + out_dir + ": " + ec.message());

    auto open = [](const fs::path& p) {
        std::ofstream out(p);
        if (!out) throw DataError("cannot open for writing: " + p.string());
        return out;
    };

    {
        auto out = open(fs::path(out_dir) / "report.json");
        out << report_to_json(report).dump(2) << '\n';
    }
    if (!report.sweep.empty()) {
        auto out = open(fs::path(out_dir) / "sweep.csv");
        out << "epsilon,recall,precision,accuracy\n";
        for (const auto& row : report.sweep)
            out << format_double(row.epsilon) << ',' << format_double(row.recall) << ','
                << format_double(row.precision) << ',' << format_double(row.accuracy) << '\n';
    }
    if (report.adversarial_set) {
        auto out = open(fs::path(out_dir) / "adversarial_set.jsonl");
        write_jsonl(*report.adversarial_set, out);
    }
    if (!report.lr_model.is_null() || !report.rf_model.is_null()) {
        fs::create_directories(fs::path(out_dir) / "models", ec);
        if (ec) throw DataError("cannot create models directory: " + ec.message());
        if (!report.lr_model.is_null()) {
            auto out = open(fs::path(out_dir) / "models" / "lr.json");
            out << report.lr_model.dump(2) << '\n';
        }
        if (!report.rf_model.is_null()) {
            auto out = open(fs::path(out_dir) / "models" / "rf.json");
            out << report.rf_model.dump(2) << '\n';
        }
    }
    {
        auto out = open(fs::path(out_dir) / "timings.json");
        out << nlohmann::json(report.timings_sec).dump(2) << '\n';
    }
}

}  // namespace fraudlab
