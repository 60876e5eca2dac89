#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraudlab/attack.hpp"
#include "fraudlab/dataset.hpp"
#include "fraudlab/forest_model.hpp"
#include "fraudlab/linear_model.hpp"
#include "fraudlab/metrics.hpp"

namespace fraudlab {

struct SyntheticSpec {
    std::size_t n_total = 20000;
    double fraud_fraction = 0.01;
    std::size_t d = 10;
    double separation = 4.0;
};

// Everything one run needs. The single master seed fans out to per-component
// seeds through normalize(), so runs are reproducible end to end.
struct ExperimentConfig {
    std::optional<std::string> data_path;  // CSV; synthetic generation otherwise
    std::string label_column = "Class";
    SyntheticSpec synthetic;
    SplitSpec split;
    SmoteConfig smote;
    TrainConfig lr;
    ForestConfig rf;
    AttackConfig attack;
    // Immutable-feature tokens: decimal indices or feature names, resolved
    // against the loaded data by the runner.
    std::vector<std::string> immutable_tokens;
    std::optional<double> clip_min_all;  // scalar bounds broadcast per feature
    std::optional<double> clip_max_all;
    std::vector<double> epsilon_list = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4,
                                        1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0};
    std::uint64_t seed = 42;
    std::string out_dir = "out";
};

// Validates the config, derives component seeds from the master seed, and
// inserts attack.epsilon into epsilon_list when missing.
ExperimentConfig normalize(ExperimentConfig cfg);

struct SweepRow {
    double epsilon = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double accuracy = 0.0;
};

struct AttackOutcome {
    double epsilon = 0.0;
    MetricsReport metrics;  // source model on the replaced test set
    std::uint64_t targets = 0;
    std::uint64_t flipped = 0;  // targets the source model now calls legitimate
};

struct TransferOutcome {
    double epsilon = 0.0;
    TransferResult result;
};

struct ExemplarFeature {
    std::string name;
    double before = 0.0;
    double after = 0.0;
    double perturbation = 0.0;
};

// Per-feature record of one successfully flipped target (or the first target
// when none flipped).
struct ExemplarRecord {
    double epsilon = 0.0;
    std::size_t index_in_test = 0;
    std::vector<ExemplarFeature> features;
};

struct RunReport {
    nlohmann::json config;  // resolved-config echo
    std::optional<MetricsReport> clean_lr;
    std::optional<MetricsReport> clean_rf;
    std::vector<AttackOutcome> adversarial;
    std::vector<SweepRow> sweep;
    std::optional<TransferOutcome> transfer;
    std::optional<ExemplarRecord> exemplar;
    // Artifacts for write_report; not part of report.json.
    nlohmann::json lr_model;
    nlohmann::json rf_model;
    std::optional<AdversarialSet> adversarial_set;
    std::map<std::string, double> timings_sec;  // written to a separate file
};

nlohmann::json metrics_to_json(const MetricsReport& r);
nlohmann::json report_to_json(const RunReport& report);

// Owns the prepared pipeline (data, split, SMOTE, both trained models) and
// fills RunReport sections. Preparation happens once, on first use.
class ExperimentRunner {
public:
    explicit ExperimentRunner(const ExperimentConfig& cfg);

    const ExperimentConfig& config() const { return cfg_; }

    // Data prep + both clean-test metric sections.
    void run_baseline(RunReport& report);
    // Adversarial metrics at one epsilon, plus the exemplar record.
    void run_attack(RunReport& report, double epsilon);
    // One curve row per configured epsilon, same model and target set.
    void run_epsilon_sweep(RunReport& report);
    // LR-crafted adversarials against the forest.
    void run_transfer(RunReport& report, double epsilon);
    // baseline + attack + sweep + transfer at attack.epsilon.
    RunReport run_full();

    // Prepared-state accessors (prepare on demand).
    const Dataset& train_set();
    const Dataset& test_set();
    const LinearModel& linear();
    const RandomForestModel& forest();

private:
    void prepare(RunReport& report);
    AdversarialSet make_adversarial_set(double epsilon);
    void check_epsilon(double epsilon) const;

    ExperimentConfig cfg_;
    bool prepared_ = false;
    Dataset train_;
    Dataset test_;
    LinearModel lr_;
    RandomForestModel rf_;
    AttackConfig attack_;  // cfg_.attack with tokens/clips resolved
};

// Writes report.json plus, when the sections are present, sweep.csv,
// adversarial_set.jsonl and models/. Timings go to timings.json. All files
// except timings.json are byte-deterministic given the config.
void write_report(const RunReport& report, const std::string& out_dir);

}  // namespace fraudlab
