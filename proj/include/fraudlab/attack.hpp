#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fraudlab/dataset.hpp"
#include "fraudlab/linear_model.hpp"
#include "fraudlab/metrics.hpp"

namespace fraudlab {

struct AttackConfig {
    double epsilon = 2.2;  // L-infinity budget in raw feature units
    // Optional per-feature bounds applied to the perturbed vector.
    std::optional<std::vector<double>> clip_min;
    std::optional<std::vector<double>> clip_max;
    // Feature indices whose perturbation is forced to zero.
    std::vector<int> immutable_features;
};

struct AdversarialSample {
    Sample original;                 // x and its true label (always 1 here)
    std::size_t index_in_test = 0;   // position of the original in the test set
    std::vector<double> perturbed_features;  // x' = x + perturbation, exactly
    std::vector<double> perturbation;
    int source_pred_before = 0;
    int source_pred_after = 0;
};

struct AdversarialSet {
    std::vector<AdversarialSample> samples;
    double epsilon = 0.0;
    std::string source_model_id;
    std::string created_from;  // target-selection policy description
};

struct TransferResult {
    std::uint64_t attempted = 0;
    std::uint64_t successful = 0;  // target model lets the fraud through
    std::uint64_t failed = 0;
    double rate = 0.0;
};

// Maps (x, y) to the gradient of the model loss with respect to x.
using GradientFn =
    std::function<std::vector<double>(const std::vector<double>&, int)>;

// The test samples with true label 1 that the model also classifies as 1,
// in dataset order.
std::vector<std::size_t> select_target_indices(const Classifier& model, const Dataset& test);
std::vector<Sample> select_targets(const Classifier& model, const Dataset& test);

struct Perturbation {
    std::vector<double> perturbation;
    std::vector<double> perturbed_features;
};

// eta = epsilon * sign(grad), with sign(0) = 0 and immutable indices pinned
// to zero; the perturbed vector is clipped afterwards when bounds are set and
// the stored perturbation re-derived so x' = x + eta holds exactly.
Perturbation fgsm_perturb(const GradientFn& gradient_fn, const std::vector<double>& x, int y,
                          const AttackConfig& cfg);

// Runs fgsm_perturb with y = the true label over every selected target of the
// source model. Throws NumericError when the model classifies no fraud
// correctly (nothing to attack).
AdversarialSet generate_adversarial_set(const LinearModel& model, const Dataset& test,
                                        const AttackConfig& cfg);

// Scores `model` on a copy of `test` where each targeted sample's features
// are replaced by their perturbed version (labels unchanged).
MetricsReport replace_and_score(const Classifier& model, const Dataset& test,
                                const AdversarialSet& adv);

// Feeds the adversarial samples to a second model. With only_source_successes
// (the default) the denominator is restricted to samples that already evade
// the source model.
TransferResult transfer_attack(const Classifier& target, const AdversarialSet& adv,
                               bool only_source_successes = true);

// JSON-lines serialization: one header record {epsilon, source_model_id,
// policy} followed by one record per sample.
void write_jsonl(const AdversarialSet& adv, std::ostream& out);
void write_jsonl(const AdversarialSet& adv, const std::string& path);
AdversarialSet read_jsonl(std::istream& in);
AdversarialSet read_jsonl_file(const std::string& path);

}  // namespace fraudlab
