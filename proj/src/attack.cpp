#include "fraudlab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fraudlab/errors.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

std::vector<std::size_t> select_target_indices(const Classifier& model, const Dataset& test) {
    if (test.samples.empty()) throw DataError("select_targets: test set is empty");
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < test.samples.size(); ++i) {
        const Sample& s = test.samples[i];
        if (s.label == 1 && model(s.features) == 1) targets.push_back(i);
    }
    return targets;
}

std::vector<Sample> select_targets(const Classifier& model, const Dataset& test) {
    std::vector<Sample> out;
    for (std::size_t i : select_target_indices(model, test)) out.push_back(test.samples[i]);
    return out;
}

Perturbation fgsm_perturb(const GradientFn& gradient_fn, const std::vector<double>& x, int y,
                          const AttackConfig& cfg) {
    if (cfg.epsilon < 0.0) throw DataError("fgsm_perturb: epsilon must be >= 0");
    const std::vector<double> grad = gradient_fn(x, y);
    if (grad.size() != x.size())
        throw NumericError("fgsm_perturb: gradient length " + std::to_string(grad.size()) +
                           " does not match input length " + std::to_string(x.size()));
    for (double g : grad)
        if (!std::isfinite(g)) throw NumericError("fgsm_perturb: gradient is non-finite");

    Perturbation out;
    out.perturbation.resize(x.size());
    out.perturbed_features.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double sign = grad[j] > 0.0 ? 1.0 : (grad[j] < 0.0 ? -1.0 : 0.0);
        out.perturbation[j] = cfg.epsilon * sign;
    }
    for (int idx : cfg.immutable_features) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= x.size())
            throw DataError("fgsm_perturb: immutable feature index " + std::to_string(idx) +
                            " out of range");
        out.perturbation[static_cast<std::size_t>(idx)] = 0.0;
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double unclipped = x[j] + out.perturbation[j];
        double v = unclipped;
        if (cfg.clip_min) {
            if (cfg.clip_min->size() != x.size())
                throw DataError("fgsm_perturb: clip_min length mismatch");
            v = std::max(v, (*cfg.clip_min)[j]);
        }
        if (cfg.clip_max) {
            if (cfg.clip_max->size() != x.size())
                throw DataError("fgsm_perturb: clip_max length mismatch");
            if (cfg.clip_min && (*cfg.clip_min)[j] > (*cfg.clip_max)[j])
                throw DataError("fgsm_perturb: clip_min exceeds clip_max at feature " +
                                std::to_string(j));
            v = std::min(v, (*cfg.clip_max)[j]);
        }
        out.perturbed_features[j] = v;
        // Unclipped components keep |eta| in {0, epsilon} exactly; where a
        // bound binds, re-derive eta so x' = x + eta still holds.
        if (v != unclipped) out.perturbation[j] = v - x[j];
    }
    return out;
}

namespace {

// Short content hash so attack artifacts can name the model they came from.
std::string model_id(const LinearModel& m) {
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    feed(m.weights.data(), m.weights.size() * sizeof(double));
    feed(&m.bias, sizeof(double));
    feed(&m.threshold, sizeof(double));
    std::ostringstream out;
    out << "lr-" << std::hex << (h >> 32);
    return out.str();
}

}  // namespace

AdversarialSet generate_adversarial_set(const LinearModel& model, const Dataset& test,
                                        const AttackConfig& cfg) {
    if (model.feature_names != test.feature_names)
        throw DataError("generate_adversarial_set: model and test feature names differ");

    const auto targets = select_target_indices(as_classifier(model), test);
    if (targets.empty())
        throw NumericError("generate_adversarial_set: the model classifies no fraudulent "
                           "test sample correctly, so there is nothing to attack; train a "
                           "stronger model or check the data");

    const GradientFn grad_fn = [&model](const std::vector<double>& x, int y) {
        return input_gradient(model, x, y);
    };

    AdversarialSet set;
    set.epsilon = cfg.epsilon;
    set.source_model_id = model_id(model);
    set.created_from = "correctly-classified fraudulent test samples";
    set.samples.reserve(targets.size());
    for (std::size_t idx : targets) {
        const Sample& s = test.samples[idx];
        AdversarialSample adv;
        adv.original = s;
        adv.index_in_test = idx;
        auto p = fgsm_perturb(grad_fn, s.features, s.label, cfg);
        adv.perturbation = std::move(p.perturbation);
        adv.perturbed_features = std::move(p.perturbed_features);
        adv.source_pred_before = 1;  // by target selection
        adv.source_pred_after = classify(model, adv.perturbed_features);
        set.samples.push_back(std::move(adv));
    }
    return set;
}

MetricsReport replace_and_score(const Classifier& model, const Dataset& test,
                                const AdversarialSet& adv) {
    Dataset replaced = test;
    for (const auto& a : adv.samples) {
        if (a.index_in_test >= replaced.samples.size() ||
            replaced.samples[a.index_in_test].features != a.original.features)
            throw DataError("replace_and_score: adversarial original not found in test set");
        replaced.samples[a.index_in_test].features = a.perturbed_features;
    }
    return evaluate(model, replaced);
}

TransferResult transfer_attack(const Classifier& target, const AdversarialSet& adv,
                               bool only_source_successes) {
    TransferResult r;
    for (const auto& a : adv.samples) {
        if (only_source_successes && a.source_pred_after != 0) continue;
        ++r.attempted;
        if (target(a.perturbed_features) == 0)
            ++r.successful;
        else
            ++r.failed;
    }
    if (r.attempted == 0)
        throw NumericError(only_source_successes
                               ? "transfer_attack: no adversarial sample evades the source "
                                 "model; nothing to transfer"
                               : "transfer_attack: empty adversarial set");
    r.rate = static_cast<double>(r.successful) / static_cast<double>(r.attempted);
    return r;
}

void write_jsonl(const AdversarialSet& adv, std::ostream& out) {
    out << nlohmann::json{{"epsilon", adv.epsilon},
                          {"source_model_id", adv.source_model_id},
                          {"policy", adv.created_from}}
               .dump()
        << '\n';
    for (const auto& a : adv.samples) {
        out << nlohmann::json{{"index_in_test", a.index_in_test},
                              {"original_features", a.original.features},
                              {"perturbed_features", a.perturbed_features},
                              {"perturbation", a.perturbation},
                              {"true_label", a.original.label},
                              {"source_pred_before", a.source_pred_before},
                              {"source_pred_after", a.source_pred_after}}
                   .dump()
            << '\n';
    }
}

void write_jsonl(const AdversarialSet& adv, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    write_jsonl(adv, out);
}

AdversarialSet read_jsonl(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("adversarial JSONL: missing header record");
    nlohmann::json header = nlohmann::json::parse(line);

    AdversarialSet set;
    header.at("epsilon").get_to(set.epsilon);
    header.at("source_model_id").get_to(set.source_model_id);
    header.at("policy").get_to(set.created_from);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        AdversarialSample a;
        j.at("index_in_test").get_to(a.index_in_test);
        j.at("original_features").get_to(a.original.features);
        j.at("perturbed_features").get_to(a.perturbed_features);
        j.at("perturbation").get_to(a.perturbation);
        j.at("true_label").get_to(a.original.label);
        j.at("source_pred_before").get_to(a.source_pred_before);
        j.at("source_pred_after").get_to(a.source_pred_after);
        set.samples.push_back(std::move(a));
    }
    return set;
}

AdversarialSet read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return read_jsonl(in);
}

}  // namespace fraudlab
