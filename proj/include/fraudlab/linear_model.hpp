#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraudlab/dataset.hpp"
#include "fraudlab/metrics.hpp"

namespace fraudlab {

// Logistic regression over raw feature vectors. Exposes the input-gradient of
// its loss, which is what gradient-sign attacks consume.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<std::string> feature_names;
    double threshold = 0.5;
    // Mean training loss per epoch, index 0 = loss at initialization.
    // Kept in memory only; not serialized.
    std::vector<double> loss_history;
};

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 1000;
    double l2_lambda = 1e-4;
    std::uint64_t seed = 0;
    double tolerance = 1e-8;  // early stop when loss improvement falls below
    // When true, gradient descent runs on z-scored features (statistics from
    // the training set) and the scaling is folded back into the returned
    // weights, so the model always consumes raw features.
    bool standardize = false;
};

// 1/(1+exp(-z)), overflow-free for |z| up to at least 700.
double sigmoid(double z);

double predict_proba(const LinearModel& m, const std::vector<double>& x);

// 1 iff predict_proba >= threshold (inclusive).
int classify(const LinearModel& m, const std::vector<double>& x);

// Binary cross-entropy of one sample; the probability is clamped to
// [1e-12, 1-1e-12] before the logs.
double bce_loss(const LinearModel& m, const std::vector<double>& x, int y);

// Gradient of bce_loss with respect to the input: (p - y) * weights.
std::vector<double> input_gradient(const LinearModel& m, const std::vector<double>& x, int y);

// Full-batch gradient descent on mean bce_loss + (l2_lambda/2)*||w||^2,
// starting from zero parameters. Deterministic given (dataset order, config).
LinearModel train(const Dataset& ds, const TrainConfig& cfg);

// JSON document {feature_names, weights, bias, threshold}; round-trips exactly.
nlohmann::json to_json(const LinearModel& m);
LinearModel linear_model_from_json(const nlohmann::json& j);
void save_model(const LinearModel& m, const std::string& path);
LinearModel load_linear_model(const std::string& path);

inline Classifier as_classifier(const LinearModel& m) {
    return [&m](const std::vector<double>& x) { return classify(m, x); };
}

}  // namespace fraudlab
