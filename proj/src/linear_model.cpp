#include "fraudlab/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fraudlab/errors.hpp"

namespace fraudlab {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

void check_dim(const LinearModel& m, const std::vector<double>& x) {
    if (x.size() != m.weights.size())
        throw DataError("linear model expects " + std::to_string(m.weights.size()) +
                        " features, got " + std::to_string(x.size()));
}

double linear_score(const std::vector<double>& w, double b, const std::vector<double>& x) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
    return z;
}

constexpr double kProbClamp = 1e-12;

double clamped_bce(double p, int y) {
    const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

}  // namespace

double predict_proba(const LinearModel& m, const std::vector<double>& x) {
    check_dim(m, x);
    return sigmoid(linear_score(m.weights, m.bias, x));
}

int classify(const LinearModel& m, const std::vector<double>& x) {
    return predict_proba(m, x) >= m.threshold ? 1 : 0;
}

double bce_loss(const LinearModel& m, const std::vector<double>& x, int y) {
    if (y != 0 && y != 1) throw DataError("bce_loss: label must be 0 or 1");
    return clamped_bce(predict_proba(m, x), y);
}

std::vector<double> input_gradient(const LinearModel& m, const std::vector<double>& x, int y) {
    if (y != 0 && y != 1) throw DataError("input_gradient: label must be 0 or 1");
    const double p = predict_proba(m, x);
    std::vector<double> g(m.weights.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = (p - y) * m.weights[j];
    return g;
}

namespace {

// Mean BCE over the dataset plus the L2 penalty, for the current parameters.
double objective(const std::vector<double>& w, double b, double l2, const Dataset& ds) {
    double total = 0.0;
    for (const auto& s : ds.samples)
        total += clamped_bce(sigmoid(linear_score(w, b, s.features)), s.label);
    double penalty = 0.0;
    for (double wj : w) penalty += wj * wj;
    return total / static_cast<double>(ds.size()) + 0.5 * l2 * penalty;
}

}  // namespace

LinearModel train(const Dataset& ds, const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw DataError("train: learning_rate must be > 0");
    if (cfg.epochs < 1) throw DataError("train: epochs must be >= 1");
    if (cfg.l2_lambda < 0.0) throw DataError("train: l2_lambda must be >= 0");
    if (cfg.tolerance < 0.0) throw DataError("train: tolerance must be >= 0");
    validate(ds);
    require_both_classes(ds);

    FeatureScaler scaler;
    const Dataset* data = &ds;
    Dataset scaled;
    if (cfg.standardize) {
        scaler = fit_scaler(ds);
        scaled = apply_scaler(scaler, ds);
        data = &scaled;
    }

    const std::size_t d = data->dim();
    const std::size_t n = data->size();
    std::vector<double> w(d, 0.0);
    double b = 0.0;

    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
    double prev_loss = objective(w, b, cfg.l2_lambda, *data);
    history.push_back(prev_loss);

    std::vector<double> grad_w(d);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double grad_b = 0.0;
        for (const auto& s : data->samples) {
            const double err = sigmoid(linear_score(w, b, s.features)) - s.label;
            for (std::size_t j = 0; j < d; ++j) grad_w[j] += err * s.features[j];
            grad_b += err;
        }
        const std::vector<double> w_before = w;
        const double b_before = b;
        for (std::size_t j = 0; j < d; ++j) {
            const double g = grad_w[j] / static_cast<double>(n) + cfg.l2_lambda * w[j];
            w[j] -= cfg.learning_rate * g;
        }
        b -= cfg.learning_rate * grad_b / static_cast<double>(n);

        const double loss = objective(w, b, cfg.l2_lambda, *data);
        if (!std::isfinite(loss)) {
            for (double wj : w)
                if (!std::isfinite(wj))
                    throw NumericError("train: parameters diverged (non-finite); "
                                       "reduce learning_rate");
            throw NumericError("train: loss became non-finite; reduce learning_rate");
        }
        if (prev_loss - loss < cfg.tolerance) {
            if (loss > prev_loss) {
                // last step made things worse; keep the better parameters
                w = w_before;
                b = b_before;
            } else {
                history.push_back(loss);
                prev_loss = loss;
            }
            break;
        }
        history.push_back(loss);
        prev_loss = loss;
    }

    LinearModel m;
    m.feature_names = ds.feature_names;
    m.threshold = 0.5;
    m.loss_history = std::move(history);
    if (cfg.standardize) {
        // Fold the z-scoring into raw-space parameters:
        // w.(x-mu)/sigma + b  ==  (w/sigma).x + (b - sum(w*mu/sigma))
        m.weights.resize(d);
        double shift = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            m.weights[j] = w[j] / scaler.stddev[j];
            shift += w[j] * scaler.mean[j] / scaler.stddev[j];
        }
        m.bias = b - shift;
    } else {
        m.weights = std::move(w);
        m.bias = b;
    }
    return m;
}

nlohmann::json to_json(const LinearModel& m) {
    return nlohmann::json{{"feature_names", m.feature_names},
                          {"weights", m.weights},
                          {"bias", m.bias},
                          {"threshold", m.threshold}};
}

LinearModel linear_model_from_json(const nlohmann::json& j) {
    LinearModel m;
    j.at("feature_names").get_to(m.feature_names);
    j.at("weights").get_to(m.weights);
    j.at("bias").get_to(m.bias);
    j.at("threshold").get_to(m.threshold);
    if (m.weights.size() != m.feature_names.size())
        throw DataError("linear model JSON: weights/feature_names length mismatch");
    return m;
}

void save_model(const LinearModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << to_json(m).dump(2) << '\n';
}

LinearModel load_linear_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return linear_model_from_json(j);
}

}  // namespace fraudlab
