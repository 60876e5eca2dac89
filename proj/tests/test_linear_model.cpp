#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "fraudlab/errors.hpp"
#include "fraudlab/linear_model.hpp"
#include "fraudlab/rng.hpp"

using namespace fraudlab;

namespace {

LinearModel make_model(std::vector<double> w, double b) {
    LinearModel m;
    m.weights = std::move(w);
    m.bias = b;
    for (std::size_t j = 0; j < m.weights.size(); ++j)
        m.feature_names.push_back("f" + std::to_string(j));
    return m;
}

// Central finite differences of bce_loss with respect to the input.
std::vector<double> fd_gradient(const LinearModel& m, const std::vector<double>& x, int y,
                                double step) {
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        std::vector<double> hi = x, lo = x;
        hi[j] += step;
        lo[j] -= step;
        g[j] = (bce_loss(m, hi, y) - bce_loss(m, lo, y)) / (2.0 * step);
    }
    return g;
}

// P(correct) of the optimal rule for two unit-variance isotropic Gaussians at
// distance `sep` with priors (1-p1, p1); the boundary is a hyperplane normal
// to the mean difference.
double bayes_accuracy(double sep, double p1) {
    auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    const double shift = std::log(p1 / (1.0 - p1)) / sep;
    return (1.0 - p1) * phi(sep / 2.0 + shift) + p1 * phi(sep / 2.0 - shift);
}

}  // namespace

TEST_CASE("sigmoid fixed points and saturation") {
    CHECK(sigmoid(0.0) == 0.5);
    // true value 1 - 1.9e-22 rounds up to 1.0 in double; >= captures it
    CHECK(sigmoid(50.0) >= 1.0 - 1e-20);
    CHECK(sigmoid(50.0) <= 1.0);
    CHECK(sigmoid(30.0) < 1.0);  // 1 - 9.4e-14, still representable below 1
    CHECK(sigmoid(30.0) > 1.0 - 1e-13);
    CHECK(sigmoid(-50.0) < 1e-20);
    CHECK(sigmoid(-50.0) > 0.0);
}

TEST_CASE("sigmoid is overflow-free out to |z| = 700") {
    for (double z : {700.0, -700.0, 709.0, -709.0}) {
        const double p = sigmoid(z);
        CHECK(std::isfinite(p));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    CHECK(sigmoid(700.0) == 1.0);  // rounds to 1, does not overflow
    CHECK(sigmoid(-700.0) > 0.0);
}

TEST_CASE("sigmoid(z) + sigmoid(-z) == 1") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const double z = (rng.unit() - 0.5) * 60.0;  // |z| <= 30
        CHECK(std::abs(sigmoid(z) + sigmoid(-z) - 1.0) <= 1e-15);
    }
}

TEST_CASE("predict_proba closed-form values") {
    const auto zero = make_model({0.0, 0.0}, 0.0);
    CHECK(predict_proba(zero, {3.0, -4.0}) == 0.5);

    const auto ortho = make_model({1.0, 0.0}, 0.0);
    CHECK(predict_proba(ortho, {0.0, 99.0}) == 0.5);

    const auto m = make_model({2.0}, -1.0);
    CHECK(predict_proba(m, {1.0}) == doctest::Approx(0.7310585786300049).epsilon(1e-12));

    CHECK_THROWS_AS(predict_proba(m, {1.0, 2.0}), DataError);
}

TEST_CASE("classify thresholds inclusively at 0.5") {
    const auto zero = make_model({0.0, 0.0}, 0.0);
    CHECK(classify(zero, {1.0, 2.0}) == 1);  // p == 0.5 exactly

    const auto never = make_model({0.0}, -10.0);
    const auto always = make_model({0.0}, 10.0);
    for (double x : {-5.0, 0.0, 5.0}) {
        CHECK(classify(never, {x}) == 0);
        CHECK(classify(always, {x}) == 1);
    }
}

TEST_CASE("bce_loss values and clamping") {
    const auto zero = make_model({0.0}, 0.0);
    CHECK(bce_loss(zero, {1.0}, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(zero, {1.0}, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // y=1, p=0.1  ->  -ln 0.1
    const auto m = make_model({1.0}, 0.0);
    const double x_for_p01 = std::log(0.1 / 0.9);
    CHECK(bce_loss(m, {x_for_p01}, 1) == doctest::Approx(-std::log(0.1)).epsilon(1e-9));

    // saturated prediction stays finite thanks to the clamp
    const auto confident = make_model({1000.0}, 0.0);
    const double loss = bce_loss(confident, {1.0}, 0);
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(-std::log(1e-12)).epsilon(1e-6));

    // perfect-prediction limit
    CHECK(bce_loss(confident, {1.0}, 1) < 1e-10);
}

TEST_CASE("input_gradient is (p - y) * weights") {
    const auto zero = make_model({0.0, 0.0}, 0.3);
    CHECK(input_gradient(zero, {1.0, 2.0}, 1) == std::vector<double>{0.0, 0.0});

    const auto m = make_model({2.0, -1.0}, 0.5);
    const std::vector<double> x{0.3, 0.7};
    const double p = predict_proba(m, x);
    const auto g = input_gradient(m, x, 1);
    CHECK(g[0] == doctest::Approx((p - 1.0) * 2.0));
    CHECK(g[1] == doctest::Approx((p - 1.0) * -1.0));
    // y=1 makes the gradient anti-parallel to the weights
    CHECK(g[0] < 0.0);
    CHECK(g[1] > 0.0);
}

TEST_CASE("input_gradient matches central finite differences") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng.below(5);
        std::vector<double> w(d), x(d);
        for (auto& v : w) v = (rng.unit() - 0.5) * 2.0;
        for (auto& v : x) v = (rng.unit() - 0.5) * 2.0;
        const auto m = make_model(w, (rng.unit() - 0.5));
        const int y = static_cast<int>(rng.below(2));

        const auto g = input_gradient(m, x, y);
        const auto fd = fd_gradient(m, x, y, 1e-5);
        for (std::size_t j = 0; j < d; ++j) {
            const double denom = std::max({std::abs(fd[j]), std::abs(g[j]), 1e-10});
            CHECK(std::abs(fd[j] - g[j]) / denom < 1e-5);
        }
    }
}

TEST_CASE("train fits a separable 2-point problem") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.samples = {{{-1.0}, 0}, {{1.0}, 1}};
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 500;
    cfg.l2_lambda = 0.0;
    const LinearModel m = train(ds, cfg);
    CHECK(classify(m, {-1.0}) == 0);
    CHECK(classify(m, {1.0}) == 1);
    CHECK(m.loss_history.front() == doctest::Approx(std::log(2.0)));
    CHECK(m.loss_history.back() < m.loss_history.front());
}

TEST_CASE("huge l2 pins the weights near zero") {
    const Dataset ds = generate_synthetic(200, 0.5, 3, 3.0, 1);
    TrainConfig cfg;
    cfg.learning_rate = 1e-7;  // stability under l2_lambda = 1e6 needs lr*l2 < 2
    cfg.epochs = 2000;
    cfg.l2_lambda = 1e6;
    const LinearModel m = train(ds, cfg);
    double norm = 0.0;
    for (double w : m.weights) norm += w * w;
    CHECK(std::sqrt(norm) <= 1e-3);
}

TEST_CASE("train reaches near-Bayes accuracy on well-separated Gaussians") {
    const Dataset ds = generate_synthetic(2000, 0.5, 2, 4.0, 7);
    const auto [tr, te] = stratified_split(ds, {0.8, 11, true});
    TrainConfig cfg;
    cfg.epochs = 500;
    const LinearModel m = train(tr, cfg);

    std::uint64_t correct = 0;
    for (const auto& s : te.samples) correct += classify(m, s.features) == s.label;
    const double acc = double(correct) / double(te.size());

    // Bayes-rule oracle: the optimal boundary for equal priors sits halfway
    // between the means; accuracy ~ Phi(sep/2) ~ 0.977.
    const double optimal = bayes_accuracy(4.0, 0.5);
    CHECK(optimal == doctest::Approx(0.97725).epsilon(1e-4));

    std::uint64_t bayes_correct = 0;
    const double shift = 4.0 / std::sqrt(2.0);  // per-coordinate mean of class 1
    for (const auto& s : te.samples) {
        double d0 = 0, d1 = 0;
        for (double v : s.features) {
            d0 += v * v;
            d1 += (v - shift) * (v - shift);
        }
        bayes_correct += (d1 < d0 ? 1 : 0) == s.label;
    }
    const double bayes_emp = double(bayes_correct) / double(te.size());
    CHECK(bayes_emp == doctest::Approx(optimal).epsilon(0.02));

    CHECK(acc >= 0.95);
    CHECK(acc <= bayes_emp + 0.02);
}

TEST_CASE("training loss is monotone non-increasing at small learning rate") {
    const Dataset ds = generate_synthetic(500, 0.3, 4, 2.0, 5);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 300;
    cfg.tolerance = 0.0;
    const LinearModel m = train(ds, cfg);
    for (std::size_t i = 1; i < m.loss_history.size(); ++i)
        CHECK(m.loss_history[i] <= m.loss_history[i - 1] + 1e-12);
    CHECK(m.loss_history.back() <= std::log(2.0));
}

TEST_CASE("training is deterministic") {
    const Dataset ds = generate_synthetic(300, 0.4, 3, 2.0, 9);
    TrainConfig cfg;
    cfg.epochs = 200;
    const LinearModel a = train(ds, cfg);
    const LinearModel b = train(ds, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
}

TEST_CASE("train rejects single-class data and divergence") {
    Dataset single;
    single.feature_names = {"x"};
    single.samples = {{{0.0}, 0}, {{1.0}, 0}};
    CHECK_THROWS_AS(train(single, TrainConfig{}), DataError);

    Dataset big;
    big.feature_names = {"x"};
    big.samples = {{{1e8}, 0}, {{-1e8}, 1}};
    TrainConfig wild;
    wild.learning_rate = 1e300;  // first step overflows the L2 penalty
    wild.epochs = 50;
    CHECK_THROWS_AS(train(big, wild), NumericError);
}

TEST_CASE("standardized training folds back into raw-space weights") {
    // same data, wildly different feature scales
    Dataset ds = generate_synthetic(1000, 0.5, 2, 4.0, 3);
    for (auto& s : ds.samples) {
        s.features[0] = s.features[0] * 50000.0 + 90000.0;  // Time-like scale
        s.features[1] = s.features[1] * 2.0;
    }
    TrainConfig cfg;
    cfg.standardize = true;
    cfg.epochs = 500;
    const LinearModel m = train(ds, cfg);

    std::uint64_t correct = 0;
    for (const auto& s : ds.samples) correct += classify(m, s.features) == s.label;
    CHECK(double(correct) / double(ds.size()) >= 0.95);
    // the model consumes raw features: weight scale reflects the fold
    CHECK(std::abs(m.weights[0]) < std::abs(m.weights[1]));
}

TEST_CASE("linear model JSON round-trips exactly") {
    const Dataset ds = generate_synthetic(200, 0.4, 3, 2.5, 13);
    TrainConfig cfg;
    cfg.epochs = 150;
    const LinearModel m = train(ds, cfg);

    const LinearModel back = linear_model_from_json(to_json(m));
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.threshold == m.threshold);
    CHECK(back.feature_names == m.feature_names);

    const std::string path = "tmp_lr_model.json";
    save_model(m, path);
    const LinearModel from_file = load_linear_model(path);
    CHECK(from_file.weights == m.weights);
    CHECK(from_file.bias == m.bias);
    std::remove(path.c_str());
}
