#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "fraudlab/errors.hpp"
#include "fraudlab/metrics.hpp"
#include "fraudlab/rng.hpp"

using namespace fraudlab;

TEST_CASE("confusion_matrix counts the four cells") {
    const auto cm = confusion_matrix({1, 0, 1}, {1, 0, 1});
    CHECK(cm.tp == 2);
    CHECK(cm.tn == 1);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);

    const auto cm2 = confusion_matrix({0, 0, 0}, {1, 1, 0});
    CHECK(cm2.fn == 2);
    CHECK(cm2.tn == 1);
    CHECK(cm2.tp == 0);
    CHECK(cm2.fp == 0);
}

TEST_CASE("confusion_matrix rejects bad input") {
    CHECK_THROWS_AS(confusion_matrix({1, 0}, {1}), DataError);
    CHECK_THROWS_AS(confusion_matrix({1, 2}, {1, 0}), DataError);
    CHECK_THROWS_AS(confusion_matrix({1, 0}, {1, -1}), DataError);
}

TEST_CASE("summarize on the published forest baseline cells") {
    // tn=56861, fp=5, fn=0, tp=96
    ConfusionMatrix cm{96, 5, 56861, 0};
    const MetricsReport r = summarize(cm);
    CHECK(r.n == 56962);
    CHECK(r.recall == 1.0);
    CHECK(r.precision == doctest::Approx(96.0 / 101.0));
    CHECK(r.precision == doctest::Approx(0.9505).epsilon(1e-4));
    CHECK(r.accuracy == doctest::Approx(0.99991).epsilon(1e-5));
    CHECK_FALSE(r.precision_degenerate);
    CHECK_FALSE(r.recall_degenerate);
}

TEST_CASE("summarize degenerate conventions") {
    ConfusionMatrix cm{0, 0, 10, 0};
    const MetricsReport r = summarize(cm);
    CHECK(r.accuracy == 1.0);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.precision_degenerate);
    CHECK(r.recall_degenerate);

    ConfusionMatrix sym{1, 1, 1, 1};
    const MetricsReport rs = summarize(sym);
    CHECK(rs.accuracy == 0.5);
    CHECK(rs.precision == 0.5);
    CHECK(rs.recall == 0.5);

    CHECK_THROWS_AS(summarize(ConfusionMatrix{}), DataError);
}

TEST_CASE("transferability_rate") {
    CHECK(transferability_rate(34, 36) == doctest::Approx(0.9444).epsilon(1e-4));
    CHECK(transferability_rate(0, 5) == 0.0);
    CHECK(transferability_rate(5, 5) == 1.0);
    CHECK_THROWS_AS(transferability_rate(1, 0), NumericError);
    CHECK_THROWS_AS(transferability_rate(6, 5), NumericError);
}

TEST_CASE("summarize(confusion_matrix) matches brute-force counting") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(10000);
        std::vector<int> preds(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = static_cast<int>(rng.below(2));
            labels[i] = static_cast<int>(rng.below(2));
        }
        const MetricsReport r = summarize(confusion_matrix(preds, labels));

        std::uint64_t correct = 0, tp = 0, pred_pos = 0, actual_pos = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (preds[i] == labels[i]) ++correct;
            if (preds[i] == 1 && labels[i] == 1) ++tp;
            if (preds[i] == 1) ++pred_pos;
            if (labels[i] == 1) ++actual_pos;
        }
        CHECK(r.accuracy == double(correct) / double(n));
        if (pred_pos > 0) CHECK(r.precision == double(tp) / double(pred_pos));
        if (actual_pos > 0) CHECK(r.recall == double(tp) / double(actual_pos));
        CHECK(r.accuracy * double(r.n) == doctest::Approx(double(r.matrix.tp + r.matrix.tn)));
    }
}

TEST_CASE("metrics are permutation invariant") {
    Rng rng(7);
    std::vector<int> preds, labels;
    for (int i = 0; i < 500; ++i) {
        preds.push_back(static_cast<int>(rng.below(2)));
        labels.push_back(static_cast<int>(rng.below(2)));
    }
    const MetricsReport before = summarize(confusion_matrix(preds, labels));

    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<int> p2, l2;
    for (std::size_t i : order) {
        p2.push_back(preds[i]);
        l2.push_back(labels[i]);
    }
    const MetricsReport after = summarize(confusion_matrix(p2, l2));
    CHECK(before.accuracy == after.accuracy);
    CHECK(before.precision == after.precision);
    CHECK(before.recall == after.recall);
    CHECK(before.matrix.tp == after.matrix.tp);
}

TEST_CASE("evaluate scores a classifier over a dataset") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.samples = {{{1.0}, 1}, {{-1.0}, 0}, {{2.0}, 1}, {{-2.0}, 1}};
    const Classifier by_sign = [](const std::vector<double>& x) { return x[0] > 0 ? 1 : 0; };
    const MetricsReport r = evaluate(by_sign, ds);
    CHECK(r.matrix.tp == 2);
    CHECK(r.matrix.tn == 1);
    CHECK(r.matrix.fn == 1);
    CHECK(r.recall == doctest::Approx(2.0 / 3.0));
}
