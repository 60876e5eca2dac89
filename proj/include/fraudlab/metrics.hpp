#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fraudlab/dataset.hpp"

namespace fraudlab {

// Any binary classifier: feature vector in, 0/1 label out.
using Classifier = std::function<int(const std::vector<double>&)>;

// Positive class = fraud = 1.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    ConfusionMatrix matrix;
    std::uint64_t n = 0;
    // Set when the corresponding denominator (tp+fp or tp+fn) was zero and
    // the metric was pinned to 0 by convention.
    bool precision_degenerate = false;
    bool recall_degenerate = false;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions,
                                 const std::vector<int>& labels);

MetricsReport summarize(const ConfusionMatrix& cm);

// successful / attempted; throws NumericError when attempted == 0.
double transferability_rate(std::uint64_t successful, std::uint64_t attempted);

// Scores a classifier over a dataset and summarizes the result.
MetricsReport evaluate(const Classifier& fn, const Dataset& ds);

}  // namespace fraudlab
