#include "fraudlab/metrics.hpp"

#include <string>

#include "fraudlab/errors.hpp"

namespace fraudlab {

ConfusionMatrix confusion_matrix(const std::vector<int>& predictions,
                                 const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw DataError("confusion_matrix: " + std::to_string(predictions.size()) +
                        " predictions vs " + std::to_string(labels.size()) + " labels");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i];
        const int y = labels[i];
        if ((p != 0 && p != 1) || (y != 0 && y != 1))
            throw DataError("confusion_matrix: non-binary value at index " + std::to_string(i));
        if (y == 1)
            (p == 1 ? cm.tp : cm.fn)++;
        else
            (p == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

MetricsReport summarize(const ConfusionMatrix& cm) {
    const std::uint64_t n = cm.total();
    if (n == 0) throw DataError("summarize: empty confusion matrix");

    MetricsReport r;
    r.matrix = cm;
    r.n = n;
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n);
    if (cm.tp + cm.fp > 0) {
        r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    } else {
        r.precision_degenerate = true;
    }
    if (cm.tp + cm.fn > 0) {
        r.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    } else {
        r.recall_degenerate = true;
    }
    return r;
}

double transferability_rate(std::uint64_t successful, std::uint64_t attempted) {
    if (attempted == 0) throw NumericError("transferability_rate: attempted is 0");
    if (successful > attempted)
        throw NumericError("transferability_rate: successful exceeds attempted");
    return static_cast<double>(successful) / static_cast<double>(attempted);
}

MetricsReport evaluate(const Classifier& fn, const Dataset& ds) {
    std::vector<int> predictions, labels;
    predictions.reserve(ds.size());
    labels.reserve(ds.size());
    for (const auto& s : ds.samples) {
        predictions.push_back(fn(s.features));
        labels.push_back(s.label);
    }
    return summarize(confusion_matrix(predictions, labels));
}

}  // namespace fraudlab
