#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fraudlab {

// One transaction: a row of numeric features plus a binary label
// (0 = legitimate, 1 = fraud).
struct Sample {
    std::vector<double> features;
    int label = 0;
};

enum class Provenance { FileLoaded, Synthetic, SmoteAugmented, SplitDerived };

const char* to_string(Provenance p);

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<Sample> samples;
    Provenance provenance = Provenance::FileLoaded;

    std::size_t dim() const { return feature_names.size(); }
    std::size_t size() const { return samples.size(); }
    std::size_t count_label(int label) const;
};

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct SmoteConfig {
    int k_neighbors = 5;
    double target_ratio = 1.0;  // desired minority:majority count ratio
    std::uint64_t seed = 0;
};

// Checks structural invariants: feature vector lengths, unique names, finite
// values, binary labels. Throws DataError on violation.
void validate(const Dataset& ds);

// Throws DataError unless ds contains at least one sample of each class.
void require_both_classes(const Dataset& ds);

// Reads a header-first CSV whose label column (default "Class") holds 0/1.
// All other columns become features, in file order.
Dataset load_csv(const std::string& path, const std::string& label_column = "Class");

// Writes the dataset back out in the same CSV format.
void write_csv(const Dataset& ds, std::ostream& out, const std::string& label_column = "Class");
void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column = "Class");

// Two isotropic unit-variance Gaussians in d dimensions: class 0 centered at
// the origin, class 1 at (s/sqrt(d), ..., s/sqrt(d)) so the distance between
// the means equals class_separation. round(n_total * fraud_fraction) samples
// are class 1. Deterministic given seed.
Dataset generate_synthetic(std::size_t n_total, double fraud_fraction, std::size_t d,
                           double class_separation, std::uint64_t seed);

// Seeded per-class shuffle; train receives round(class_count * train_fraction)
// of each class. Sample order within each part follows the input dataset.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, const SplitSpec& spec);

// Appends interpolated minority (class-1) samples until
// minority/majority >= target_ratio. Each synthetic sample is
// x + u * (x_nn - x) for a random minority x, one of its k nearest minority
// neighbors x_nn, and u uniform in [0,1]. Originals are untouched.
Dataset smote_oversample(const Dataset& train, const SmoteConfig& cfg);

// Per-feature z-scoring. Statistics are estimated on `fit_on`; columns with
// zero variance pass through unchanged.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> stddev;  // 1.0 where the fitted column was constant
};

FeatureScaler fit_scaler(const Dataset& fit_on);
Dataset apply_scaler(const FeatureScaler& s, const Dataset& ds);

}  // namespace fraudlab
