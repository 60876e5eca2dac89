#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraudlab/dataset.hpp"
#include "fraudlab/metrics.hpp"

namespace fraudlab {

// CART node. feature_index < 0 marks a leaf carrying class counts; internal
// nodes route x[feature_index] <= threshold to the left child.
struct TreeNode {
    int feature_index = -1;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    std::uint64_t count0 = 0;
    std::uint64_t count1 = 0;

    bool is_leaf() const { return feature_index < 0; }
};

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 16;
    int min_samples_leaf = 1;
    int features_per_split = 0;  // 0 = ceil(sqrt(d))
    std::uint64_t seed = 0;
    bool bootstrap = true;
};

struct RandomForestModel {
    std::vector<std::unique_ptr<TreeNode>> trees;
    std::vector<std::string> feature_names;
    ForestConfig config;
};

// 1 - sum(p_i^2) over the two classes; throws DataError when both counts are 0.
double gini(std::uint64_t count0, std::uint64_t count1);

struct SplitCandidate {
    int feature_index;
    double threshold;
    double weighted_gini;  // sample-count-weighted mean of child impurities
};

// Exhaustive search over the candidate features and all midpoints between
// consecutive distinct values. Returns nullopt when the rows are pure or no
// split yields children of at least min_leaf samples. Ties break toward the
// lowest feature index, then the lowest threshold.
std::optional<SplitCandidate> best_split(const Dataset& ds, std::span<const std::size_t> rows,
                                         std::span<const int> candidate_features,
                                         int min_leaf = 1);

// Grows tree `tree_index` alone (bootstrap + CART recursion, seeded by
// derive_seed(cfg.seed, tree_index)). Building every index yields exactly
// the forest train_forest returns, independent of scheduling.
std::unique_ptr<TreeNode> train_tree(const Dataset& ds, const ForestConfig& cfg, int tree_index);

// Bagged CART ensemble; trees are built concurrently but the result is
// identical to building them one by one.
RandomForestModel train_forest(const Dataset& ds, const ForestConfig& cfg);

// Majority vote across trees; per-leaf and overall ties go to class 1.
int predict(const RandomForestModel& m, const std::vector<double>& x);

// Fraction of trees voting class 1.
double predict_proba(const RandomForestModel& m, const std::vector<double>& x);

// Vote of a single tree (leaf argmax, tie to class 1).
int tree_vote(const TreeNode& root, const std::vector<double>& x);

// JSON document with config, feature_names and recursive node records;
// round-trips exactly.
nlohmann::json to_json(const RandomForestModel& m);
RandomForestModel forest_from_json(const nlohmann::json& j);
void save_model(const RandomForestModel& m, const std::string& path);
RandomForestModel load_forest_model(const std::string& path);

inline Classifier as_classifier(const RandomForestModel& m) {
    return [&m](const std::vector<double>& x) { return predict(m, x); };
}

}  // namespace fraudlab
