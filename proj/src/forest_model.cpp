#include "fraudlab/forest_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>

#include "fraudlab/errors.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

double gini(std::uint64_t count0, std::uint64_t count1) {
    const std::uint64_t total = count0 + count1;
    if (total == 0) throw DataError("gini: both counts are zero");
    const double p0 = static_cast<double>(count0) / static_cast<double>(total);
    const double p1 = static_cast<double>(count1) / static_cast<double>(total);
    return 1.0 - (p0 * p0 + p1 * p1);
}

std::optional<SplitCandidate> best_split(const Dataset& ds, std::span<const std::size_t> rows,
                                         std::span<const int> candidate_features, int min_leaf) {
    if (rows.empty()) return std::nullopt;

    std::uint64_t parent0 = 0, parent1 = 0;
    for (std::size_t r : rows) (ds.samples[r].label == 0 ? parent0 : parent1)++;
    if (parent0 == 0 || parent1 == 0) return std::nullopt;  // pure parent

    const double n = static_cast<double>(rows.size());
    std::optional<SplitCandidate> best;

    std::vector<std::pair<double, int>> column;  // (value, label)
    column.reserve(rows.size());
    for (int f : candidate_features) {
        column.clear();
        for (std::size_t r : rows)
            column.emplace_back(ds.samples[r].features[static_cast<std::size_t>(f)],
                                ds.samples[r].label);
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::uint64_t left0 = 0, left1 = 0;
        for (std::size_t i = 1; i < column.size(); ++i) {
            (column[i - 1].second == 0 ? left0 : left1)++;
            if (column[i].first == column[i - 1].first) continue;

            const std::uint64_t nl = left0 + left1;
            const std::uint64_t nr = rows.size() - nl;
            if (nl < static_cast<std::uint64_t>(min_leaf) ||
                nr < static_cast<std::uint64_t>(min_leaf))
                continue;

            const double threshold = (column[i - 1].first + column[i].first) / 2.0;
            const double weighted = (static_cast<double>(nl) * gini(left0, left1) +
                                     static_cast<double>(nr) *
                                         gini(parent0 - left0, parent1 - left1)) /
                                    n;
            if (!best || weighted < best->weighted_gini ||
                (weighted == best->weighted_gini &&
                 (f < best->feature_index ||
                  (f == best->feature_index && threshold < best->threshold)))) {
                best = SplitCandidate{f, threshold, weighted};
            }
        }
    }
    return best;
}

namespace {

int resolve_features_per_split(const ForestConfig& cfg, std::size_t d) {
    if (cfg.features_per_split == 0)
        return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    return cfg.features_per_split;
}

std::unique_ptr<TreeNode> make_leaf(std::uint64_t c0, std::uint64_t c1) {
    auto leaf = std::make_unique<TreeNode>();
    leaf->count0 = c0;
    leaf->count1 = c1;
    return leaf;
}

std::unique_ptr<TreeNode> grow(const Dataset& ds, std::vector<std::size_t>& rows, int depth,
                               const ForestConfig& cfg, int k, Rng& rng) {
    std::uint64_t c0 = 0, c1 = 0;
    for (std::size_t r : rows) (ds.samples[r].label == 0 ? c0 : c1)++;

    const std::size_t d = ds.dim();
    if (depth >= cfg.max_depth || c0 == 0 || c1 == 0 ||
        rows.size() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf))
        return make_leaf(c0, c1);

    // Per-node feature subset: k distinct indices via partial Fisher-Yates,
    // sorted so the tie-break order matches the full-feature search.
    std::vector<int> pool(d);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(d - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        chosen.push_back(pool[static_cast<std::size_t>(i)]);
    }
    std::sort(chosen.begin(), chosen.end());

    const auto split = best_split(ds, rows, chosen, cfg.min_samples_leaf);
    if (!split) return make_leaf(c0, c1);

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        if (ds.samples[r].features[static_cast<std::size_t>(split->feature_index)] <=
            split->threshold)
            left_rows.push_back(r);
        else
            right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    auto node = std::make_unique<TreeNode>();
    node->feature_index = split->feature_index;
    node->threshold = split->threshold;
    node->left = grow(ds, left_rows, depth + 1, cfg, k, rng);
    node->right = grow(ds, right_rows, depth + 1, cfg, k, rng);
    return node;
}

}  // namespace

std::unique_ptr<TreeNode> train_tree(const Dataset& ds, const ForestConfig& cfg, int tree_index) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(tree_index)));
    const std::size_t n = ds.size();

    std::vector<std::size_t> rows;
    rows.reserve(n);
    if (cfg.bootstrap) {
        for (std::size_t i = 0; i < n; ++i) rows.push_back(static_cast<std::size_t>(rng.below(n)));
    } else {
        rows.resize(n);
        std::iota(rows.begin(), rows.end(), 0);
    }

    const int k = resolve_features_per_split(cfg, ds.dim());
    return grow(ds, rows, 0, cfg, k, rng);
}

RandomForestModel train_forest(const Dataset& ds, const ForestConfig& cfg) {
    if (cfg.n_trees < 1) throw DataError("train_forest: n_trees must be >= 1");
    if (cfg.max_depth < 1) throw DataError("train_forest: max_depth must be >= 1");
    if (cfg.min_samples_leaf < 1) throw DataError("train_forest: min_samples_leaf must be >= 1");
    if (cfg.features_per_split < 0 ||
        cfg.features_per_split > static_cast<int>(ds.dim()))
        throw DataError("train_forest: features_per_split must lie in [1, d] (or 0 for sqrt)");
    validate(ds);
    require_both_classes(ds);

    RandomForestModel m;
    m.feature_names = ds.feature_names;
    m.config = cfg;
    m.trees.resize(static_cast<std::size_t>(cfg.n_trees));

    // Trees are independent given their derived seeds, so a static slicing
    // across workers reproduces the serial result exactly.
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(cfg.n_trees));
    if (workers <= 1) {
        for (int t = 0; t < cfg.n_trees; ++t)
            m.trees[static_cast<std::size_t>(t)] = train_tree(ds, cfg, t);
    } else {
        std::vector<std::future<void>> jobs;
        jobs.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (int t = static_cast<int>(w); t < cfg.n_trees; t += static_cast<int>(workers))
                    m.trees[static_cast<std::size_t>(t)] = train_tree(ds, cfg, t);
            }));
        }
        for (auto& j : jobs) j.get();
    }
    return m;
}

int tree_vote(const TreeNode& root, const std::vector<double>& x) {
    const TreeNode* node = &root;
    while (!node->is_leaf())
        node = x[static_cast<std::size_t>(node->feature_index)] <= node->threshold
                   ? node->left.get()
                   : node->right.get();
    return node->count1 >= node->count0 ? 1 : 0;
}

namespace {

void check_dim(const RandomForestModel& m, const std::vector<double>& x) {
    if (x.size() != m.feature_names.size())
        throw DataError("forest expects " + std::to_string(m.feature_names.size()) +
                        " features, got " + std::to_string(x.size()));
}

std::uint64_t votes_for_fraud(const RandomForestModel& m, const std::vector<double>& x) {
    std::uint64_t votes = 0;
    for (const auto& tree : m.trees) votes += static_cast<std::uint64_t>(tree_vote(*tree, x));
    return votes;
}

}  // namespace

int predict(const RandomForestModel& m, const std::vector<double>& x) {
    check_dim(m, x);
    return 2 * votes_for_fraud(m, x) >= m.trees.size() ? 1 : 0;
}

double predict_proba(const RandomForestModel& m, const std::vector<double>& x) {
    check_dim(m, x);
    return static_cast<double>(votes_for_fraud(m, x)) / static_cast<double>(m.trees.size());
}

namespace {

nlohmann::json node_to_json(const TreeNode& node) {
    if (node.is_leaf()) return nlohmann::json{{"counts", {node.count0, node.count1}}};
    return nlohmann::json{{"feature", node.feature_index},
                          {"threshold", node.threshold},
                          {"left", node_to_json(*node.left)},
                          {"right", node_to_json(*node.right)}};
}

std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& j) {
    auto node = std::make_unique<TreeNode>();
    if (j.contains("counts")) {
        node->count0 = j.at("counts").at(0).get<std::uint64_t>();
        node->count1 = j.at("counts").at(1).get<std::uint64_t>();
        if (node->count0 + node->count1 == 0)
            throw DataError("forest JSON: leaf with zero samples");
        return node;
    }
    node->feature_index = j.at("feature").get<int>();
    if (node->feature_index < 0) throw DataError("forest JSON: negative feature index");
    j.at("threshold").get_to(node->threshold);
    node->left = node_from_json(j.at("left"));
    node->right = node_from_json(j.at("right"));
    return node;
}

}  // namespace

nlohmann::json to_json(const RandomForestModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) trees.push_back(node_to_json(*t));
    nlohmann::json features_per_split;
    if (m.config.features_per_split == 0)
        features_per_split = "sqrt";
    else
        features_per_split = m.config.features_per_split;
    return nlohmann::json{
        {"config",
         {{"n_trees", m.config.n_trees},
          {"max_depth", m.config.max_depth},
          {"min_samples_leaf", m.config.min_samples_leaf},
          {"features_per_split", features_per_split},
          {"seed", m.config.seed},
          {"bootstrap", m.config.bootstrap}}},
        {"feature_names", m.feature_names},
        {"trees", std::move(trees)}};
}

RandomForestModel forest_from_json(const nlohmann::json& j) {
    RandomForestModel m;
    j.at("feature_names").get_to(m.feature_names);
    const auto& c = j.at("config");
    c.at("n_trees").get_to(m.config.n_trees);
    c.at("max_depth").get_to(m.config.max_depth);
    c.at("min_samples_leaf").get_to(m.config.min_samples_leaf);
    if (c.at("features_per_split").is_string())
        m.config.features_per_split = 0;
    else
        c.at("features_per_split").get_to(m.config.features_per_split);
    c.at("seed").get_to(m.config.seed);
    c.at("bootstrap").get_to(m.config.bootstrap);
    for (const auto& t : j.at("trees")) m.trees.push_back(node_from_json(t));
    if (m.trees.size() != static_cast<std::size_t>(m.config.n_trees))
        throw DataError("forest JSON: tree count does not match config.n_trees");
    return m;
}

void save_model(const RandomForestModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << to_json(m).dump(2) << '\n';
}

RandomForestModel load_forest_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return forest_from_json(j);
}

}  // namespace fraudlab
