#include "fraudlab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fraudlab/errors.hpp"
#include "fraudlab/rng.hpp"

namespace fraudlab {

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::FileLoaded: return "file-loaded";
        case Provenance::Synthetic: return "synthetic";
        case Provenance::SmoteAugmented: return "smote-augmented";
        case Provenance::SplitDerived: return "split-derived";
    }
    return "unknown";
}

std::size_t Dataset::count_label(int label) const {
    std::size_t n = 0;
    for (const auto& s : samples)
        if (s.label == label) ++n;
    return n;
}

void validate(const Dataset& ds) {
    std::set<std::string> seen(ds.feature_names.begin(), ds.feature_names.end());
    if (seen.size() != ds.feature_names.size())
        throw DataError("dataset has duplicate feature names");
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const Sample& s = ds.samples[i];
        if (s.features.size() != ds.feature_names.size())
            throw DataError("sample " + std::to_string(i) + " has " +
                            std::to_string(s.features.size()) + " features, expected " +
                            std::to_string(ds.feature_names.size()));
        for (double v : s.features)
            if (!std::isfinite(v))
                throw DataError("sample " + std::to_string(i) + " has a non-finite feature");
        if (s.label != 0 && s.label != 1)
            throw DataError("sample " + std::to_string(i) + " has label " +
                            std::to_string(s.label) + ", expected 0 or 1");
    }
}

void require_both_classes(const Dataset& ds) {
    if (ds.count_label(0) == 0 || ds.count_label(1) == 0)
        throw DataError("dataset must contain at least one sample of each class");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw DataError("line " + std::to_string(line_no) + ", column \"" + column +
                        "\": cannot parse \"" + cell + "\" as a number");
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file, expected a header row");

    auto header = split_line(line);
    for (auto& h : header) {
        // strip CR and surrounding quotes that some exports add
        while (!h.empty() && (h.back() == '\r' || h.back() == ' ')) h.pop_back();
        if (h.size() >= 2 && h.front() == '"' && h.back() == '"') h = h.substr(1, h.size() - 2);
    }

    std::size_t label_idx = header.size();
    Dataset ds;
    ds.provenance = Provenance::FileLoaded;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) {
            label_idx = i;
        } else {
            ds.feature_names.push_back(header[i]);
        }
    }
    if (label_idx == header.size())
        throw DataError(path + ": no \"" + label_column + "\" column in header");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError(path + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        Sample s;
        s.features.reserve(ds.feature_names.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = parse_cell(cells[i], line_no, header[i]);
            if (i == label_idx) {
                if (v != 0.0 && v != 1.0)
                    throw DataError(path + ": line " + std::to_string(line_no) +
                                    ": label must be 0 or 1, got \"" + cells[i] + "\"");
                s.label = static_cast<int>(v);
            } else {
                s.features.push_back(v);
            }
        }
        ds.samples.push_back(std::move(s));
    }
    validate(ds);
    return ds;
}

void write_csv(const Dataset& ds, std::ostream& out, const std::string& label_column) {
    for (const auto& name : ds.feature_names) out << name << ',';
    out << label_column << '\n';
    out.precision(17);
    for (const auto& s : ds.samples) {
        for (double v : s.features) out << v << ',';
        out << s.label << '\n';
    }
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    write_csv(ds, out, label_column);
}

Dataset generate_synthetic(std::size_t n_total, double fraud_fraction, std::size_t d,
                           double class_separation, std::uint64_t seed) {
    if (n_total < 2) throw DataError("generate_synthetic: n_total must be >= 2");
    if (d < 1) throw DataError("generate_synthetic: d must be >= 1");
    if (!(fraud_fraction > 0.0 && fraud_fraction < 1.0))
        throw DataError("generate_synthetic: fraud_fraction must lie in (0,1)");
    if (class_separation < 0.0)
        throw DataError("generate_synthetic: class_separation must be >= 0");

    const auto n_fraud = static_cast<std::size_t>(
        std::llround(static_cast<double>(n_total) * fraud_fraction));
    if (n_fraud == 0 || n_fraud == n_total)
        throw DataError("generate_synthetic: fraud_fraction " + std::to_string(fraud_fraction) +
                        " leaves one class empty at n_total " + std::to_string(n_total));

    const double shift = class_separation / std::sqrt(static_cast<double>(d));
    Dataset ds;
    ds.provenance = Provenance::Synthetic;
    ds.feature_names.reserve(d);
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));

    Rng rng(seed);
    ds.samples.reserve(n_total);
    for (std::size_t i = 0; i < n_total; ++i) {
        const int label = i < n_total - n_fraud ? 0 : 1;
        Sample s;
        s.label = label;
        s.features.reserve(d);
        for (std::size_t j = 0; j < d; ++j)
            s.features.push_back(rng.normal() + (label == 1 ? shift : 0.0));
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

namespace {

// Seeded shuffle of `indices`, then the first n_train go to train. Selection
// sets are re-sorted so each part keeps the input dataset's sample order.
void assign_partition(std::vector<std::size_t>& indices, std::size_t n_train, Rng& rng,
                      std::vector<std::size_t>& train_idx, std::vector<std::size_t>& test_idx) {
    rng.shuffle(indices);
    train_idx.insert(train_idx.end(), indices.begin(), indices.begin() + n_train);
    test_idx.insert(test_idx.end(), indices.begin() + n_train, indices.end());
}

}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw DataError("split: train_fraction must lie in (0,1)");
    if (ds.samples.empty()) throw DataError("split: dataset is empty");

    Rng rng(spec.seed);
    std::vector<std::size_t> train_idx, test_idx;

    if (spec.stratified) {
        require_both_classes(ds);
        for (int label : {0, 1}) {
            std::vector<std::size_t> indices;
            for (std::size_t i = 0; i < ds.samples.size(); ++i)
                if (ds.samples[i].label == label) indices.push_back(i);
            const auto n_train = static_cast<std::size_t>(
                std::llround(static_cast<double>(indices.size()) * spec.train_fraction));
            if (n_train == 0 || n_train == indices.size())
                throw DataError("split: class " + std::to_string(label) + " with " +
                                std::to_string(indices.size()) +
                                " samples would leave one partition empty");
            assign_partition(indices, n_train, rng, train_idx, test_idx);
        }
    } else {
        std::vector<std::size_t> indices(ds.samples.size());
        std::iota(indices.begin(), indices.end(), 0);
        const auto n_train = static_cast<std::size_t>(
            std::llround(static_cast<double>(indices.size()) * spec.train_fraction));
        if (n_train == 0 || n_train == indices.size())
            throw DataError("split: a partition would be empty");
        assign_partition(indices, n_train, rng, train_idx, test_idx);
    }

    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    auto take = [&](const std::vector<std::size_t>& idx) {
        Dataset part;
        part.feature_names = ds.feature_names;
        part.provenance = Provenance::SplitDerived;
        part.samples.reserve(idx.size());
        for (std::size_t i : idx) part.samples.push_back(ds.samples[i]);
        return part;
    };
    return {take(train_idx), take(test_idx)};
}

Dataset smote_oversample(const Dataset& train, const SmoteConfig& cfg) {
    if (cfg.k_neighbors < 1) throw DataError("smote: k_neighbors must be >= 1");
    if (!(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0))
        throw DataError("smote: target_ratio must lie in (0,1]");

    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < train.samples.size(); ++i)
        if (train.samples[i].label == 1) minority.push_back(i);
    const std::size_t m = minority.size();
    const std::size_t majority = train.samples.size() - m;

    if (m < 2) throw DataError("smote: minority class has fewer than 2 samples");
    if (static_cast<std::size_t>(cfg.k_neighbors) >= m)
        throw DataError("smote: k_neighbors (" + std::to_string(cfg.k_neighbors) +
                        ") must be smaller than the minority count (" + std::to_string(m) + ")");

    Dataset out;
    out.feature_names = train.feature_names;
    out.provenance = Provenance::SmoteAugmented;
    out.samples = train.samples;

    const auto wanted = static_cast<std::size_t>(
        std::ceil(cfg.target_ratio * static_cast<double>(majority)));
    if (wanted <= m) return out;
    const std::size_t n_synth = wanted - m;

    const std::size_t d = train.dim();
    auto sq_dist = [&](std::size_t a, std::size_t b) {
        const auto& xa = train.samples[a].features;
        const auto& xb = train.samples[b].features;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = xa[j] - xb[j];
            acc += diff * diff;
        }
        return acc;
    };

    // k nearest minority neighbors per minority point; ties break toward the
    // lower sample index.
    const std::size_t k = static_cast<std::size_t>(cfg.k_neighbors);
    std::vector<std::vector<std::size_t>> neighbors(m);
    for (std::size_t a = 0; a < m; ++a) {
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(m - 1);
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            order.emplace_back(sq_dist(minority[a], minority[b]), minority[b]);
        }
        std::sort(order.begin(), order.end());
        neighbors[a].reserve(k);
        for (std::size_t i = 0; i < k; ++i) neighbors[a].push_back(order[i].second);
    }

    Rng rng(cfg.seed);
    out.samples.reserve(out.samples.size() + n_synth);
    for (std::size_t s = 0; s < n_synth; ++s) {
        const std::size_t a = static_cast<std::size_t>(rng.below(m));
        const std::size_t nn = neighbors[a][rng.below(k)];
        const double u = rng.unit();
        const auto& base = train.samples[minority[a]].features;
        const auto& partner = train.samples[nn].features;
        Sample synth;
        synth.label = 1;
        synth.features.resize(d);
        for (std::size_t j = 0; j < d; ++j)
            synth.features[j] = base[j] + u * (partner[j] - base[j]);
        out.samples.push_back(std::move(synth));
    }
    return out;
}

FeatureScaler fit_scaler(const Dataset& fit_on) {
    if (fit_on.samples.empty()) throw DataError("fit_scaler: empty dataset");
    const std::size_t d = fit_on.dim();
    const double n = static_cast<double>(fit_on.size());
    FeatureScaler s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (const auto& sample : fit_on.samples)
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += sample.features[j];
    for (std::size_t j = 0; j < d; ++j) s.mean[j] /= n;
    for (const auto& sample : fit_on.samples)
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = sample.features[j] - s.mean[j];
            s.stddev[j] += diff * diff;
        }
    for (std::size_t j = 0; j < d; ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / n);
        if (s.stddev[j] == 0.0) {
            s.stddev[j] = 1.0;
            s.mean[j] = 0.0;  // constant column passes through unchanged
        }
    }
    return s;
}

Dataset apply_scaler(const FeatureScaler& s, const Dataset& ds) {
    if (s.mean.size() != ds.dim()) throw DataError("apply_scaler: dimension mismatch");
    Dataset out = ds;
    for (auto& sample : out.samples)
        for (std::size_t j = 0; j < sample.features.size(); ++j)
            sample.features[j] = (sample.features[j] - s.mean[j]) / s.stddev[j];
    return out;
}

}  // namespace fraudlab
