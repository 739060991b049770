#include "jitchrono/forest.hpp"

#include "jitchrono/error.hpp"
#include "jitchrono/parallel.hpp"
#include "jitchrono/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jitchrono {

namespace {

// Splits whose impurity decrease does not exceed this are treated as no gain.
constexpr double kMinDecrease = 1e-12;

constexpr int kJsonVersion = 1;

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& m, const ForestConfig& config, int mtry, std::uint64_t tree_seed)
        : m_(m), config_(config), mtry_(mtry), rng_(tree_seed) {}

    DecisionTree grow(std::vector<std::uint8_t>& oob_mask) {
        const std::size_t n = m_.rows();
        std::vector<std::size_t> sample(n);
        std::vector<std::uint8_t> drawn(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sample[i] = rng_.below(n);
            drawn[sample[i]] = 1;
        }
        oob_mask.assign(n, 0);
        for (std::size_t r = 0; r < n; ++r) oob_mask[r] = drawn[r] ? 0 : 1;
        return grow_on(std::move(sample));
    }

    DecisionTree grow_on(std::vector<std::size_t> sample) {
        samples_ = std::move(sample);
        const std::size_t n = samples_.size();

        struct Task {
            int node;
            std::size_t lo, hi;
            int depth;
        };
        nodes_.clear();
        nodes_.emplace_back();
        std::vector<Task> stack{{0, 0, n, 0}};
        while (!stack.empty()) {
            const Task task = stack.back();
            stack.pop_back();
            std::uint32_t pos = 0;
            for (std::size_t s = task.lo; s < task.hi; ++s) pos += m_.label(samples_[s]) ? 1u : 0u;
            const auto count = static_cast<std::uint32_t>(task.hi - task.lo);
            TreeNode& node = nodes_[static_cast<std::size_t>(task.node)];
            node.n_samples = count;
            node.pos = pos;
            node.neg = count - pos;

            const bool pure = pos == 0 || pos == count;
            const bool too_small = count < static_cast<std::uint32_t>(config_.min_samples_split);
            const bool too_deep = config_.max_depth > 0 && task.depth >= config_.max_depth;
            if (pure || too_small || too_deep) continue;

            const auto split = best_split(task.lo, task.hi, node.neg, node.pos);
            if (!split.found) continue;

            const auto mid = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(task.lo),
                                            samples_.begin() + static_cast<std::ptrdiff_t>(task.hi),
                                            [&](std::size_t r) { return m_.at(r, split.feature) <= split.threshold; });
            const auto cut = static_cast<std::size_t>(mid - samples_.begin());

            const int left = static_cast<int>(nodes_.size());
            nodes_.emplace_back();
            nodes_.emplace_back();
            TreeNode& parent = nodes_[static_cast<std::size_t>(task.node)];
            parent.feature = static_cast<int>(split.feature);
            parent.threshold = split.threshold;
            parent.impurity_decrease = split.decrease;
            parent.left = left;
            parent.right = left + 1;
            stack.push_back({left + 1, cut, task.hi, task.depth + 1});
            stack.push_back({left, task.lo, cut, task.depth + 1});
        }
        return DecisionTree(std::move(nodes_));
    }

private:
    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double decrease = 0.0;
    };

    Split best_split(std::size_t lo, std::size_t hi, std::uint32_t neg, std::uint32_t pos) {
        const std::size_t p = m_.cols();
        pool_.resize(p);
        std::iota(pool_.begin(), pool_.end(), std::size_t{0});
        for (int k = 0; k < mtry_; ++k) {
            const std::size_t j = static_cast<std::size_t>(k) + rng_.below(p - static_cast<std::size_t>(k));
            std::swap(pool_[static_cast<std::size_t>(k)], pool_[j]);
        }

        const double n = static_cast<double>(hi - lo);
        const double parent = gini(neg, pos);
        Split best;
        for (int k = 0; k < mtry_; ++k) {
            const std::size_t f = pool_[static_cast<std::size_t>(k)];
            scratch_.clear();
            for (std::size_t s = lo; s < hi; ++s)
                scratch_.emplace_back(m_.at(samples_[s], f), m_.label(samples_[s]) ? 1 : 0);
            std::sort(scratch_.begin(), scratch_.end());
            std::uint32_t left_pos = 0, left_neg = 0;
            for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
                (scratch_[i].second ? left_pos : left_neg) += 1;
                const double here = scratch_[i].first;
                const double next = scratch_[i + 1].first;
                if (here == next) continue;
                const double n_left = static_cast<double>(i + 1);
                const double child = (n_left * gini(left_neg, left_pos) +
                                      (n - n_left) * gini(neg - left_neg, pos - left_pos)) / n;
                const double decrease = parent - child;
                if (decrease <= kMinDecrease) continue;
                double threshold = here + (next - here) / 2.0;
                if (threshold >= next) threshold = here;
                const bool better = !best.found || decrease > best.decrease ||
                                    (decrease == best.decrease &&
                                     (f < best.feature || (f == best.feature && threshold < best.threshold)));
                if (better) best = {true, f, threshold, decrease};
            }
        }
        return best;
    }

    const FeatureMatrix& m_;
    const ForestConfig& config_;
    int mtry_;
    Rng rng_;
    std::vector<std::size_t> samples_;
    std::vector<std::size_t> pool_;
    std::vector<std::pair<double, int>> scratch_;
    std::vector<TreeNode> nodes_;
};

void check_width(std::span<const double> row, std::size_t expected) {
    if (row.size() != expected)
        throw Error(ErrorCode::DimensionMismatch,
                    "row has " + std::to_string(row.size()) + " values, forest expects " + std::to_string(expected));
}

}  // namespace

int ForestConfig::effective_mtry(std::size_t p) const {
    if (mtry > 0) return mtry;
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
}

void ForestConfig::validate(std::size_t p) const {
    if (n_trees < 1) throw Error(ErrorCode::InvalidArgument, "n_trees must be >= 1");
    if (p < 1) throw Error(ErrorCode::InvalidArgument, "no features to train on");
    const int m = effective_mtry(p);
    if (m < 1 || static_cast<std::size_t>(m) > p)
        throw Error(ErrorCode::InvalidArgument, "mtry must lie in [1, " + std::to_string(p) + "]");
    if (min_samples_split < 2) throw Error(ErrorCode::InvalidArgument, "min_samples_split must be >= 2");
    if (max_depth < 0) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 0 (0 = unlimited)");
}

double gini(std::uint64_t neg, std::uint64_t pos) {
    const std::uint64_t total = neg + pos;
    if (total == 0) throw Error(ErrorCode::InvalidArgument, "gini of an empty node");
    const double n = static_cast<double>(total);
    return 2.0 * static_cast<double>(neg) * static_cast<double>(pos) / (n * n);
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf())
        node = &nodes_[static_cast<std::size_t>(
            row[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
    return *node;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row, std::size_t feature, double replacement) const {
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf()) {
        const auto f = static_cast<std::size_t>(node->feature);
        const double x = f == feature ? replacement : row[f];
        node = &nodes_[static_cast<std::size_t>(x <= node->threshold ? node->left : node->right)];
    }
    return *node;
}

std::size_t DecisionTree::depth() const {
    std::size_t deepest = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.is_leaf()) {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return deepest;
}

RandomForest::RandomForest(std::vector<DecisionTree> trees, std::vector<std::vector<std::uint8_t>> oob_masks,
                           std::vector<std::string> feature_names, ForestConfig config)
    : trees_(std::move(trees)), oob_masks_(std::move(oob_masks)), feature_names_(std::move(feature_names)),
      config_(config) {
    if (trees_.size() != oob_masks_.size()) throw Error(ErrorCode::InvalidArgument, "one OOB mask per tree required");
}

double RandomForest::predict_proba(std::span<const double> row) const {
    check_width(row, feature_names_.size());
    double votes = 0.0;
    for (const auto& tree : trees_) votes += tree.leaf_for(row).vote();
    return votes / static_cast<double>(trees_.size());
}

std::vector<double> RandomForest::predict_proba(const FeatureMatrix& m, unsigned threads) const {
    if (m.cols() != feature_names_.size())
        throw Error(ErrorCode::DimensionMismatch, "matrix has " + std::to_string(m.cols()) +
                                                      " columns, forest expects " +
                                                      std::to_string(feature_names_.size()));
    std::vector<double> out(m.rows());
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (m.rows() + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t end = std::min(m.rows(), (c + 1) * kChunk);
        for (std::size_t r = c * kChunk; r < end; ++r) out[r] = predict_proba(m.row(r));
    });
    return out;
}

DecisionTree grow_tree(const FeatureMatrix& m, std::span<const std::size_t> sample, const ForestConfig& config,
                       std::uint64_t seed) {
    config.validate(m.cols());
    if (sample.empty()) throw Error(ErrorCode::InvalidArgument, "grow_tree: empty sample");
    for (auto r : sample)
        if (r >= m.rows()) throw Error(ErrorCode::InvalidArgument, "grow_tree: sample row out of range");
    TreeBuilder builder(m, config, config.effective_mtry(m.cols()), seed);
    return builder.grow_on(std::vector<std::size_t>(sample.begin(), sample.end()));
}

RandomForest train_forest(const FeatureMatrix& m, const ForestConfig& config, unsigned threads) {
    config.validate(m.cols());
    if (m.positives() == 0 || m.negatives() == 0)
        throw Error(ErrorCode::SingleClass, "train_forest: both classes must be present");
    const int mtry = config.effective_mtry(m.cols());
    const auto n_trees = static_cast<std::size_t>(config.n_trees);
    std::vector<DecisionTree> trees(n_trees);
    std::vector<std::vector<std::uint8_t>> masks(n_trees);
    parallel_for(n_trees, threads, [&](std::size_t t) {
        TreeBuilder builder(m, config, mtry, derive_seed(config.seed, "tree", {t}));
        trees[t] = builder.grow(masks[t]);
    });
    return RandomForest(std::move(trees), std::move(masks), m.feature_names(), config);
}

ImportanceVector importance_type1(const RandomForest& forest, const FeatureMatrix& m, unsigned threads) {
    const std::size_t p = forest.feature_names().size();
    if (m.cols() != p) throw Error(ErrorCode::DimensionMismatch, "importance_type1: column count differs from forest");
    const auto trees = forest.trees();
    const auto masks = forest.oob_masks();
    for (const auto& mask : masks)
        if (mask.size() != m.rows())
            throw Error(ErrorCode::DimensionMismatch, "importance_type1: matrix is not the training matrix");

    // Per tree: accuracy drop per feature, or empty when the tree has no OOB rows.
    std::vector<std::vector<double>> drops(trees.size());
    parallel_for(trees.size(), threads, [&](std::size_t t) {
        std::vector<std::size_t> oob;
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (masks[t][r]) oob.push_back(r);
        if (oob.empty()) return;
        const auto& tree = trees[t];
        auto accuracy_term = [&](std::size_t r, const TreeNode& leaf) {
            return 1.0 - std::abs((m.label(r) ? 1.0 : 0.0) - leaf.vote());
        };
        double base = 0.0;
        for (std::size_t r : oob) base += accuracy_term(r, tree.leaf_for(m.row(r)));

        std::vector<bool> used(p, false);
        for (const auto& node : tree.nodes())
            if (!node.is_leaf()) used[static_cast<std::size_t>(node.feature)] = true;

        std::vector<double> drop(p, 0.0);
        std::vector<double> permuted(oob.size());
        for (std::size_t f = 0; f < p; ++f) {
            // Permuting a feature the tree never reads cannot change its output.
            if (!used[f]) continue;
            for (std::size_t k = 0; k < oob.size(); ++k) permuted[k] = m.at(oob[k], f);
            Rng rng(derive_seed(forest.config().seed, "permute", {t, f}));
            rng.shuffle(permuted);
            double acc = 0.0;
            for (std::size_t k = 0; k < oob.size(); ++k)
                acc += accuracy_term(oob[k], tree.leaf_for(m.row(oob[k]), f, permuted[k]));
            drop[f] = (base - acc) / static_cast<double>(oob.size());
        }
        drops[t] = std::move(drop);
    });

    std::vector<double> total(p, 0.0);
    std::size_t contributing = 0;
    for (const auto& d : drops) {
        if (d.empty()) continue;
        ++contributing;
        for (std::size_t f = 0; f < p; ++f) total[f] += d[f];
    }
    if (contributing == 0) throw Error(ErrorCode::NoOob, "no tree has out-of-bag rows");

    ImportanceVector out;
    out.kind = ImportanceKind::TypeI;
    for (std::size_t f = 0; f < p; ++f)
        out.scores[forest.feature_names()[f]] = total[f] / static_cast<double>(contributing);
    return out;
}

ImportanceVector importance_type2(const RandomForest& forest) {
    const std::size_t p = forest.feature_names().size();
    std::vector<double> total(p, 0.0);
    for (const auto& tree : forest.trees()) {
        const double root = static_cast<double>(tree.root().n_samples);
        for (const auto& node : tree.nodes()) {
            if (node.is_leaf()) continue;
            total[static_cast<std::size_t>(node.feature)] +=
                static_cast<double>(node.n_samples) / root * node.impurity_decrease;
        }
    }
    ImportanceVector out;
    out.kind = ImportanceKind::TypeII;
    const double n_trees = static_cast<double>(forest.trees().size());
    for (std::size_t f = 0; f < p; ++f) out.scores[forest.feature_names()[f]] = total[f] / n_trees;
    return out;
}

std::string forest_to_json(const RandomForest& forest) {
    using nlohmann::json;
    const auto& c = forest.config();
    json doc;
    doc["format"] = "jitchrono-forest";
    doc["version"] = kJsonVersion;
    doc["config"] = {{"n_trees", c.n_trees},
                     {"mtry", c.mtry},
                     {"max_depth", c.max_depth},
                     {"min_samples_split", c.min_samples_split},
                     {"seed", c.seed}};
    doc["feature_names"] = forest.feature_names();
    json trees = json::array();
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
        json nodes = json::array();
        for (const auto& n : forest.trees()[t].nodes())
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.impurity_decrease, n.n_samples, n.neg, n.pos});
        std::vector<std::size_t> oob;
        const auto& mask = forest.oob_masks()[t];
        for (std::size_t r = 0; r < mask.size(); ++r)
            if (mask[r]) oob.push_back(r);
        trees.push_back({{"nodes", std::move(nodes)}, {"n_rows", mask.size()}, {"oob_rows", std::move(oob)}});
    }
    doc["trees"] = std::move(trees);
    return doc.dump();
}

RandomForest forest_from_json(const std::string& text) {
    using nlohmann::json;
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "jitchrono-forest") throw Error(ErrorCode::InvalidArgument, "not a forest document");
        if (doc.at("version").get<int>() != kJsonVersion)
            throw Error(ErrorCode::InvalidArgument, "unsupported forest document version");
        ForestConfig c;
        const auto& jc = doc.at("config");
        c.n_trees = jc.at("n_trees").get<int>();
        c.mtry = jc.at("mtry").get<int>();
        c.max_depth = jc.at("max_depth").get<int>();
        c.min_samples_split = jc.at("min_samples_split").get<int>();
        c.seed = jc.at("seed").get<std::uint64_t>();
        std::vector<DecisionTree> trees;
        std::vector<std::vector<std::uint8_t>> masks;
        for (const auto& jt : doc.at("trees")) {
            std::vector<TreeNode> nodes;
            for (const auto& jn : jt.at("nodes")) {
                TreeNode n;
                n.feature = jn.at(0).get<int>();
                n.threshold = jn.at(1).get<double>();
                n.left = jn.at(2).get<int>();
                n.right = jn.at(3).get<int>();
                n.impurity_decrease = jn.at(4).get<double>();
                n.n_samples = jn.at(5).get<std::uint32_t>();
                n.neg = jn.at(6).get<std::uint32_t>();
                n.pos = jn.at(7).get<std::uint32_t>();
                nodes.push_back(n);
            }
            trees.emplace_back(std::move(nodes));
            std::vector<std::uint8_t> mask(jt.at("n_rows").get<std::size_t>(), 0);
            for (const auto& r : jt.at("oob_rows")) mask.at(r.get<std::size_t>()) = 1;
            masks.push_back(std::move(mask));
        }
        return RandomForest(std::move(trees), std::move(masks), doc.at("feature_names").get<std::vector<std::string>>(),
                            c);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed forest document: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed forest document: ") + e.what());
    }
}

}  // namespace jitchrono
