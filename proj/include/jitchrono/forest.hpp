#pragma once

#include "jitchrono/preprocess.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace jitchrono {

struct ForestConfig {
    int n_trees = 500;
    int mtry = 0;       // 0: floor(sqrt(p))
    int max_depth = 0;  // 0: unlimited
    int min_samples_split = 2;
    std::uint64_t seed = 0;

    /// Resolved features-per-split for p features.
    int effective_mtry(std::size_t p) const;
    /// Throws InvalidArgument when the configuration is unusable for p features.
    void validate(std::size_t p) const;

    friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

/// Internal when feature >= 0; rows with x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double impurity_decrease = 0.0;  // parent gini minus weighted child gini
    std::uint32_t n_samples = 0;
    std::uint32_t neg = 0;
    std::uint32_t pos = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    /// 1 when the leaf's positives outnumber its negatives, 0 when fewer, 0.5 on a tie.
    double vote() const noexcept { return pos > neg ? 1.0 : (pos < neg ? 0.0 : 0.5); }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    const TreeNode& leaf_for(std::span<const double> row) const;
    /// Routes with row[feature] replaced by `replacement`.
    const TreeNode& leaf_for(std::span<const double> row, std::size_t feature, double replacement) const;
    std::size_t depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

/// Binary Gini impurity 2q(1-q) with q = pos / (neg + pos).
double gini(std::uint64_t neg, std::uint64_t pos);

class RandomForest {
public:
    RandomForest(std::vector<DecisionTree> trees, std::vector<std::vector<std::uint8_t>> oob_masks,
                 std::vector<std::string> feature_names, ForestConfig config);

    std::span<const DecisionTree> trees() const noexcept { return trees_; }
    /// oob_masks()[t][r] != 0 when training row r was not drawn for tree t.
    std::span<const std::vector<std::uint8_t>> oob_masks() const noexcept { return oob_masks_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const ForestConfig& config() const noexcept { return config_; }

    /// Fraction of trees voting positive; a tied leaf contributes one half.
    double predict_proba(std::span<const double> row) const;
    bool classify(std::span<const double> row) const { return predict_proba(row) >= 0.5; }
    std::vector<double> predict_proba(const FeatureMatrix& m, unsigned threads = 1) const;

    friend bool operator==(const RandomForest&, const RandomForest&) = default;

private:
    std::vector<DecisionTree> trees_;
    std::vector<std::vector<std::uint8_t>> oob_masks_;
    std::vector<std::string> feature_names_;
    ForestConfig config_;
};

/// Grows one tree on `sample` (row indexes into m, repeats allowed) without
/// bootstrapping. `seed` drives the per-node feature sampling.
DecisionTree grow_tree(const FeatureMatrix& m, std::span<const std::size_t> sample, const ForestConfig& config,
                       std::uint64_t seed);

/// Trees are grown from per-tree seeds derived from config.seed, so the result
/// does not depend on `threads`.
RandomForest train_forest(const FeatureMatrix& m, const ForestConfig& config, unsigned threads = 1);

enum class ImportanceKind { TypeI, TypeII };

struct ImportanceVector {
    ImportanceKind kind = ImportanceKind::TypeII;
    std::map<std::string, double> scores;

    double operator[](const std::string& feature) const {
        const auto it = scores.find(feature);
        return it == scores.end() ? 0.0 : it->second;
    }
};

/// Out-of-bag permutation importance: per tree, OOB accuracy minus OOB accuracy
/// with one feature's values permuted among the OOB rows, averaged over trees
/// that have OOB rows. `m` must be the matrix the forest was trained on.
/// Throws NoOob when no tree has an OOB row.
ImportanceVector importance_type1(const RandomForest& forest, const FeatureMatrix& m, unsigned threads = 1);

/// Mean decrease in Gini impurity, each node weighted by its share of the root sample.
ImportanceVector importance_type2(const RandomForest& forest);

std::string forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(const std::string& text);

}  // namespace jitchrono
