#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftdf/matrix.hpp"

namespace ftdf {

/// Maps appliance labels to dense class indices; index order is the
/// tie-break order everywhere.
class LabelDictionary {
public:
    LabelDictionary() = default;
    explicit LabelDictionary(std::vector<std::string> names);  // sorted + deduplicated
    static LabelDictionary from_labels(std::span<const std::string> labels);

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t index) const { return names_.at(index); }
    /// Throws UnknownLabel.
    std::size_t index_of(std::string_view name) const;
    std::vector<std::size_t> encode(std::span<const std::string> labels) const;

    bool operator==(const LabelDictionary&) const = default;

private:
    std::vector<std::string> names_;
};

/// 1 - sum (c_i / sum c)^2. Throws EmptyCounts when the counts sum to 0.
double gini(std::span<const std::uint32_t> counts);

struct TreeParams {
    std::size_t max_splits = 42000;
    std::size_t min_leaf_size = 1;

    bool operator==(const TreeParams&) const = default;
};

/// Internal nodes have feature >= 0 and two children; leaves have
/// feature == -1 and a class-count vector. Rows with x[feature] <= threshold
/// go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::vector<std::uint32_t> counts;

    bool is_leaf() const { return feature < 0; }
    /// Most frequent class, lowest index on ties.
    std::size_t majority() const;

    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    DecisionTree(std::vector<TreeNode> nodes, std::size_t num_features, std::size_t num_classes);

    /// Nodes are stored in pre-order; nodes()[0] is the root.
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t num_features() const { return num_features_; }
    std::size_t num_classes() const { return num_classes_; }
    std::size_t split_count() const;
    std::size_t depth() const;

    /// Throws ShapeMismatch when the row width differs from training.
    const TreeNode& leaf_for(std::span<const double> x) const;
    std::size_t predict(std::span<const double> x) const { return leaf_for(x).majority(); }

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
    std::size_t num_features_ = 0;
    std::size_t num_classes_ = 0;
};

/// Greedy CART with Gini impurity. Nodes are expanded breadth-first until
/// max_splits is reached; a node becomes a leaf when it is pure, has fewer
/// than 2 * min_leaf_size rows, or has no split with positive gain.
/// Candidate thresholds are midpoints between consecutive distinct values;
/// equal gains resolve to the lower feature index, then the lower threshold.
///
/// `sample` lists training row indices (repeats allowed, as in a bootstrap
/// sample); empty means every row once. Labels are class indices.
/// Throws EmptyDataset and ShapeMismatch.
DecisionTree train_tree(const Matrix& x, std::span<const std::size_t> y, std::size_t num_classes,
                        const TreeParams& params = {}, std::span<const std::size_t> sample = {});

}  // namespace ftdf
