#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftdf/fusion.hpp"
#include "ftdf/tree.hpp"

namespace ftdf {

/// Everything needed to turn a raw trace into classifier rows.
struct PipelineMeta {
    std::size_t window_len = 1024;
    double overlap = kDefaultOverlap;
    FeatureScheme scheme = FeatureScheme::fused();
    DescriptorParams params;
    Normalizer normalizer;

    bool operator==(const PipelineMeta&) const = default;
};

struct EbtParams {
    std::size_t n_trees = 30;
    TreeParams tree;
    /// Off only for the degenerate single-tree baseline and tests.
    bool bootstrap = true;

    bool operator==(const EbtParams&) const = default;
};

/// Bootstrap-aggregated CART trees voting by plurality.
struct BaggedEnsemble {
    std::vector<DecisionTree> trees;
    EbtParams params;
    std::uint64_t seed = 0;
    LabelDictionary classes;
    std::vector<std::string> columns;
    std::optional<PipelineMeta> pipeline;

    std::size_t num_features() const { return columns.size(); }

    /// Plurality class index; vote ties go to the lowest dictionary index.
    /// Throws ShapeMismatch.
    std::size_t predict(std::span<const double> x) const;
    const std::string& predict_label(std::span<const double> x) const { return classes.name(predict(x)); }
    std::vector<std::size_t> predict_all(const Matrix& x) const;
    std::vector<std::uint32_t> votes(std::span<const double> x) const;

    bool operator==(const BaggedEnsemble&) const = default;
};

/// n draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

/// Seed of tree t: derive_seed(master, "tree", t).
std::uint64_t tree_seed(std::uint64_t master, std::size_t t);

/// Trees are independent, so `threads` only changes wall time.
BaggedEnsemble train_ebt(const Matrix& x, std::span<const std::size_t> y, const LabelDictionary& classes,
                         const EbtParams& params, std::uint64_t seed, std::size_t threads = 1);

/// Convenience overload taking string labels and a column-named matrix.
BaggedEnsemble train_ebt(const FusedFeatureMatrix& data, const EbtParams& params, std::uint64_t seed,
                         std::size_t threads = 1);

}  // namespace ftdf
