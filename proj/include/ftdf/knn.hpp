#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ftdf/matrix.hpp"
#include "ftdf/tree.hpp"

namespace ftdf {

enum class KnnMetric { Euclidean, Cosine };
enum class KnnWeighting { Uniform, InverseDistance };

std::string_view metric_name(KnnMetric m);
std::optional<KnnMetric> parse_metric(std::string_view name);
std::string_view weighting_name(KnnWeighting w);
std::optional<KnnWeighting> parse_weighting(std::string_view name);

double euclidean_distance(std::span<const double> a, std::span<const double> b);
/// 1 - cosine similarity; 1 when either vector is all zeros.
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct KnnModel {
    Matrix rows;
    std::vector<std::size_t> labels;
    LabelDictionary classes;
    std::size_t k = 1;
    KnnMetric metric = KnnMetric::Euclidean;
    KnnWeighting weighting = KnnWeighting::Uniform;

    /// Indices of the k nearest training rows, nearest first; equal
    /// distances resolve to the lower row index.
    std::vector<std::size_t> neighbors(std::span<const double> x) const;
};

/// Throws KTooLarge (k > rows or k == 0) and ShapeMismatch.
KnnModel train_knn(Matrix x, std::vector<std::size_t> y, LabelDictionary classes, std::size_t k,
                   KnnMetric metric = KnnMetric::Euclidean, KnnWeighting weighting = KnnWeighting::Uniform);

/// Weighted plurality over the neighbors; inverse-distance weighting lets
/// exact matches (distance 0) outvote everything else. Vote ties go to the
/// lowest class index.
std::size_t predict_knn(const KnnModel& model, std::span<const double> x);

}  // namespace ftdf
