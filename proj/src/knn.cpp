#include "ftdf/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ftdf/error.hpp"

namespace ftdf {

std::string_view metric_name(KnnMetric m) { return m == KnnMetric::Euclidean ? "euclidean" : "cosine"; }

std::optional<KnnMetric> parse_metric(std::string_view name) {
    if (name == "euclidean") return KnnMetric::Euclidean;
    if (name == "cosine") return KnnMetric::Cosine;
    return std::nullopt;
}

std::string_view weighting_name(KnnWeighting w) { return w == KnnWeighting::Uniform ? "uniform" : "inverse"; }

std::optional<KnnWeighting> parse_weighting(std::string_view name) {
    if (name == "uniform") return KnnWeighting::Uniform;
    if (name == "inverse") return KnnWeighting::InverseDistance;
    return std::nullopt;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

KnnModel train_knn(Matrix x, std::vector<std::size_t> y, LabelDictionary classes, std::size_t k, KnnMetric metric,
                   KnnWeighting weighting) {
    if (y.size() != x.rows()) throw Error(Errc::ShapeMismatch, "label count differs from row count");
    if (k == 0 || k > x.rows())
        throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " with " + std::to_string(x.rows()) + " rows");
    for (auto label : y)
        if (label >= classes.size()) throw Error(Errc::UnknownLabel, "label index outside the dictionary");
    return KnnModel{std::move(x), std::move(y), std::move(classes), k, metric, weighting};
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> x) const {
    if (x.size() != rows.cols()) throw Error(Errc::ShapeMismatch, "query width differs from training width");
    const std::size_t n = rows.rows();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i)
        dist[i] = metric == KnnMetric::Euclidean ? euclidean_distance(rows.row(i), x) : cosine_distance(rows.row(i), x);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
    order.resize(k);
    return order;
}

std::size_t predict_knn(const KnnModel& model, std::span<const double> x) {
    const auto nearest = model.neighbors(x);
    std::vector<double> weight(model.classes.size(), 0.0);
    if (model.weighting == KnnWeighting::Uniform) {
        for (auto i : nearest) weight[model.labels[i]] += 1.0;
    } else {
        std::vector<double> d(nearest.size());
        bool exact = false;
        for (std::size_t j = 0; j < nearest.size(); ++j) {
            const auto row = model.rows.row(nearest[j]);
            d[j] = model.metric == KnnMetric::Euclidean ? euclidean_distance(row, x) : cosine_distance(row, x);
            exact = exact || d[j] == 0.0;
        }
        for (std::size_t j = 0; j < nearest.size(); ++j) {
            if (exact)
                weight[model.labels[nearest[j]]] += d[j] == 0.0 ? 1.0 : 0.0;
            else
                weight[model.labels[nearest[j]]] += 1.0 / d[j];
        }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < weight.size(); ++c)
        if (weight[c] > weight[best]) best = c;
    return best;
}

}  // namespace ftdf
