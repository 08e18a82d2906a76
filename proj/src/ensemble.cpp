#include "ftdf/ensemble.hpp"

#include "ftdf/error.hpp"
#include "ftdf/parallel.hpp"
#include "ftdf/random.hpp"

namespace ftdf {

std::vector<std::uint32_t> BaggedEnsemble::votes(std::span<const double> x) const {
    if (x.size() != num_features())
        throw Error(Errc::ShapeMismatch, "row has " + std::to_string(x.size()) + " features, model expects " +
                                             std::to_string(num_features()));
    std::vector<std::uint32_t> tally(classes.size(), 0);
    for (const auto& tree : trees) ++tally[tree.predict(x)];
    return tally;
}

std::size_t BaggedEnsemble::predict(std::span<const double> x) const {
    const auto tally = votes(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < tally.size(); ++c)
        if (tally[c] > tally[best]) best = c;
    return best;
}

std::vector<std::size_t> BaggedEnsemble::predict_all(const Matrix& x) const {
    std::vector<std::size_t> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
    return out;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
    return idx;
}

std::uint64_t tree_seed(std::uint64_t master, std::size_t t) { return derive_seed(master, "tree", t); }

BaggedEnsemble train_ebt(const Matrix& x, std::span<const std::size_t> y, const LabelDictionary& classes,
                         const EbtParams& params, std::uint64_t seed, std::size_t threads) {
    if (params.n_trees < 1) throw Error(Errc::InvalidConfig, "an ensemble needs at least one tree");
    if (x.rows() == 0) throw Error(Errc::EmptyDataset, "no training rows");
    BaggedEnsemble model;
    model.params = params;
    model.seed = seed;
    model.classes = classes;
    model.columns.resize(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) model.columns[j] = "f" + std::to_string(j);
    model.trees.resize(params.n_trees);
    parallel_for(params.n_trees, threads, [&](std::size_t t) {
        if (params.bootstrap) {
            const auto sample = bootstrap_indices(x.rows(), tree_seed(seed, t));
            model.trees[t] = train_tree(x, y, classes.size(), params.tree, sample);
        } else {
            model.trees[t] = train_tree(x, y, classes.size(), params.tree);
        }
    });
    return model;
}

BaggedEnsemble train_ebt(const FusedFeatureMatrix& data, const EbtParams& params, std::uint64_t seed,
                         std::size_t threads) {
    const auto classes = LabelDictionary::from_labels(data.labels);
    const auto y = classes.encode(data.labels);
    auto model = train_ebt(data.features, y, classes, params, seed, threads);
    model.columns = data.columns;
    return model;
}

}  // namespace ftdf
