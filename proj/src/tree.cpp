#include "ftdf/tree.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

#include "ftdf/error.hpp"

namespace ftdf {

LabelDictionary::LabelDictionary(std::vector<std::string> names) : names_(std::move(names)) {
    std::sort(names_.begin(), names_.end());
    names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
}

LabelDictionary LabelDictionary::from_labels(std::span<const std::string> labels) {
    return LabelDictionary(std::vector<std::string>(labels.begin(), labels.end()));
}

std::size_t LabelDictionary::index_of(std::string_view name) const {
    const auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) throw Error(Errc::UnknownLabel, "unknown label '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

std::vector<std::size_t> LabelDictionary::encode(std::span<const std::string> labels) const {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(index_of(l));
    return out;
}

double gini(std::span<const std::uint32_t> counts) {
    double total = 0.0;
    for (auto c : counts) total += c;
    if (total <= 0.0) throw Error(Errc::EmptyCounts, "gini of an empty node");
    double sum_sq = 0.0;
    for (auto c : counts) sum_sq += static_cast<double>(c) * static_cast<double>(c);
    return 1.0 - sum_sq / (total * total);
}

std::size_t TreeNode::majority() const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[best]) best = c;
    return best;
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t num_features, std::size_t num_classes)
    : nodes_(std::move(nodes)), num_features_(num_features), num_classes_(num_classes) {}

std::size_t DecisionTree::split_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::function<std::size_t(std::uint32_t)> walk = [&](std::uint32_t i) -> std::size_t {
        const auto& n = nodes_[i];
        if (n.is_leaf()) return 0;
        return 1 + std::max(walk(n.left), walk(n.right));
    };
    return walk(0);
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
    if (x.size() != num_features_)
        throw Error(Errc::ShapeMismatch, "row has " + std::to_string(x.size()) + " features, tree expects " +
                                             std::to_string(num_features_));
    std::uint32_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i];
}

namespace {

constexpr double kMinGain = 1e-12;

// A pending node: per feature, the positions of its sample rows sorted by
// that feature's value (ties by position).
struct WorkItem {
    std::uint32_t node;
    std::vector<std::vector<std::uint32_t>> sorted;
};

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

/// Weighted child impurity with the parent's size folded in:
/// (nL/n) gini(L) + (nR/n) gini(R), computed only from integer counts.
double children_impurity(double n_left, double sq_left, double n_right, double sq_right, double n) {
    const double gl = 1.0 - sq_left / (n_left * n_left);
    const double gr = 1.0 - sq_right / (n_right * n_right);
    return (n_left / n) * gl + (n_right / n) * gr;
}

}  // namespace

DecisionTree train_tree(const Matrix& x, std::span<const std::size_t> y, std::size_t num_classes,
                        const TreeParams& params, std::span<const std::size_t> sample) {
    if (x.rows() == 0) throw Error(Errc::EmptyDataset, "no training rows");
    if (y.size() != x.rows()) throw Error(Errc::ShapeMismatch, "label count differs from row count");
    if (num_classes == 0) throw Error(Errc::EmptyDataset, "no classes");
    for (auto label : y)
        if (label >= num_classes) throw Error(Errc::UnknownLabel, "label index outside the class range");
    const std::size_t min_leaf = std::max<std::size_t>(1, params.min_leaf_size);

    std::vector<std::size_t> rows;
    if (sample.empty()) {
        rows.resize(x.rows());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    } else {
        rows.assign(sample.begin(), sample.end());
        for (auto r : rows)
            if (r >= x.rows()) throw Error(Errc::ShapeMismatch, "sample index outside the matrix");
    }
    const std::size_t m = rows.size();
    const std::size_t num_features = x.cols();
    const auto value = [&](std::uint32_t pos, std::size_t f) { return x(rows[pos], f); };
    const auto label_of = [&](std::uint32_t pos) { return y[rows[pos]]; };

    WorkItem root{0, std::vector<std::vector<std::uint32_t>>(num_features)};
    for (std::size_t f = 0; f < num_features; ++f) {
        auto& order = root.sorted[f];
        order.resize(m);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return value(a, f) < value(b, f); });
    }
    // Zero-width matrices still need the node's members.
    std::vector<std::uint32_t> root_members(m);
    std::iota(root_members.begin(), root_members.end(), 0u);

    std::vector<TreeNode> nodes(1);
    std::deque<std::pair<WorkItem, std::vector<std::uint32_t>>> queue;
    queue.emplace_back(std::move(root), std::move(root_members));
    std::size_t splits = 0;
    std::vector<char> goes_left(m, 0);
    std::vector<std::uint32_t> left_counts(num_classes);

    while (!queue.empty()) {
        auto [item, members] = std::move(queue.front());
        queue.pop_front();
        const std::size_t n = members.size();

        std::vector<std::uint32_t> counts(num_classes, 0);
        for (auto pos : members) ++counts[label_of(pos)];
        double sq = 0.0;
        for (auto c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
        const double nd = static_cast<double>(n);
        const double parent_gini = 1.0 - sq / (nd * nd);
        const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;

        SplitChoice best;
        if (!pure && n >= 2 * min_leaf && splits < params.max_splits) {
            for (std::size_t f = 0; f < num_features; ++f) {
                const auto& order = item.sorted[f];
                std::fill(left_counts.begin(), left_counts.end(), 0u);
                double sq_left = 0.0, sq_right = sq;
                for (std::size_t i = 0; i + 1 < n; ++i) {
                    const std::size_t c = label_of(order[i]);
                    const double before_left = left_counts[c];
                    const double before_right = static_cast<double>(counts[c]) - before_left;
                    sq_left += 2.0 * before_left + 1.0;
                    sq_right -= 2.0 * before_right - 1.0;
                    ++left_counts[c];
                    const double v = value(order[i], f);
                    const double next = value(order[i + 1], f);
                    if (!(v < next)) continue;
                    const std::size_t n_left = i + 1;
                    const std::size_t n_right = n - n_left;
                    if (n_left < min_leaf || n_right < min_leaf) continue;
                    const double gain = parent_gini - children_impurity(static_cast<double>(n_left), sq_left,
                                                                        static_cast<double>(n_right), sq_right, nd);
                    if (gain > kMinGain && gain > best.gain) {
                        double threshold = 0.5 * (v + next);
                        if (!(threshold < next)) threshold = v;
                        best = {gain, static_cast<int>(f), threshold};
                    }
                }
            }
        }

        TreeNode& node = nodes[item.node];
        if (best.feature < 0) {
            node.counts = std::move(counts);
            continue;
        }

        ++splits;
        node.feature = best.feature;
        node.threshold = best.threshold;
        const auto f_split = static_cast<std::size_t>(best.feature);
        for (auto pos : members) goes_left[pos] = value(pos, f_split) <= best.threshold ? 1 : 0;

        WorkItem left{static_cast<std::uint32_t>(nodes.size()), std::vector<std::vector<std::uint32_t>>(num_features)};
        WorkItem right{static_cast<std::uint32_t>(nodes.size() + 1),
                       std::vector<std::vector<std::uint32_t>>(num_features)};
        node.left = left.node;
        node.right = right.node;
        nodes.emplace_back();
        nodes.emplace_back();  // `node` is dangling from here on

        for (std::size_t f = 0; f < num_features; ++f) {
            for (auto pos : item.sorted[f]) (goes_left[pos] ? left.sorted[f] : right.sorted[f]).push_back(pos);
            std::vector<std::uint32_t>().swap(item.sorted[f]);
        }
        std::vector<std::uint32_t> left_members, right_members;
        for (auto pos : members) (goes_left[pos] ? left_members : right_members).push_back(pos);
        queue.emplace_back(std::move(left), std::move(left_members));
        queue.emplace_back(std::move(right), std::move(right_members));
    }

    // Renumber breadth-first ids into pre-order.
    std::vector<TreeNode> ordered;
    ordered.reserve(nodes.size());
    std::function<std::uint32_t(std::uint32_t)> emit = [&](std::uint32_t id) -> std::uint32_t {
        const auto index = static_cast<std::uint32_t>(ordered.size());
        ordered.push_back(nodes[id]);
        if (!nodes[id].is_leaf()) {
            const auto l = emit(nodes[id].left);
            const auto r = emit(nodes[id].right);
            ordered[index].left = l;
            ordered[index].right = r;
        }
        return index;
    };
    emit(0);
    return DecisionTree(std::move(ordered), num_features, num_classes);
}

}  // namespace ftdf
