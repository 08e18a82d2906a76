#include <doctest.h>

#include <functional>
#include <random>

#include "ftdf/error.hpp"
#include "ftdf/tree.hpp"

using namespace ftdf;
using doctest::Approx;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an ftdf::Error");
    return Errc::InvalidConfig;
}

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.at(0).size());
    for (const auto& r : rows) m.append_row(r);
    return m;
}

/// Gaussian blobs, one centre per class, with some overlap.
std::pair<Matrix, std::vector<std::size_t>> blobs(std::uint64_t seed, std::size_t n, std::size_t classes,
                                                  std::size_t dims, double spread) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g(0, spread);
    Matrix x(dims);
    std::vector<std::size_t> y;
    std::vector<double> row(dims);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        for (std::size_t d = 0; d < dims; ++d) row[d] = static_cast<double>((c * (d + 1)) % classes) + g(gen);
        x.append_row(row);
        y.push_back(c);
    }
    return {x, y};
}

std::vector<std::uint32_t> subtree_counts(const DecisionTree& t, std::uint32_t i) {
    const auto& n = t.nodes()[i];
    if (n.is_leaf()) return n.counts;
    auto l = subtree_counts(t, n.left);
    auto r = subtree_counts(t, n.right);
    for (std::size_t c = 0; c < l.size(); ++c) l[c] += r[c];
    return l;
}

double total(const std::vector<std::uint32_t>& c) {
    double s = 0;
    for (auto v : c) s += v;
    return s;
}

}  // namespace

TEST_CASE("gini") {
    CHECK(gini(std::vector<std::uint32_t>{5, 5}) == Approx(0.5));
    CHECK(gini(std::vector<std::uint32_t>{10, 0}) == 0.0);
    CHECK(gini(std::vector<std::uint32_t>{1, 1, 1, 1}) == Approx(0.75));
    CHECK(code_of([] { gini(std::vector<std::uint32_t>{0, 0}); }) == Errc::EmptyCounts);
}

TEST_CASE("label dictionary") {
    auto d = LabelDictionary::from_labels(std::vector<std::string>{"b", "a", "b", "c"});
    CHECK(d.names() == std::vector<std::string>{"a", "b", "c"});
    CHECK(d.index_of("c") == 2);
    CHECK(d.encode(std::vector<std::string>{"c", "a"}) == std::vector<std::size_t>{2, 0});
    CHECK(code_of([&] { d.index_of("z"); }) == Errc::UnknownLabel);
}

TEST_CASE("train_tree examples") {
    auto x = from_rows({{0}, {1}});
    std::vector<std::size_t> y{0, 1};
    auto t = train_tree(x, y, 2);
    CHECK(t.split_count() == 1);
    CHECK(t.nodes()[0].threshold == 0.5);
    CHECK(t.predict(std::vector<double>{0}) == 0);
    CHECK(t.predict(std::vector<double>{1}) == 1);

    auto pure = train_tree(from_rows({{0}, {1}, {2}}), std::vector<std::size_t>{1, 1, 1}, 2);
    CHECK(pure.split_count() == 0);
    CHECK(pure.nodes().size() == 1);
    CHECK(pure.nodes()[0].counts == std::vector<std::uint32_t>{0, 3});

    auto mixed = train_tree(from_rows({{1, 1}, {1, 1}, {1, 1}}), std::vector<std::size_t>{0, 1, 1}, 2);
    CHECK(mixed.split_count() == 0);
    CHECK(mixed.nodes()[0].counts == std::vector<std::uint32_t>{1, 2});
    CHECK(mixed.predict(std::vector<double>{1, 1}) == 1);

    auto tie = train_tree(from_rows({{3}, {3}}), std::vector<std::size_t>{1, 0}, 2);
    CHECK(tie.predict(std::vector<double>{3}) == 0);
}

TEST_CASE("train_tree tie-breaks prefer the lower feature") {
    // Both features separate the classes perfectly.
    auto t = train_tree(from_rows({{0, 0}, {1, 1}}), std::vector<std::size_t>{0, 1}, 2);
    CHECK(t.nodes()[0].feature == 0);
}

TEST_CASE("train_tree errors") {
    Matrix empty(2);
    CHECK(code_of([&] { train_tree(empty, std::vector<std::size_t>{}, 2); }) == Errc::EmptyDataset);
    auto x = from_rows({{0}, {1}});
    CHECK(code_of([&] { train_tree(x, std::vector<std::size_t>{0}, 2); }) == Errc::ShapeMismatch);
    auto t = train_tree(x, std::vector<std::size_t>{0, 1}, 2);
    CHECK(code_of([&] { t.predict(std::vector<double>{0, 1}); }) == Errc::ShapeMismatch);
}

TEST_CASE("split budget is respected") {
    auto [x, y] = blobs(1, 400, 4, 3, 0.8);
    for (std::size_t budget : {1u, 2u, 5u, 17u}) {
        auto t = train_tree(x, y, 4, TreeParams{budget, 1});
        CHECK(t.split_count() <= budget);
        CHECK(t.split_count() == budget);  // overlapping blobs always have more to split
    }
    auto full = train_tree(x, y, 4);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) correct += full.predict(x.row(i)) == y[i];
    CHECK(correct == x.rows());  // no duplicate rows, so an unbounded tree fits exactly
}

TEST_CASE("min_leaf_size bounds leaf occupancy") {
    auto [x, y] = blobs(2, 300, 3, 2, 1.0);
    auto t = train_tree(x, y, 3, TreeParams{42000, 10});
    for (const auto& n : t.nodes())
        if (n.is_leaf()) CHECK(total(n.counts) >= 10);
}

TEST_CASE("tree structural invariants on bootstrap samples") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto [x, y] = blobs(trial, 200, 3, 4, 0.7);
        std::vector<std::size_t> sample(x.rows());
        for (auto& s : sample) s = gen() % x.rows();
        auto t = train_tree(x, y, 3, {}, sample);

        // pre-order layout: children follow their parent
        for (std::size_t i = 0; i < t.nodes().size(); ++i) {
            const auto& n = t.nodes()[i];
            if (n.is_leaf()) {
                CHECK(total(n.counts) >= 1);
            } else {
                CHECK(n.left == i + 1);
                CHECK(n.right > n.left);
                CHECK(n.right < t.nodes().size());
            }
        }
        CHECK(total(subtree_counts(t, 0)) == sample.size());

        // every split strictly lowers impurity
        for (std::size_t i = 0; i < t.nodes().size(); ++i) {
            const auto& n = t.nodes()[i];
            if (n.is_leaf()) continue;
            auto parent = subtree_counts(t, static_cast<std::uint32_t>(i));
            auto l = subtree_counts(t, n.left), r = subtree_counts(t, n.right);
            const double child = total(l) / total(parent) * gini(l) + total(r) / total(parent) * gini(r);
            CHECK(gini(parent) - child > 0.0);
        }

        // each sampled row lands in a leaf that counted its class
        for (auto s : sample) CHECK(t.leaf_for(x.row(s)).counts[y[s]] >= 1);
    }
}

TEST_CASE("strictly increasing feature transforms keep predictions") {
    auto [x, y] = blobs(9, 300, 3, 3, 0.9);
    Matrix warped = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        warped(i, 0) = std::exp(x(i, 0));
        warped(i, 1) = 5.0 * x(i, 1) - 3.0;
        warped(i, 2) = x(i, 2) * x(i, 2) * x(i, 2);
    }
    auto a = train_tree(x, y, 3);
    auto b = train_tree(warped, y, 3);
    CHECK(a.split_count() == b.split_count());
    for (std::size_t i = 0; i < x.rows(); ++i) CHECK(a.predict(x.row(i)) == b.predict(warped.row(i)));
}
