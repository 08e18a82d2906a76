#include <doctest.h>

#include <random>

#include "ftdf/error.hpp"
#include "ftdf/knn.hpp"
#include "oracle.hpp"

using namespace ftdf;
using doctest::Approx;
using V = std::vector<double>;

namespace {

Matrix from_rows(const std::vector<V>& rows) {
    Matrix m(rows.at(0).size());
    for (const auto& r : rows) m.append_row(r);
    return m;
}

}  // namespace

TEST_CASE("distances") {
    CHECK(euclidean_distance(V{0, 0}, V{3, 4}) == 5.0);
    CHECK(cosine_distance(V{1, 0}, V{0, 1}) == Approx(1.0));
    CHECK(cosine_distance(V{1, 1}, V{2, 2}) == Approx(0.0).epsilon(1e-12));
    CHECK(cosine_distance(V{1, 0}, V{-1, 0}) == Approx(2.0));
    CHECK(cosine_distance(V{0, 0}, V{1, 2}) == 1.0);
    for (auto m : {KnnMetric::Euclidean, KnnMetric::Cosine}) CHECK(parse_metric(metric_name(m)) == m);
    for (auto w : {KnnWeighting::Uniform, KnnWeighting::InverseDistance}) CHECK(parse_weighting(weighting_name(w)) == w);
}

TEST_CASE("knn examples") {
    auto x = from_rows({{0, 0}, {1, 1}, {5, 5}, {6, 6}, {7, 7}});
    std::vector<std::size_t> y{0, 0, 1, 1, 1};
    auto classes = LabelDictionary({"a", "b"});
    auto one = train_knn(x, y, classes, 1);
    CHECK(predict_knn(one, V{1, 1}) == 0);
    CHECK(predict_knn(one, V{5, 5}) == 1);
    auto all = train_knn(x, y, classes, 5);
    CHECK(predict_knn(all, V{0, 0}) == 1);  // global majority

    auto inv = train_knn(x, y, classes, 5, KnnMetric::Euclidean, KnnWeighting::InverseDistance);
    CHECK(predict_knn(inv, V{0, 0}) == 0);  // an exact match outvotes the rest
    CHECK(predict_knn(inv, V{0.5, 0.5}) == 0);

    CHECK_THROWS_AS(train_knn(x, y, classes, 6), Error);
    CHECK_THROWS_AS(train_knn(x, y, classes, 0), Error);
    CHECK_THROWS_AS(predict_knn(one, V{1}), Error);
}

TEST_CASE("neighbour ties resolve to the lower row") {
    auto x = from_rows({{1}, {-1}, {1}});
    auto m = train_knn(x, {1, 0, 0}, LabelDictionary({"a", "b"}), 2);
    CHECK(m.neighbors(V{0}) == std::vector<std::size_t>{0, 1});
    CHECK(predict_knn(m, V{0}) == 0);  // 1 vote each, lower class wins
}

TEST_CASE("knn matches an exhaustive distance sort") {
    std::mt19937_64 gen(50);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<V> rows(50, V(4));
        std::vector<std::size_t> y;
        for (auto& r : rows) {
            for (auto& v : r) v = g(gen);
            y.push_back(gen() % 3);
        }
        auto model = train_knn(from_rows(rows), y, LabelDictionary({"a", "b", "c"}), 5);
        for (int q = 0; q < 20; ++q) {
            V query(4);
            for (auto& v : query) v = g(gen);
            CHECK(predict_knn(model, query) == oracle::knn_vote(rows, y, 3, query, 5));
        }
    }
}
