#include "ftdf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "ftdf/error.hpp"
#include "ftdf/random.hpp"
#include "ftdf/text.hpp"

namespace ftdf {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), cells_(classes_.size() * classes_.size(), 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t count) {
    if (truth >= classes_.size() || predicted >= classes_.size())
        throw Error(Errc::UnknownLabel, "class index outside the label dictionary");
    cells_[truth * classes_.size() + predicted] += count;
    total_ += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw Error(Errc::ShapeMismatch, "confusion matrices use different classes");
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
    total_ += other.total_;
}

std::size_t ConfusionMatrix::correct() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < classes_.size(); ++i) c += at(i, i);
    return c;
}

EvalReport report_from_confusion(const ConfusionMatrix& confusion) {
    EvalReport report;
    report.confusion = confusion;
    const std::size_t n = confusion.num_classes();
    report.accuracy = confusion.total() == 0
                          ? 0.0
                          : static_cast<double>(confusion.correct()) / static_cast<double>(confusion.total());
    report.per_class.resize(n);
    double f_sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t tp = confusion.at(c, c), predicted = 0, actual = 0;
        for (std::size_t j = 0; j < n; ++j) {
            predicted += confusion.at(j, c);
            actual += confusion.at(c, j);
        }
        ClassScores& s = report.per_class[c];
        s.support = actual;
        s.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
        s.recall = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
        s.f1 = (s.precision + s.recall) == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
        f_sum += s.f1;
    }
    report.macro_f = n == 0 ? 0.0 : f_sum / static_cast<double>(n);
    return report;
}

EvalReport score(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                 const std::vector<std::string>& classes) {
    if (truth.size() != predicted.size())
        throw Error(Errc::LengthMismatch, "truth and prediction lengths differ");
    if (truth.empty()) throw Error(Errc::LengthMismatch, "nothing to score");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return report_from_confusion(cm);
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : config) out << k << " = " << v << '\n';
    out << "rows = " << confusion.total() << '\n';
    out << "accuracy = " << text::format_double(accuracy) << '\n';
    out << "macro_f = " << text::format_double(macro_f) << '\n';
    const auto& classes = confusion.classes();
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const auto& s = per_class[c];
        out << "class " << classes[c] << ": precision=" << text::format_double(s.precision)
            << " recall=" << text::format_double(s.recall) << " f1=" << text::format_double(s.f1)
            << " support=" << s.support << '\n';
    }
    out << "confusion (rows = true, columns = predicted):\n";
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out << classes[i] << ':';
        for (std::size_t j = 0; j < classes.size(); ++j) out << ' ' << confusion.at(i, j);
        out << '\n';
    }
    return out.str();
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    const auto& classes = confusion.classes();
    out << "class,precision,recall,f1,support\n";
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const auto& s = per_class[c];
        out << classes[c] << ',' << text::format_double(s.precision) << ',' << text::format_double(s.recall) << ','
            << text::format_double(s.f1) << ',' << s.support << '\n';
    }
    out << "true\\predicted";
    for (const auto& c : classes) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out << classes[i];
        for (std::size_t j = 0; j < classes.size(); ++j) out << ',' << confusion.at(i, j);
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

namespace {

/// Item indices grouped by label (labels sorted), each group in canonical order.
std::map<std::string, std::vector<std::size_t>> group_by_label(std::span<const std::string> labels,
                                                               std::span<const std::string> keys) {
    if (!keys.empty() && keys.size() != labels.size())
        throw Error(Errc::LengthMismatch, "keys and labels differ in length");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    if (!keys.empty()) {
        for (auto& [label, members] : groups) {
            std::stable_sort(members.begin(), members.end(),
                             [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
        }
    }
    return groups;
}

}  // namespace

SplitIndices stratified_split(std::span<const std::string> labels, double test_fraction, std::uint64_t seed,
                              std::span<const std::string> keys) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(Errc::InvalidConfig, "test fraction must lie in (0, 1)");
    SplitIndices split;
    for (auto& [label, members] : group_by_label(labels, keys)) {
        if (members.size() < 2)
            throw Error(Errc::ClassTooSmall, "class '" + label + "' has fewer than 2 members");
        Rng rng(derive_seed(seed, "split/" + label));
        rng.shuffle(members);
        const auto n = members.size();
        auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
        n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
        split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds, std::uint64_t seed,
                                          std::span<const std::string> keys) {
    if (folds < 2) throw Error(Errc::InvalidConfig, "at least 2 folds are required");
    std::vector<std::size_t> fold_of(labels.size(), 0);
    std::size_t cursor = 0;
    for (auto& [label, members] : group_by_label(labels, keys)) {
        if (members.size() < folds)
            throw Error(Errc::TooFewPerClass, "class '" + label + "' has " + std::to_string(members.size()) +
                                                  " members, fewer than " + std::to_string(folds) + " folds");
        Rng rng(derive_seed(seed, "folds/" + label));
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i) fold_of[members[i]] = (cursor + i) % folds;
        cursor = (cursor + members.size()) % folds;
    }
    return fold_of;
}

}  // namespace ftdf
