#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ftdf {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> classes);

    void add(std::size_t truth, std::size_t predicted, std::size_t count = 1);
    void merge(const ConfusionMatrix& other);

    std::size_t num_classes() const { return classes_.size(); }
    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t at(std::size_t truth, std::size_t predicted) const { return cells_[truth * classes_.size() + predicted]; }
    std::size_t total() const { return total_; }
    std::size_t correct() const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::vector<std::string> classes_;
    std::vector<std::size_t> cells_;
    std::size_t total_ = 0;
};

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool operator==(const ClassScores&) const = default;
};

struct EvalReport {
    double accuracy = 0.0;
    double macro_f = 0.0;
    std::vector<ClassScores> per_class;
    ConfusionMatrix confusion;
    /// key = value lines echoing the configuration that produced the report.
    std::vector<std::pair<std::string, std::string>> config;

    std::string to_text() const;
    /// "class,precision,recall,f1,support" rows followed by the confusion grid.
    std::string to_table() const;
};

/// Precision, recall and F1 resolve 0/0 to 0; macro F is the unweighted
/// mean over every class of the matrix.
EvalReport report_from_confusion(const ConfusionMatrix& confusion);

/// Labels are class indices into `classes`. Throws LengthMismatch.
EvalReport score(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                 const std::vector<std::string>& classes);

// ---------------------------------------------------------------------------
// Splits

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class, floor(test_fraction * n_c) members (clamped to 1..n_c-1) go to
/// test. Members are put in canonical order (by `keys` when given, else by
/// position) before the seeded shuffle, so the split depends only on the
/// set of (label, key) items. Throws ClassTooSmall (a class with < 2
/// members) and InvalidConfig (fraction outside (0, 1)).
SplitIndices stratified_split(std::span<const std::string> labels, double test_fraction, std::uint64_t seed,
                              std::span<const std::string> keys = {});

/// Fold id in [0, folds) for every item; each class is spread round-robin
/// over the folds after a seeded shuffle. Throws TooFewPerClass when a
/// class has fewer members than folds, InvalidConfig when folds < 2.
std::vector<std::size_t> stratified_folds(std::span<const std::string> labels, std::size_t folds,
                                          std::uint64_t seed, std::span<const std::string> keys = {});

}  // namespace ftdf
