#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftdf/descriptors.hpp"
#include "ftdf/matrix.hpp"

namespace ftdf {

struct DescriptorPair {
    Descriptor first;
    Descriptor second;
    bool operator==(const DescriptorPair&) const = default;
};

inline constexpr std::size_t kMaxLag = 8;

/// fTDF layout: each pair forms a 2-vector per window; a branch scores the
/// inner product of the current pair-vector with the one `lag` windows back,
/// and the two branch scores are multiplied.
struct FusionConfig {
    DescriptorPair pair_a{Descriptor::MADF, Descriptor::IAMF};
    DescriptorPair pair_b{Descriptor::RMSF, Descriptor::WLF};
    std::vector<std::size_t> lags{1, 2, 3};  // ascending, unique
    bool include_raw = true;

    /// Four distinct descriptors; lags non-empty, ascending, within 1..kMaxLag.
    void validate() const;
    std::size_t max_lag() const { return lags.empty() ? 0 : lags.back(); }
    /// [a.first, a.second, b.first, b.second]
    std::array<Descriptor, 4> descriptors() const;
    std::vector<std::string> column_names() const;

    bool operator==(const FusionConfig&) const = default;
};

/// Either one raw descriptor (one column, every window) or the fused layout.
struct FeatureScheme {
    std::optional<Descriptor> single;  // nullopt = fTDF
    FusionConfig fusion;

    static FeatureScheme fused(FusionConfig cfg = {}) { return {std::nullopt, std::move(cfg)}; }
    static FeatureScheme only(Descriptor d) { return {d, {}}; }

    bool is_fused() const { return !single.has_value(); }
    std::string name() const;  // "fTDF" or the descriptor name
    std::vector<Descriptor> descriptors() const;
    std::vector<std::string> column_names() const;
    /// Windows dropped at the start of every trace.
    std::size_t skipped_windows() const { return is_fused() ? fusion.max_lag() : 0; }
    void validate() const;

    bool operator==(const FeatureScheme&) const = default;
};

struct ColumnStats {
    double mean = 0.0;
    double stddev = 1.0;
    bool operator==(const ColumnStats&) const = default;
};

inline constexpr double kMinStddev = 1e-12;

/// Population mean and standard deviation; stddev below kMinStddev becomes 1.
/// Throws InsufficientData for fewer than 2 values.
ColumnStats fit_column(std::span<const double> values);

/// Per-descriptor z-score parameters.
struct Normalizer {
    std::vector<Descriptor> descriptors;
    std::vector<ColumnStats> stats;

    const ColumnStats& stats_for(Descriptor d) const;
    double apply(Descriptor d, double value) const;
    std::vector<double> apply(const FeatureSeries& series) const;

    bool operator==(const Normalizer&) const = default;
};

/// All descriptor series computed for one trace under one plan.
struct TraceFeatures {
    std::string trace_id;
    std::string label;
    WindowPlan plan;
    std::map<Descriptor, FeatureSeries> series;

    const FeatureSeries& at(Descriptor d) const;
};

TraceFeatures extract_trace_features(const PowerTrace& trace, const WindowPlan& plan,
                                     std::span<const Descriptor> descriptors,
                                     const DescriptorParams& params = {});

/// Fits each descriptor over every window of the given training traces.
Normalizer fit_normalizer(std::span<const TraceFeatures> training, std::span<const Descriptor> descriptors);

/// sA(k) * sA(k-n) + sB(k) * sB(k-n) with 1-based window index k.
/// Throws LagOutOfRange unless n < k <= size.
double branch_correlation(std::span<const double> series_a, std::span<const double> series_b, std::size_t k,
                          std::size_t lag);

/// Classifier input: one row per retained window, label per row.
struct FusedFeatureMatrix {
    std::vector<std::string> columns;
    Matrix features;
    std::vector<std::string> labels;
    std::vector<std::string> trace_ids;
    std::vector<std::size_t> window_index;

    std::size_t rows() const { return labels.size(); }
    /// Throws ShapeMismatch when column layouts differ.
    void append(const FusedFeatureMatrix& other);
};

/// fTDF rows for one trace. `series` holds the four raw (unnormalized)
/// series in cfg.descriptors() order, all sharing one plan.
/// Throws PlanMismatch and TooFewWindows (K <= max lag).
FusedFeatureMatrix ftdf(std::span<const FeatureSeries> series, const FusionConfig& cfg, const Normalizer& norm,
                        const std::string& label);

/// Rows for one trace under any scheme.
FusedFeatureMatrix build_rows(const TraceFeatures& features, const FeatureScheme& scheme, const Normalizer& norm);

/// Header of column names plus "label"; one line per row.
void write_matrix(const std::filesystem::path& path, const FusedFeatureMatrix& matrix);
FusedFeatureMatrix read_matrix(const std::filesystem::path& path);

struct DatasetSplit {
    FusedFeatureMatrix train;
    FusedFeatureMatrix test;
    Normalizer normalizer;
    std::vector<std::string> train_traces;
    std::vector<std::string> test_traces;
};

/// Trace-level stratified hold-out: whole traces go to either side, the
/// normalizer sees training windows only.
DatasetSplit build_dataset(std::span<const PowerTrace> traces, std::size_t window_len, const FusionConfig& cfg,
                           const DescriptorParams& params, double test_fraction, std::uint64_t seed,
                           double overlap = kDefaultOverlap);

}  // namespace ftdf
