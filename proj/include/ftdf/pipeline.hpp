#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ftdf/ensemble.hpp"
#include "ftdf/fusion.hpp"
#include "ftdf/knn.hpp"
#include "ftdf/metrics.hpp"

namespace ftdf {

enum class ClassifierKind { Ebt, Tree, Knn };

std::string_view classifier_name(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier(std::string_view name);

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::Ebt;
    EbtParams ebt;  // tree settings are shared with the single-tree baseline
    std::size_t knn_k = 1;
    KnnMetric knn_metric = KnnMetric::Euclidean;
    KnnWeighting knn_weighting = KnnWeighting::Uniform;
};

enum class Protocol { CrossValidation, Holdout };

struct EvalProtocol {
    Protocol kind = Protocol::CrossValidation;
    std::size_t folds = 10;
    double test_fraction = 0.3;
};

struct PipelineConfig {
    std::size_t window_len = 1024;
    double overlap = kDefaultOverlap;
    FeatureScheme scheme = FeatureScheme::fused();
    DescriptorParams params;
    ClassifierConfig classifier;
    EvalProtocol protocol;
    std::size_t threads = 1;

    /// Checks everything that can be checked without data.
    void validate() const;
    /// key/value pairs describing the configuration, for report headers.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Per-trace descriptor series for every trace. Throws TraceTooShort naming
/// every trace with too few samples to yield `min_windows` windows.
std::vector<TraceFeatures> extract_all(std::span<const PowerTrace> traces, std::size_t window_len, double overlap,
                                       std::span<const Descriptor> descriptors, const DescriptorParams& params,
                                       std::size_t threads = 1, std::size_t min_windows = 1);

/// Samples a trace needs to produce `windows` windows.
std::size_t required_length(std::size_t window_len, double overlap, std::size_t windows);

/// A trained EBT, single tree (an unbagged 1-tree ensemble) or KNN model.
class Classifier {
public:
    explicit Classifier(BaggedEnsemble model) : model_(std::move(model)) {}
    explicit Classifier(KnnModel model) : model_(std::move(model)) {}

    std::size_t predict(std::span<const double> x) const;
    const BaggedEnsemble* ensemble() const { return std::get_if<BaggedEnsemble>(&model_); }

private:
    std::variant<BaggedEnsemble, KnnModel> model_;
};

Classifier fit_classifier(const FusedFeatureMatrix& train, const LabelDictionary& classes,
                          const ClassifierConfig& cfg, std::uint64_t seed, std::size_t threads = 1);

/// Rows for a set of traces under one scheme and normalizer.
FusedFeatureMatrix assemble(std::span<const TraceFeatures> features, std::span<const std::size_t> which,
                            const FeatureScheme& scheme, const Normalizer& norm);

/// Trains on the `train` traces (normalizer included) and scores the rows of
/// the `test` traces.
ConfusionMatrix evaluate_split(std::span<const TraceFeatures> features, std::span<const std::size_t> train,
                               std::span<const std::size_t> test, const PipelineConfig& cfg,
                               const LabelDictionary& classes, std::uint64_t seed);

/// Stratified k-fold at trace granularity; the report pools every fold.
EvalReport cross_validate(std::span<const TraceFeatures> features, const PipelineConfig& cfg, std::uint64_t seed);
/// Trace-level stratified hold-out.
EvalReport holdout(std::span<const TraceFeatures> features, const PipelineConfig& cfg, std::uint64_t seed);
/// Whichever protocol cfg selects.
EvalReport evaluate(std::span<const TraceFeatures> features, const PipelineConfig& cfg, std::uint64_t seed);
/// Extracts features with cfg's plan, then evaluates.
EvalReport evaluate(std::span<const PowerTrace> traces, const PipelineConfig& cfg, std::uint64_t seed);

/// Fold id per trace, with fold assignment independent of input order.
std::vector<std::size_t> trace_folds(std::span<const TraceFeatures> features, std::size_t folds, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Trains on every trace and attaches the pipeline so the model can classify
/// raw traces on its own. Only tree classifiers can be persisted.
BaggedEnsemble train_pipeline_model(std::span<const PowerTrace> traces, const PipelineConfig& cfg, std::uint64_t seed);

/// Rows for raw traces using the model's attached pipeline.
FusedFeatureMatrix featurize(std::span<const PowerTrace> traces, const PipelineMeta& meta, std::size_t threads = 1);

/// Scores a feature matrix against a model. Throws ShapeMismatch when the
/// widths differ.
EvalReport evaluate_model(const BaggedEnsemble& model, const FusedFeatureMatrix& data);

// ---------------------------------------------------------------------------

inline const std::vector<std::size_t> kDefaultSweepLengths = {64, 128, 256, 512, 1024, 2048, 3072, 4096};

struct SweepRow {
    std::string scheme;
    std::size_t window_len = 0;
    double accuracy = 0.0;
    double macro_f = 0.0;
    double runtime_ms = 0.0;
};

/// The seven single-descriptor schemes followed by fTDF.
std::vector<FeatureScheme> default_schemes(const FusionConfig& fusion = {});

/// One full evaluation per (scheme, window length), ordered by scheme then
/// length. Throws TraceTooShort listing offenders before any work starts.
std::vector<SweepRow> sweep_window_length(std::span<const PowerTrace> traces, std::span<const std::size_t> lengths,
                                          std::span<const FeatureScheme> schemes, const PipelineConfig& cfg,
                                          std::uint64_t seed);

/// "scheme,window_len,accuracy,macro_f,runtime_ms" CSV.
std::string sweep_table(std::span<const SweepRow> rows, bool include_runtime = true);

}  // namespace ftdf
