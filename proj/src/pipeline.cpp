#include "ftdf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "ftdf/error.hpp"
#include "ftdf/parallel.hpp"
#include "ftdf/random.hpp"
#include "ftdf/text.hpp"

namespace ftdf {

std::string_view classifier_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Ebt: return "ebt";
        case ClassifierKind::Tree: return "tree";
        case ClassifierKind::Knn: return "knn";
    }
    return "?";
}

std::optional<ClassifierKind> parse_classifier(std::string_view name) {
    if (name == "ebt") return ClassifierKind::Ebt;
    if (name == "tree") return ClassifierKind::Tree;
    if (name == "knn") return ClassifierKind::Knn;
    return std::nullopt;
}

void PipelineConfig::validate() const {
    if (window_len < 2) throw Error(Errc::InvalidWindow, "window length must be >= 2");
    if (window_len < min_window_len(params))
        throw Error(Errc::InvalidArOrder, "window length " + std::to_string(window_len) +
                                              " is too short for AR order " + std::to_string(params.ar.order));
    if (params.ar.order < 1) throw Error(Errc::InvalidArOrder, "AR order must be >= 1");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(Errc::InvalidOverlap, "overlap must lie in [0, 1)");
    if (!(params.sscf_threshold >= 0.0)) throw Error(Errc::InvalidConfig, "SSCF threshold must be >= 0");
    scheme.validate();
    if (classifier.kind == ClassifierKind::Ebt && classifier.ebt.n_trees < 1)
        throw Error(Errc::InvalidConfig, "n_trees must be >= 1");
    if (classifier.ebt.tree.max_splits < 1) throw Error(Errc::InvalidConfig, "max_splits must be >= 1");
    if (classifier.ebt.tree.min_leaf_size < 1) throw Error(Errc::InvalidConfig, "min_leaf_size must be >= 1");
    if (classifier.kind == ClassifierKind::Knn && classifier.knn_k < 1)
        throw Error(Errc::KTooLarge, "knn k must be >= 1");
    if (protocol.kind == Protocol::CrossValidation && protocol.folds < 2)
        throw Error(Errc::InvalidConfig, "cross-validation needs at least 2 folds");
    if (protocol.kind == Protocol::Holdout && !(protocol.test_fraction > 0.0 && protocol.test_fraction < 1.0))
        throw Error(Errc::InvalidConfig, "test fraction must lie in (0, 1)");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    const auto put = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
    put("window_len", std::to_string(window_len));
    put("overlap", text::format_double(overlap));
    put("scheme", scheme.name());
    if (scheme.is_fused()) {
        const auto& f = scheme.fusion;
        put("pair_a", std::string(descriptor_name(f.pair_a.first)) + "," + std::string(descriptor_name(f.pair_a.second)));
        put("pair_b", std::string(descriptor_name(f.pair_b.first)) + "," + std::string(descriptor_name(f.pair_b.second)));
        std::string lags;
        for (auto l : f.lags) lags += (lags.empty() ? "" : ",") + std::to_string(l);
        put("lags", lags);
        put("include_raw", f.include_raw ? "1" : "0");
    }
    put("ar_order", std::to_string(params.ar.order));
    put("sscf_threshold", text::format_double(params.sscf_threshold));
    put("literal_rms", params.literal_rms ? "1" : "0");
    put("classifier", std::string(classifier_name(classifier.kind)));
    if (classifier.kind == ClassifierKind::Knn) {
        put("knn_k", std::to_string(classifier.knn_k));
        put("knn_metric", std::string(metric_name(classifier.knn_metric)));
        put("knn_weighting", std::string(weighting_name(classifier.knn_weighting)));
    } else {
        if (classifier.kind == ClassifierKind::Ebt) put("n_trees", std::to_string(classifier.ebt.n_trees));
        put("max_splits", std::to_string(classifier.ebt.tree.max_splits));
        put("min_leaf_size", std::to_string(classifier.ebt.tree.min_leaf_size));
    }
    if (protocol.kind == Protocol::CrossValidation) {
        put("protocol", "cv");
        put("folds", std::to_string(protocol.folds));
    } else {
        put("protocol", "holdout");
        put("test_fraction", text::format_double(protocol.test_fraction));
    }
    return out;
}

std::size_t required_length(std::size_t window_len, double overlap, std::size_t windows) {
    const auto hop = window_len - static_cast<std::size_t>(std::floor(overlap * static_cast<double>(window_len)));
    return window_len + (windows > 0 ? windows - 1 : 0) * hop;
}

std::vector<TraceFeatures> extract_all(std::span<const PowerTrace> traces, std::size_t window_len, double overlap,
                                       std::span<const Descriptor> descriptors, const DescriptorParams& params,
                                       std::size_t threads, std::size_t min_windows) {
    const std::size_t need = required_length(window_len, overlap, std::max<std::size_t>(1, min_windows));
    std::vector<std::string> offenders;
    for (const auto& t : traces)
        if (t.size() < need) offenders.push_back(t.source_id + " (" + std::to_string(t.size()) + " samples)");
    if (!offenders.empty()) {
        std::string list;
        for (const auto& o : offenders) list += (list.empty() ? "" : ", ") + o;
        throw Error(Errc::TraceTooShort, "window length " + std::to_string(window_len) + " needs " +
                                             std::to_string(need) + " samples per trace; too short: " + list);
    }
    std::vector<TraceFeatures> out(traces.size());
    parallel_for(traces.size(), threads, [&](std::size_t i) {
        const auto plan = plan_windows(traces[i].size(), window_len, overlap);
        out[i] = extract_trace_features(traces[i], plan, descriptors, params);
    });
    return out;
}

std::size_t Classifier::predict(std::span<const double> x) const {
    if (const auto* e = std::get_if<BaggedEnsemble>(&model_)) return e->predict(x);
    return predict_knn(std::get<KnnModel>(model_), x);
}

Classifier fit_classifier(const FusedFeatureMatrix& train, const LabelDictionary& classes,
                          const ClassifierConfig& cfg, std::uint64_t seed, std::size_t threads) {
    const auto y = classes.encode(train.labels);
    if (cfg.kind == ClassifierKind::Knn)
        return Classifier(train_knn(train.features, y, classes, cfg.knn_k, cfg.knn_metric, cfg.knn_weighting));
    EbtParams params = cfg.ebt;
    if (cfg.kind == ClassifierKind::Tree) {
        params.n_trees = 1;
        params.bootstrap = false;
    }
    auto model = train_ebt(train.features, y, classes, params, seed, threads);
    model.columns = train.columns;
    return Classifier(std::move(model));
}

FusedFeatureMatrix assemble(std::span<const TraceFeatures> features, std::span<const std::size_t> which,
                            const FeatureScheme& scheme, const Normalizer& norm) {
    FusedFeatureMatrix out;
    out.columns = scheme.column_names();
    out.features = Matrix(out.columns.size());
    for (auto i : which) out.append(build_rows(features[i], scheme, norm));
    return out;
}

ConfusionMatrix evaluate_split(std::span<const TraceFeatures> features, std::span<const std::size_t> train,
                               std::span<const std::size_t> test, const PipelineConfig& cfg,
                               const LabelDictionary& classes, std::uint64_t seed) {
    std::vector<TraceFeatures> train_set;
    train_set.reserve(train.size());
    for (auto i : train) train_set.push_back(features[i]);
    const auto descriptors = cfg.scheme.descriptors();
    const auto norm = fit_normalizer(train_set, descriptors);
    const auto train_rows = assemble(features, train, cfg.scheme, norm);
    const auto test_rows = assemble(features, test, cfg.scheme, norm);
    const auto model = fit_classifier(train_rows, classes, cfg.classifier, seed, cfg.threads);
    ConfusionMatrix cm(classes.names());
    for (std::size_t r = 0; r < test_rows.rows(); ++r)
        cm.add(classes.index_of(test_rows.labels[r]), model.predict(test_rows.features.row(r)));
    return cm;
}

namespace {

LabelDictionary dictionary_of(std::span<const TraceFeatures> features) {
    std::vector<std::string> labels;
    for (const auto& f : features) labels.push_back(f.label);
    return LabelDictionary::from_labels(labels);
}

std::pair<std::vector<std::string>, std::vector<std::string>> labels_and_keys(std::span<const TraceFeatures> features) {
    std::vector<std::string> labels, keys;
    for (const auto& f : features) {
        labels.push_back(f.label);
        keys.push_back(f.trace_id);
    }
    return {labels, keys};
}

void check_unique_ids(std::span<const TraceFeatures> features) {
    std::set<std::string> ids;
    for (const auto& f : features)
        if (!ids.insert(f.trace_id).second)
            throw Error(Errc::InvalidConfig, "duplicate trace id '" + f.trace_id + "'");
}

}  // namespace

std::vector<std::size_t> trace_folds(std::span<const TraceFeatures> features, std::size_t folds, std::uint64_t seed) {
    check_unique_ids(features);
    const auto [labels, keys] = labels_and_keys(features);
    return stratified_folds(labels, folds, derive_seed(seed, "cv"), keys);
}

EvalReport cross_validate(std::span<const TraceFeatures> features, const PipelineConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto classes = dictionary_of(features);
    const auto fold_of = trace_folds(features, cfg.protocol.folds, seed);
    ConfusionMatrix pooled(classes.names());
    for (std::size_t fold = 0; fold < cfg.protocol.folds; ++fold) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < features.size(); ++i) (fold_of[i] == fold ? test : train).push_back(i);
        pooled.merge(evaluate_split(features, train, test, cfg, classes, derive_seed(seed, "model", fold)));
    }
    auto report = report_from_confusion(pooled);
    report.config = cfg.echo();
    report.config.emplace_back("seed", std::to_string(seed));
    return report;
}

EvalReport holdout(std::span<const TraceFeatures> features, const PipelineConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    check_unique_ids(features);
    const auto classes = dictionary_of(features);
    const auto [labels, keys] = labels_and_keys(features);
    const auto split = stratified_split(labels, cfg.protocol.test_fraction, derive_seed(seed, "holdout"), keys);
    auto report = report_from_confusion(
        evaluate_split(features, split.train, split.test, cfg, classes, derive_seed(seed, "model", 0)));
    report.config = cfg.echo();
    report.config.emplace_back("seed", std::to_string(seed));
    return report;
}

EvalReport evaluate(std::span<const TraceFeatures> features, const PipelineConfig& cfg, std::uint64_t seed) {
    return cfg.protocol.kind == Protocol::CrossValidation ? cross_validate(features, cfg, seed)
                                                          : holdout(features, cfg, seed);
}

EvalReport evaluate(std::span<const PowerTrace> traces, const PipelineConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto descriptors = cfg.scheme.descriptors();
    const auto features = extract_all(traces, cfg.window_len, cfg.overlap, descriptors, cfg.params, cfg.threads,
                                      cfg.scheme.skipped_windows() + 1);
    return evaluate(features, cfg, seed);
}

BaggedEnsemble train_pipeline_model(std::span<const PowerTrace> traces, const PipelineConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.classifier.kind == ClassifierKind::Knn)
        throw Error(Errc::InvalidConfig, "only tree classifiers (ebt, tree) can be saved as models");
    const auto descriptors = cfg.scheme.descriptors();
    const auto features = extract_all(traces, cfg.window_len, cfg.overlap, descriptors, cfg.params, cfg.threads,
                                      cfg.scheme.skipped_windows() + 1);
    if (features.empty()) throw Error(Errc::EmptyDataset, "no training traces");
    std::vector<std::size_t> all(features.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    PipelineMeta meta;
    meta.window_len = cfg.window_len;
    meta.overlap = cfg.overlap;
    meta.scheme = cfg.scheme;
    meta.params = cfg.params;
    meta.normalizer = fit_normalizer(features, descriptors);
    const auto rows = assemble(features, all, cfg.scheme, meta.normalizer);

    const auto classes = dictionary_of(features);
    auto classifier = fit_classifier(rows, classes, cfg.classifier, derive_seed(seed, "model"), cfg.threads);
    BaggedEnsemble model = *classifier.ensemble();
    model.pipeline = std::move(meta);
    return model;
}

FusedFeatureMatrix featurize(std::span<const PowerTrace> traces, const PipelineMeta& meta, std::size_t threads) {
    const auto descriptors = meta.scheme.descriptors();
    const auto features = extract_all(traces, meta.window_len, meta.overlap, descriptors, meta.params, threads,
                                      meta.scheme.skipped_windows() + 1);
    std::vector<std::size_t> all(features.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return assemble(features, all, meta.scheme, meta.normalizer);
}

EvalReport evaluate_model(const BaggedEnsemble& model, const FusedFeatureMatrix& data) {
    if (data.features.cols() != model.num_features())
        throw Error(Errc::ShapeMismatch, "feature matrix has " + std::to_string(data.features.cols()) +
                                             " columns, model expects " + std::to_string(model.num_features()));
    if (data.rows() == 0) throw Error(Errc::EmptyDataset, "no rows to evaluate");
    ConfusionMatrix cm(model.classes.names());
    for (std::size_t r = 0; r < data.rows(); ++r)
        cm.add(model.classes.index_of(data.labels[r]), model.predict(data.features.row(r)));
    return report_from_confusion(cm);
}

// ---------------------------------------------------------------------------

std::vector<FeatureScheme> default_schemes(const FusionConfig& fusion) {
    std::vector<FeatureScheme> schemes;
    for (Descriptor d : kAllDescriptors) schemes.push_back(FeatureScheme::only(d));
    schemes.push_back(FeatureScheme::fused(fusion));
    return schemes;
}

std::vector<SweepRow> sweep_window_length(std::span<const PowerTrace> traces, std::span<const std::size_t> lengths,
                                          std::span<const FeatureScheme> schemes, const PipelineConfig& cfg,
                                          std::uint64_t seed) {
    if (lengths.empty() || schemes.empty()) throw Error(Errc::InvalidConfig, "sweep needs lengths and schemes");
    // validate every cell and every trace before any work
    std::set<Descriptor> needed;
    std::size_t max_skip = 0;
    for (const auto& s : schemes) {
        for (std::size_t n : lengths) {
            PipelineConfig cell = cfg;
            cell.window_len = n;
            cell.scheme = s;
            cell.validate();
        }
        for (Descriptor d : s.descriptors()) needed.insert(d);
        max_skip = std::max(max_skip, s.skipped_windows());
    }
    std::vector<std::string> offenders;
    for (const auto& t : traces) {
        for (std::size_t n : lengths) {
            if (t.size() < required_length(n, cfg.overlap, max_skip + 1)) {
                offenders.push_back(t.source_id + " (" + std::to_string(t.size()) + " samples, N=" +
                                    std::to_string(n) + ")");
                break;
            }
        }
    }
    if (!offenders.empty()) {
        std::string list;
        for (const auto& o : offenders) list += (list.empty() ? "" : ", ") + o;
        throw Error(Errc::TraceTooShort, "traces too short for the sweep: " + list);
    }

    const std::vector<Descriptor> all_needed(needed.begin(), needed.end());
    std::vector<SweepRow> rows(schemes.size() * lengths.size());
    for (std::size_t li = 0; li < lengths.size(); ++li) {
        const auto features = extract_all(traces, lengths[li], cfg.overlap, all_needed, cfg.params, cfg.threads,
                                          max_skip + 1);
        for (std::size_t si = 0; si < schemes.size(); ++si) {
            PipelineConfig cell = cfg;
            cell.window_len = lengths[li];
            cell.scheme = schemes[si];
            const auto start = std::chrono::steady_clock::now();
            const auto report = evaluate(features, cell, derive_seed(seed, "sweep", li));
            const auto stop = std::chrono::steady_clock::now();
            SweepRow& row = rows[si * lengths.size() + li];
            row.scheme = schemes[si].name();
            row.window_len = lengths[li];
            row.accuracy = report.accuracy;
            row.macro_f = report.macro_f;
            row.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        }
    }
    return rows;
}

std::string sweep_table(std::span<const SweepRow> rows, bool include_runtime) {
    std::ostringstream out;
    out << "scheme,window_len,accuracy,macro_f,runtime_ms\n";
    for (const auto& r : rows) {
        out << r.scheme << ',' << r.window_len << ',' << text::format_double(r.accuracy) << ','
            << text::format_double(r.macro_f) << ',';
        if (include_runtime) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", r.runtime_ms);
            out << buf;
        } else {
            out << 0;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace ftdf
