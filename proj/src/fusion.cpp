#include "ftdf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "ftdf/error.hpp"
#include "ftdf/metrics.hpp"
#include "ftdf/text.hpp"

namespace ftdf {

void FusionConfig::validate() const {
    const auto d = descriptors();
    const std::set<Descriptor> unique(d.begin(), d.end());
    if (unique.size() != 4) throw Error(Errc::InvalidFusionConfig, "fusion needs four distinct descriptors");
    if (lags.empty()) throw Error(Errc::InvalidFusionConfig, "fusion needs at least one lag");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 1 || lags[i] > kMaxLag)
            throw Error(Errc::InvalidFusionConfig, "lags must lie in 1.." + std::to_string(kMaxLag));
        if (i > 0 && lags[i] <= lags[i - 1])
            throw Error(Errc::InvalidFusionConfig, "lags must be strictly ascending");
    }
}

std::array<Descriptor, 4> FusionConfig::descriptors() const {
    return {pair_a.first, pair_a.second, pair_b.first, pair_b.second};
}

std::vector<std::string> FusionConfig::column_names() const {
    std::vector<std::string> names;
    if (include_raw)
        for (Descriptor d : descriptors()) names.emplace_back(descriptor_name(d));
    for (std::size_t lag : lags) names.push_back("fused_lag" + std::to_string(lag));
    return names;
}

std::string FeatureScheme::name() const {
    return single ? std::string(descriptor_name(*single)) : std::string("fTDF");
}

std::vector<Descriptor> FeatureScheme::descriptors() const {
    if (single) return {*single};
    const auto d = fusion.descriptors();
    return {d.begin(), d.end()};
}

std::vector<std::string> FeatureScheme::column_names() const {
    if (single) return {std::string(descriptor_name(*single))};
    return fusion.column_names();
}

void FeatureScheme::validate() const {
    if (is_fused()) fusion.validate();
}

ColumnStats fit_column(std::span<const double> values) {
    if (values.size() < 2) throw Error(Errc::InsufficientData, "normalizer needs at least 2 training windows");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    double sd = std::sqrt(var);
    if (!(sd >= kMinStddev)) sd = 1.0;
    return {mean, sd};
}

const ColumnStats& Normalizer::stats_for(Descriptor d) const {
    for (std::size_t i = 0; i < descriptors.size(); ++i)
        if (descriptors[i] == d) return stats[i];
    throw Error(Errc::ShapeMismatch, "normalizer has no statistics for " + std::string(descriptor_name(d)));
}

double Normalizer::apply(Descriptor d, double value) const {
    const auto& s = stats_for(d);
    return (value - s.mean) / s.stddev;
}

std::vector<double> Normalizer::apply(const FeatureSeries& series) const {
    const auto& s = stats_for(series.descriptor);
    std::vector<double> out(series.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (series.values[i] - s.mean) / s.stddev;
    return out;
}

const FeatureSeries& TraceFeatures::at(Descriptor d) const {
    const auto it = series.find(d);
    if (it == series.end())
        throw Error(Errc::ShapeMismatch,
                    "trace '" + trace_id + "' has no " + std::string(descriptor_name(d)) + " series");
    return it->second;
}

TraceFeatures extract_trace_features(const PowerTrace& trace, const WindowPlan& plan,
                                     std::span<const Descriptor> descriptors, const DescriptorParams& params) {
    TraceFeatures tf;
    tf.trace_id = trace.source_id;
    tf.label = trace.label;
    tf.plan = plan;
    for (Descriptor d : descriptors) tf.series.emplace(d, extract_series(trace, plan, d, params));
    return tf;
}

Normalizer fit_normalizer(std::span<const TraceFeatures> training, std::span<const Descriptor> descriptors) {
    Normalizer norm;
    for (Descriptor d : descriptors) {
        std::vector<double> pooled;
        for (const auto& tf : training) {
            const auto& v = tf.at(d).values;
            pooled.insert(pooled.end(), v.begin(), v.end());
        }
        norm.descriptors.push_back(d);
        norm.stats.push_back(fit_column(pooled));
    }
    return norm;
}

double branch_correlation(std::span<const double> series_a, std::span<const double> series_b, std::size_t k,
                          std::size_t lag) {
    if (series_a.size() != series_b.size()) throw Error(Errc::PlanMismatch, "branch series differ in length");
    if (lag < 1 || k <= lag || k > series_a.size())
        throw Error(Errc::LagOutOfRange,
                    "window " + std::to_string(k) + " has no window " + std::to_string(lag) + " steps back", k);
    return series_a[k - 1] * series_a[k - 1 - lag] + series_b[k - 1] * series_b[k - 1 - lag];
}

void FusedFeatureMatrix::append(const FusedFeatureMatrix& other) {
    if (rows() == 0 && features.cols() == 0) {
        *this = other;
        return;
    }
    if (other.columns != columns) throw Error(Errc::ShapeMismatch, "matrices have different column layouts");
    for (std::size_t i = 0; i < other.rows(); ++i) features.append_row(other.features.row(i));
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    trace_ids.insert(trace_ids.end(), other.trace_ids.begin(), other.trace_ids.end());
    window_index.insert(window_index.end(), other.window_index.begin(), other.window_index.end());
}

FusedFeatureMatrix ftdf(std::span<const FeatureSeries> series, const FusionConfig& cfg, const Normalizer& norm,
                        const std::string& label) {
    cfg.validate();
    const auto order = cfg.descriptors();
    if (series.size() != 4) throw Error(Errc::PlanMismatch, "fTDF needs exactly four series");
    for (std::size_t i = 0; i < 4; ++i) {
        if (series[i].descriptor != order[i])
            throw Error(Errc::PlanMismatch, "series order does not match the fusion configuration");
        if (!(series[i].plan == series[0].plan) || series[i].values.size() != series[0].values.size() ||
            series[i].trace_ref != series[0].trace_ref)
            throw Error(Errc::PlanMismatch, "fTDF series do not share one window plan");
    }
    const std::size_t count = series[0].values.size();
    const std::size_t skip = cfg.max_lag();
    if (count <= skip)
        throw Error(Errc::TooFewWindows, "trace '" + series[0].trace_ref + "' has " + std::to_string(count) +
                                             " windows, fTDF needs more than " + std::to_string(skip));

    std::array<std::vector<double>, 4> z;
    for (std::size_t i = 0; i < 4; ++i) z[i] = norm.apply(series[i]);

    FusedFeatureMatrix out;
    out.columns = cfg.column_names();
    out.features = Matrix(out.columns.size());
    std::vector<double> row;
    row.reserve(out.columns.size());
    for (std::size_t k = skip + 1; k <= count; ++k) {
        row.clear();
        if (cfg.include_raw)
            for (std::size_t i = 0; i < 4; ++i) row.push_back(z[i][k - 1]);
        for (std::size_t lag : cfg.lags) {
            const double a = branch_correlation(z[0], z[1], k, lag);
            const double b = branch_correlation(z[2], z[3], k, lag);
            row.push_back(a * b);
        }
        for (double v : row)
            if (!std::isfinite(v))
                throw Error(Errc::NonFiniteSample, "non-finite fused value in trace '" + series[0].trace_ref + "'", k);
        out.features.append_row(row);
        out.labels.push_back(label);
        out.trace_ids.push_back(series[0].trace_ref);
        out.window_index.push_back(k);
    }
    return out;
}

FusedFeatureMatrix build_rows(const TraceFeatures& features, const FeatureScheme& scheme, const Normalizer& norm) {
    if (scheme.is_fused()) {
        std::vector<FeatureSeries> ordered;
        for (Descriptor d : scheme.fusion.descriptors()) ordered.push_back(features.at(d));
        return ftdf(ordered, scheme.fusion, norm, features.label);
    }
    const auto& series = features.at(*scheme.single);
    const auto z = norm.apply(series);
    FusedFeatureMatrix out;
    out.columns = scheme.column_names();
    out.features = Matrix(1);
    for (std::size_t k = 1; k <= z.size(); ++k) {
        out.features.append_row(std::span<const double>(&z[k - 1], 1));
        out.labels.push_back(features.label);
        out.trace_ids.push_back(features.trace_id);
        out.window_index.push_back(k);
    }
    return out;
}

void write_matrix(const std::filesystem::path& path, const FusedFeatureMatrix& matrix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    std::string buf;
    for (const auto& c : matrix.columns) {
        buf += c;
        buf += ',';
    }
    buf += "label\n";
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (double v : matrix.features.row(i)) {
            buf += text::format_double(v);
            buf += ',';
        }
        buf += matrix.labels[i];
        buf += '\n';
    }
    out << buf;
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

FusedFeatureMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
    FusedFeatureMatrix m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = text::trim(line);
        if (view.empty()) continue;
        const auto f = text::split(view, ',');
        if (line_no == 1) {
            if (f.size() < 2 || f.back() != "label")
                throw Error(Errc::MalformedRow, path.string() + ": header must end with 'label'", line_no);
            for (std::size_t j = 0; j + 1 < f.size(); ++j) m.columns.emplace_back(f[j]);
            m.features = Matrix(m.columns.size());
            continue;
        }
        if (f.size() != m.columns.size() + 1)
            throw Error(Errc::MalformedRow, path.string() + ": wrong field count", line_no);
        std::vector<double> row;
        for (std::size_t j = 0; j < m.columns.size(); ++j) {
            const auto v = text::parse_double(f[j]);
            if (!v || !std::isfinite(*v)) throw Error(Errc::MalformedRow, path.string() + ": bad value", line_no);
            row.push_back(*v);
        }
        m.features.append_row(row);
        m.labels.emplace_back(text::trim(f.back()));
        m.trace_ids.push_back(path.stem().string());
        m.window_index.push_back(m.rows());
    }
    if (line_no == 0) throw Error(Errc::EmptyTrace, path.string() + " is empty");
    return m;
}

DatasetSplit build_dataset(std::span<const PowerTrace> traces, std::size_t window_len, const FusionConfig& cfg,
                           const DescriptorParams& params, double test_fraction, std::uint64_t seed, double overlap) {
    cfg.validate();
    std::vector<std::string> labels, keys;
    for (const auto& t : traces) {
        labels.push_back(t.label);
        keys.push_back(t.source_id);
    }
    const auto split = stratified_split(labels, test_fraction, seed, keys);

    const auto d = cfg.descriptors();
    const auto features_of = [&](std::size_t i) {
        const auto plan = plan_windows(traces[i].size(), window_len, overlap);
        return extract_trace_features(traces[i], plan, d, params);
    };
    std::vector<TraceFeatures> train_features, test_features;
    for (std::size_t i : split.train) train_features.push_back(features_of(i));
    for (std::size_t i : split.test) test_features.push_back(features_of(i));

    DatasetSplit out;
    out.normalizer = fit_normalizer(train_features, d);
    const auto scheme = FeatureScheme::fused(cfg);
    for (const auto& tf : train_features) {
        out.train.append(build_rows(tf, scheme, out.normalizer));
        out.train_traces.push_back(tf.trace_id);
    }
    for (const auto& tf : test_features) {
        out.test.append(build_rows(tf, scheme, out.normalizer));
        out.test_traces.push_back(tf.trace_id);
    }
    return out;
}

}  // namespace ftdf
