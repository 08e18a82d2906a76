#include "ftdf/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ftdf/error.hpp"
#include "ftdf/text.hpp"

namespace ftdf {

std::string_view descriptor_name(Descriptor d) {
    switch (d) {
        case Descriptor::RMSF: return "RMSF";
        case Descriptor::MADF: return "MADF";
        case Descriptor::IAMF: return "IAMF";
        case Descriptor::ZCF: return "ZCF";
        case Descriptor::WLF: return "WLF";
        case Descriptor::SSCF: return "SSCF";
        case Descriptor::ARF: return "ARF";
    }
    return "?";
}

std::optional<Descriptor> parse_descriptor(std::string_view name) {
    for (Descriptor d : kAllDescriptors)
        if (descriptor_name(d) == name) return d;
    return std::nullopt;
}

namespace {

double mean_of(std::span<const double> s) {
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double rmsf(std::span<const double> s) {
    double sum_sq = 0.0;
    for (double v : s) sum_sq += v * v;
    return std::sqrt(sum_sq / static_cast<double>(s.size()));
}

double rmsf_literal(std::span<const double> s) {
    double sum_abs = 0.0;
    for (double v : s) sum_abs += std::abs(v);
    return sum_abs / std::sqrt(static_cast<double>(s.size()));
}

double madf(std::span<const double> s) {
    const double mu = mean_of(s);
    double dev = 0.0;
    for (double v : s) dev += std::abs(v - mu);
    return dev / static_cast<double>(s.size());
}

double iamf(std::span<const double> s) {
    const double mu = mean_of(s);
    double acc = 0.0;
    for (double v : s) acc += 0.5 * v * v * sgn(v);
    return acc / static_cast<double>(s.size()) + mu;
}

double zcf(std::span<const double> s) {
    long count = 0;
    for (std::size_t i = 1; i < s.size(); ++i) count += std::abs(sgn(s[i]) - sgn(s[i - 1]));
    return static_cast<double>(count);
}

double wlf(std::span<const double> s) {
    double length = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) length += std::abs(s[i] - s[i - 1]);
    return std::log(std::max(length, kWlfEpsilon));
}

double sscf(std::span<const double> s, double threshold) {
    long count = 0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if ((s[i] - s[i - 1]) * (s[i] - s[i + 1]) >= threshold) ++count;
    }
    return static_cast<double>(count);
}

std::vector<double> autocorrelation(std::span<const double> s, std::size_t max_lag) {
    const std::size_t n = s.size();
    const double mu = mean_of(s);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = s[i] - mu;
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t lag = 0; lag <= max_lag && lag < n; ++lag) {
        double acc = 0.0;
        for (std::size_t i = lag; i < n; ++i) acc += x[i] * x[i - lag];
        r[lag] = acc / static_cast<double>(n);
    }
    return r;
}

std::vector<double> levinson_durbin(std::span<const double> r, std::size_t order) {
    if (r.size() < order + 1) throw Error(Errc::InvalidArOrder, "autocorrelation shorter than order + 1");
    if (!(r[0] >= kDegenerateAutocorrelation))
        throw Error(Errc::DegenerateSignal, "zero-lag autocorrelation below threshold");

    std::vector<double> a(order, 0.0);
    std::vector<double> prev(order, 0.0);
    double err = r[0];
    for (std::size_t m = 1; m <= order; ++m) {
        double acc = r[m];
        for (std::size_t j = 1; j < m; ++j) acc -= a[j - 1] * r[m - j];
        // an exactly predictable window leaves no error to reflect
        if (err <= r[0] * 1e-14) break;
        const double k = acc / err;
        prev.assign(a.begin(), a.end());
        a[m - 1] = k;
        for (std::size_t j = 1; j < m; ++j) a[j - 1] = prev[j - 1] - k * prev[m - j - 1];
        err *= (1.0 - k * k);
    }
    return a;
}

std::vector<double> estimate_ar(std::span<const double> s, const ArConfig& cfg) {
    if (cfg.order < 1 || cfg.order >= s.size())
        throw Error(Errc::InvalidArOrder, "AR order " + std::to_string(cfg.order) +
                                              " requires a window longer than the order");
    const auto r = autocorrelation(s, cfg.order);
    return levinson_durbin(r, cfg.order);
}

double arf(std::span<const double> s, const ArConfig& cfg) {
    const std::size_t n = s.size();
    const double mu = mean_of(s);
    const double mean_part = static_cast<double>(n) * mu;
    std::vector<double> a;
    try {
        a = estimate_ar(s, cfg);
    } catch (const Error& e) {
        if (e.code() == Errc::DegenerateSignal) return mean_part;
        throw;
    }
    // sum_{i=P..N-1} x[i-p] = prefix[N-p] - prefix[P-p]  (0-based)
    const std::size_t order = cfg.order;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (s[i] - mu);
    double total = 0.0;
    for (std::size_t p = 1; p <= order; ++p) total += a[p - 1] * (prefix[n - p] - prefix[order - p]);
    return total + mean_part;
}

double compute_descriptor(Descriptor d, std::span<const double> s, const DescriptorParams& params) {
    switch (d) {
        case Descriptor::RMSF: return params.literal_rms ? rmsf_literal(s) : rmsf(s);
        case Descriptor::MADF: return madf(s);
        case Descriptor::IAMF: return iamf(s);
        case Descriptor::ZCF: return zcf(s);
        case Descriptor::WLF: return wlf(s);
        case Descriptor::SSCF: return sscf(s, params.sscf_threshold);
        case Descriptor::ARF: return arf(s, params.ar);
    }
    return 0.0;
}

std::size_t min_window_len(const DescriptorParams& params) {
    return std::max<std::size_t>(3, params.ar.order + 1);
}

FeatureSeries extract_series(const PowerTrace& trace, const WindowPlan& plan, Descriptor d,
                             const DescriptorParams& params) {
    FeatureSeries series;
    series.descriptor = d;
    series.trace_ref = trace.source_id;
    series.plan = plan;
    series.values.resize(plan.count);
    for (std::size_t k = 1; k <= plan.count; ++k) {
        try {
            const double v = compute_descriptor(d, segment_view(trace, plan, k), params);
            if (!std::isfinite(v))
                throw Error(Errc::NonFiniteSample, std::string(descriptor_name(d)) + " is not finite");
            series.values[k - 1] = v;
        } catch (const Error& e) {
            throw Error(e.code(),
                        std::string(e.what()) + " [trace '" + trace.source_id + "', window " +
                            std::to_string(k) + "]",
                        k);
        }
    }
    return series;
}

void write_series(const std::filesystem::path& path, const FeatureSeries& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    std::string buf = "trace_id,k,descriptor,value\n";
    const auto name = descriptor_name(series.descriptor);
    for (std::size_t k = 1; k <= series.values.size(); ++k) {
        buf += series.trace_ref;
        buf += ',';
        buf += std::to_string(k);
        buf += ',';
        buf += name;
        buf += ',';
        buf += text::format_double(series.values[k - 1]);
        buf += '\n';
    }
    out << buf;
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

FeatureSeries read_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
    FeatureSeries series;
    std::string line;
    std::size_t line_no = 0;
    bool have_descriptor = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) continue;
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 4) throw Error(Errc::MalformedRow, path.string() + ": bad row", line_no);
        const auto k = text::parse_int(f[1]);
        const auto d = parse_descriptor(text::trim(f[2]));
        const auto v = text::parse_double(f[3]);
        if (!k || !d || !v || *k != static_cast<long long>(series.values.size() + 1))
            throw Error(Errc::MalformedRow, path.string() + ": bad row", line_no);
        if (have_descriptor && *d != series.descriptor)
            throw Error(Errc::MalformedRow, path.string() + ": mixed descriptors", line_no);
        series.descriptor = *d;
        have_descriptor = true;
        series.trace_ref = std::string(f[0]);
        series.values.push_back(*v);
    }
    series.plan.count = series.values.size();
    return series;
}

}  // namespace ftdf
