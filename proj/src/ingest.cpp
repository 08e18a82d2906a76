#include "ftdf/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "ftdf/error.hpp"
#include "ftdf/random.hpp"
#include "ftdf/text.hpp"

namespace ftdf {

namespace fs = std::filesystem;

void PowerTrace::validate() const {
    if (samples.empty()) throw Error(Errc::EmptyTrace, "trace '" + source_id + "' has no samples");
    if (!(fs > 0.0) || !std::isfinite(fs))
        throw Error(Errc::InvalidConfig, "trace '" + source_id + "' has non-positive sampling rate");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i]))
            throw Error(Errc::NonFiniteSample,
                        "trace '" + source_id + "' sample " + std::to_string(i) + " is not finite", i);
    }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    if (delimiter != ' ') return text::split(line, delimiter);
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

}  // namespace

PowerTrace load_trace(const fs::path& path, const TraceSchema& schema, double fs, std::string label,
                      std::string source_id) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::FileNotFound, "cannot open trace file " + path.string());

    PowerTrace trace;
    trace.fs = fs;
    trace.label = std::move(label);
    trace.source_id = source_id.empty() ? path.stem().string() : std::move(source_id);

    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = text::trim(line);
        if (view.empty()) continue;
        const auto fields = split_fields(view, schema.delimiter);

        std::optional<double> power;
        if (schema.power_column < fields.size()) power = text::parse_double(fields[schema.power_column]);
        bool row_ok = power.has_value();
        if (row_ok && schema.timestamp_column) {
            row_ok = *schema.timestamp_column < fields.size() &&
                     text::parse_double(fields[*schema.timestamp_column]).has_value();
        }
        if (!row_ok) {
            if (first_content_line && line_no == 1 && !power) {
                first_content_line = false;
                continue;  // header
            }
            throw Error(Errc::MalformedRow,
                        path.string() + ":" + std::to_string(line_no) + ": cannot parse row", line_no);
        }
        first_content_line = false;
        const double value = *power * schema.scale;
        if (!std::isfinite(value)) {
            const std::size_t index = trace.samples.size();
            throw Error(Errc::NonFiniteSample,
                        path.string() + ": sample " + std::to_string(index) + " is not finite", index);
        }
        trace.samples.push_back(value);
    }
    if (trace.samples.empty()) throw Error(Errc::EmptyTrace, path.string() + " contains no samples");
    if (!(fs > 0.0)) throw Error(Errc::InvalidConfig, "sampling rate must be positive");
    return trace;
}

void write_trace(const fs::path& path, const PowerTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    std::string buf;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        buf += text::format_double(static_cast<double>(i) / trace.fs);
        buf += ',';
        buf += text::format_double(trace.samples[i]);
        buf += '\n';
    }
    out << buf;
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

PowerTrace decimate(const PowerTrace& trace, std::size_t factor) {
    if (factor < 1) throw Error(Errc::InvalidFactor, "decimation factor must be >= 1");
    if (trace.size() < factor)
        throw Error(Errc::TraceTooShort, "trace shorter than decimation factor");
    PowerTrace out;
    out.fs = trace.fs / static_cast<double>(factor);
    out.label = trace.label;
    out.source_id = trace.source_id;
    if (factor == 1) {
        out.samples = trace.samples;
        return out;
    }
    const std::size_t blocks = trace.size() / factor;
    out.samples.resize(blocks);
    for (std::size_t j = 0; j < blocks; ++j) {
        double sum = 0.0;
        for (std::size_t i = j * factor; i < (j + 1) * factor; ++i) sum += trace.samples[i];
        out.samples[j] = sum / static_cast<double>(factor);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view kind_name(ApplianceKind kind) {
    switch (kind) {
        case ApplianceKind::Constant: return "constant";
        case ApplianceKind::OnOffCycle: return "on_off_cycle";
        case ApplianceKind::MotorStartup: return "motor_startup";
        case ApplianceKind::SpikyPeriodic: return "spiky_periodic";
        case ApplianceKind::Ramp: return "ramp";
        case ApplianceKind::NoisyIdle: return "noisy_idle";
    }
    return "unknown";
}

std::optional<ApplianceKind> parse_kind(std::string_view name) {
    for (ApplianceKind k : kAllApplianceKinds)
        if (kind_name(k) == name) return k;
    return std::nullopt;
}

PowerTrace synth_appliance(ApplianceKind kind, double duration_s, double fs, std::uint64_t seed,
                           const SynthOptions& options) {
    if (!(fs > 0.0) || !std::isfinite(fs)) throw Error(Errc::InvalidConfig, "sampling rate must be positive");
    if (!(duration_s > 0.0) || !std::isfinite(duration_s) || duration_s * fs < 1.0)
        throw Error(Errc::InvalidDuration, "duration_s * fs must be >= 1");

    const auto n = static_cast<std::size_t>(std::floor(duration_s * fs));
    Rng rng(seed);
    const double ns = options.noise_scale;

    PowerTrace trace;
    trace.fs = fs;
    trace.label = std::string(kind_name(kind));
    trace.source_id = trace.label;
    trace.samples.resize(n);
    auto& s = trace.samples;
    const auto t_of = [fs](std::size_t i) { return static_cast<double>(i) / fs; };

    switch (kind) {
        case ApplianceKind::Constant: {
            const double sigma = 1.0 * ns;
            for (std::size_t i = 0; i < n; ++i) s[i] = kConstantBaseLevel + sigma * rng.normal();
            break;
        }
        case ApplianceKind::OnOffCycle: {
            const double on = rng.uniform(150.0, 250.0);
            const double off = rng.uniform(0.0, 5.0);
            const double period = rng.uniform(20.0, 60.0);
            const double duty = rng.uniform(0.3, 0.7);
            const double phase = rng.uniform(0.0, period);
            const double sigma = 2.0 * ns;
            for (std::size_t i = 0; i < n; ++i) {
                const double pos = std::fmod(t_of(i) + phase, period);
                s[i] = (pos < duty * period ? on : off) + sigma * rng.normal();
            }
            break;
        }
        case ApplianceKind::MotorStartup: {
            const double steady = rng.uniform(300.0, 600.0);
            const double peak = rng.uniform(3.0, 6.0);
            const double tau = rng.uniform(1.0, 5.0);
            const double onset = rng.uniform(0.0, 0.05 * duration_s);
            const double ripple = 0.05 * steady;
            const double ripple_period = rng.uniform(30.0, 120.0);
            const double sigma = 0.02 * steady * ns;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = t_of(i);
                double v = 0.0;
                if (t >= onset) {
                    const double dt = t - onset;
                    v = steady * (1.0 + (peak - 1.0) * std::exp(-dt / tau)) +
                        ripple * std::sin(2.0 * std::numbers::pi * dt / ripple_period);
                }
                s[i] = v + sigma * rng.normal();
            }
            break;
        }
        case ApplianceKind::SpikyPeriodic: {
            const double base = rng.uniform(20.0, 40.0);
            const double height = rng.uniform(400.0, 900.0);
            const double period = rng.uniform(8.0, 20.0);
            const double width = rng.uniform(1.0, 2.0);
            const double phase = rng.uniform(0.0, period);
            const double sigma = 1.0 * ns;
            for (std::size_t i = 0; i < n; ++i) {
                const double pos = std::fmod(t_of(i) + phase, period);
                s[i] = base + (pos < width ? height : 0.0) + sigma * rng.normal();
            }
            break;
        }
        case ApplianceKind::Ramp: {
            const double start = rng.uniform(50.0, 100.0);
            const double end = rng.uniform(300.0, 500.0);
            const double sigma = 1.5 * ns;
            const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
            for (std::size_t i = 0; i < n; ++i)
                s[i] = start + (end - start) * static_cast<double>(i) / denom + sigma * rng.normal();
            break;
        }
        case ApplianceKind::NoisyIdle: {
            const double base = rng.uniform(3.0, 8.0);
            const double sigma = rng.uniform(2.0, 4.0) * ns;
            for (std::size_t i = 0; i < n; ++i) s[i] = std::max(0.0, base + sigma * rng.normal());
            break;
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<char> parse_delimiter(std::string_view name) {
    if (name == "comma") return ',';
    if (name == "tab") return '\t';
    if (name == "semicolon") return ';';
    if (name == "space") return ' ';
    return std::nullopt;
}

std::string_view delimiter_name(char c) {
    switch (c) {
        case ',': return "comma";
        case '\t': return "tab";
        case ';': return "semicolon";
        case ' ': return "space";
        default: return "";
    }
}

}  // namespace

void DatasetManifest::validate() const {
    if (format_version != kFormatVersion)
        throw Error(Errc::InvalidManifest, "unsupported manifest version " + std::to_string(format_version));
    std::set<std::string> seen;
    for (const auto& e : entries) {
        if (!seen.insert(e.path.lexically_normal().string()).second)
            throw Error(Errc::InvalidManifest, "duplicate path " + e.path.string());
        if (e.label.empty()) throw Error(Errc::InvalidManifest, "empty label for " + e.path.string());
        if (!(e.fs > 0.0)) throw Error(Errc::InvalidManifest, "non-positive fs for " + e.path.string());
        if (delimiter_name(e.schema.delimiter).empty())
            throw Error(Errc::InvalidManifest, "unsupported delimiter for " + e.path.string());
    }
}

std::vector<std::string> DatasetManifest::categories() const {
    std::set<std::string> labels;
    for (const auto& e : entries) labels.insert(e.label);
    return {labels.begin(), labels.end()};
}

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::FileNotFound, "cannot open manifest " + path.string());
    const fs::path base = path.parent_path();

    DatasetManifest manifest;
    std::string line;
    std::size_t line_no = 0;
    bool have_version = false;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = text::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto f = text::split(view, '\t');
        const auto bad = [&](const std::string& why) {
            return Error(Errc::InvalidManifest, path.string() + ":" + std::to_string(line_no) + ": " + why, line_no);
        };
        if (!have_version) {
            if (f.size() != 2 || text::trim(f[0]) != "version") throw bad("expected 'version<TAB>1'");
            const auto v = text::parse_int(f[1]);
            if (!v) throw bad("bad version");
            manifest.format_version = static_cast<int>(*v);
            if (manifest.format_version != DatasetManifest::kFormatVersion) throw bad("unsupported version");
            have_version = true;
            continue;
        }
        if (!have_header) {
            if (f.empty() || text::trim(f[0]) != "path") throw bad("expected column header row");
            have_header = true;
            continue;
        }
        if (f.size() != 6) throw bad("expected 6 tab-separated fields");
        ManifestEntry e;
        e.path = fs::path(std::string(text::trim(f[0])));
        if (e.path.is_relative()) e.path = base / e.path;
        e.label = std::string(text::trim(f[1]));
        const auto rate = text::parse_double(f[2]);
        const auto delim = parse_delimiter(text::trim(f[3]));
        const auto power = text::parse_int(f[4]);
        if (!rate || !delim || !power || *power < 0) throw bad("bad field value");
        e.fs = *rate;
        e.schema.delimiter = *delim;
        e.schema.power_column = static_cast<std::size_t>(*power);
        const auto ts_field = text::trim(f[5]);
        if (ts_field == "none") {
            e.schema.timestamp_column.reset();
        } else {
            const auto ts = text::parse_int(ts_field);
            if (!ts || *ts < 0) throw bad("bad timestamp column");
            e.schema.timestamp_column = static_cast<std::size_t>(*ts);
        }
        manifest.entries.push_back(std::move(e));
    }
    if (!have_version || !have_header) throw Error(Errc::InvalidManifest, path.string() + ": missing header");
    manifest.validate();
    return manifest;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
    manifest.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << "version\t" << manifest.format_version << '\n';
    out << "path\tlabel\tfs\tdelimiter\tpower_column\ttimestamp_column\n";
    for (const auto& e : manifest.entries) {
        out << e.path.generic_string() << '\t' << e.label << '\t' << text::format_double(e.fs) << '\t'
            << delimiter_name(e.schema.delimiter) << '\t' << e.schema.power_column << '\t';
        if (e.schema.timestamp_column)
            out << *e.schema.timestamp_column;
        else
            out << "none";
        out << '\n';
    }
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<PowerTrace> load_dataset(const DatasetManifest& manifest) {
    manifest.validate();
    std::vector<PowerTrace> traces;
    traces.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) traces.push_back(load_trace(e.path, e.schema, e.fs, e.label));
    return traces;
}

}  // namespace ftdf
