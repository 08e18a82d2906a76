#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ftdf {

/// A labeled, uniformly sampled power signal.
struct PowerTrace {
    std::vector<double> samples;  // watts
    double fs = 1.0;              // Hz
    std::string label;
    std::string source_id;

    std::size_t size() const { return samples.size(); }

    /// Throws EmptyTrace, NonFiniteSample or InvalidConfig (fs <= 0).
    void validate() const;
};

/// Column layout of a delimited trace file.
struct TraceSchema {
    char delimiter = ',';
    std::size_t power_column = 1;                    // 0-based
    std::optional<std::size_t> timestamp_column = 0;  // 0-based, nullopt = none
    double scale = 1.0;                              // applied to every power value
};

/// Reads one sample per row. Blank lines are ignored; a first line whose
/// power field is not numeric is treated as a header. Any other unparseable
/// row raises MalformedRow carrying its 1-based line number.
PowerTrace load_trace(const std::filesystem::path& path, const TraceSchema& schema, double fs,
                      std::string label, std::string source_id = {});

/// Writes "t,power" rows (t = sample index / fs) in the shortest exact form.
void write_trace(const std::filesystem::path& path, const PowerTrace& trace);

/// Block-mean decimation; the trailing partial block is dropped.
PowerTrace decimate(const PowerTrace& trace, std::size_t factor);

// ---------------------------------------------------------------------------
// Synthetic appliances

enum class ApplianceKind { Constant, OnOffCycle, MotorStartup, SpikyPeriodic, Ramp, NoisyIdle };

inline constexpr ApplianceKind kAllApplianceKinds[] = {
    ApplianceKind::Constant,      ApplianceKind::OnOffCycle, ApplianceKind::MotorStartup,
    ApplianceKind::SpikyPeriodic, ApplianceKind::Ramp,       ApplianceKind::NoisyIdle,
};

std::string_view kind_name(ApplianceKind kind);
std::optional<ApplianceKind> parse_kind(std::string_view name);

/// Level of the "constant" class, the only kind with no per-trace jitter.
inline constexpr double kConstantBaseLevel = 100.0;

struct SynthOptions {
    /// Multiplies every additive noise term; 0 gives noise-free traces.
    double noise_scale = 1.0;
};

/// Deterministic in (kind, duration_s, fs, seed, options). Times inside the
/// generators are in seconds, so the signal shape is independent of fs.
PowerTrace synth_appliance(ApplianceKind kind, double duration_s, double fs, std::uint64_t seed,
                           const SynthOptions& options = {});

// ---------------------------------------------------------------------------
// Manifests

struct ManifestEntry {
    std::filesystem::path path;
    std::string label;
    double fs = 1.0;
    TraceSchema schema;
};

struct DatasetManifest {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    std::vector<ManifestEntry> entries;

    /// Unique paths, non-empty labels, fs > 0.
    void validate() const;
    std::vector<std::string> categories() const;  // sorted, unique
};

/// Tab-separated manifest:
///
///   version<TAB>1
///   path<TAB>label<TAB>fs<TAB>delimiter<TAB>power_column<TAB>timestamp_column
///   <one row per trace>
///
/// delimiter is one of comma, tab, semicolon, space; timestamp_column is a
/// 0-based index or "none". Relative paths resolve against the manifest's
/// directory.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Loads every entry; source_id is the file stem.
std::vector<PowerTrace> load_dataset(const DatasetManifest& manifest);

}  // namespace ftdf
