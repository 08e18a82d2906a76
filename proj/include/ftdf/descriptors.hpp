#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftdf/ingest.hpp"
#include "ftdf/windowing.hpp"

namespace ftdf {

/// The seven time-domain window descriptors.
enum class Descriptor { RMSF, MADF, IAMF, ZCF, WLF, SSCF, ARF };

inline constexpr std::array<Descriptor, 7> kAllDescriptors = {
    Descriptor::RMSF, Descriptor::MADF, Descriptor::IAMF, Descriptor::ZCF,
    Descriptor::WLF,  Descriptor::SSCF, Descriptor::ARF,
};

std::string_view descriptor_name(Descriptor d);
std::optional<Descriptor> parse_descriptor(std::string_view name);

inline constexpr double kWlfEpsilon = 1e-12;
inline constexpr double kDefaultSscfThreshold = 1e-10;
inline constexpr double kDegenerateAutocorrelation = 1e-15;

struct ArConfig {
    std::size_t order = 15;
    bool operator==(const ArConfig&) const = default;
};

struct DescriptorParams {
    ArConfig ar;
    double sscf_threshold = kDefaultSscfThreshold;
    /// Use the per-sample (1/sqrt(N)) * sum|s_i| reading of the RMS formula
    /// instead of the conventional root mean square.
    bool literal_rms = false;

    bool operator==(const DescriptorParams&) const = default;
};

// Every descriptor reads one window of raw samples.

double rmsf(std::span<const double> s);
double rmsf_literal(std::span<const double> s);
double madf(std::span<const double> s);
/// (1/N) * sum (s_i^2 / 2) * sgn(s_i) + mean, with sgn(0) = 0.
double iamf(std::span<const double> s);
/// sum_{i>=2} |sgn(s_i) - sgn(s_{i-1})|, so a full sign flip counts 2.
double zcf(std::span<const double> s);
/// ln(max(sum |s_{i+1} - s_i|, kWlfEpsilon)).
double wlf(std::span<const double> s);
double sscf(std::span<const double> s, double threshold = kDefaultSscfThreshold);

/// Biased autocorrelation r[0..max_lag] of the mean-removed window.
std::vector<double> autocorrelation(std::span<const double> s, std::size_t max_lag);

/// Levinson-Durbin solve of the Yule-Walker system
///   sum_j a_j r[|i - j|] = r[i],  i = 1..order
/// given r[0..order]. Returns a_1..a_order. Throws DegenerateSignal when
/// r[0] < kDegenerateAutocorrelation.
std::vector<double> levinson_durbin(std::span<const double> r, std::size_t order);

/// AR coefficients a_1..a_P of the mean-removed window (model
/// s_i = sum_p a_p s_{i-p} + w_i). Throws InvalidArOrder unless 1 <= P < N,
/// and DegenerateSignal for constant windows.
std::vector<double> estimate_ar(std::span<const double> s, const ArConfig& cfg = {});

/// Sum over i = P+1..N of the one-step AR predictions of the mean-removed
/// window, plus N * mean. A degenerate window yields N * mean.
double arf(std::span<const double> s, const ArConfig& cfg = {});

double compute_descriptor(Descriptor d, std::span<const double> s, const DescriptorParams& params = {});

/// Smallest window length every descriptor accepts under `params`.
std::size_t min_window_len(const DescriptorParams& params);

/// Per-window values of one descriptor over a whole trace.
struct FeatureSeries {
    Descriptor descriptor = Descriptor::RMSF;
    std::vector<double> values;  // values[k - 1] belongs to window k
    std::string trace_ref;
    WindowPlan plan;
};

/// Errors raised for a window are rethrown with the trace and window
/// attached to the message and the window index as position.
FeatureSeries extract_series(const PowerTrace& trace, const WindowPlan& plan, Descriptor d,
                             const DescriptorParams& params = {});

/// Rows "trace_id,k,descriptor,value" under a header line.
void write_series(const std::filesystem::path& path, const FeatureSeries& series);
FeatureSeries read_series(const std::filesystem::path& path);

}  // namespace ftdf
