#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ftdf/ingest.hpp"

namespace ftdf {

inline constexpr double kDefaultOverlap = 0.25;

/// Geometry of an overlapped segmentation. Windows are numbered 1..count;
/// window k starts at sample offset (k - 1) * hop.
struct WindowPlan {
    std::size_t window_len = 0;
    std::size_t hop = 0;
    std::size_t count = 0;

    std::size_t offset(std::size_t k) const { return (k - 1) * hop; }
    bool operator==(const WindowPlan&) const = default;
};

struct Segment {
    std::vector<double> values;
    std::size_t window_index = 0;  // 1-based
    std::string trace_ref;
};

/// hop = N - floor(overlap_fraction * N); K = floor((M - N) / hop) + 1.
/// Throws InvalidWindow (N < 2), InvalidOverlap, TraceTooShort (M < N).
WindowPlan plan_windows(std::size_t trace_len, std::size_t window_len,
                        double overlap_fraction = kDefaultOverlap);

/// Copying extraction; throws IndexOutOfRange unless 1 <= k <= K.
Segment extract_segment(const PowerTrace& trace, const WindowPlan& plan, std::size_t k);

/// Non-owning view of window k, same bounds rules as extract_segment.
std::span<const double> segment_view(const PowerTrace& trace, const WindowPlan& plan, std::size_t k);

}  // namespace ftdf
