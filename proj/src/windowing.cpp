#include "ftdf/windowing.hpp"

#include <cmath>

#include "ftdf/error.hpp"

namespace ftdf {

WindowPlan plan_windows(std::size_t trace_len, std::size_t window_len, double overlap_fraction) {
    if (window_len < 2) throw Error(Errc::InvalidWindow, "window length must be >= 2");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
        throw Error(Errc::InvalidOverlap, "overlap fraction must lie in [0, 1)");
    if (trace_len < window_len)
        throw Error(Errc::TraceTooShort, "trace of " + std::to_string(trace_len) +
                                             " samples is shorter than window length " +
                                             std::to_string(window_len));
    const auto overlap = static_cast<std::size_t>(std::floor(overlap_fraction * static_cast<double>(window_len)));
    WindowPlan plan;
    plan.window_len = window_len;
    plan.hop = window_len - overlap;
    plan.count = (trace_len - window_len) / plan.hop + 1;
    return plan;
}

std::span<const double> segment_view(const PowerTrace& trace, const WindowPlan& plan, std::size_t k) {
    if (k < 1 || k > plan.count)
        throw Error(Errc::IndexOutOfRange,
                    "window " + std::to_string(k) + " outside 1.." + std::to_string(plan.count), k);
    const std::size_t start = plan.offset(k);
    if (start + plan.window_len > trace.size())
        throw Error(Errc::PlanMismatch, "window plan does not fit trace '" + trace.source_id + "'", k);
    return std::span<const double>(trace.samples).subspan(start, plan.window_len);
}

Segment extract_segment(const PowerTrace& trace, const WindowPlan& plan, std::size_t k) {
    const auto view = segment_view(trace, plan, k);
    return Segment{{view.begin(), view.end()}, k, trace.source_id};
}

}  // namespace ftdf
