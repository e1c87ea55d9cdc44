#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eopulse::grid {

/// One uniformly sampled smooth interval. Column data for [t0, t1] lives at
/// [first, first + count) in the concatenated arrays; interval boundaries are
/// duplicated across segments so one-sided limits of discontinuous columns
/// (J at ideal pulse edges) are both representable.
struct Segment {
    double t0 = 0.0;
    double t1 = 0.0;
    double dt = 0.0;
    std::size_t first = 0;
    std::size_t count = 0; // 4m+1 so Simpson and its half-rate check both apply
};

struct TimeGrid {
    std::vector<Segment> segments;
    std::vector<double> time;

    std::size_t size() const { return time.size(); }

    /// Splits [boundaries_0 .. boundaries_n] into segments and distributes
    /// roughly `budget` samples across them proportionally to length, at
    /// least `min_per_segment` (rounded to 4m+1) each.
    static TimeGrid build(const std::vector<double>& boundaries,
                          std::size_t budget, std::size_t min_per_segment = 33);
};

/// Sum of a per-segment operation over the whole grid, e.g. quadrature.
template <typename F>
double accumulate_segments(const TimeGrid& g, F&& per_segment) {
    double acc = 0.0;
    for (const Segment& s : g.segments)
        acc += per_segment(s);
    return acc;
}

/// Linear interpolation of a sampled column at time t (clamped to the grid).
/// At duplicated segment boundaries the earlier segment's row wins.
double sample(const TimeGrid& g, std::span<const double> column, double t);

} // namespace eopulse::grid
