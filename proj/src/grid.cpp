#include "eopulse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eopulse::grid {

TimeGrid TimeGrid::build(const std::vector<double>& boundaries,
                         std::size_t budget, std::size_t min_per_segment) {
    if (boundaries.size() < 2)
        throw std::invalid_argument("TimeGrid needs at least 2 boundaries");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (!(boundaries[i] > boundaries[i - 1]))
            throw std::invalid_argument("TimeGrid boundaries must increase strictly");

    const double total = boundaries.back() - boundaries.front();
    TimeGrid g;
    g.segments.reserve(boundaries.size() - 1);

    std::size_t cursor = 0;
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        const double t0 = boundaries[i];
        const double t1 = boundaries[i + 1];
        const double share =
            static_cast<double>(budget) * ((t1 - t0) / total);
        // Round the interval count to a multiple of 4 (point count 4m+1).
        std::size_t m = static_cast<std::size_t>(
            std::max(1.0, std::round(share / 4.0)));
        const std::size_t min_m = (std::max<std::size_t>(min_per_segment, 5) - 1 + 3) / 4;
        m = std::max(m, min_m);
        const std::size_t count = 4 * m + 1;

        Segment s;
        s.t0 = t0;
        s.t1 = t1;
        s.count = count;
        s.dt = (t1 - t0) / static_cast<double>(count - 1);
        s.first = cursor;
        cursor += count;
        g.segments.push_back(s);
    }

    g.time.resize(cursor);
    for (const Segment& s : g.segments) {
        for (std::size_t j = 0; j < s.count; ++j)
            g.time[s.first + j] = s.t0 + static_cast<double>(j) * s.dt;
        g.time[s.first + s.count - 1] = s.t1; // exact boundary
    }
    return g;
}

double sample(const TimeGrid& g, std::span<const double> column, double t) {
    for (const Segment& s : g.segments) {
        if (t > s.t1 && &s != &g.segments.back()) continue;
        const double x = std::clamp((t - s.t0) / (s.t1 - s.t0), 0.0, 1.0);
        const double pos = x * static_cast<double>(s.count - 1);
        const std::size_t j0 =
            std::min(static_cast<std::size_t>(pos), s.count - 2);
        const double w = pos - static_cast<double>(j0);
        return (1.0 - w) * column[s.first + j0] + w * column[s.first + j0 + 1];
    }
    return column.back();
}

} // namespace eopulse::grid
