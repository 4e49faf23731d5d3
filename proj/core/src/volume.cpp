#include "volcheck/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "volcheck/errors.hpp"

namespace volcheck {

std::string SpatialSubset::describe() const {
    if (is_all()) return "all";
    std::ostringstream os;
    os.precision(15);
    for (std::size_t i = 0; i < box_->intervals.size(); ++i) {
        if (i) os << 'x';
        os << '[' << box_->intervals[i].first << ',' << box_->intervals[i].second << ')';
    }
    return os.str();
}

SnappedSubset snap_subset(const SpatialSubset& subset, const Grid& grid, const Torus& torus) {
    SnappedSubset snapped;
    if (subset.is_all()) {
        snapped.measure = torus.volume();
        for (double l : torus.lengths) snapped.box.intervals.emplace_back(0.0, l);
        return snapped;
    }
    const auto& intervals = subset.box().intervals;
    if (static_cast<int>(intervals.size()) != torus.dimension() || grid.dimension() != torus.dimension()) {
        throw PreconditionError("box has " + std::to_string(intervals.size()) + " intervals, domain has " +
                                std::to_string(torus.dimension()) + " axes");
    }
    snapped.measure = 1.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto [a, b] = intervals[i];
        const double length = torus.lengths[i];
        if (!(a >= 0.0 && b <= length && a < b)) {
            std::ostringstream os;
            os << "box interval [" << a << ", " << b << ") on axis " << i + 1 << " is not inside [0, "
               << length << ")";
            throw PreconditionError(os.str());
        }
        const int m = grid.counts()[i];
        const double cell = length / m;
        const int begin = static_cast<int>(std::lround(a / cell));
        const int end = static_cast<int>(std::lround(b / cell));
        if (end <= begin) {
            throw PreconditionError("box interval on axis " + std::to_string(i + 1) +
                                    " is narrower than one grid cell");
        }
        snapped.ranges.push_back({begin, end});
        const double sa = begin * cell;
        const double sb = end * cell;
        snapped.adjusted = snapped.adjusted || std::fabs(sa - a) > 1e-12 * length ||
                           std::fabs(sb - b) > 1e-12 * length;
        snapped.box.intervals.emplace_back(sa, sb);
        snapped.measure *= sb - sa;
    }
    return snapped;
}

namespace {

/// Integral over E of a pointwise slice quantity f(x).
QuadratureResult integrate_slice(const MetricSpec& m, const SpatialSubset& subset, const Grid& grid,
                                 const SpatialFunction& f) {
    if (const auto* hom = std::get_if<Homogeneous>(&m.domain())) {
        if (!subset.is_all()) throw PreconditionError("box subsets need a torus domain");
        return {f(m.origin()) * hom->sigma_volume, 0.0};
    }
    const auto& torus = std::get<Torus>(m.domain());
    if (grid.dimension() != m.dimension()) throw PreconditionError("grid dimension does not match metric");
    const SnappedSubset snapped = snap_subset(subset, grid, torus);
    if (m.declared_homogeneous()) {
        const double v = f(m.origin());
        if (!std::isfinite(v)) throw QuadratureError("non-finite integrand at the origin");
        return {v * snapped.measure, 0.0};
    }
    return integrate_torus(f, grid, torus, snapped.ranges);
}

void require_in_window(const MetricSpec& m, double t) {
    if (!std::isfinite(t) || !m.window().contains(t)) {
        std::ostringstream os;
        os.precision(17);
        os << "time " << t << " outside the window [" << m.window().t_minus << ", " << m.window().t_plus << "]";
        throw PreconditionError(os.str());
    }
}

}  // namespace

QuadratureResult slice_volume(const MetricSpec& m, double t, const SpatialSubset& subset,
                              const Grid& grid) {
    require_in_window(m, t);
    return integrate_slice(m, subset, grid,
                           [&](std::span<const double> x) { return sqrt_det_g(m, t, x); });
}

QuadratureResult slice_volume_rate(const MetricSpec& m, double t, const SpatialSubset& subset,
                                   const Grid& grid) {
    require_in_window(m, t);
    const double sign = m.signature() == Signature::Lorentzian ? -1.0 : 1.0;
    QuadratureResult r = integrate_slice(m, subset, grid, [&](std::span<const double> x) {
        const SliceGeometry geo = slice_geometry(m, t, x);
        return std::exp(m.psi()(t, x)) * geo.mean_curvature * geo.sqrt_det_g;
    });
    r.value *= sign;
    return r;
}

QuadratureResult cylinder_volume(const MetricSpec& m, double t1, double T,
                                 const SpatialSubset& subset, const Grid& grid, TimeRule rule) {
    require_in_window(m, t1);
    require_in_window(m, T);
    if (!(t1 < T)) throw PreconditionError("cylinder needs t1 < T");
    return integrate_time(
        [&](double t) {
            return integrate_slice(m, subset, grid, [&](std::span<const double> x) {
                return std::exp(m.psi()(t, x)) * sqrt_det_g(m, t, x);
            });
        },
        t1, T, rule);
}

double curve_length(const MetricSpec& m, std::span<const double> x, double t1, double t,
                    TimeRule rule) {
    require_in_window(m, t1);
    require_in_window(m, t);
    if (!(t1 < t)) throw PreconditionError("curve length needs t1 < t");
    const std::vector<double> point(x.begin(), x.end());
    if (point.size() != static_cast<std::size_t>(m.dimension())) {
        throw PreconditionError("point dimension does not match metric");
    }
    return integrate_time([&](double s) { return std::exp(m.psi()(s, point)); }, t1, t, rule).value;
}

double max_curve_length(const MetricSpec& m, double t1, double T, const Grid& grid, TimeRule rule) {
    double best = -std::numeric_limits<double>::infinity();
    const bool lapse_varies = m.psi().x_dependent();
    for (const auto& x : sample_points(m, grid)) {
        best = std::max(best, curve_length(m, x, t1, T, rule));
        if (!lapse_varies) break;
    }
    return best;
}

double volume_element_monotonicity(const MetricSpec& m, double t1, double t, const Grid& grid) {
    require_in_window(m, t1);
    require_in_window(m, t);
    if (!(t > t1)) throw PreconditionError("monotonicity check needs t > t1");
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& x : sample_points(m, grid)) {
        worst = std::max(worst, sqrt_det_g(m, t, x) - sqrt_det_g(m, t1, x));
    }
    return worst;
}

VolumeSweep volume_sweep(const MetricSpec& m, std::span<const double> times,
                         const SpatialSubset& subset, const Grid& grid) {
    if (!std::is_sorted(times.begin(), times.end())) throw PreconditionError("sweep times must be sorted");
    VolumeSweep sweep;
    for (double t : times) {
        sweep.times.push_back(t);
        sweep.volumes.push_back(slice_volume(m, t, subset, grid).value);
        sweep.rates.push_back(slice_volume_rate(m, t, subset, grid).value);
    }
    return sweep;
}

}  // namespace volcheck
