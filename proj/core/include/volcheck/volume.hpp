#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volcheck/geometry.hpp"
#include "volcheck/numerics.hpp"

namespace volcheck {

/// Axis-aligned box [a_i, b_i) inside the torus.
struct Box {
    std::vector<std::pair<double, double>> intervals;
};

/// Either the whole slice or a box of it.
class SpatialSubset {
public:
    SpatialSubset() = default;
    explicit SpatialSubset(Box box) : box_(std::move(box)) {}
    static SpatialSubset all() { return {}; }

    bool is_all() const { return !box_.has_value(); }
    const Box& box() const { return *box_; }
    std::string describe() const;

private:
    std::optional<Box> box_;
};

/// A box moved to the nearest cell boundaries of a grid.
struct SnappedSubset {
    std::vector<IndexRange> ranges;  // empty for the whole torus
    Box box;                         // the snapped box actually integrated
    bool adjusted = false;           // true when snapping moved some end point
    double measure = 0.0;            // coordinate volume of the snapped box
};

SnappedSubset snap_subset(const SpatialSubset& subset, const Grid& grid, const Torus& torus);

/// |M(t) restricted to E| = integral of sqrt(det g) over E.
QuadratureResult slice_volume(const MetricSpec& m, double t, const SpatialSubset& subset,
                              const Grid& grid);

/// d/dt |M(t)|: -integral e^psi H sqrt(g) (Lorentzian), + the same (Riemannian).
QuadratureResult slice_volume_rate(const MetricSpec& m, double t, const SpatialSubset& subset,
                                   const Grid& grid);

/// |Q(t1, T)| = integral over [t1, T] x E of e^psi sqrt(det g).
QuadratureResult cylinder_volume(const MetricSpec& m, double t1, double T,
                                 const SpatialSubset& subset, const Grid& grid, TimeRule rule);

/// Length of the coordinate curve s -> (s, x), s in [t1, t]: integral of e^psi.
double curve_length(const MetricSpec& m, std::span<const double> x, double t1, double t,
                    TimeRule rule);

/// Largest curve_length over the grid nodes.
double max_curve_length(const MetricSpec& m, double t1, double T, const Grid& grid, TimeRule rule);

/// max over nodes of sqrt(g)(t, x) - sqrt(g)(t1, x); <= 0 when volume
/// elements do not grow between t1 and t.
double volume_element_monotonicity(const MetricSpec& m, double t1, double t, const Grid& grid);

struct VolumeSweep {
    std::vector<double> times;
    std::vector<double> volumes;
    std::vector<double> rates;
};

VolumeSweep volume_sweep(const MetricSpec& m, std::span<const double> times,
                         const SpatialSubset& subset, const Grid& grid);

}  // namespace volcheck
