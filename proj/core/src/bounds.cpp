#include "volcheck/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "volcheck/errors.hpp"

namespace volcheck {

const char* to_string(Theorem t) {
    switch (t) {
        case Theorem::Thm01Future: return "thm01-future";
        case Theorem::Thm01Past: return "thm01-past";
        case Theorem::Thm01Local: return "thm01-local";
        case Theorem::Thm12Future: return "thm12-future";
        case Theorem::Thm12Past: return "thm12-past";
        case Theorem::RemarkSec2: return "remark2";
        case Theorem::RiemannI: return "riemann-i";
        case Theorem::RiemannII: return "riemann-ii";
    }
    return "?";
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Violated: return "violated";
        case Verdict::HypothesisNotMet: return "hypothesis-not-met";
    }
    return "?";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

void validate_ladder(const MetricSpec& m, double t1, std::span<const double> ladder) {
    const TimeWindow& w = m.window();
    if (!std::isfinite(t1) || !w.contains(t1)) {
        throw PreconditionError("start time " + format_number(t1) + " is outside the time window");
    }
    if (ladder.empty()) throw PreconditionError("ladder is empty");
    double previous = t1;
    for (double T : ladder) {
        if (!std::isfinite(T) || !(T > previous)) {
            throw PreconditionError("ladder must increase strictly from the start time (at " +
                                    format_number(T) + ")");
        }
        if (!w.contains(T) || (std::isfinite(w.t_plus) && !(T < w.t_plus))) {
            throw PreconditionError("ladder point " + format_number(T) +
                                    " is not below the end of the time window");
        }
        previous = T;
    }
}

void require_signature(const MetricSpec& m, Signature s, const char* check) {
    if (m.signature() != s) {
        throw PreconditionError(std::string(check) + " needs a " + to_string(s) + " metric");
    }
}

/// Points of E at which pointwise hypotheses are sampled.
std::vector<std::vector<double>> subset_points(const MetricSpec& m, const SpatialSubset& subset,
                                               const Grid& grid) {
    if (subset.is_all()) return sample_points(m, grid);
    const auto* torus = std::get_if<Torus>(&m.domain());
    if (torus == nullptr) throw PreconditionError("box subsets need a torus domain");
    const SnappedSubset snapped = snap_subset(subset, grid, *torus);
    if (m.declared_homogeneous()) return {m.origin()};

    std::vector<std::vector<double>> points;
    const int n = m.dimension();
    std::vector<int> index(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) index[static_cast<std::size_t>(i)] = snapped.ranges[static_cast<std::size_t>(i)].begin;
    while (true) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            x[u] = Grid::coordinate(index[u], grid.counts()[u], torus->lengths[u]);
        }
        points.push_back(std::move(x));
        int axis = 0;
        for (; axis < n; ++axis) {
            const auto u = static_cast<std::size_t>(axis);
            if (++index[u] < snapped.ranges[u].end) break;
            index[u] = snapped.ranges[u].begin;
        }
        if (axis == n) break;
    }
    return points;
}

/// Uniform samples on [t1, ladder.back()] merged with the ladder itself.
std::vector<double> hypothesis_times(double t1, std::span<const double> ladder, int samples) {
    const double end = ladder.back();
    std::vector<double> times(ladder.begin(), ladder.end());
    const int count = std::max(samples, 2);
    for (int k = 0; k < count; ++k) times.push_back(t1 + (end - t1) * k / (count - 1));
    times.back() = end;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

/// min over (times, points) of sign * H.
double curvature_infimum(const MetricSpec& m, std::span<const double> times,
                         const std::vector<std::vector<double>>& points, double sign) {
    double lowest = std::numeric_limits<double>::infinity();
    for (double t : times) {
        for (const auto& x : points) lowest = std::min(lowest, sign * slice_geometry(m, t, x).mean_curvature);
    }
    return lowest;
}

std::string sampling_note(std::size_t times, std::size_t points) {
    return "hypothesis sampled at " + std::to_string(times) + " times x " + std::to_string(points) +
           " points; refine before reading a violation as real";
}

/// Cylinder volumes Q(t1, T_k), accumulated one ladder segment at a time.
void measure_ladder(const MetricSpec& m, double t1, std::span<const double> ladder,
                    const SpatialSubset& subset, const CheckOptions& options, BoundReport& report) {
    double value = 0.0;
    double error = 0.0;
    double from = t1;
    for (double T : ladder) {
        const QuadratureResult segment = cylinder_volume(m, from, T, subset, options.grid, options.rule);
        value += segment.value;
        error += segment.error_estimate;
        report.measured.push_back(value);
        report.measured_errors.push_back(error);
        from = T;
    }
}

void set_margins_and_verdict(BoundReport& report, bool hypothesis_met) {
    report.margins.clear();
    report.point_verdicts.clear();
    if (!hypothesis_met) {
        report.verdict = Verdict::HypothesisNotMet;
        report.bounds.assign(report.measured.size(), kNaN);
        report.sharper_bounds.assign(report.measured.size(), kNaN);
        report.margins.assign(report.measured.size(), kNaN);
        report.point_verdicts.assign(report.measured.size(), Verdict::HypothesisNotMet);
        return;
    }
    report.verdict = Verdict::Holds;
    for (std::size_t k = 0; k < report.measured.size(); ++k) {
        const double margin = report.bounds[k] - report.measured[k];
        report.margins.push_back(margin);
        const double slack = report.tolerance * (1.0 + std::fabs(report.bounds[k])) + report.measured_errors[k];
        const bool holds = margin >= -slack;
        report.point_verdicts.push_back(holds ? Verdict::Holds : Verdict::Violated);
        if (!holds) report.verdict = Verdict::Violated;
    }
}

BoundReport start_report(Theorem theorem, double t1, std::span<const double> ladder,
                         const SpatialSubset& subset, const CheckOptions& options) {
    BoundReport report;
    report.theorem = theorem;
    report.start_time = t1;
    report.ladder.assign(ladder.begin(), ladder.end());
    report.subset = subset.describe();
    report.tolerance = options.tolerance;
    report.hypothesis_samples = options.hypothesis_samples;
    return report;
}

std::vector<double> negated(std::span<const double> values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(-v);
    return out;
}

/// Reads a future-direction report back into the original time coordinate.
BoundReport as_past(BoundReport report, Theorem theorem, double t2, std::span<const double> ladder) {
    report.theorem = theorem;
    report.start_time = t2;
    report.ladder.assign(ladder.begin(), ladder.end());
    return report;
}

}  // namespace

BoundReport check_thm01_future(const MetricSpec& m, double t1, std::span<const double> ladder,
                               const SpatialSubset& subset, const CheckOptions& options) {
    require_signature(m, Signature::Lorentzian, "thm01");
    validate_ladder(m, t1, ladder);
    BoundReport report = start_report(subset.is_all() ? Theorem::Thm01Future : Theorem::Thm01Local, t1,
                                      ladder, subset, options);

    const auto points = subset_points(m, subset, options.grid);
    const auto times = hypothesis_times(t1, ladder, options.hypothesis_samples);
    const double eps0 = curvature_infimum(m, times, points, 1.0);
    report.constant = eps0;
    report.notes.push_back(sampling_note(times.size(), points.size()));

    report.reference_volume = slice_volume(m, t1, subset, options.grid).value;
    measure_ladder(m, t1, ladder, subset, options, report);

    const bool met = eps0 > options.tolerance;
    if (met) {
        for (double T : ladder) {
            report.bounds.push_back(report.reference_volume / eps0);
            const double end_volume = slice_volume(m, T, subset, options.grid).value;
            report.sharper_bounds.push_back((report.reference_volume - end_volume) / eps0);
        }
    } else {
        report.notes.push_back("mean curvature infimum " + format_number(eps0) + " is not positive");
    }
    set_margins_and_verdict(report, met);
    return report;
}

BoundReport check_thm01_past(const MetricSpec& m, double t2, std::span<const double> ladder,
                             const SpatialSubset& subset, const CheckOptions& options) {
    const std::vector<double> flipped = negated(ladder);
    BoundReport future = check_thm01_future(time_reversal(m), -t2, flipped, subset, options);
    return as_past(std::move(future), subset.is_all() ? Theorem::Thm01Past : Theorem::Thm01Local, t2, ladder);
}

BoundReport check_thm12(const MetricSpec& m, double t1, std::span<const double> ladder,
                        const SpatialSubset& subset, const CheckOptions& options) {
    require_signature(m, Signature::Lorentzian, "thm12");
    validate_ladder(m, t1, ladder);
    BoundReport report = start_report(Theorem::Thm12Future, t1, ladder, subset, options);

    const auto points = subset_points(m, subset, options.grid);
    const auto times = hypothesis_times(t1, ladder, options.hypothesis_samples);

    // Volume elements must not grow after t1.
    double worst = -std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (const auto& x : points) {
        const double start = sqrt_det_g(m, t1, x);
        scale = std::max(scale, start);
        for (double t : times) {
            if (t > t1) worst = std::max(worst, sqrt_det_g(m, t, x) - start);
        }
    }
    report.notes.push_back(sampling_note(times.size(), points.size()));
    const bool met = worst <= options.tolerance * (1.0 + scale);
    if (!met) {
        report.notes.push_back("volume element grows by up to " + format_number(worst) + " after t1");
    }

    // Coordinate curves run to T+ when it is finite, else to the last ladder point.
    const double end = std::isfinite(m.window().t_plus) ? m.window().t_plus : ladder.back();
    double gamma1 = -std::numeric_limits<double>::infinity();
    for (const auto& x : points) {
        gamma1 = std::max(gamma1, curve_length(m, x, t1, end, options.rule));
        if (!m.psi().x_dependent()) break;
    }
    report.constant = gamma1;
    report.notes.push_back("gamma1 is the longest coordinate curve (s, x) on [t1, " + format_number(end) +
                           "]; other future directed curves may be longer");

    report.reference_volume = slice_volume(m, t1, subset, options.grid).value;
    measure_ladder(m, t1, ladder, subset, options, report);
    if (met) {
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            report.bounds.push_back(gamma1 * report.reference_volume);
            report.sharper_bounds.push_back(kNaN);
        }
    }
    set_margins_and_verdict(report, met);
    return report;
}

BoundReport check_thm12_past(const MetricSpec& m, double t2, std::span<const double> ladder,
                             const SpatialSubset& subset, const CheckOptions& options) {
    const std::vector<double> flipped = negated(ladder);
    BoundReport future = check_thm12(time_reversal(m), -t2, flipped, subset, options);
    return as_past(std::move(future), Theorem::Thm12Past, t2, ladder);
}

BoundReport check_remark_sec2(const MetricSpec& m_cmc, double tau, double tau2,
                              const CheckOptions& options) {
    require_signature(m_cmc, Signature::Lorentzian, "remark2");
    if (!(tau > 0.0 && tau < tau2)) throw PreconditionError("remark2 needs 0 < tau < tau2");
    if (!m_cmc.window().contains(tau) || !m_cmc.window().contains(tau2)) {
        throw PreconditionError("tau and tau2 must lie in the time window");
    }
    const double ladder[] = {tau2};
    BoundReport report = start_report(Theorem::RemarkSec2, tau, ladder, SpatialSubset::all(), options);
    report.constant = tau2;

    // The time label must be the slice mean curvature.
    constexpr int kChecks = 10;
    for (int k = 0; k < kChecks; ++k) {
        const double label = tau + (tau2 - tau) * k / (kChecks - 1);
        const auto range = mean_curvature_extrema(m_cmc, label, options.grid);
        const double off = std::max(std::fabs(range.min - label), std::fabs(range.max - label));
        if (!(off <= 1e-8 * (1.0 + std::fabs(label)))) {
            throw GeometryError("slices are not CMC with H = tau: at tau = " + format_number(label) +
                                " H ranges over [" + format_number(range.min) + ", " +
                                format_number(range.max) + "]");
        }
    }

    const Grid& grid = options.grid;
    const double start_volume = slice_volume(m_cmc, tau, SpatialSubset::all(), grid).value;
    const double end_volume = slice_volume(m_cmc, tau2, SpatialSubset::all(), grid).value;
    const QuadratureResult q = cylinder_volume(m_cmc, tau, tau2, SpatialSubset::all(), grid, options.rule);
    report.reference_volume = start_volume;
    report.measured = {q.value};
    report.measured_errors = {q.error_estimate};
    const double lower = (start_volume - end_volume) / tau2;
    report.bounds = {lower};
    report.sharper_bounds = {kNaN};
    report.margins = {q.value - lower};
    const double slack = options.tolerance * (1.0 + std::fabs(lower)) + q.error_estimate;
    report.verdict = report.margins[0] >= -slack ? Verdict::Holds : Verdict::Violated;
    report.point_verdicts = {report.verdict};

    // Slice volumes growing without bound as tau decreases would force an
    // infinite past region; only a finite-sample hint is possible.
    const double floor = std::max(m_cmc.window().t_minus, 0.0);
    std::vector<double> trail{start_volume};
    for (double s = tau / 2.0; s > floor && trail.size() < 12; s /= 2.0) {
        trail.push_back(slice_volume(m_cmc, s, SpatialSubset::all(), grid).value);
    }
    const bool growing = trail.size() >= 3 && std::is_sorted(trail.begin(), trail.end()) &&
                         trail.back() > 1e3 * trail.front();
    if (growing) report.notes.push_back("|M(tau)| grows as tau decreases: |N-| = infinity expected");
    return report;
}

BoundReport check_riemannian(const MetricSpec& m, double t1, std::span<const double> ladder,
                             const SpatialSubset& subset, const CheckOptions& options,
                             RiemannCase which) {
    require_signature(m, Signature::Riemannian, "riemann");
    validate_ladder(m, t1, ladder);
    const bool case_one = which == RiemannCase::I;
    BoundReport report =
        start_report(case_one ? Theorem::RiemannI : Theorem::RiemannII, t1, ladder, subset, options);

    const auto points = subset_points(m, subset, options.grid);
    const auto times = hypothesis_times(t1, ladder, options.hypothesis_samples);
    const double eps0 = curvature_infimum(m, times, points, case_one ? 1.0 : -1.0);
    report.constant = eps0;
    report.notes.push_back(sampling_note(times.size(), points.size()));

    report.reference_volume = slice_volume(m, t1, subset, options.grid).value;
    measure_ladder(m, t1, ladder, subset, options, report);

    const bool met = eps0 > options.tolerance;
    if (met) {
        std::vector<double> end_volumes;
        for (double T : ladder) end_volumes.push_back(slice_volume(m, T, subset, options.grid).value);
        for (double v : end_volumes) {
            if (case_one) {
                // |M(T_k)| stands in for the limit at T+; the ladder shows its trend.
                report.bounds.push_back(v / eps0);
                report.sharper_bounds.push_back((v - report.reference_volume) / eps0);
            } else {
                report.bounds.push_back(report.reference_volume / eps0);
                report.sharper_bounds.push_back((report.reference_volume - v) / eps0);
            }
        }
        if (case_one) {
            const bool increasing = std::is_sorted(end_volumes.begin(), end_volumes.end());
            report.notes.push_back(std::string("|M(T_k)| along the ladder is ") +
                                   (increasing ? "non-decreasing" : "not monotone") +
                                   "; the limit at T+ is not extrapolated");
        }
    } else {
        report.notes.push_back(std::string("infimum of ") + (case_one ? "H" : "-H") + " is " +
                               format_number(eps0) + ", not positive");
    }
    set_margins_and_verdict(report, met);
    return report;
}

}  // namespace volcheck
