#pragma once

#include <string>
#include <vector>

#include "volcheck/geometry.hpp"
#include "volcheck/numerics.hpp"
#include "volcheck/volume.hpp"

namespace volcheck {

enum class Theorem {
    Thm01Future,
    Thm01Past,
    Thm01Local,
    Thm12Future,
    Thm12Past,
    RemarkSec2,
    RiemannI,
    RiemannII,
};

enum class Verdict { Holds, Violated, HypothesisNotMet };

const char* to_string(Theorem t);
const char* to_string(Verdict v);

struct CheckOptions {
    Grid grid;
    TimeRule rule{};
    double tolerance = 1e-9;
    /// Uniform times on [t1, T_max] at which the curvature hypothesis is
    /// sampled, in addition to the ladder points.
    int hypothesis_samples = 64;
};

/// Outcome of one theorem check along a ladder T_1 < T_2 < ... (or the
/// single pair (tau, tau2) of the CMC remark).
struct BoundReport {
    Theorem theorem = Theorem::Thm01Future;
    double start_time = 0.0;          // t1, t2 or tau
    std::vector<double> ladder;       // T_k in the caller's time coordinate
    std::string subset = "all";
    double constant = 0.0;            // epsilon0, gamma1 or tau2
    double reference_volume = 0.0;    // |M(t1)| restricted to E
    std::vector<double> measured;     // cylinder volumes
    std::vector<double> measured_errors;
    std::vector<double> bounds;
    std::vector<double> margins;      // bound - measured (measured - bound for the remark)
    std::vector<double> sharper_bounds;
    std::vector<Verdict> point_verdicts;  // one per ladder point
    Verdict verdict = Verdict::Holds;
    int hypothesis_samples = 0;
    double tolerance = 0.0;
    std::vector<std::string> notes;
};

/// H >= eps0 > 0 on the cylinder over E implies |Q(t1, T)| <= |M(t1)| / eps0.
BoundReport check_thm01_future(const MetricSpec& m, double t1, std::span<const double> ladder,
                               const SpatialSubset& subset, const CheckOptions& options);

/// H <= -eps0 < 0 before t2 implies the past cylinder has volume <= |M(t2)| / eps0.
/// `ladder` decreases from t2. Runs the future check on the time-reversed metric.
BoundReport check_thm01_past(const MetricSpec& m, double t2, std::span<const double> ladder,
                             const SpatialSubset& subset, const CheckOptions& options);

/// Non-increasing volume elements and coordinate curves of length <= gamma1
/// imply |Q(t1, T)| <= gamma1 |M(t1)|.
BoundReport check_thm12(const MetricSpec& m, double t1, std::span<const double> ladder,
                        const SpatialSubset& subset, const CheckOptions& options);

/// Past-directed variant of check_thm12, through time reversal.
BoundReport check_thm12_past(const MetricSpec& m, double t2, std::span<const double> ladder,
                             const SpatialSubset& subset, const CheckOptions& options);

/// (|M(tau)| - |M(tau2)|) / tau2 <= |Q(tau, tau2)| for a metric whose time
/// coordinate is the slice mean curvature. Throws GeometryError when the
/// slices are not CMC with H = tau.
BoundReport check_remark_sec2(const MetricSpec& m_cmc, double tau, double tau2,
                              const CheckOptions& options);

enum class RiemannCase { I, II };

/// Case I: H >= eps0 > 0 gives |Q(t1, T)| <= |M(T)| / eps0.
/// Case II: H <= -eps0 < 0 gives |Q(t1, T)| <= |M(t1)| / eps0.
BoundReport check_riemannian(const MetricSpec& m, double t1, std::span<const double> ladder,
                             const SpatialSubset& subset, const CheckOptions& options,
                             RiemannCase which);

}  // namespace volcheck
