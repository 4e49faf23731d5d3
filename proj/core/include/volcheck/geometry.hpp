#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volcheck/expr.hpp"
#include "volcheck/numerics.hpp"

namespace volcheck {

/// Spatial dimensions supported by the fixed-capacity matrices below.
inline constexpr int kMaxDimension = 8;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                             kMaxDimension + 1, kMaxDimension + 1>;

using PointFunction = std::function<double(double t, std::span<const double> x)>;

/// A scalar function of (t, x) with optional analytic first derivatives.
///
/// Missing derivatives are approximated by central differences by the
/// geometry routines. `x_dependent == false` promises the value does not vary
/// in x; the volume routines then evaluate once per slice.
class ScalarField {
public:
    ScalarField(PointFunction value, std::optional<PointFunction> dt = std::nullopt,
                std::vector<PointFunction> dx = {}, bool x_dependent = true);

    static ScalarField constant(double c);
    /// Field of t only, with derivative `derivative`.
    static ScalarField of_time(std::function<double(double)> value,
                               std::function<double(double)> derivative);
    /// Value and analytic derivatives from a parsed formula in `dimension` variables.
    static ScalarField from_expr(const expr::Expr& e, int dimension);

    double operator()(double t, std::span<const double> x) const { return value_(t, x); }

    bool has_time_derivative() const { return dt_.has_value(); }
    bool has_space_derivatives() const { return !dx_.empty(); }
    double time_derivative(double t, std::span<const double> x) const { return (*dt_)(t, x); }
    double space_derivative(int axis, double t, std::span<const double> x) const {
        return dx_[static_cast<std::size_t>(axis)](t, x);
    }

    bool x_dependent() const { return x_dependent_; }
    const std::optional<double>& constant_value() const { return constant_; }

    /// Same values, all analytic derivatives dropped.
    ScalarField without_derivatives() const;
    /// (t, x) -> f(-t, x).
    ScalarField time_reversed() const;
    /// (t, x) -> f(t, x) + c.
    ScalarField shifted(double c) const;

private:
    PointFunction value_;
    std::optional<PointFunction> dt_;
    std::vector<PointFunction> dx_;
    bool x_dependent_ = true;
    std::optional<double> constant_;
};

enum class Signature { Lorentzian, Riemannian };

const char* to_string(Signature s);

/// Time interval [t_minus, t_plus] on which the metric may be evaluated.
/// Either end may be infinite; a finite t_plus plays the role of T+.
struct TimeWindow {
    double t_minus = -std::numeric_limits<double>::infinity();
    double t_plus = std::numeric_limits<double>::infinity();

    bool contains(double t) const { return t >= t_minus && t <= t_plus; }
};

/// Metric e^{2 psi} (-+ dt^2 + sigma_ij dx^i dx^j) on a time window times a
/// spatial domain. The sign of dt^2 is - for Lorentzian, + for Riemannian.
class MetricSpec {
public:
    /// `sigma` is row-major n x n and must be symmetric (entries (i,j) and
    /// (j,i) are taken from the upper triangle during evaluation).
    MetricSpec(int dimension, Signature signature, ScalarField psi, std::vector<ScalarField> sigma,
               SpatialDomain domain, TimeWindow window);

    int dimension() const { return n_; }
    Signature signature() const { return signature_; }
    const ScalarField& psi() const { return psi_; }
    const ScalarField& sigma(int i, int j) const;
    const std::vector<ScalarField>& sigma_components() const { return sigma_; }
    const SpatialDomain& domain() const { return domain_; }
    const TimeWindow& window() const { return window_; }

    /// True when every field declares itself independent of x.
    bool declared_homogeneous() const;
    /// A fixed representative point (the origin) for x-independent metrics.
    std::vector<double> origin() const { return std::vector<double>(static_cast<std::size_t>(n_), 0.0); }

    MetricSpec without_derivatives() const;

private:
    int n_;
    Signature signature_;
    ScalarField psi_;
    std::vector<ScalarField> sigma_;
    SpatialDomain domain_;
    TimeWindow window_;
};

/// Builds a metric from formula text (row-major sigma). Throws ParseError or
/// PreconditionError when sigma is not symmetric.
MetricSpec metric_from_expressions(int dimension, Signature signature, const std::string& psi,
                                   const std::vector<std::string>& sigma, SpatialDomain domain,
                                   TimeWindow window);

struct SliceGeometry {
    Matrix g;
    Matrix g_inv;
    double sqrt_det_g = 0.0;
    Matrix h;
    double mean_curvature = 0.0;
};

/// Induced metric, second fundamental form and mean curvature of the slice
/// {x0 = t} at x, with h_ij = -+ (1/2) e^{-psi} d/dt g_ij (minus for
/// Lorentzian with the past directed normal, plus for Riemannian).
SliceGeometry slice_geometry(const MetricSpec& m, double t, std::span<const double> x);

/// e^{n psi} sqrt(det sigma); cheaper than slice_geometry.
double sqrt_det_g(const MetricSpec& m, double t, std::span<const double> x);

/// h_ij computed from the Gauss formula through the ambient Christoffel
/// symbols: h_ij = -<x_ij, nu>, with x_ij the covariant Hessian of the
/// embedding (t, x^i). Independent of slice_geometry.
Matrix second_fundamental_form_ambient(const MetricSpec& m, double t, std::span<const double> x);

/// Contravariant unit normal (nu^0, ..., nu^n): past directed for Lorentzian,
/// pointing towards increasing t for Riemannian metrics.
std::vector<double> normal_vector(const MetricSpec& m, double t, std::span<const double> x);

/// <nu, nu> under the ambient metric at (t, x).
double ambient_norm_squared(const MetricSpec& m, double t, std::span<const double> x,
                            std::span<const double> nu);

struct CurvatureRange {
    double min = 0.0;
    double max = 0.0;
};

/// Min and max of H over the grid nodes (one evaluation for x-independent metrics).
CurvatureRange mean_curvature_extrema(const MetricSpec& m, double t, const Grid& grid);

/// Largest |h_ambient - h_slice| entry over the grid nodes at time t.
double two_path_discrepancy(const MetricSpec& m, double t, const Grid& grid);

/// psi~(t,x) = psi(-t,x), sigma~(t,x) = sigma(-t,x), window [-t_plus, -t_minus].
MetricSpec time_reversal(const MetricSpec& m);

/// psi -> psi + c.
MetricSpec conformal_shift(const MetricSpec& m, double c);

/// Nodes of `grid` on the torus, or the origin alone for a homogeneous domain
/// or x-independent metric.
std::vector<std::vector<double>> sample_points(const MetricSpec& m, const Grid& grid);

struct TimeInterval {
    double begin = 0.0;
    double end = 0.0;
};

/// Re-expresses a spatially homogeneous Lorentzian metric with its slice mean
/// curvature tau as time coordinate. H(t) must increase strictly on `range`.
/// The inverse t(tau) comes from a monotone cubic through `samples` points,
/// polished by Newton iteration per query.
MetricSpec reparameterize_by_mean_curvature(const MetricSpec& m, TimeInterval range, int samples);

/// d/dt of a field at (t, x): analytic when available, else a central
/// difference (one-sided next to a finite end of `window`).
double field_time_derivative(const ScalarField& f, double t, std::span<const double> x,
                             const TimeWindow& window);

}  // namespace volcheck
