#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace volcheck {

/// Flat torus [0, L1) x ... x [0, Ln).
struct Torus {
    std::vector<double> lengths;

    int dimension() const { return static_cast<int>(lengths.size()); }
    double volume() const;
};

/// A closed spatial manifold represented only through its total sigma-volume.
/// Valid for metrics whose fields do not depend on x.
struct Homogeneous {
    double sigma_volume = 1.0;
};

using SpatialDomain = std::variant<Torus, Homogeneous>;

/// Cell-centred periodic grid: node k on axis i sits at (k + 1/2) L_i / m_i.
class Grid {
public:
    explicit Grid(std::vector<int> counts);
    static Grid uniform(int dimension, int nodes_per_axis);

    int dimension() const { return static_cast<int>(counts_.size()); }
    const std::vector<int>& counts() const { return counts_; }
    long long node_count() const;
    /// Same counts on every axis multiplied by `factor`.
    Grid refined(int factor) const;

    static double coordinate(int k, int count, double length) {
        return (static_cast<double>(k) + 0.5) * length / static_cast<double>(count);
    }

private:
    std::vector<int> counts_;
};

/// Half-open node index range [begin, end) along one axis.
struct IndexRange {
    int begin = 0;
    int end = 0;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Neumaier-compensated running sum. Results depend only on the order of add().
class CompensatedSum {
public:
    void add(double v);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

using SpatialFunction = std::function<double(std::span<const double>)>;

/// Equal-weight periodic rule over the nodes selected by `ranges` (all nodes
/// when empty). The error estimate compares against the cell-centred grid with
/// half the nodes per axis; box axes are halved only when their ends fall on
/// even cell boundaries, and the estimate is 0 when no axis can be halved.
QuadratureResult integrate_torus(const SpatialFunction& f, const Grid& grid, const Torus& torus,
                                 std::span<const IndexRange> ranges = {});

struct TimeRule {
    int panels = 20;
};

/// Composite 5-point Gauss-Legendre on [t1, T]. The error estimate is the
/// difference to the same rule with half as many panels, plus the weighted
/// error estimates reported by the integrand.
QuadratureResult integrate_time(const std::function<QuadratureResult(double)>& g, double t1,
                                double T, TimeRule rule);
QuadratureResult integrate_time(const std::function<double(double)>& g, double t1, double T,
                                TimeRule rule);

/// 6e-6 (1 + |s|).
double default_step(double s);

double central_difference(const std::function<double(double)>& f, double s, double step);

/// Second-order one-sided difference; direction +1 samples s, s+h, s+2h and
/// -1 samples s, s-h, s-2h.
double one_sided_difference(const std::function<double(double)>& f, double s, double step,
                            int direction);

}  // namespace volcheck
