#include "volcheck/numerics.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "volcheck/errors.hpp"

namespace volcheck {

double Torus::volume() const {
    double v = 1.0;
    for (double l : lengths) v *= l;
    return v;
}

Grid::Grid(std::vector<int> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw PreconditionError("grid needs at least one axis");
    for (int m : counts_) {
        if (m < 1) throw PreconditionError("grid node counts must be >= 1");
    }
}

Grid Grid::uniform(int dimension, int nodes_per_axis) {
    return Grid(std::vector<int>(static_cast<std::size_t>(dimension), nodes_per_axis));
}

long long Grid::node_count() const {
    long long n = 1;
    for (int m : counts_) n *= m;
    return n;
}

Grid Grid::refined(int factor) const {
    std::vector<int> c = counts_;
    for (int& m : c) m *= factor;
    return Grid(std::move(c));
}

void CompensatedSum::add(double v) {
    const double s = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
        compensation_ += (sum_ - s) + v;
    } else {
        compensation_ += (v - s) + sum_;
    }
    sum_ = s;
}

namespace {

std::string describe_node(std::span<const int> index, std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << "node (";
    for (std::size_t i = 0; i < index.size(); ++i) os << (i ? "," : "") << index[i];
    os << ") at x = (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

}  // namespace

namespace {

/// Equal-weight sum of f over the index box of a cell-centred grid.
double sweep(const SpatialFunction& f, std::span<const int> counts, std::span<const IndexRange> box,
             const Torus& torus) {
    const std::size_t n = counts.size();
    std::vector<int> index(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        index[i] = box[i].begin;
        x[i] = Grid::coordinate(index[i], counts[i], torus.lengths[i]);
    }
    CompensatedSum sum;
    for (;;) {
        const double v = f(x);
        if (!std::isfinite(v)) {
            throw QuadratureError("non-finite integrand at " + describe_node(index, x));
        }
        sum.add(v);

        // odometer, last axis fastest
        std::size_t axis = n;
        bool advanced = false;
        while (axis-- > 0) {
            if (++index[axis] < box[axis].end) {
                x[axis] = Grid::coordinate(index[axis], counts[axis], torus.lengths[axis]);
                advanced = true;
                break;
            }
            index[axis] = box[axis].begin;
            x[axis] = Grid::coordinate(index[axis], counts[axis], torus.lengths[axis]);
        }
        if (!advanced) break;
    }
    double cell = 1.0;
    for (std::size_t i = 0; i < n; ++i) cell *= torus.lengths[i] / counts[i];
    return cell * sum.value();
}

}  // namespace

QuadratureResult integrate_torus(const SpatialFunction& f, const Grid& grid, const Torus& torus,
                                 std::span<const IndexRange> ranges) {
    const std::size_t n = grid.counts().size();
    const auto& counts = grid.counts();
    if (torus.lengths.size() != n) {
        throw PreconditionError("grid has " + std::to_string(n) + " axes but torus has " +
                                std::to_string(torus.lengths.size()));
    }
    std::vector<IndexRange> box(ranges.begin(), ranges.end());
    if (box.empty()) {
        for (int m : counts) box.push_back({0, m});
    }
    if (box.size() != n) throw PreconditionError("index ranges do not match grid");

    // The half-resolution grid has its own cell-centred nodes. Subsampling the
    // fine nodes instead would give the same sum as the fine grid for any field
    // symmetric under x -> L/2 - x, and so a zero estimate.
    std::vector<int> coarse_counts(counts);
    std::vector<IndexRange> coarse_box(box);
    bool halved = false;
    for (std::size_t i = 0; i < n; ++i) {
        const int m = counts[i];
        if (box[i].begin < 0 || box[i].end > m || box[i].begin >= box[i].end) {
            throw PreconditionError("index range out of bounds on axis " + std::to_string(i + 1));
        }
        const bool whole = box[i].begin == 0 && box[i].end == m;
        if (whole && m >= 2) {
            coarse_counts[i] = m / 2;
            coarse_box[i] = {0, m / 2};
            halved = true;
        } else if (!whole && m % 2 == 0 && box[i].begin % 2 == 0 && box[i].end % 2 == 0) {
            // a box on even cell boundaries is a union of coarse cells
            coarse_counts[i] = m / 2;
            coarse_box[i] = {box[i].begin / 2, box[i].end / 2};
            halved = true;
        }
    }

    const double value = sweep(f, counts, box, torus);
    if (!halved) return {value, 0.0};
    const double coarse = sweep(f, coarse_counts, coarse_box, torus);
    return {value, std::fabs(value - coarse)};
}

namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {
    -0.90617984593866399280, -0.53846931010568309104, 0.0, 0.53846931010568309104,
    0.90617984593866399280};
constexpr std::array<double, 5> kGaussWeights = {
    0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
    0.47862867049936646804, 0.23692688505618908751};

QuadratureResult composite_gauss(const std::function<QuadratureResult(double)>& g, double t1,
                                 double T, int panels) {
    const double width = (T - t1) / panels;
    CompensatedSum value;
    CompensatedSum inner_error;
    for (int p = 0; p < panels; ++p) {
        const double a = t1 + width * p;
        const double mid = a + 0.5 * width;
        for (std::size_t k = 0; k < kGaussNodes.size(); ++k) {
            const double t = mid + 0.5 * width * kGaussNodes[k];
            const QuadratureResult r = g(t);
            if (!std::isfinite(r.value)) {
                std::ostringstream os;
                os.precision(17);
                os << "non-finite integrand at t = " << t;
                throw QuadratureError(os.str());
            }
            const double w = 0.5 * width * kGaussWeights[k];
            value.add(w * r.value);
            inner_error.add(std::fabs(w) * r.error_estimate);
        }
    }
    return {value.value(), inner_error.value()};
}

}  // namespace

QuadratureResult integrate_time(const std::function<QuadratureResult(double)>& g, double t1,
                                double T, TimeRule rule) {
    if (!std::isfinite(t1) || !std::isfinite(T)) {
        throw PreconditionError("time integration needs finite endpoints");
    }
    if (!(t1 < T)) throw PreconditionError("time integration needs t1 < T");
    if (rule.panels < 1) throw PreconditionError("time rule needs at least one panel");

    const QuadratureResult fine = composite_gauss(g, t1, T, rule.panels);
    const int coarse_panels = rule.panels >= 2 ? rule.panels / 2 : 2;
    const QuadratureResult coarse = composite_gauss(g, t1, T, coarse_panels);
    return {fine.value, std::fabs(fine.value - coarse.value) + fine.error_estimate};
}

QuadratureResult integrate_time(const std::function<double(double)>& g, double t1, double T,
                                TimeRule rule) {
    return integrate_time(
        std::function<QuadratureResult(double)>([&g](double t) { return QuadratureResult{g(t), 0.0}; }),
        t1, T, rule);
}

double default_step(double s) { return 6e-6 * (1.0 + std::fabs(s)); }

namespace {

double checked(const std::function<double(double)>& f, double s) {
    const double v = f(s);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os.precision(17);
        os << "non-finite sample at " << s << " in finite difference";
        throw QuadratureError(os.str());
    }
    return v;
}

}  // namespace

double central_difference(const std::function<double(double)>& f, double s, double step) {
    return (checked(f, s + step) - checked(f, s - step)) / (2.0 * step);
}

double one_sided_difference(const std::function<double(double)>& f, double s, double step,
                            int direction) {
    const double h = direction >= 0 ? step : -step;
    return (-3.0 * checked(f, s) + 4.0 * checked(f, s + h) - checked(f, s + 2.0 * h)) / (2.0 * h);
}

}  // namespace volcheck
