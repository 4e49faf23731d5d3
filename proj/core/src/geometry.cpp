#include "volcheck/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "detail.hpp"
#include "volcheck/errors.hpp"

namespace volcheck {

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(PointFunction value, std::optional<PointFunction> dt,
                         std::vector<PointFunction> dx, bool x_dependent)
    : value_(std::move(value)), dt_(std::move(dt)), dx_(std::move(dx)), x_dependent_(x_dependent) {}

ScalarField ScalarField::constant(double c) {
    ScalarField f([c](double, std::span<const double>) { return c; },
                  PointFunction([](double, std::span<const double>) { return 0.0; }), {}, false);
    f.constant_ = c;
    return f;
}

ScalarField ScalarField::of_time(std::function<double(double)> value,
                                 std::function<double(double)> derivative) {
    return ScalarField([value = std::move(value)](double t, std::span<const double>) { return value(t); },
                       PointFunction([d = std::move(derivative)](double t, std::span<const double>) {
                           return d(t);
                       }),
                       {}, false);
}

ScalarField ScalarField::from_expr(const expr::Expr& e, int dimension) {
    if (e.max_variable_index() > dimension) {
        throw PreconditionError("formula " + expr::print(e) + " uses x" +
                                std::to_string(e.max_variable_index()) + " but dimension is " +
                                std::to_string(dimension));
    }
    if (e.kind() == expr::Expr::Kind::Constant) return constant(e.constant_value());

    auto evaluator = [](expr::Expr f) {
        return PointFunction([f = std::move(f)](double t, std::span<const double> x) {
            return f.evaluate(t, x);
        });
    };
    std::vector<PointFunction> dx;
    for (int k = 1; k <= dimension; ++k) {
        dx.push_back(evaluator(expr::differentiate(e, expr::Variable::space(k))));
    }
    return ScalarField(evaluator(e), evaluator(expr::differentiate(e, expr::Variable::time())),
                       std::move(dx), e.depends_on_space());
}

ScalarField ScalarField::without_derivatives() const {
    ScalarField f(value_, std::nullopt, {}, x_dependent_);
    f.constant_ = constant_;
    return f;
}

ScalarField ScalarField::time_reversed() const {
    auto flip = [](const PointFunction& g) {
        return PointFunction([g](double t, std::span<const double> x) { return g(-t, x); });
    };
    std::optional<PointFunction> dt;
    if (dt_) {
        dt = PointFunction([g = *dt_](double t, std::span<const double> x) { return -g(-t, x); });
    }
    std::vector<PointFunction> dx;
    for (const auto& d : dx_) dx.push_back(flip(d));
    ScalarField f(flip(value_), std::move(dt), std::move(dx), x_dependent_);
    f.constant_ = constant_;
    return f;
}

ScalarField ScalarField::shifted(double c) const {
    ScalarField f([g = value_, c](double t, std::span<const double> x) { return g(t, x) + c; }, dt_,
                  dx_, x_dependent_);
    if (constant_) f.constant_ = *constant_ + c;
    return f;
}

const char* to_string(Signature s) {
    return s == Signature::Lorentzian ? "lorentzian" : "riemannian";
}

// ---------------------------------------------------------------------------
// helpers shared with cmc.cpp

namespace detail {

double windowed_derivative(const std::function<double(double)>& f, double t,
                           const TimeWindow& window) {
    const double h = default_step(t);
    if (t + h > window.t_plus) return one_sided_difference(f, t, h, -1);
    if (t - h < window.t_minus) return one_sided_difference(f, t, h, +1);
    return central_difference(f, t, h);
}

double field_space_derivative(const ScalarField& f, int axis, double t,
                              std::span<const double> x) {
    if (!f.x_dependent()) return 0.0;
    if (f.has_space_derivatives()) return f.space_derivative(axis, t, x);
    std::vector<double> p(x.begin(), x.end());
    const double s = x[static_cast<std::size_t>(axis)];
    return central_difference(
        [&](double xi) {
            p[static_cast<std::size_t>(axis)] = xi;
            return f(t, p);
        },
        s, default_step(s));
}

std::vector<double> probe_times(double begin, double end) {
    const bool lo = std::isfinite(begin);
    const bool hi = std::isfinite(end);
    std::vector<double> times;
    if (lo && hi) {
        for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) times.push_back(begin + f * (end - begin));
    } else if (hi) {
        for (double d : {0.05, 0.25, 0.5, 1.0, 2.0}) times.push_back(end - d);
    } else if (lo) {
        for (double d : {0.05, 0.25, 0.5, 1.0, 2.0}) times.push_back(begin + d);
    } else {
        times = {-1.0, -0.3, 0.0, 0.4, 1.1};
    }
    return times;
}

bool varies_in_space(const MetricSpec& m, std::span<const double> times) {
    if (m.declared_homogeneous()) return false;
    const auto n = static_cast<std::size_t>(m.dimension());
    const std::vector<double> origin = m.origin();
    const double probes[] = {0.37, 1.3, 2.9, 0.81};
    auto differs = [](double a, double b) { return std::fabs(a - b) > 1e-12 * (1.0 + std::fabs(b)); };
    for (double t : times) {
        for (std::size_t p = 0; p < std::size(probes); ++p) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = probes[(p + i) % std::size(probes)] * (1.0 + 0.5 * i);
            try {
                if (differs(m.psi()(t, x), m.psi()(t, origin))) return true;
                for (int i = 0; i < m.dimension(); ++i) {
                    for (int j = i; j < m.dimension(); ++j) {
                        if (differs(m.sigma(i, j)(t, x), m.sigma(i, j)(t, origin))) return true;
                    }
                }
            } catch (const Error&) {
                // probes where the metric is undefined say nothing about homogeneity
            }
        }
    }
    return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MetricSpec

MetricSpec::MetricSpec(int dimension, Signature signature, ScalarField psi,
                       std::vector<ScalarField> sigma, SpatialDomain domain, TimeWindow window)
    : n_(dimension), signature_(signature), psi_(std::move(psi)), sigma_(std::move(sigma)),
      domain_(std::move(domain)), window_(window) {
    if (n_ < 1 || n_ > kMaxDimension) {
        throw PreconditionError("spatial dimension must be in [1, " + std::to_string(kMaxDimension) + "]");
    }
    if (sigma_.size() != static_cast<std::size_t>(n_ * n_)) {
        throw PreconditionError("sigma needs " + std::to_string(n_ * n_) + " components");
    }
    if (!(window_.t_minus < window_.t_plus)) throw PreconditionError("time window is empty");
    if (const auto* torus = std::get_if<Torus>(&domain_)) {
        if (torus->dimension() != n_) throw PreconditionError("torus dimension does not match metric");
        for (double l : torus->lengths) {
            if (!(l > 0.0) || !std::isfinite(l)) throw PreconditionError("torus lengths must be positive");
        }
    } else {
        const auto& hom = std::get<Homogeneous>(domain_);
        if (!(hom.sigma_volume > 0.0) || !std::isfinite(hom.sigma_volume)) {
            throw PreconditionError("homogeneous sigma-volume must be positive");
        }
        if (detail::varies_in_space(*this, detail::probe_times(window_.t_minus, window_.t_plus))) {
            throw PreconditionError("homogeneous domain requires fields independent of x");
        }
    }
}

const ScalarField& MetricSpec::sigma(int i, int j) const {
    if (i > j) std::swap(i, j);
    return sigma_[static_cast<std::size_t>(i * n_ + j)];
}

bool MetricSpec::declared_homogeneous() const {
    if (psi_.x_dependent()) return false;
    return std::none_of(sigma_.begin(), sigma_.end(), [](const ScalarField& f) { return f.x_dependent(); });
}

MetricSpec MetricSpec::without_derivatives() const {
    std::vector<ScalarField> sigma;
    for (const auto& s : sigma_) sigma.push_back(s.without_derivatives());
    return MetricSpec(n_, signature_, psi_.without_derivatives(), std::move(sigma), domain_, window_);
}

MetricSpec metric_from_expressions(int dimension, Signature signature, const std::string& psi,
                                   const std::vector<std::string>& sigma, SpatialDomain domain,
                                   TimeWindow window) {
    const auto n = static_cast<std::size_t>(dimension);
    if (dimension < 1 || sigma.size() != n * n) {
        throw PreconditionError("sigma must list " + std::to_string(n * n) + " row-major entries");
    }
    std::vector<expr::Expr> parsed;
    for (const auto& s : sigma) parsed.push_back(expr::parse(s, dimension));

    const auto times = detail::probe_times(window.t_minus, window.t_plus);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& a = parsed[i * n + j];
            const auto& b = parsed[j * n + i];
            if (expr::print(a) == expr::print(b)) continue;
            for (double t : times) {
                for (double s : {0.1, 0.45, 0.8}) {
                    std::vector<double> x(n, s);
                    double va = 0.0;
                    double vb = 0.0;
                    try {
                        va = a.evaluate(t, x);
                        vb = b.evaluate(t, x);
                    } catch (const DomainError&) {
                        continue;
                    }
                    if (std::fabs(va - vb) > 1e-12 * (1.0 + std::fabs(va))) {
                        throw PreconditionError("sigma is not symmetric: entries (" + std::to_string(i + 1) +
                                                "," + std::to_string(j + 1) + ") and (" +
                                                std::to_string(j + 1) + "," + std::to_string(i + 1) +
                                                ") differ");
                    }
                }
            }
        }
    }

    std::vector<ScalarField> fields;
    for (const auto& e : parsed) fields.push_back(ScalarField::from_expr(e, dimension));
    return MetricSpec(dimension, signature, ScalarField::from_expr(expr::parse(psi, dimension), dimension),
                      std::move(fields), std::move(domain), window);
}

// ---------------------------------------------------------------------------
// Pointwise geometry

double field_time_derivative(const ScalarField& f, double t, std::span<const double> x,
                             const TimeWindow& window) {
    if (f.has_time_derivative()) return f.time_derivative(t, x);
    if (f.constant_value()) return 0.0;
    return detail::windowed_derivative([&](double s) { return f(s, x); }, t, window);
}

namespace {

std::string where(double t, std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << "(t = " << t << ", x = (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << "))";
    return os.str();
}

void check_point(const MetricSpec& m, double t, std::span<const double> x) {
    if (!m.window().contains(t)) {
        throw PreconditionError("time " + where(t, x) + " outside the metric's time window");
    }
    if (x.size() != static_cast<std::size_t>(m.dimension())) {
        throw PreconditionError("point has " + std::to_string(x.size()) + " coordinates, metric has " +
                                std::to_string(m.dimension()));
    }
}

double finite_or_throw(double v, const char* what, double t, std::span<const double> x) {
    if (!std::isfinite(v)) throw GeometryError(std::string("non-finite ") + what + " at " + where(t, x));
    return v;
}

Matrix evaluate_sigma(const MetricSpec& m, double t, std::span<const double> x) {
    const int n = m.dimension();
    Matrix s(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const auto& f = m.sigma(i, j);
            s(i, j) = f.constant_value() ? *f.constant_value() : finite_or_throw(f(t, x), "sigma", t, x);
            s(j, i) = s(i, j);
        }
    }
    return s;
}

Eigen::LLT<Matrix> factor_sigma(const Matrix& s, double t, std::span<const double> x) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) {
        throw GeometryError("sigma is not positive definite at " + where(t, x));
    }
    return llt;
}

double sign_of_dt2(Signature s) { return s == Signature::Lorentzian ? -1.0 : 1.0; }

}  // namespace

double sqrt_det_g(const MetricSpec& m, double t, std::span<const double> x) {
    check_point(m, t, x);
    const double psi = finite_or_throw(m.psi()(t, x), "psi", t, x);
    const Matrix s = evaluate_sigma(m, t, x);
    const auto llt = factor_sigma(s, t, x);
    const double root_det_sigma = llt.matrixLLT().diagonal().prod();
    return std::exp(m.dimension() * psi) * root_det_sigma;
}

SliceGeometry slice_geometry(const MetricSpec& m, double t, std::span<const double> x) {
    check_point(m, t, x);
    const int n = m.dimension();
    const double psi = finite_or_throw(m.psi()(t, x), "psi", t, x);
    const double dpsi = finite_or_throw(field_time_derivative(m.psi(), t, x, m.window()), "d/dt psi", t, x);
    const Matrix s = evaluate_sigma(m, t, x);
    Matrix ds(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            ds(i, j) = finite_or_throw(field_time_derivative(m.sigma(i, j), t, x, m.window()),
                                       "d/dt sigma", t, x);
            ds(j, i) = ds(i, j);
        }
    }
    const auto llt = factor_sigma(s, t, x);

    const double conformal = std::exp(2.0 * psi);
    SliceGeometry geo;
    geo.g = conformal * s;
    geo.g_inv = llt.solve(Matrix::Identity(n, n)) / conformal;
    geo.sqrt_det_g = std::exp(n * psi) * llt.matrixLLT().diagonal().prod();
    const Matrix dg = conformal * (2.0 * dpsi * s + ds);
    // Lorentzian: d/dt g = -2 e^psi h; Riemannian: d/dt g = +2 e^psi h.
    const double orientation = m.signature() == Signature::Lorentzian ? -0.5 : 0.5;
    geo.h = orientation * std::exp(-psi) * dg;
    geo.mean_curvature = geo.g_inv.cwiseProduct(geo.h).sum();
    return geo;
}

namespace {

struct AmbientData {
    Matrix metric;             // (n+1) x (n+1)
    Matrix inverse;            // (n+1) x (n+1)
    std::vector<Matrix> dmetric;  // d_mu of metric, mu = 0..n
};

AmbientData ambient_data(const MetricSpec& m, double t, std::span<const double> x) {
    const int n = m.dimension();
    const int N = n + 1;
    const double sign = sign_of_dt2(m.signature());
    const double psi = finite_or_throw(m.psi()(t, x), "psi", t, x);
    const double conformal = std::exp(2.0 * psi);
    const Matrix s = evaluate_sigma(m, t, x);
    factor_sigma(s, t, x);

    AmbientData a;
    a.metric = Matrix::Zero(N, N);
    a.metric(0, 0) = sign * conformal;
    a.metric.bottomRightCorner(n, n) = conformal * s;
    a.inverse = a.metric.inverse();

    for (int mu = 0; mu < N; ++mu) {
        auto d = [&](const ScalarField& f) {
            return mu == 0 ? field_time_derivative(f, t, x, m.window())
                           : detail::field_space_derivative(f, mu - 1, t, x);
        };
        const double dpsi = finite_or_throw(d(m.psi()), "derivative of psi", t, x);
        Matrix dg = Matrix::Zero(N, N);
        dg(0, 0) = sign * 2.0 * conformal * dpsi;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const double dsij = finite_or_throw(d(m.sigma(i, j)), "derivative of sigma", t, x);
                dg(i + 1, j + 1) = conformal * (2.0 * dpsi * s(i, j) + dsij);
                dg(j + 1, i + 1) = dg(i + 1, j + 1);
            }
        }
        a.dmetric.push_back(std::move(dg));
    }
    return a;
}

std::vector<double> normal_from_inverse(const Matrix& inverse, Signature signature) {
    // nu^alpha is proportional to g^{alpha 0}, the gradient of the time function.
    const double scale = 1.0 / std::sqrt(std::fabs(inverse(0, 0)));
    std::vector<double> nu(static_cast<std::size_t>(inverse.rows()));
    for (Eigen::Index a = 0; a < inverse.rows(); ++a) nu[static_cast<std::size_t>(a)] = scale * inverse(a, 0);
    const bool flip = signature == Signature::Lorentzian ? nu[0] > 0.0 : nu[0] < 0.0;
    if (flip) {
        for (double& c : nu) c = -c;
    }
    return nu;
}

}  // namespace

std::vector<double> normal_vector(const MetricSpec& m, double t, std::span<const double> x) {
    check_point(m, t, x);
    const int n = m.dimension();
    const double psi = finite_or_throw(m.psi()(t, x), "psi", t, x);
    const double conformal = std::exp(2.0 * psi);
    Matrix metric = Matrix::Zero(n + 1, n + 1);
    metric(0, 0) = sign_of_dt2(m.signature()) * conformal;
    metric.bottomRightCorner(n, n) = conformal * evaluate_sigma(m, t, x);
    return normal_from_inverse(metric.inverse(), m.signature());
}

double ambient_norm_squared(const MetricSpec& m, double t, std::span<const double> x,
                            std::span<const double> nu) {
    check_point(m, t, x);
    const int n = m.dimension();
    if (nu.size() != static_cast<std::size_t>(n + 1)) throw PreconditionError("vector needs n+1 components");
    const double psi = m.psi()(t, x);
    const double conformal = std::exp(2.0 * psi);
    const Matrix s = evaluate_sigma(m, t, x);
    double acc = sign_of_dt2(m.signature()) * conformal * nu[0] * nu[0];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            acc += conformal * s(i, j) * nu[static_cast<std::size_t>(i + 1)] * nu[static_cast<std::size_t>(j + 1)];
        }
    }
    return acc;
}

Matrix second_fundamental_form_ambient(const MetricSpec& m, double t, std::span<const double> x) {
    check_point(m, t, x);
    const int n = m.dimension();
    const int N = n + 1;
    const AmbientData a = ambient_data(m, t, x);

    // Ambient Christoffel symbols Gamma^alpha_{beta gamma}.
    auto christoffel = [&](int alpha, int beta, int gamma) {
        double acc = 0.0;
        for (int delta = 0; delta < N; ++delta) {
            acc += a.inverse(alpha, delta) *
                   (a.dmetric[static_cast<std::size_t>(beta)](delta, gamma) +
                    a.dmetric[static_cast<std::size_t>(gamma)](delta, beta) -
                    a.dmetric[static_cast<std::size_t>(delta)](beta, gamma));
        }
        return 0.5 * acc;
    };

    // Induced metric of the embedding x(t) = (t, x^i) and its Christoffel symbols.
    const Matrix g = a.metric.bottomRightCorner(n, n);
    const Matrix g_inv = g.inverse();
    auto induced_christoffel = [&](int k, int i, int j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) {
            acc += g_inv(k, l) *
                   (a.dmetric[static_cast<std::size_t>(i + 1)](l + 1, j + 1) +
                    a.dmetric[static_cast<std::size_t>(j + 1)](l + 1, i + 1) -
                    a.dmetric[static_cast<std::size_t>(l + 1)](i + 1, j + 1));
        }
        return 0.5 * acc;
    };

    const std::vector<double> nu = normal_from_inverse(a.inverse, m.signature());

    Matrix h(n, n);
    std::vector<double> hessian(static_cast<std::size_t>(N));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            // x^alpha_ij = Gamma^alpha_ij - Gamma^k_ij x^alpha_k, with x^alpha_k = delta^alpha_k.
            for (int alpha = 0; alpha < N; ++alpha) {
                double v = christoffel(alpha, i + 1, j + 1);
                if (alpha >= 1) v -= induced_christoffel(alpha - 1, i, j);
                hessian[static_cast<std::size_t>(alpha)] = v;
            }
            double inner = 0.0;
            for (int alpha = 0; alpha < N; ++alpha) {
                for (int beta = 0; beta < N; ++beta) {
                    inner += a.metric(alpha, beta) * hessian[static_cast<std::size_t>(alpha)] *
                             nu[static_cast<std::size_t>(beta)];
                }
            }
            // Lorentzian x_ij = h nu with <nu,nu> = -1; Riemannian x_ij = -h nu
            // with <nu,nu> = +1. Either way h_ij = -<x_ij, nu>.
            h(i, j) = -inner;
            h(j, i) = h(i, j);
        }
    }
    return h;
}

std::vector<std::vector<double>> sample_points(const MetricSpec& m, const Grid& grid) {
    const auto* torus = std::get_if<Torus>(&m.domain());
    if (torus == nullptr || m.declared_homogeneous()) return {m.origin()};
    if (grid.dimension() != m.dimension()) throw PreconditionError("grid dimension does not match metric");

    std::vector<std::vector<double>> points;
    points.reserve(static_cast<std::size_t>(grid.node_count()));
    const auto n = static_cast<std::size_t>(m.dimension());
    std::vector<int> index(n, 0);
    for (;;) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = Grid::coordinate(index[i], grid.counts()[i], torus->lengths[i]);
        points.push_back(std::move(x));
        std::size_t axis = n;
        bool advanced = false;
        while (axis-- > 0) {
            if (++index[axis] < grid.counts()[axis]) {
                advanced = true;
                break;
            }
            index[axis] = 0;
        }
        if (!advanced) break;
    }
    return points;
}

CurvatureRange mean_curvature_extrema(const MetricSpec& m, double t, const Grid& grid) {
    CurvatureRange range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& x : sample_points(m, grid)) {
        const double H = slice_geometry(m, t, x).mean_curvature;
        range.min = std::min(range.min, H);
        range.max = std::max(range.max, H);
    }
    return range;
}

double two_path_discrepancy(const MetricSpec& m, double t, const Grid& grid) {
    double worst = 0.0;
    for (const auto& x : sample_points(m, grid)) {
        const Matrix diff = second_fundamental_form_ambient(m, t, x) - slice_geometry(m, t, x).h;
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    return worst;
}

MetricSpec time_reversal(const MetricSpec& m) {
    std::vector<ScalarField> sigma;
    for (const auto& s : m.sigma_components()) sigma.push_back(s.time_reversed());
    return MetricSpec(m.dimension(), m.signature(), m.psi().time_reversed(), std::move(sigma), m.domain(),
                      TimeWindow{-m.window().t_plus, -m.window().t_minus});
}

MetricSpec conformal_shift(const MetricSpec& m, double c) {
    return MetricSpec(m.dimension(), m.signature(), m.psi().shifted(c), m.sigma_components(), m.domain(),
                      m.window());
}

}  // namespace volcheck
