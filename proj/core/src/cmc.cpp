#include <atomic>
#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp uses isnan unqualified
#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>

#include "detail.hpp"
#include "volcheck/errors.hpp"
#include "volcheck/geometry.hpp"

namespace volcheck {

namespace {

/// Inverse of tau = H(t) for a homogeneous Lorentzian metric, plus the two
/// derivatives of t(tau) the new lapse and its time derivative need.
class MeanCurvatureClock {
public:
    struct State {
        double t = 0.0;
        double dt_dtau = 0.0;
        double kappa = 0.0;  // d/dtau log(dt/dtau)
    };

    MeanCurvatureClock(MetricSpec base, TimeInterval range, int samples)
        : base_(std::move(base)), origin_(base_.origin()), range_(range),
          clamp_window_{range.begin, range.end} {
        std::vector<double> ts;
        std::vector<double> taus;
        for (int k = 0; k < samples; ++k) {
            const double t = range.begin + (range.end - range.begin) * k / (samples - 1);
            ts.push_back(t);
            taus.push_back(mean_curvature(t));
        }
        for (int k = 0; k < samples; ++k) {
            const auto i = static_cast<std::size_t>(k);
            const double slope = mean_curvature_rate(ts[i]);
            const bool increasing = k == 0 || taus[i] > taus[i - 1];
            if (!increasing || !(slope > 0.0)) {
                std::ostringstream os;
                os.precision(17);
                const bool decreasing = k > 0 && taus[i] < taus[i - 1] && slope < 0.0;
                os << (decreasing ? "mean curvature decreases in t near t = "
                                  : "mean curvature is not strictly monotone near t = ")
                   << ts[i] << " (H = " << taus[i] << ", dH/dt = " << slope << ")";
                if (decreasing) os << "; reverse time first so that H increases";
                throw PreconditionError(os.str());
            }
        }
        tau_min_ = taus.front();
        tau_max_ = taus.back();
        inverse_ = std::make_unique<Interpolant>(std::move(taus), std::move(ts));
    }

    double tau_min() const { return tau_min_; }
    double tau_max() const { return tau_max_; }
    const MetricSpec& base() const { return base_; }
    std::span<const double> origin() const { return origin_; }

    double mean_curvature(double t) const { return slice_geometry(base_, t, origin_).mean_curvature; }

    double mean_curvature_rate(double t) const {
        return detail::windowed_derivative([this](double s) { return mean_curvature(s); }, t, base_.window());
    }

    State at(double tau) const {
        thread_local std::uint64_t cached_owner = 0;
        thread_local double cached_tau = 0.0;
        thread_local State cached{};
        if (cached_owner == id_ && cached_tau == tau) return cached;

        if (!(tau >= tau_min_ && tau <= tau_max_)) {
            std::ostringstream os;
            os.precision(17);
            os << "mean curvature time " << tau << " outside [" << tau_min_ << ", " << tau_max_ << "]";
            throw GeometryError(os.str());
        }
        double t = std::clamp((*inverse_)(tau), range_.begin, range_.end);
        // The interpolant is only a starting point on coarse sample spacings.
        for (int iteration = 0; iteration < 6; ++iteration) {
            const double step = (mean_curvature(t) - tau) / mean_curvature_rate(t);
            t = std::clamp(t - step, range_.begin, range_.end);
            if (!(std::fabs(step) > 1e-15 * (1.0 + std::fabs(t)))) break;
        }

        State s;
        s.t = t;
        const double rate = mean_curvature_rate(t);
        s.dt_dtau = 1.0 / rate;
        const double curvature_rate = detail::windowed_derivative(
            [this](double u) { return mean_curvature_rate(u); }, t, clamp_window_);
        s.kappa = -curvature_rate * s.dt_dtau * s.dt_dtau;

        cached_owner = id_;
        cached_tau = tau;
        cached = s;
        return s;
    }

private:
    using Interpolant = boost::math::interpolators::pchip<std::vector<double>>;

    static std::uint64_t next_id() {
        static std::atomic<std::uint64_t> counter{0};
        return ++counter;
    }

    std::uint64_t id_ = next_id();
    MetricSpec base_;
    std::vector<double> origin_;
    TimeInterval range_;
    TimeWindow clamp_window_;
    double tau_min_ = 0.0;
    double tau_max_ = 0.0;
    std::unique_ptr<Interpolant> inverse_;
};

}  // namespace

MetricSpec reparameterize_by_mean_curvature(const MetricSpec& m, TimeInterval range, int samples) {
    if (m.signature() != Signature::Lorentzian) {
        throw PreconditionError("mean curvature time is only defined for Lorentzian metrics");
    }
    if (!(range.begin < range.end) || !std::isfinite(range.begin) || !std::isfinite(range.end)) {
        throw PreconditionError("reparameterization range must be a finite interval");
    }
    if (!m.window().contains(range.begin) || !m.window().contains(range.end)) {
        throw PreconditionError("reparameterization range leaves the metric's time window");
    }
    if (samples < 4) throw PreconditionError("reparameterization needs at least 4 samples");
    if (detail::varies_in_space(m, detail::probe_times(range.begin, range.end))) {
        throw PreconditionError("mean curvature time requires a spatially homogeneous metric");
    }

    auto clock = std::make_shared<const MeanCurvatureClock>(m, range, samples);
    const int n = m.dimension();

    // e^{psi~} = e^{psi(t)} dt/dtau and sigma~ = sigma(t) / (dt/dtau)^2, so the
    // induced metric e^{2 psi~} sigma~ equals that of the slice t(tau).
    ScalarField psi(
        [clock](double tau, std::span<const double>) {
            const auto s = clock->at(tau);
            return clock->base().psi()(s.t, clock->origin()) + std::log(s.dt_dtau);
        },
        PointFunction([clock](double tau, std::span<const double>) {
            const auto s = clock->at(tau);
            const auto& base = clock->base();
            return field_time_derivative(base.psi(), s.t, clock->origin(), base.window()) * s.dt_dtau +
                   s.kappa;
        }),
        {}, false);

    std::vector<ScalarField> sigma;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const ScalarField& component = m.sigma(i, j);
            if (component.constant_value() && *component.constant_value() == 0.0) {
                sigma.push_back(ScalarField::constant(0.0));
                continue;
            }
            sigma.emplace_back(
                [clock, i, j](double tau, std::span<const double>) {
                    const auto s = clock->at(tau);
                    return clock->base().sigma(i, j)(s.t, clock->origin()) / (s.dt_dtau * s.dt_dtau);
                },
                PointFunction([clock, i, j](double tau, std::span<const double>) {
                    const auto s = clock->at(tau);
                    const auto& base = clock->base();
                    const double value = base.sigma(i, j)(s.t, clock->origin());
                    const double rate = field_time_derivative(base.sigma(i, j), s.t, clock->origin(), base.window());
                    const double scaled = value / (s.dt_dtau * s.dt_dtau);
                    return rate / s.dt_dtau - 2.0 * scaled * s.kappa;
                }),
                std::vector<PointFunction>{}, false);
        }
    }

    return MetricSpec(n, Signature::Lorentzian, std::move(psi), std::move(sigma), m.domain(),
                      TimeWindow{clock->tau_min(), clock->tau_max()});
}

}  // namespace volcheck
