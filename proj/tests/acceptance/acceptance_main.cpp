// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances are fixed here; nothing is read from the environment.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "volcheck/bounds.hpp"
#include "volcheck/catalog.hpp"
#include "volcheck/geometry.hpp"
#include "volcheck/volume.hpp"

using namespace volcheck;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " FAILED(" << what << ")";
        }
    }
};

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

Grid grid_for(const MetricSpec& m, int cells) {
    // x-independent metrics are evaluated once per slice, so the count only
    // matters for the inhomogeneous entries.
    return Grid::uniform(m.dimension(), cells);
}

/// A time strictly inside the window, spread over [a, b].
std::vector<double> interior_times(const MetricSpec& m, int count) {
    const double lo = std::isfinite(m.window().t_minus) ? m.window().t_minus + 0.05 : 0.0;
    const double hi = std::isfinite(m.window().t_plus) ? m.window().t_plus - 0.1 : 1.0;
    std::vector<double> out;
    for (int k = 1; k <= count; ++k) out.push_back(lo + (hi - lo) * k / (count + 1.0));
    return out;
}

// 1. Crunch oracle.
void crunch_oracle(Outcome& o) {
    const auto m = catalog::make("flrw-crunch").metric;
    const std::vector<double> ladder{0.9, 0.99, 0.999, 1.0 - 1e-4};
    const auto r = check_thm01_future(m, 0.0, ladder, {}, CheckOptions{Grid::uniform(3, 4)});
    const double q = r.measured.back();
    o.detail << "eps0=" << r.constant << " |M(0)|=" << r.reference_volume << " Q=" << q
             << " bound=" << r.bounds.back() << " margin=" << r.margins.back();
    o.require(std::fabs(r.constant - 2.0) <= 1e-9, "eps0");
    o.require(std::fabs(r.reference_volume - 1.0) <= 1e-9, "|M(0)|");
    o.require(rel(q, 1.0 / 3.0) <= 1e-6, "cylinder");
    o.require(std::fabs(r.bounds.back() - 0.5) <= 1e-9, "bound");
    o.require(rel(r.margins.back(), 1.0 / 6.0) <= 1e-6, "margin");
    o.require(r.verdict == Verdict::Holds, "verdict");
}

// 2. Riemannian cusp witnesses the sharpness of case (ii).
void cusp_sharpness(Outcome& o) {
    const auto m = catalog::make("riemannian-cusp").metric;
    const std::vector<double> ladder{8.0};
    const auto r = check_riemannian(m, 0.0, ladder, {}, CheckOptions{Grid::uniform(2, 4)}, RiemannCase::II);
    o.detail << "Q=" << r.measured[0] << " bound=" << r.bounds[0] << " margin=" << r.margins[0];
    o.require(std::fabs(r.bounds[0] - 0.5) <= 1e-12, "bound");
    o.require(rel(r.measured[0], r.bounds[0]) <= 1e-4, "agreement");
    o.require(r.margins[0] >= -1e-9 && r.margins[0] <= 1e-4, "margin range");
}

// 3. d|M|/dt against a centred difference of |M(t)|.
void evolution_identity(Outcome& o) {
    double worst = 0.0;
    for (const auto& info : catalog::list()) {
        const auto m = catalog::make(info.name).metric;
        const Grid grid = grid_for(m, 32);
        for (double t : interior_times(m, 10)) {
            const double rate = slice_volume_rate(m, t, {}, grid).value;
            const double h = 1e-4 * (1.0 + std::fabs(t));
            const double fd =
                (slice_volume(m, t + h, {}, grid).value - slice_volume(m, t - h, {}, grid).value) / (2 * h);
            const double e = std::fabs(rate - fd) / std::max(std::fabs(fd), 1e-300);
            if (rate == 0.0 && fd == 0.0) continue;
            worst = std::max(worst, e);
            o.require(e < 1e-6, info.name + " t=" + std::to_string(t));
        }
    }
    o.detail << "worst relative error " << worst;
}

// 4. Ambient (Gauss formula) and evolution second fundamental forms agree.
void two_path(Outcome& o) {
    double worst_analytic = 0.0;
    double worst_fd = 0.0;
    for (const auto& info : catalog::list()) {
        const auto m = catalog::make(info.name).metric;
        const Grid grid = grid_for(m, 6);
        for (double t : interior_times(m, 3)) {
            const double a = two_path_discrepancy(m, t, grid);
            const double f = two_path_discrepancy(m.without_derivatives(), t, grid);
            worst_analytic = std::max(worst_analytic, a);
            worst_fd = std::max(worst_fd, f);
            o.require(a < 1e-8, info.name + " analytic");
            o.require(f < 1e-5, info.name + " finite differences");
        }
    }
    o.detail << "analytic " << worst_analytic << ", finite differences " << worst_fd;
}

// 5. Volume bound under non-increasing volume elements.
void thm12_suite(Outcome& o) {
    const auto crunch = catalog::make("flrw-crunch").metric;
    const std::vector<double> near_end{0.5, 1.0 - 1e-4};
    const auto a = check_thm12(crunch, 0.0, near_end, {}, CheckOptions{Grid::uniform(3, 4)});
    o.detail << "crunch gamma1=" << a.constant << " margin=" << a.margins.back();
    o.require(std::fabs(a.constant - 1.0) <= 1e-9, "gamma1");
    o.require(std::fabs(a.margins.back() - 2.0 / 3.0) <= 1e-6, "crunch margin");

    const auto mink = catalog::make("minkowski-strip").metric;
    const std::vector<double> three{3.0};
    const auto b = check_thm12(mink, 0.0, three, {}, CheckOptions{Grid::uniform(2, 4)});
    o.detail << "; minkowski margin=" << b.margins[0];
    o.require(std::fabs(b.margins[0]) <= 1e-9 && b.verdict == Verdict::Holds, "minkowski equality");

    const auto expanding = metric_from_expressions(2, Signature::Lorentzian, "0", {"exp(2*t)", "0", "0", "exp(2*t)"},
                                                   Torus{{1.0, 1.0}}, TimeWindow{});
    const std::vector<double> one{1.0};
    const auto c = check_thm12(expanding, 0.0, one, {}, CheckOptions{Grid::uniform(2, 4)});
    o.detail << "; expanding verdict=" << to_string(c.verdict);
    o.require(c.verdict == Verdict::HypothesisNotMet, "expanding detection");
}

// 6. Lower bound in mean curvature time.
void remark(Outcome& o) {
    const auto crunch = catalog::make("flrw-crunch").metric;
    const auto cmc = reparameterize_by_mean_curvature(crunch, {0.0, 0.99}, 400);
    const std::vector<double> x(3, 0.5);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double tau = 2.5 + 15.0 * k / 9.0;
        worst = std::max(worst, std::fabs(slice_geometry(cmc, tau, x).mean_curvature - tau));
    }
    o.detail << "max |H - tau| = " << worst << "; margins";
    o.require(worst <= 1e-8, "CMC labels");
    const std::pair<double, double> pairs[] = {{3.0, 6.0}, {4.0, 8.0}, {2.5, 10.0}};
    for (const auto& [tau, tau2] : pairs) {
        const auto r = check_remark_sec2(cmc, tau, tau2, CheckOptions{Grid::uniform(3, 2)});
        o.detail << " (" << tau << "," << tau2 << ")=" << r.margins[0];
        o.require(r.margins[0] >= -1e-9, "remark margin");
    }
}

// 7. Randomized soundness on perturbed FLRW.
void randomized(Outcome& o) {
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> draw_q(0.4, 1.5);
    std::uniform_real_distribution<double> draw_eps(0.0, 0.3);
    std::uniform_int_distribution<int> draw_n(1, 3);
    const int counts[] = {32, 4, 4};
    int checks = 0;
    int met = 0;
    double worst = kInf;
    for (int draw = 0; draw < 100; ++draw) {
        const int n = draw_n(rng);
        const double q = draw_q(rng);
        const double eps = draw_eps(rng);
        const auto m = catalog::make("perturbed-flrw", {{"n", double(n)}, {"q", q}, {"epsilon", eps}}).metric;
        const Grid grid(std::vector<int>(counts, counts + n));
        const std::vector<double> ladder{0.5, 0.9, 0.99};
        const CheckOptions options{grid};
        for (const auto& r : {check_thm01_future(m, 0.0, ladder, {}, options), check_thm12(m, 0.0, ladder, {}, options)}) {
            ++checks;
            if (r.verdict == Verdict::HypothesisNotMet) continue;
            ++met;
            for (std::size_t k = 0; k < r.margins.size(); ++k) {
                const double allowed = -(1e-9 + r.measured_errors[k]);
                worst = std::min(worst, r.margins[k] - allowed);
                if (r.margins[k] < allowed) {
                    o.require(false, "draw " + std::to_string(draw) + " n=" + std::to_string(n) +
                                         " q=" + std::to_string(q) + " eps=" + std::to_string(eps));
                }
            }
        }
    }
    o.detail << checks << " checks, " << met << " with hypothesis met, smallest slack " << worst;
    o.require(met > 0, "no check met its hypothesis");
}

// 8. Time reversal and conformal shifts.
void duality(Outcome& o) {
    double worst = 0.0;
    for (const auto& info : catalog::list()) {
        const auto m = catalog::make(info.name).metric;
        const auto rev = time_reversal(m);
        const auto twice = time_reversal(rev);
        const Grid grid = grid_for(m, 3);
        for (double t : interior_times(m, 4)) {
            for (const auto& x : sample_points(m, grid)) {
                const auto g = slice_geometry(m, t, x);
                const auto r = slice_geometry(rev, -t, x);
                const auto w = slice_geometry(twice, t, x);
                worst = std::max({worst, std::fabs(r.mean_curvature + g.mean_curvature),
                                  std::fabs(r.sqrt_det_g - g.sqrt_det_g), (r.g - g.g).cwiseAbs().maxCoeff(),
                                  (r.h + g.h).cwiseAbs().maxCoeff(), std::fabs(w.mean_curvature - g.mean_curvature),
                                  (w.g - g.g).cwiseAbs().maxCoeff()});
            }
        }
    }
    // Report level: the past check on the reversed metric against the future check.
    for (const char* name : {"flrw-crunch", "perturbed-flrw", "perturbed-lapse"}) {
        const auto m = catalog::make(name).metric;
        const CheckOptions options{grid_for(m, 16)};
        const std::vector<double> future{0.5, 0.9};
        const std::vector<double> past{-0.5, -0.9};
        const auto f = check_thm01_future(m, 0.0, future, {}, options);
        const auto p = check_thm01_past(time_reversal(m), 0.0, past, {}, options);
        o.require(f.verdict == p.verdict, std::string(name) + " duality verdict");
        worst = std::max({worst, std::fabs(f.constant - p.constant), std::fabs(f.reference_volume - p.reference_volume)});
        for (std::size_t k = 0; k < future.size(); ++k) {
            worst = std::max({worst, std::fabs(f.measured[k] - p.measured[k]), std::fabs(f.bounds[k] - p.bounds[k]),
                              std::fabs(f.margins[k] - p.margins[k])});
        }
    }
    o.detail << "reversal field and report discrepancy " << worst;
    o.require(worst <= 1e-12, "time reversal");

    struct Case {
        const char* name;
        double t1;
        std::vector<double> ladder;
    };
    const Case cases[] = {{"flrw-crunch", 0.0, {0.5, 0.9}},
                          {"perturbed-flrw", 0.0, {0.5, 0.9}},
                          {"perturbed-lapse", 0.0, {0.5, 0.9}},
                          {"minkowski-strip", 0.0, {1.0, 3.0}}};
    int compared = 0;
    for (const auto& c : cases) {
        const auto m = catalog::make(c.name).metric;
        const CheckOptions options{grid_for(m, 16)};
        const auto base01 = check_thm01_future(m, c.t1, c.ladder, {}, options);
        const auto base12 = check_thm12(m, c.t1, c.ladder, {}, options);
        for (double shift : {-1.0, 0.3, 2.0}) {
            const auto s = conformal_shift(m, shift);
            const auto r01 = check_thm01_future(s, c.t1, c.ladder, {}, options);
            const auto r12 = check_thm12(s, c.t1, c.ladder, {}, options);
            for (const auto& [base, shifted] : {std::pair{&base01, &r01}, std::pair{&base12, &r12}}) {
                ++compared;
                o.require(base->verdict == shifted->verdict, std::string(c.name) + " verdict under shift");
                for (std::size_t k = 0; k < base->margins.size(); ++k) {
                    const double a = base->margins[k];
                    const double b = shifted->margins[k];
                    if (std::isnan(a) || std::isnan(b)) {
                        o.require(std::isnan(a) && std::isnan(b), std::string(c.name) + " nan pattern");
                        continue;
                    }
                    // Zero margins (Minkowski equality) are compared at the tolerance scale.
                    const double scale = 1e-9 * (1 + std::fabs(base->bounds[k])) * std::exp(4 * std::fabs(shift));
                    if (std::fabs(a) <= scale || std::fabs(b) <= scale) continue;
                    o.require((a > 0) == (b > 0), std::string(c.name) + " margin sign");
                }
            }
        }
    }
    o.detail << "; " << compared << " shifted checks keep their verdicts and margin signs";
}

// 9. Refinement in space and time leaves volumes unchanged.
void convergence(Outcome& o) {
    double worst = 0.0;
    for (const auto& info : catalog::list()) {
        const auto m = catalog::make(info.name).metric;
        const double t1 = 0.0;
        const double T = std::isfinite(m.window().t_plus) ? 0.9 * m.window().t_plus : 2.0;
        const Grid coarse = grid_for(m, 32);
        const Grid fine = grid_for(m, 64);
        for (double t : {t1, 0.5 * (t1 + T), T}) {
            const double a = slice_volume(m, t, {}, coarse).value;
            const double b = slice_volume(m, t, {}, fine).value;
            worst = std::max(worst, rel(a, b));
            o.require(rel(a, b) < 1e-9, info.name + " slice");
        }
        const double a = cylinder_volume(m, t1, T, {}, coarse, TimeRule{20}).value;
        const double b = cylinder_volume(m, t1, T, {}, fine, TimeRule{40}).value;
        worst = std::max(worst, rel(a, b));
        o.require(rel(a, b) < 1e-9, info.name + " cylinder");
    }
    o.detail << "worst relative change " << worst;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "FLRW crunch oracle", crunch_oracle},
        {2, "Riemannian cusp sharpness", cusp_sharpness},
        {3, "volume evolution identity", evolution_identity},
        {4, "two-path second fundamental form", two_path},
        {5, "non-increasing volume element bound", thm12_suite},
        {6, "mean curvature time lower bound", remark},
        {7, "randomized soundness", randomized},
        {8, "duality and conformal covariance", duality},
        {9, "quadrature convergence", convergence},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " threw: " << e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %d %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds, o.detail.str().c_str());
        if (!o.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
