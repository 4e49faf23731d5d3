#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "volcheck/catalog.hpp"
#include "volcheck/errors.hpp"
#include "volcheck/volume.hpp"

using namespace volcheck;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ref(const catalog::CatalogEntry& e, catalog::Quantity q, std::initializer_list<double> args) {
    const std::vector<double> a(args);
    return catalog::reference(e, q, a).value();
}

/// Slice volume by the oracle: midpoint sum of the hand-rolled sqrt(det g).
double oracle_slice(const MetricSpec& m, double t, int cells) {
    const auto& torus = std::get<Torus>(m.domain());
    return oracle::torus_midpoint([&](std::span<const double> x) { return oracle::sqrt_det_g(m, t, x); },
                                  torus.lengths, cells);
}

double oracle_cylinder(const MetricSpec& m, double t1, double T, int cells, int intervals) {
    const auto& torus = std::get<Torus>(m.domain());
    return oracle::simpson(
        [&](double t) {
            return oracle::torus_midpoint(
                [&](std::span<const double> x) { return std::exp(m.psi()(t, x)) * oracle::sqrt_det_g(m, t, x); },
                torus.lengths, cells);
        },
        t1, T, intervals);
}

}  // namespace

TEST(SliceVolume, CatalogExamples) {
    const auto flrw = catalog::make("flrw-crunch");
    const Grid g3 = Grid::uniform(3, 4);
    EXPECT_NEAR(slice_volume(flrw.metric, 0.0, {}, g3).value, 1.0, 1e-14);
    EXPECT_NEAR(slice_volume(flrw.metric, 0.5, {}, g3).value, 0.25, 1e-14);
    const auto mink = catalog::make("minkowski-strip", {{"L", 2.0}});
    EXPECT_NEAR(slice_volume(mink.metric, 3.0, {}, Grid::uniform(2, 4)).value, 4.0, 1e-14);
    const auto lapse = catalog::make("perturbed-lapse", {{"epsilon", 0.3}});
    EXPECT_NEAR(slice_volume(lapse.metric, 0.2, {}, Grid::uniform(2, 32)).value,
                ref(lapse.entry, catalog::Quantity::SliceVolume, {0.2}), 1e-12);
}

TEST(SliceVolume, PerturbedFlrwMatchesOracle) {
    const auto pf = catalog::make("perturbed-flrw", {{"epsilon", 0.25}});
    const double lib = slice_volume(pf.metric, 0.3, {}, Grid::uniform(2, 64)).value;
    EXPECT_NEAR(lib, ref(pf.entry, catalog::Quantity::SliceVolume, {0.3}), 1e-12);
    EXPECT_NEAR(lib, oracle_slice(pf.metric, 0.3, 400), 1e-9);
}

TEST(SliceVolume, HomogeneousDomain) {
    const auto m = catalog::make("flrw-crunch", {{"domain", std::string("homogeneous")}, {"V", 5.0}});
    EXPECT_NEAR(slice_volume(m.metric, 0.0, {}, Grid::uniform(3, 1)).value, 5.0, 1e-14);
    EXPECT_THROW(slice_volume(m.metric, 0.0, SpatialSubset(Box{{{0, 0.5}, {0, 1}, {0, 1}}}), Grid::uniform(3, 4)),
                 PreconditionError);
}

TEST(SliceVolume, RateMatchesDifferenceOfVolumes) {
    for (const char* name : {"flrw-crunch", "perturbed-flrw", "perturbed-lapse", "riemannian-cusp",
                             "riemannian-expanding", "conformal-homogeneous"}) {
        const auto b = catalog::make(name);
        const int n = b.metric.dimension();
        const Grid grid = Grid::uniform(n, n == 3 ? 8 : 24);
        const double rate = slice_volume_rate(b.metric, 0.2, {}, grid).value;
        const double fd = central_difference([&](double s) { return slice_volume(b.metric, s, {}, grid).value; }, 0.2,
                                             1e-4);
        EXPECT_NEAR(rate, fd, 1e-6 * (1 + std::fabs(fd))) << name;
    }
}

TEST(Subset, SnappingToCellBoundaries) {
    const Grid grid = Grid::uniform(2, 10);
    const Torus torus{{1.0, 1.0}};
    const auto exact = snap_subset(SpatialSubset(Box{{{0.2, 0.5}, {0.0, 1.0}}}), grid, torus);
    EXPECT_FALSE(exact.adjusted);
    EXPECT_NEAR(exact.measure, 0.3, 1e-15);
    ASSERT_EQ(exact.ranges.size(), 2u);
    EXPECT_EQ(exact.ranges[0].begin, 2);
    EXPECT_EQ(exact.ranges[0].end, 5);
    const auto moved = snap_subset(SpatialSubset(Box{{{0.21, 0.49}, {0.0, 1.0}}}), grid, torus);
    EXPECT_TRUE(moved.adjusted);
    EXPECT_NEAR(moved.measure, 0.3, 1e-15);
    EXPECT_THROW(snap_subset(SpatialSubset(Box{{{0.5, 0.52}, {0.0, 1.0}}}), grid, torus), PreconditionError);
    EXPECT_THROW(snap_subset(SpatialSubset(Box{{{-0.5, 0.5}, {0.0, 1.0}}}), grid, torus), PreconditionError);
    EXPECT_THROW(snap_subset(SpatialSubset(Box{{{0.0, 0.5}}}), grid, torus), PreconditionError);
    EXPECT_TRUE(snap_subset({}, grid, torus).ranges.empty());
}

TEST(Subset, BoxVolumeOnInhomogeneousMetric) {
    // On perturbed-lapse with n = 1: integral of e^{eps sin 2 pi x} over [0, 1/2].
    const auto b = catalog::make("perturbed-lapse", {{"n", 1.0}, {"epsilon", 0.2}});
    const SpatialSubset half(Box{{{0.0, 0.5}}});
    const double expected =
        oracle::simpson([](double x) { return std::exp(0.2 * std::sin(2 * std::numbers::pi * x)); }, 0.0, 0.5, 2000);
    // The box is not periodic, so the equal-weight rule drops to second order.
    const auto coarse = slice_volume(b.metric, 0.0, half, Grid::uniform(1, 256));
    const auto fine = slice_volume(b.metric, 0.0, half, Grid::uniform(1, 512));
    EXPECT_NEAR(fine.value, expected, 1e-6);
    EXPECT_NEAR(std::fabs(coarse.value - expected) / std::fabs(fine.value - expected), 4.0, 0.05);
    EXPECT_GE(coarse.error_estimate, std::fabs(coarse.value - expected));
    EXPECT_LE(coarse.error_estimate, 10.0 * std::fabs(coarse.value - expected));
}

TEST(Cylinder, CatalogExamples) {
    const auto flrw = catalog::make("flrw-crunch");
    EXPECT_NEAR(cylinder_volume(flrw.metric, 0.0, 0.9999, {}, Grid::uniform(3, 2), TimeRule{}).value, 1.0 / 3.0,
                1e-10);
    const auto mink = catalog::make("minkowski-strip");
    EXPECT_NEAR(cylinder_volume(mink.metric, 0.0, 5.0, {}, Grid::uniform(2, 2), TimeRule{}).value, 5.0, 1e-13);
    const auto cusp = catalog::make("riemannian-cusp");
    EXPECT_NEAR(cylinder_volume(cusp.metric, 0.0, 8.0, {}, Grid::uniform(2, 2), TimeRule{}).value,
                ref(cusp.entry, catalog::Quantity::CylinderVolume, {0.0, 8.0}), 1e-9);
}

TEST(Cylinder, InhomogeneousAgainstOracles) {
    const auto lapse = catalog::make("perturbed-lapse", {{"epsilon", 0.3}});
    const double lib = cylinder_volume(lapse.metric, 0.0, 0.9, {}, Grid::uniform(2, 32), TimeRule{}).value;
    EXPECT_NEAR(lib, ref(lapse.entry, catalog::Quantity::CylinderVolume, {0.0, 0.9}), 1e-10);
    EXPECT_NEAR(lib, oracle_cylinder(lapse.metric, 0.0, 0.9, 64, 400), 1e-8);

    const auto pf = catalog::make("perturbed-flrw", {{"epsilon", 0.2}});
    const double v = cylinder_volume(pf.metric, 0.0, 0.9, {}, Grid::uniform(2, 32), TimeRule{}).value;
    EXPECT_NEAR(v, oracle_cylinder(pf.metric, 0.0, 0.9, 64, 400), 1e-8);
}

TEST(Cylinder, Preconditions) {
    const auto flrw = catalog::make("flrw-crunch");
    EXPECT_THROW(cylinder_volume(flrw.metric, 0.5, 0.5, {}, Grid::uniform(3, 2), TimeRule{}), PreconditionError);
    EXPECT_THROW(cylinder_volume(flrw.metric, 0.0, 1.5, {}, Grid::uniform(3, 2), TimeRule{}), PreconditionError);
}

TEST(CurveLength, Examples) {
    const auto flrw = catalog::make("flrw-crunch").metric;
    const std::vector<double> x(3, 0.5);
    EXPECT_NEAR(curve_length(flrw, x, 0.0, 0.9, TimeRule{}), 0.9, 1e-14);
    const auto conformal = catalog::make("conformal-homogeneous").metric;
    const std::vector<double> y(2, 0.5);
    EXPECT_NEAR(curve_length(conformal, y, 0.0, 2.0, TimeRule{}), 1.0 - std::exp(-2.0), 1e-12);
    const auto lapse = catalog::make("perturbed-lapse", {{"epsilon", 0.3}}).metric;
    // Largest lapse at x1 where sin peaks: nodes at (k + 1/2) / 8, best k = 1 or 2.
    const double best = std::exp(0.3 * std::sin(2 * std::numbers::pi * 1.5 / 8.0));
    EXPECT_NEAR(max_curve_length(lapse, 0.0, 0.5, Grid::uniform(2, 8), TimeRule{}), 0.5 * best, 1e-12);
}

TEST(Monotonicity, Examples) {
    EXPECT_LT(volume_element_monotonicity(catalog::make("flrw-crunch").metric, 0.0, 0.5, Grid::uniform(3, 2)), 0.0);
    EXPECT_EQ(volume_element_monotonicity(catalog::make("minkowski-strip").metric, 0.0, 2.0, Grid::uniform(2, 2)),
              0.0);
    EXPECT_GT(volume_element_monotonicity(catalog::make("riemannian-expanding").metric, 0.0, 1.0, Grid::uniform(2, 2)),
              0.0);
}

TEST(Sweep, MatchesIndividualCalls) {
    const auto m = catalog::make("perturbed-lapse").metric;
    const std::vector<double> times{0.0, 0.25, 0.5};
    const Grid grid = Grid::uniform(2, 16);
    const auto s = volume_sweep(m, times, {}, grid);
    ASSERT_EQ(s.volumes.size(), 3u);
    for (std::size_t k = 0; k < times.size(); ++k) {
        EXPECT_EQ(s.volumes[k], slice_volume(m, times[k], {}, grid).value);
        EXPECT_EQ(s.rates[k], slice_volume_rate(m, times[k], {}, grid).value);
    }
}

TEST(VolumeProperty, FirstVariationIntegratesBack) {
    // |M(T)| - |M(t1)| equals the time integral of the rate.
    for (const char* name : {"flrw-crunch", "perturbed-flrw", "perturbed-lapse", "riemannian-cusp"}) {
        const auto m = catalog::make(name).metric;
        const Grid grid = Grid::uniform(m.dimension(), m.dimension() == 3 ? 4 : 16);
        const double delta = slice_volume(m, 0.6, {}, grid).value - slice_volume(m, 0.1, {}, grid).value;
        const double integral =
            integrate_time([&](double t) { return slice_volume_rate(m, t, {}, grid); }, 0.1, 0.6, TimeRule{}).value;
        EXPECT_NEAR(integral, delta, 1e-10 * (1 + std::fabs(delta))) << name;
    }
}

TEST(VolumeProperty, CylinderIsAdditive) {
    const auto m = catalog::make("perturbed-lapse").metric;
    const Grid grid = Grid::uniform(2, 16);
    const double whole = cylinder_volume(m, 0.0, 0.8, {}, grid, TimeRule{}).value;
    const double parts = cylinder_volume(m, 0.0, 0.3, {}, grid, TimeRule{}).value +
                         cylinder_volume(m, 0.3, 0.8, {}, grid, TimeRule{}).value;
    EXPECT_NEAR(whole, parts, 1e-12);
}

TEST(VolumeProperty, ConformalScaling) {
    const auto m = catalog::make("perturbed-flrw").metric;
    const Grid grid = Grid::uniform(2, 16);
    const double c = 0.4;
    const auto shifted = conformal_shift(m, c);
    EXPECT_NEAR(slice_volume(shifted, 0.2, {}, grid).value, std::exp(2 * c) * slice_volume(m, 0.2, {}, grid).value,
                1e-13);
    EXPECT_NEAR(cylinder_volume(shifted, 0.0, 0.5, {}, grid, TimeRule{}).value,
                std::exp(3 * c) * cylinder_volume(m, 0.0, 0.5, {}, grid, TimeRule{}).value, 1e-13);
}

TEST(VolumeProperty, FastPathAgreesWithFullQuadrature) {
    // A metric with psi declared x-dependent but actually constant in x.
    const auto slow = metric_from_expressions(2, Signature::Lorentzian, "0*x1 + 0.1*t", {"(1-t)^2", "0", "0", "(1-t)^2"},
                                              Torus{{1.0, 1.0}}, TimeWindow{-kInf, 1.0});
    const auto fast = metric_from_expressions(2, Signature::Lorentzian, "0.1*t", {"(1-t)^2", "0", "0", "(1-t)^2"},
                                              Torus{{1.0, 1.0}}, TimeWindow{-kInf, 1.0});
    ASSERT_TRUE(fast.declared_homogeneous());
    const Grid grid = Grid::uniform(2, 8);
    EXPECT_NEAR(cylinder_volume(slow, 0.0, 0.7, {}, grid, TimeRule{}).value,
                cylinder_volume(fast, 0.0, 0.7, {}, grid, TimeRule{}).value, 1e-14);
}
