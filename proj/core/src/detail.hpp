#pragma once

#include <functional>
#include <span>
#include <vector>

#include "volcheck/geometry.hpp"

namespace volcheck::detail {

/// Derivative of f at t by finite differences that never leave `window`.
double windowed_derivative(const std::function<double(double)>& f, double t,
                           const TimeWindow& window);

/// d/dx^axis of a field; zero for x-independent fields.
double field_space_derivative(const ScalarField& f, int axis, double t,
                              std::span<const double> x);

/// Probe times inside [begin, end] (clamped to finite values).
std::vector<double> probe_times(double begin, double end);

/// True when psi or some sigma_ij changes with x at one of the probe points.
bool varies_in_space(const MetricSpec& m, std::span<const double> times);

}  // namespace volcheck::detail
