#pragma once

#include <string>
#include <vector>

#include "diffinv/field.hpp"

namespace diffinv {

enum class Kernel { box, bump };
enum class BoundaryMode { reflect };

Kernel parse_kernel(const std::string& name);
std::string to_string(Kernel kernel);

struct MollifierSpec {
  double t = 0.1;  // support radius
  Kernel kernel = Kernel::box;
  BoundaryMode boundary = BoundaryMode::reflect;
};

/// Smooth bump exp(-1 / (1 - r^2)) on |r| < 1, zero outside (unnormalized).
double bump_profile(double r);

/// One-axis discrete kernel on offsets -m..m (m = ceil(t / h)); nonnegative, sums to one.
/// The box weights are exact cell overlaps of [-t, t], so convolving cell data with them
/// equals the continuous box average at cell centers.
std::vector<double> kernel_weights(double h, double t, Kernel kernel);

/// Separable convolution with reflection across the boundary. The result stays inside
/// the range of the input and hence inside [lambda, Lambda].
CoefficientField mollify(const CoefficientField& a, const MollifierSpec& spec);

/// ||a - a_t||_{L2} + t ||grad a_t||_{L2}.
double approximation_functional(const CoefficientField& a, const CoefficientField& a_t, double t);

struct ScalingPoint {
  double t;
  double functional;
};

struct ScalingStudy {
  std::vector<ScalingPoint> points;
  double slope = 0.0;  // least-squares slope of log functional against log t
};

/// Evaluates the approximation functional over the supplied radii and fits its log-log slope.
ScalingStudy mollification_scaling(const CoefficientField& a, const std::vector<double>& radii,
                                   Kernel kernel = Kernel::box);

/// `count` log-spaced radii from t_min to t_max inclusive.
std::vector<double> log_spaced(double t_min, double t_max, int count);

}  // namespace diffinv
