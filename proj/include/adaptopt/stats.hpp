#pragma once

#include <span>

namespace adaptopt {

double mean(std::span<const double> values);
/// Sample quantile, linear interpolation between order statistics (type 7).
double quantile(std::span<const double> values, double prob);
double median(std::span<const double> values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  // NaN with fewer than three points
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Fit of log y against log x; all values must be positive.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace adaptopt
