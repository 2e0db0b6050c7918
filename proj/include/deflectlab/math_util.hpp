#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace deflectlab {

/// Standard normal CDF.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Kahan-compensated sum; order-stable and accurate for long traces.
inline double compensated_sum(std::span<const double> values) {
  double sum = 0.0, c = 0.0;
  for (double v : values) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased (ddof = 1); 0 when n < 2

  double stddev() const { return std::sqrt(variance); }
};

inline SampleStats sample_stats(std::span<const double> values) {
  SampleStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = compensated_sum(values) / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double acc = 0.0, c = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    const double y = d * d - c;
    const double t = acc + y;
    c = (t - acc) - y;
    acc = t;
  }
  s.variance = acc / static_cast<double>(s.n - 1);
  return s;
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + mid - 1, values.end());
  return 0.5 * (values[mid - 1] + hi);
}

struct OriginFit {
  double slope = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Least-squares line through the origin, y = slope * x.
inline OriginFit fit_through_origin(std::span<const double> x,
                                    std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit: need at least 2 points");
  double sxy = 0.0, sxx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    sy += y[i];
  }
  if (sxx == 0.0) throw std::invalid_argument("fit: degenerate abscissae");
  OriginFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  const double ymean = sy / static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.slope * x[i];
    ss_res += r * r;
    const double d = y[i] - ymean;
    ss_tot += d * d;
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

/// Coefficient of determination of data against a fixed model curve.
inline double r_squared_against(std::span<const double> data,
                                std::span<const double> model) {
  if (data.size() != model.size() || data.empty())
    throw std::invalid_argument("r_squared_against: bad inputs");
  double sy = 0.0;
  for (double v : data) sy += v;
  const double ymean = sy / static_cast<double>(data.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data[i] - model[i];
    ss_res += r * r;
    const double d = data[i] - ymean;
    ss_tot += d * d;
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}

}  // namespace deflectlab
