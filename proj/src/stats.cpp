#include "isoproj/stats.hpp"

#include <algorithm>
#include <cmath>

#include "isoproj/errors.hpp"

namespace isoproj {

MonteCarloEstimate mean_estimate(std::span<const double> values) {
  MonteCarloEstimate out;
  out.samples = values.size();
  if (values.empty()) return out;
  NeumaierSum sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / static_cast<double>(values.size());
  NeumaierSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  out.value = mean;
  if (values.size() > 1) {
    const double var = sq.value() / static_cast<double>(values.size() - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
  if (x.size() != y.size() || (!weights.empty() && weights.size() != x.size())) {
    throw ArgumentError("fit_line: length mismatch");
  }
  if (x.size() < 2) throw ArgumentError("fit_line: need at least two points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w(i) * (x[i] - mx) * (x[i] - mx);
    sxy += w(i) * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw ArgumentError("fit_line: x values are all equal");
  LineFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0, ssr_unweighted = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += w(i) * r * r;
    ssr_unweighted += r * r;
  }
  fit.residual_rms = std::sqrt(ssr_unweighted / static_cast<double>(x.size()));
  if (x.size() > 2) {
    fit.slope_stderr = std::sqrt(ssr / static_cast<double>(x.size() - 2) / sxx);
  }
  return fit;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
  if (a.empty() || b.empty()) throw ArgumentError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  r.critical_value = ks_coefficient(alpha) / sq;
  r.reject = d > r.critical_value;
  return r;
}

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf,
                       double alpha) {
  if (samples.empty()) throw ArgumentError("ks_one_sample: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult r;
  r.statistic = d;
  const double sq = std::sqrt(n);
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  r.critical_value = ks_coefficient(alpha) / sq;
  r.reject = d > r.critical_value;
  return r;
}

}  // namespace isoproj
