#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace isoproj {

/// Compensated (Neumaier) running sum.
class NeumaierSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (abs_(sum_) >= abs_(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  static double abs_(double v) { return v < 0 ? -v : v; }
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Sample mean with standard error of the mean; deterministic in input order.
MonteCarloEstimate mean_estimate(std::span<const double> values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Least-squares line y = a + b x. With weights, minimizes sum w_i r_i^2.
/// Needs at least two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

/// Linear-interpolated quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);
inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double critical_value = 0.0;
  bool reject = false;
};

/// Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// c(alpha) with Q_KS(c) ~= alpha, the asymptotic form sqrt(-ln(alpha/2)/2).
double ks_coefficient(double alpha);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.01);
KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf,
                       double alpha = 0.01);

}  // namespace isoproj
