#include "qbcmr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qbcmr/errors.hpp"

namespace qbcmr {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  // AS241, PPND16 (Wichura 1988). Relative accuracy ~1e-16.
  if (!(p > 0.0 && p < 1.0)) throw invalid_argument_error("normal_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw invalid_argument_error("quantile_type7: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw invalid_argument_error("quantile_type7: p must be in [0,1]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return values[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double effective_sample_size(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = series.mean();
  const Eigen::VectorXd centered = series.array() - mean;
  const double var = centered.squaredNorm() / static_cast<double>(n);
  if (var <= 0.0) return static_cast<double>(n);

  auto autocov = [&](Eigen::Index lag) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
    return s / static_cast<double>(n);
  };

  // Geyer: sum paired autocovariances while the pairs stay positive.
  double tau = 1.0;  // integrated autocorrelation time, rho_0 term
  const Eigen::Index max_lag = n / 2 - 1;
  for (Eigen::Index m = 0;; ++m) {
    const Eigen::Index l1 = 2 * m + 1, l2 = 2 * m + 2;
    if (l2 > max_lag) break;
    const double pair = (autocov(l1) + autocov(l2)) / var;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(1.0, static_cast<double>(n) / tau);
}

double ls_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw invalid_argument_error("ls_slope: need at least two paired points");
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).matrix().squaredNorm();
  if (sxx == 0.0) throw invalid_argument_error("ls_slope: degenerate x");
  const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
  return sxy / sxx;
}

}  // namespace qbcmr
