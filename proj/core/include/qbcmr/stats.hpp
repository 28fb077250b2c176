#pragma once

#include <Eigen/Core>
#include <vector>

namespace qbcmr {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, accurate in both tails (erfc based).
double normal_cdf(double x);

/// Standard normal quantile (inverse CDF), Wichura's AS241 double-precision
/// algorithm. Throws for p outside (0, 1).
double normal_quantile(double p);

/// Inclusive linear-interpolation empirical quantile (type 7). `p` in [0, 1].
/// Takes a copy because it needs to sort.
double quantile_type7(std::vector<double> values, double p);

/// Effective sample size of a scalar MCMC trace via Geyer's initial positive
/// sequence estimator. Returns the series length when no autocorrelation
/// structure is detectable.
double effective_sample_size(const Eigen::VectorXd& series);

/// Least squares slope of y on x.
double ls_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace qbcmr
