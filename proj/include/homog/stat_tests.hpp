#pragma once

// Kolmogorov-Smirnov tests and Gaussian helpers.

#include <functional>
#include <vector>

namespace homog {

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
  double effective_n = 0.0;
};

/// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Tail probability with Stephens' small-sample correction
/// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
double ks_p_value(double d, double effective_n);

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// Two-sided p-value of a standard normal z score.
double z_p_value(double z);

}  // namespace homog
