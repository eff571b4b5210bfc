#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mdbmlab {

struct KSResult {
  double statistic = 0.0;  ///< D
  double p_value = 1.0;    ///< asymptotic Kolmogorov tail
  std::size_t n = 0;       ///< effective sample size used for the p-value
};

/// Kolmogorov survival function Q(l) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 l^2).
double kolmogorov_survival(double lambda);

/// D = sup |F_n - F| evaluated on both sides of every jump of F_n.
KSResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample D = sup |F_a - F_b| over the pooled sample.
KSResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Exact W1 between the empirical measures of a and b, computed as the
/// integral of |F_a - F_b|. Equal sizes reduce to the mean absolute
/// difference of the sorted samples.
double wasserstein1_empirical(std::span<const double> a, std::span<const double> b);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> xs);

/// |a - b| in units of the combined standard error.
double z_score(const MeanEstimate& a, const MeanEstimate& b);

double normal_cdf(double x, double mean = 0.0, double variance = 1.0);

}  // namespace mdbmlab
