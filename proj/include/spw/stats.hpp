#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spw {

struct KsResult {
  double d_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Two-sample Kolmogorov-Smirnov test. D is the largest gap between the two
/// right-continuous empirical CDFs, evaluated over the union of the sample
/// points. The p-value uses the asymptotic Kolmogorov distribution at
/// lambda = D * sqrt(n1 n2 / (n1 + n2)). Throws DomainError on empty input.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

/// Bin counts with right-closed bins (e_i, e_{i+1}]; the first bin also
/// takes its left edge.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t outside = 0;  ///< samples outside [edges.front(), edges.back()]
};

/// `bins` equal-width bins spanning [min, max] of the sample (a degenerate
/// range is widened to [x - 0.5, x + 0.5]). Counts sum to the sample size.
Histogram histogram(std::span<const double> samples, std::size_t bins);
/// Explicit, strictly increasing edges.
Histogram histogram(std::span<const double> samples, std::span<const double> edges);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double std_error = 0.0;
  double min = 0.0;
  double max = 0.0;
};
Summary summarize(std::span<const double> samples);

}  // namespace spw
