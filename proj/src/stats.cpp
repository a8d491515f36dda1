#include "spw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spw/error.hpp"

namespace spw {

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Dual (theta-function) form converges fast for small lambda:
    // P(K <= x) = sqrt(2 pi) / x * sum_j exp(-(2j - 1)^2 pi^2 / (8 x^2)).
    const double y = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double term = std::exp(static_cast<double>((2 * j - 1) * (2 * j - 1)) * y);
      cdf += term;
      if (term < 1e-18 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  // Q(x) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2), 100 terms.
  double q = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    q += sign * std::exp(-2.0 * j * j * lambda * lambda);
    sign = -sign;
  }
  return std::clamp(2.0 * q, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: both samples must be non-empty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  // Once one sample is exhausted its ECDF is 1 and the gap can only shrink.

  KsResult out;
  out.d_statistic = std::clamp(d, 0.0, 1.0);
  out.n1 = x.size();
  out.n2 = y.size();
  out.p_value = kolmogorov_survival(out.d_statistic * std::sqrt(n1 * n2 / (n1 + n2)));
  return out;
}

Histogram histogram(std::span<const double> samples, std::span<const double> edges) {
  if (samples.empty()) throw DomainError("histogram: empty sample");
  if (edges.size() < 2) throw DomainError("histogram: need at least two edges");
  for (std::size_t e = 1; e < edges.size(); ++e) {
    if (!(edges[e] > edges[e - 1])) throw DomainError("histogram: edges must be strictly increasing");
  }
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  for (double x : samples) {
    if (!(x >= edges.front()) || x > edges.back()) {
      ++h.outside;
      continue;
    }
    // First edge >= x closes the bin on the right.
    const auto it = std::lower_bound(edges.begin(), edges.end(), x);
    const std::size_t bin = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    ++h.counts[bin];
  }
  return h;
}

Histogram histogram(std::span<const double> samples, std::size_t bins) {
  if (samples.empty()) throw DomainError("histogram: empty sample");
  if (bins < 1) throw DomainError("histogram: bins must be >= 1");
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it, hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("histogram: non-finite sample");
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  edges.back() = hi;
  return histogram(samples, edges);
}

Summary summarize(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("summarize: empty sample");
  Summary s;
  s.count = samples.size();
  s.min = samples.front();
  s.max = samples.front();
  double sum = 0.0;
  for (double x : samples) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

}  // namespace spw
