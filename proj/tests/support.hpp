#pragma once
// Independent reference computations shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "spw/sampler.hpp"

namespace spw::testing {

/// Eigenvalues of a symmetric n x n row-major matrix by cyclic Jacobi
/// rotations in long double, sorted descending.
inline std::vector<long double> jacobi_eigenvalues(std::vector<long double> a, std::size_t n) {
  auto at = [&](std::size_t i, std::size_t j) -> long double& { return a[i * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    long double off = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += at(i, j) * at(i, j);
        if (i != j) off += at(i, j) * at(i, j);
      }
    }
    if (off <= 1e-36L * total || off == 0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (at(p, q) == 0) continue;
        const long double theta = (at(q, q) - at(p, p)) / (2 * at(p, q));
        const long double t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const long double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const long double arp = at(r, p), arq = at(r, q);
          at(r, p) = c * arp - s * arq;
          at(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const long double apr = at(p, r), aqr = at(q, r);
          at(p, r) = c * apr - s * aqr;
          at(q, r) = s * apr + c * aqr;
        }
      }
    }
  }
  std::vector<long double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end(), [](long double x, long double y) { return x > y; });
  return ev;
}

/// The min(m, n) largest singular values of a row-major m x n matrix, as
/// square roots of the eigenvalues of the product with its transpose (the
/// smaller of the two Gram matrices).
inline std::vector<double> oracle_singular_values(const std::vector<double>& g, std::size_t m, std::size_t n) {
  const bool rows = m <= n;
  const std::size_t s = rows ? m : n;
  std::vector<long double> gram(s * s, 0);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      long double acc = 0;
      if (rows) {
        for (std::size_t j = 0; j < n; ++j) acc += static_cast<long double>(g[a * n + j]) * g[b * n + j];
      } else {
        for (std::size_t i = 0; i < m; ++i) acc += static_cast<long double>(g[i * n + a]) * g[i * n + b];
      }
      gram[a * s + b] = acc;
    }
  }
  std::vector<double> out;
  for (long double ev : jacobi_eigenvalues(gram, s)) out.push_back(static_cast<double>(std::sqrt(std::max(ev, 0.0L))));
  return out;
}

inline std::vector<double> oracle_singular_values(const BandedSample& h) {
  return oracle_singular_values(h.to_dense(), h.m(), h.n());
}

/// Spec with m, n in [1, max_dim], k in [1, min(m, max_k)] and log-uniform
/// spikes in [0.5, 20].
inline SpikeSpec random_spec(std::mt19937_64& rng, std::size_t max_dim, std::size_t max_k) {
  std::uniform_int_distribution<std::size_t> dim(1, max_dim);
  const std::size_t m = dim(rng), n = dim(rng);
  std::uniform_int_distribution<std::size_t> kd(1, std::min(m, max_k));
  const std::size_t k = kd(rng);
  std::uniform_real_distribution<double> logsig(std::log(0.5), std::log(20.0));
  std::vector<double> spikes(k);
  for (auto& s : spikes) s = std::exp(logsig(rng));
  return SpikeSpec(m, n, spikes);
}

inline double max_relative_error(const std::vector<double>& got, const std::vector<double>& want) {
  double worst = 0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    const double scale = std::fabs(want[i]);
    const double err = std::fabs(got[i] - want[i]);
    worst = std::max(worst, scale > 0 ? err / scale : err);
  }
  return worst;
}

}  // namespace spw::testing
