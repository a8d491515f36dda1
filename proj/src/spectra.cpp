#include "spw/spectra.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "spw/detail/bidiag.hpp"
#include "spw/error.hpp"
#include "spw/kernels.hpp"
#include "spw/variates.hpp"

namespace spw {
namespace {

void mark_clusters(SpectralResult& s) {
  const std::size_t n = s.ncomputed();
  s.clustered.assign(n, 0);
  if (n == 0) return;
  const double gap = kClusterGap * s.singular_values.front();
  for (std::size_t l = 0; l + 1 < n; ++l) {
    if (s.singular_values[l] - s.singular_values[l + 1] < gap) s.clustered[l] = s.clustered[l + 1] = 1;
  }
}

// p[r, l] = sum_j H[r, j] V[j, l]; row r < k of H touches columns
// max(0, r - k) .. min(r, q - 1), all of which are tracked rows of V.
template <class VRow>
void fill_projections(const BandedSample& h, SpectralResult& s, VRow&& v_at) {
  const std::size_t n = s.ncomputed(), k = s.k, q = h.block_cols();
  s.right_projections.assign(k * n, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t j0 = r >= k ? r - k : 0;
    for (std::size_t j = j0; j <= r && j < q; ++j) {
      const double hrj = h.at(r, j);
      if (hrj == 0.0) continue;
      for (std::size_t l = 0; l < n; ++l) s.right_projections[r * n + l] += hrj * v_at(j, l);
    }
  }
}

double nrm2(const std::vector<double>& x) { return std::sqrt(kernels::dot(x.data(), x.data(), x.size())); }

// Two passes of classical Gram-Schmidt against every vector in `basis`.
void orthogonalize(std::vector<double>& x, const std::vector<std::vector<double>>& basis, std::size_t count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t b = 0; b < count; ++b) {
      const double c = kernels::dot(basis[b].data(), x.data(), x.size());
      kernels::axpy(-c, basis[b].data(), x.data(), x.size());
    }
  }
}

}  // namespace

// --- products ------------------------------------------------------------------

void block_matvec(const BandedSample& h, std::span<const double> x, std::span<double> y) {
  if (x.size() != h.block_cols() || y.size() != h.block_rows()) throw DomainError("block_matvec: dimension mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t t = 0; t <= h.k(); ++t) {
    const auto band = h.band(t);
    kernels::mul_add(band.data(), x.data(), y.data() + t, band.size());
  }
}

void block_rmatvec(const BandedSample& h, std::span<const double> y, std::span<double> x) {
  if (x.size() != h.block_cols() || y.size() != h.block_rows()) throw DomainError("block_rmatvec: dimension mismatch");
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t t = 0; t <= h.k(); ++t) {
    const auto band = h.band(t);
    kernels::mul_add(band.data(), y.data() + t, x.data(), band.size());
  }
}

std::vector<double> band_matvec(const BandedSample& h, std::span<const double> x) {
  if (x.size() != h.n()) {
    throw DomainError("band_matvec: x has " + std::to_string(x.size()) + " entries, expected " + std::to_string(h.n()));
  }
  std::vector<double> y(h.m(), 0.0);
  block_matvec(h, x.first(h.block_cols()), std::span<double>(y).first(h.block_rows()));
  return y;
}

std::vector<double> band_rmatvec(const BandedSample& h, std::span<const double> y) {
  if (y.size() != h.m()) {
    throw DomainError("band_rmatvec: y has " + std::to_string(y.size()) + " entries, expected " + std::to_string(h.m()));
  }
  std::vector<double> x(h.n(), 0.0);
  block_rmatvec(h, y.first(h.block_rows()), std::span<double>(x).first(h.block_cols()));
  return x;
}

// --- dense path -------------------------------------------------------------------

SpectralResult full_svd(const BandedSample& h, bool vectors) {
  const std::size_t p = h.block_rows(), q = h.block_cols(), k = h.k();
  SpectralResult s;
  s.k = k;
  s.has_vectors = vectors;

  detail::ColumnBlock left, right;
  if (vectors) {
    left = detail::ColumnBlock::identity_rows(std::min(k, p), p);
    right = detail::ColumnBlock::identity_rows(std::min(k, q), q);
  }
  auto bd = detail::band_bidiagonalize(h, vectors ? &left : nullptr, vectors ? &right : nullptr);
  detail::bidiagonal_svd(bd.d, bd.e, vectors ? &left : nullptr, vectors ? &right : nullptr);
  s.singular_values = std::move(bd.d);
  mark_clusters(s);

  if (vectors) {
    const std::size_t n = s.ncomputed();
    s.left_rows.assign(k * n, 0.0);
    for (std::size_t r = 0; r < left.rows(); ++r) {
      for (std::size_t l = 0; l < n; ++l) s.left_rows[r * n + l] = left(r, l);
    }
    fill_projections(h, s, [&](std::size_t j, std::size_t l) { return right(j, l); });
  }
  return s;
}

std::vector<double> dense_singular_values(const DenseSample& g) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> mat(g.values.data(), static_cast<Eigen::Index>(g.spec.m()),
                                       static_cast<Eigen::Index>(g.spec.n()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(mat);
  const auto& sv = svd.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

// --- iterative path ---------------------------------------------------------------

SpectralResult top_svd(const BandedSample& h, std::size_t ell, const TopSvdOptions& options) {
  const std::size_t p = h.block_rows(), q = h.block_cols(), k = h.k();
  if (ell < 1 || ell > q) {
    throw DomainError("top_svd: ell must be in [1, " + std::to_string(q) + "], got " + std::to_string(ell));
  }
  const std::size_t basis_size = options.basis ? options.basis : std::max<std::size_t>(40, 4 * ell);
  const auto log2q = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(q))));
  const std::size_t cap = options.max_cycles ? options.max_cycles : 10 * ell * std::max<std::size_t>(1, log2q);

  double frob = 0.0;
  for (double v : h.values()) frob += v * v;
  frob = std::sqrt(frob);
  const double breakdown = 64.0 * std::numeric_limits<double>::epsilon() * std::max(frob, 1e-300);

  std::vector<std::vector<double>> locked_u, locked_v;
  std::vector<double> locked_sigma, locked_residual;
  std::vector<std::vector<double>> U(basis_size, std::vector<double>(p)), V(basis_size + 1, std::vector<double>(q));
  std::vector<double> alpha(basis_size), beta(basis_size + 1);
  std::vector<double> restart;
  std::vector<double> last_residuals;
  RandomStream start_stream(0x9d3b'1f6c'24e5'a7c1ull, 0);

  auto random_unit = [&](std::vector<double>& x, const std::vector<std::vector<double>>& against, std::size_t count) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (double& xi : x) xi = start_stream.normal();
      orthogonalize(x, against, count);
      const double nx = nrm2(x);
      if (nx > 1e-8) {
        kernels::scal(1.0 / nx, x.data(), x.size());
        return true;
      }
    }
    return false;
  };

  std::size_t cycles = 0;
  while (locked_sigma.size() < ell) {
    if (cycles++ >= cap) {
      std::vector<double> res = locked_residual;
      res.insert(res.end(), last_residuals.begin(), last_residuals.end());
      res.resize(ell, res.empty() ? 0.0 : res.back());
      throw ConvergenceError("top_svd: no convergence after " + std::to_string(cap) + " restart cycles", res);
    }
    const std::size_t nlocked = locked_sigma.size();
    const std::size_t jmax = std::min(basis_size, q - nlocked);

    std::vector<double>& v0 = V[0];
    if (restart.empty()) {
      if (!random_unit(v0, locked_v, nlocked)) throw NumericError("top_svd: cannot build a start vector");
    } else {
      v0 = restart;
      orthogonalize(v0, locked_v, nlocked);
      const double nv = nrm2(v0);
      if (nv > 1e-8) {
        kernels::scal(1.0 / nv, v0.data(), q);
      } else if (!random_unit(v0, locked_v, nlocked)) {
        throw NumericError("top_svd: cannot build a start vector");
      }
    }

    // Golub-Kahan-Lanczos: A V_j = U_j B_j, A^T U_j = V_j B_j^T + beta_j v_j e_j^T.
    std::size_t jdim = 0;
    double beta_last = 0.0;
    std::vector<double> w(q);
    for (std::size_t j = 0; j < jmax; ++j) {
      std::vector<double>& u = U[j];
      block_matvec(h, V[j], u);
      if (j > 0) kernels::axpy(-beta[j], U[j - 1].data(), u.data(), p);
      orthogonalize(u, locked_u, nlocked);
      orthogonalize(u, U, j);
      double a = nrm2(u);
      if (a <= breakdown) {
        a = 0.0;
        std::vector<std::vector<double>> all_u(locked_u);
        all_u.insert(all_u.end(), U.begin(), U.begin() + static_cast<std::ptrdiff_t>(j));
        if (!random_unit(u, all_u, all_u.size())) throw NumericError("top_svd: left basis exhausted");
      } else {
        kernels::scal(1.0 / a, u.data(), p);
      }
      alpha[j] = a;
      block_rmatvec(h, u, w);
      kernels::axpy(-a, V[j].data(), w.data(), q);
      orthogonalize(w, locked_v, nlocked);
      orthogonalize(w, V, j + 1);
      const double b = nrm2(w);
      jdim = j + 1;
      if (j + 1 == jmax || b <= breakdown) {
        beta_last = b <= breakdown ? 0.0 : b;
        break;
      }
      beta[j + 1] = b;
      V[j + 1] = w;
      kernels::scal(1.0 / b, V[j + 1].data(), q);
    }

    std::vector<double> d(alpha.begin(), alpha.begin() + static_cast<std::ptrdiff_t>(jdim));
    std::vector<double> e(jdim > 0 ? jdim - 1 : 0);
    for (std::size_t j = 0; j + 1 < jdim; ++j) e[j] = beta[j + 1];
    auto X = detail::ColumnBlock::identity_rows(jdim, jdim);
    auto Y = detail::ColumnBlock::identity_rows(jdim, jdim);
    detail::bidiagonal_svd(d, e, &X, &Y);

    auto ritz = [&](std::size_t i, std::vector<double>& uo, std::vector<double>& vo) {
      uo.assign(p, 0.0);
      vo.assign(q, 0.0);
      for (std::size_t j = 0; j < jdim; ++j) {
        kernels::axpy(X(j, i), U[j].data(), uo.data(), p);
        kernels::axpy(Y(j, i), V[j].data(), vo.data(), q);
      }
    };

    const bool exhausted = jdim == q - nlocked;
    last_residuals.assign(std::min(jdim, ell - nlocked), 0.0);
    for (std::size_t i = 0; i < last_residuals.size(); ++i) last_residuals[i] = std::abs(beta_last * X(jdim - 1, i));

    std::size_t take = 0;
    if (exhausted || beta_last == 0.0) {
      // Invariant subspace: its Ritz triplets are exact. Only a Krylov space
      // spanning the whole remaining space can vouch for more than the top.
      take = exhausted ? std::min(jdim, ell - nlocked) : 1;
    } else if (last_residuals[0] <= options.tolerance * d[0]) {
      take = 1;
    }

    if (take == 0) {
      std::vector<double> uo;
      ritz(0, uo, restart);
      continue;
    }
    for (std::size_t i = 0; i < take; ++i) {
      std::vector<double> uo, vo;
      ritz(i, uo, vo);
      locked_u.push_back(std::move(uo));
      locked_v.push_back(std::move(vo));
      locked_sigma.push_back(d[i]);
      locked_residual.push_back(last_residuals[i]);
    }
    restart.clear();
  }

  // Locking order is descending up to rounding; make it exact.
  std::vector<std::size_t> order(ell);
  for (std::size_t i = 0; i < ell; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return locked_sigma[a] > locked_sigma[b]; });

  SpectralResult s;
  s.k = k;
  s.has_vectors = true;
  for (std::size_t i : order) s.singular_values.push_back(locked_sigma[i]);
  mark_clusters(s);
  s.left_rows.assign(k * ell, 0.0);
  for (std::size_t r = 0; r < std::min(k, p); ++r) {
    for (std::size_t l = 0; l < ell; ++l) s.left_rows[r * ell + l] = locked_u[order[l]][r];
  }
  fill_projections(h, s, [&](std::size_t j, std::size_t l) { return locked_v[order[l]][j]; });
  return s;
}

}  // namespace spw
