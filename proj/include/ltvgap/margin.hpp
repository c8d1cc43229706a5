#ifndef LTVGAP_MARGIN_HPP
#define LTVGAP_MARGIN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ltvgap/coprime.hpp"
#include "ltvgap/nehari.hpp"

namespace ltvgap {

template <typename Scalar = double>
struct ProfileEntry {
  Index n = 0;
  Scalar value = 0;
  bool boundary = false;  // within the last few nest indices; finite-horizon artifact
};

template <typename Scalar = double>
struct MarginReport {
  Scalar hankel_norm_R = 0;
  Scalar r_o = 0;
  Scalar r_o_alt = 0;
  Scalar upsilon_norm = 0;
  Scalar corona_value = 0;
  Scalar ball_equivalence_radius = 0;
  Scalar cross_residual = 0;
  std::vector<ProfileEntry<Scalar>> profile;
  Scalar r_opt_lower = 0;  // bracket endpoints for the optimal margin
  Scalar r_opt_upper = 0;
};

// R = M^T U + N^T V; with the zero-controller completion this reduces to
// N^T Mhat^{-1}.  The optimal stability margin is a function of the
// distance from R to the causal operators.
template <typename Scalar>
LtvOperator<Scalar> symbol_R(const CoprimeFactorization<Scalar>& f) {
  return compose(adjoint(f.M), f.U) + compose(adjoint(f.N), f.V);
}

// Column symbol [-Nhat^*; Mhat^*] whose Hankel norm enters the alternate
// margin formula.
template <typename Scalar>
LtvOperator<Scalar> symbol_upsilon(const CoprimeFactorization<Scalar>& f) {
  return stack_col(scale(Scalar(-1), adjoint(f.Nhat)), adjoint(f.Mhat));
}

namespace detail {

template <typename Scalar>
void check_dual_route(Scalar a, Scalar b, const char* where) {
  if (std::abs(a - b) > Scalar(1e-7) * std::max(Scalar(1), std::max(a, b)))
    throw std::runtime_error(std::string(where) +
                             ": corner-sweep and flattened-Hankel norms disagree");
}

}  // namespace detail

template <typename Scalar = double>
struct UpperMargin {
  Scalar hankel_norm_R = 0;
  Scalar r_o = 0;
};

// r_o = (1 + ||H_R||^2)^{-1/2}.  The Hankel norm comes from the corner
// sweep, cross-checked against the flattened Hankel matrix, and the
// unitary-invariance identity
//   || [U + MQ; V + NQ] || = (1 + ||R + Q||^2)^{1/2}
// is verified for the optimal causal correction Q.
template <typename Scalar>
UpperMargin<Scalar> r_upper(const CoprimeFactorization<Scalar>& f) {
  const LtvOperator<Scalar> r = symbol_R(f);
  const Scalar dist = distance_to_causal(r);
  detail::check_dual_route(dist, flatten_hankel(r).norm(), "r_upper");

  const LtvOperator<Scalar> q = nehari_extension(r);
  const Scalar stacked = operator_norm(stack_col(f.U + f.M * q, f.V + f.N * q));
  const Scalar reduced = std::sqrt(Scalar(1) + operator_norm(r + q) * operator_norm(r + q));
  if (std::abs(stacked - reduced) > Scalar(1e-8) * std::max(Scalar(1), stacked))
    throw std::runtime_error("r_upper: unitary-invariance identity failed");

  return {dist, Scalar(1) / std::sqrt(Scalar(1) + dist * dist)};
}

template <typename Scalar = double>
struct AlternateMargin {
  Scalar upsilon_norm = 0;
  Scalar r_o_alt = 0;
};

// r_o^2 = 1 - ||Upsilon||^2 with Upsilon the Hankel operator of the
// column symbol [-Nhat^*; Mhat^*].
template <typename Scalar>
AlternateMargin<Scalar> r_upper_alt(const CoprimeFactorization<Scalar>& f) {
  const LtvOperator<Scalar> sym = symbol_upsilon(f);
  const Scalar nu = distance_to_causal(sym);
  detail::check_dual_route(nu, flatten_hankel(sym).norm(), "r_upper_alt");
  if (nu >= Scalar(1))
    throw std::runtime_error(
        "r_upper_alt: ||Upsilon|| >= 1; normalized factors cannot produce this");
  return {nu, std::sqrt(Scalar(1) - nu * nu)};
}

// Flattened matrix of the map A |-> Pi_1 ([U; V] A) on causal test
// operators A, in causal coordinates of the stacked codomain:
//   Xi(A) = [U; V] A - [M; N] P(R A),  R = M^T U + N^T V.
template <typename Scalar>
FlattenedMap<Scalar> flatten_xi(const CoprimeFactorization<Scalar>& f) {
  const SignalSpace& y = f.output_space();
  const LtvOperator<Scalar> kuv = stack_col(f.U, f.V);
  const LtvOperator<Scalar> kmn = stack_col(f.M, f.N);
  const LtvOperator<Scalar> r = symbol_R(f);
  const SignalSpace& u = r.codomain();

  OperatorBasis<Scalar> domain(y, y, CoordPattern::Causal);
  OperatorBasis<Scalar> codomain(y, kuv.codomain(), CoordPattern::Causal);
  MatrixX<Scalar> big = MatrixX<Scalar>::Zero(codomain.dim(), domain.dim());
  for (Index jd = 0; jd < domain.dim(); ++jd) {
    const auto [p, q] = domain.coord(jd);
    const Index qstep = y.step_of(q);
    VectorX<Scalar> z = r.matrix().col(p);
    for (Index row = 0; row < u.total(); ++row)
      if (u.step_of(row) < qstep) z(row) = Scalar(0);
    const VectorX<Scalar> img = kuv.matrix().col(p) - kmn.matrix() * z;
    const auto [lo, hi] = codomain.column_range(q);
    for (Index ic = lo; ic < hi; ++ic) big(ic, jd) = img(codomain.coord(ic).first);
  }
  return {std::move(domain), std::move(codomain), std::move(big)};
}

// Per-nest-index restricted optima: entry n is the norm of Xi restricted
// to test operators supported strictly after time n, i.e.
// inf_Q || [U + MQ; V + NQ](I - P_n) ||.  Entries are nonincreasing in n;
// the last few shrink toward the horizon end and are flagged as boundary
// artifacts.
template <typename Scalar>
std::vector<ProfileEntry<Scalar>> margin_profile(const CoprimeFactorization<Scalar>& f) {
  const FlattenedMap<Scalar> xi = flatten_xi(f);
  const SignalSpace& y = f.output_space();
  const Index T = y.horizon();
  std::vector<ProfileEntry<Scalar>> out;
  for (Index n = -1; n + 1 < T; ++n) {
    std::vector<Index> cols;
    for (Index jd = 0; jd < xi.domain_basis.dim(); ++jd)
      if (y.step_of(xi.domain_basis.coord(jd).first) > n) cols.push_back(jd);
    MatrixX<Scalar> sub(xi.matrix.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
      sub.col(static_cast<Index>(k)) = xi.matrix.col(cols[k]);
    out.push_back({n, detail::spectral_norm(sub), n > T - 5});
  }
  return out;
}

// Operator Corona criterion: sup over n and signals f of
// ||P_n f|| / ||[P_n M f; P_n N f]||, each inner supremum solved as a
// symmetric-definite generalized eigenproblem after deflating the joint
// kernel of [P_n M; P_n N].  Infinity means no bounded causal left
// inverse exists at some truncation.
template <typename Scalar>
Scalar corona_criterion(const LtvOperator<Scalar>& m, const LtvOperator<Scalar>& n) {
  detail::require(m.domain() == n.domain(), "corona_criterion: domains differ");
  const SignalSpace& u = m.domain();
  const Index T = u.horizon();
  Scalar best(0);
  for (Index k = 0; k < T; ++k) {
    const Index mu_rows = m.codomain().offset(k + 1);
    const Index nu_rows = n.codomain().offset(k + 1);
    const auto mk = m.matrix().topRows(mu_rows);
    const auto nk = n.matrix().topRows(nu_rows);
    MatrixX<Scalar> gram = mk.transpose() * mk + nk.transpose() * nk;
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(
        (gram + gram.transpose()) / Scalar(2));
    const Scalar cut = std::max(es.eigenvalues().maxCoeff(), Scalar(0)) * Scalar(1e-12);

    const Index kept = u.offset(k + 1);
    Index rank = 0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > cut) ++rank;
    const Index null_dim = es.eigenvalues().size() - rank;
    if (null_dim > 0) {
      const auto kernel = es.eigenvectors().leftCols(null_dim);
      if (kernel.topRows(kept).norm() > Scalar(1e-8))
        return std::numeric_limits<Scalar>::infinity();
    }
    if (rank == 0) continue;
    // Eigenvector coordinates make the restricted Gram matrix diagonal.
    const MatrixX<Scalar> range = es.eigenvectors().rightCols(rank);
    const VectorX<Scalar> isqrt = es.eigenvalues().tail(rank).array().rsqrt();
    const MatrixX<Scalar> ar = range.topRows(kept).transpose() * range.topRows(kept);
    const MatrixX<Scalar> c = isqrt.asDiagonal() * ar * isqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> inner((c + c.transpose()) / Scalar(2));
    best = std::max(best, std::sqrt(std::max(inner.eigenvalues().maxCoeff(), Scalar(0))));
  }
  return best;
}

// Radius below which gap-metric balls and coprime-factor balls coincide:
// the reciprocal of inf_Q || [Vhat + Q Nhat, -(Uhat + Q Mhat)] ||.  The row
// problem becomes a column problem under adjoint and time reversal, and
// the two-block reduction leaves the causal-distance problem for the
// reversed-adjoint of Vhat Nhat^* + Uhat Mhat^*.
template <typename Scalar>
Scalar ball_equivalence_radius(const CoprimeFactorization<Scalar>& f) {
  const LtvOperator<Scalar> row_symbol =
      compose(f.Vhat, adjoint(f.Nhat)) + compose(f.Uhat, adjoint(f.Mhat));
  const LtvOperator<Scalar> col_symbol = reverse_adjoint(row_symbol);
  const Scalar dist = distance_to_causal(col_symbol);
  detail::check_dual_route(dist, flatten_hankel(col_symbol).norm(), "ball_equivalence_radius");
  return Scalar(1) / std::sqrt(Scalar(1) + dist * dist);
}

// ---------------------------------------------------------------------------
// Time-invariant closed-form oracle

namespace detail {

// Roots of a real polynomial (ascending coefficients) via the companion
// matrix.
template <typename Scalar>
std::vector<std::complex<Scalar>> polynomial_roots(const std::vector<Scalar>& coeffs) {
  const Index deg = static_cast<Index>(coeffs.size()) - 1;
  MatrixX<Scalar> companion = MatrixX<Scalar>::Zero(deg, deg);
  for (Index i = 1; i < deg; ++i) companion(i, i - 1) = Scalar(1);
  for (Index i = 0; i < deg; ++i)
    companion(i, deg - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();
  Eigen::EigenSolver<MatrixX<Scalar>> es(companion);
  std::vector<std::complex<Scalar>> roots;
  for (Index i = 0; i < deg; ++i)
    roots.emplace_back(es.eigenvalues()(i).real(), es.eigenvalues()(i).imag());
  return roots;
}

}  // namespace detail

// Classical maximal stability margin of a scalar FIR plant
// h(z) = h_0 + h_1 z^{-1} + ... + h_m z^{-m}:
//   b = (1 - ||Gamma||^2)^{1/2}
// with Gamma the K x K Hankel matrix pair built from the strictly
// anticausal coefficients of the normalized factor symbols 1/a and h/a,
// where a is the spectral factor of 1 + h(z) h(1/z) obtained by splitting
// the roots of the autocorrelation polynomial about the unit circle.
// Entirely scalar-sequence based; serves as ground truth for
// horizon-convergence of the lifted computation.
template <typename Scalar>
Scalar lti_margin_oracle(const std::vector<Scalar>& taps, Index truncation) {
  if (taps.empty()) throw std::invalid_argument("lti_margin_oracle: empty tap list");
  if (truncation < 1) throw std::invalid_argument("lti_margin_oracle: truncation must be >= 1");
  const std::size_t m = taps.size() - 1;

  // Autocorrelation of (1, h): c_j = [j == 0] + sum_k h_k h_{k+j}.
  std::vector<Scalar> c(m + 1, Scalar(0));
  c[0] = Scalar(1);
  for (std::size_t j = 0; j <= m; ++j)
    for (std::size_t k = 0; k + j <= m; ++k) c[j] += taps[k] * taps[k + j];

  std::size_t meff = m;
  while (meff > 0 && std::abs(c[meff]) <= Scalar(1e-14) * c[0]) --meff;

  // Spectral factor a with all roots outside the closed unit disk.
  std::vector<Scalar> a(meff + 1, Scalar(0));
  if (meff == 0) {
    a[0] = std::sqrt(c[0]);
  } else {
    std::vector<Scalar> poly(2 * meff + 1);
    for (std::size_t i = 0; i <= 2 * meff; ++i)
      poly[i] = c[static_cast<std::size_t>(
          std::abs(static_cast<long>(i) - static_cast<long>(meff)))];
    const auto roots = detail::polynomial_roots(poly);
    std::vector<std::complex<Scalar>> outside;
    for (const auto& r : roots) {
      if (std::abs(std::abs(r) - Scalar(1)) < Scalar(1e-8))
        throw std::invalid_argument(
            "lti_margin_oracle: spectral factorization root on the unit circle");
      if (std::abs(r) > Scalar(1)) outside.push_back(r);
    }
    if (outside.size() != meff)
      throw std::runtime_error("lti_margin_oracle: root splitting failed");

    std::vector<std::complex<Scalar>> monic{std::complex<Scalar>(1, 0)};
    std::complex<Scalar> denom(1, 0);
    for (const auto& r : outside) {
      monic.push_back(std::complex<Scalar>(0, 0));
      for (std::size_t i = monic.size() - 1; i >= 1; --i)
        monic[i] = monic[i] - monic[i - 1] / r;
      denom *= (std::complex<Scalar>(1, 0) - std::complex<Scalar>(1, 0) / r);
    }
    Scalar f1 = c[0];
    for (std::size_t j = 1; j <= meff; ++j) f1 += Scalar(2) * c[j];
    const Scalar kappa = std::sqrt(f1) / denom.real();
    for (std::size_t i = 0; i <= meff; ++i) a[i] = kappa * monic[i].real();

    // a * reversed(a) must reproduce the autocorrelation.
    for (std::size_t j = 0; j <= meff; ++j) {
      Scalar conv(0);
      for (std::size_t k = 0; k + j <= meff; ++k) conv += a[k] * a[k + j];
      if (std::abs(conv - c[j]) > Scalar(1e-10) * c[0])
        throw std::runtime_error("lti_margin_oracle: spectral factor residual too large");
    }
  }

  // Power series of 1/a and h/a.
  const std::size_t len = static_cast<std::size_t>(2 * truncation + 1);
  std::vector<Scalar> g(len, Scalar(0)), e(len, Scalar(0));
  for (std::size_t j = 0; j < len; ++j) {
    Scalar gj = j == 0 ? Scalar(1) : Scalar(0);
    Scalar ej = j <= m ? taps[j] : Scalar(0);
    for (std::size_t i = 1; i <= std::min(j, meff); ++i) {
      gj -= a[i] * g[j - i];
      ej -= a[i] * e[j - i];
    }
    g[j] = gj / a[0];
    e[j] = ej / a[0];
  }

  MatrixX<Scalar> hank(2 * truncation, truncation);
  for (Index i = 0; i < truncation; ++i)
    for (Index k = 0; k < truncation; ++k) {
      hank(i, k) = g[static_cast<std::size_t>(i + k + 1)];
      hank(truncation + i, k) = e[static_cast<std::size_t>(i + k + 1)];
    }
  const Scalar gamma = detail::spectral_norm(hank);
  return std::sqrt(std::max(Scalar(0), Scalar(1) - gamma * gamma));
}

// Full margin report for one factorized plant.
template <typename Scalar>
MarginReport<Scalar> margin_report(const CoprimeFactorization<Scalar>& f) {
  MarginReport<Scalar> rep;
  const UpperMargin<Scalar> up = r_upper(f);
  const AlternateMargin<Scalar> alt = r_upper_alt(f);
  rep.hankel_norm_R = up.hankel_norm_R;
  rep.r_o = up.r_o;
  rep.upsilon_norm = alt.upsilon_norm;
  rep.r_o_alt = alt.r_o_alt;
  rep.cross_residual = std::abs(rep.r_o - rep.r_o_alt);
  rep.corona_value = corona_criterion(f.M, f.N);
  rep.ball_equivalence_radius = ball_equivalence_radius(f);
  rep.profile = margin_profile(f);
  rep.r_opt_lower = rep.r_o;
  Scalar min_entry = std::numeric_limits<Scalar>::infinity();
  for (const auto& entry : rep.profile)
    if (entry.n >= 0) min_entry = std::min(min_entry, entry.value);
  rep.r_opt_upper = min_entry > Scalar(0) ? Scalar(1) / min_entry
                                          : std::numeric_limits<Scalar>::infinity();
  return rep;
}

}  // namespace ltvgap

#endif  // LTVGAP_MARGIN_HPP
