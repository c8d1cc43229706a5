#ifndef LTVGAP_GAP_HPP
#define LTVGAP_GAP_HPP

#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ltvgap/coprime.hpp"
#include "ltvgap/operator.hpp"

namespace ltvgap {

// Directed and symmetric time-varying gap data between two plants; the
// nest index runs over n = -1, 0, ..., T-1 (entry k of the per-n lists is
// n = k - 1).
template <typename Scalar = double>
struct GapReport {
  std::vector<Scalar> per_n_directed_12;
  std::vector<Scalar> per_n_directed_21;
  std::vector<Scalar> per_n_delta;
  Scalar directed_12 = 0;
  Scalar directed_21 = 0;
  Scalar alpha = 0;
  Scalar max_identity_residual = 0;  // per-n |delta_n - max of the directed pair|
};

// Orthogonal projection onto the range of [M; N](I - P_n), as an operator
// on the doubled (input + output) space.  Rank is decided by singular
// values above 1e-12 of the largest.
template <typename Scalar>
LtvOperator<Scalar> graph_projection(const LtvOperator<Scalar>& m,
                                     const LtvOperator<Scalar>& n, NestIndex nest) {
  const LtvOperator<Scalar> graph = stack_col(m, n);
  nest.validate(graph.domain());
  const Index keep = nest.kept(graph.domain());
  const MatrixX<Scalar> cols = graph.matrix().rightCols(graph.matrix().cols() - keep);
  const SignalSpace& doubled = graph.codomain();
  if (cols.cols() == 0)
    return LtvOperator<Scalar>::zero(doubled, doubled);
  Eigen::BDCSVD<MatrixX<Scalar>> svd(cols, Eigen::ComputeThinU);
  const Scalar cut = svd.singularValues()(0) * Scalar(1e-12);
  Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > cut) ++rank;
  const MatrixX<Scalar> basis = svd.matrixU().leftCols(rank);
  return LtvOperator<Scalar>(doubled, doubled, basis * basis.transpose());
}

// || {diag(I-P_n, I-P_n) - Pi_2n} Pi_1n ||, the directed gap at nest index n.
template <typename Scalar>
Scalar directed_gap_n(const CoprimeFactorization<Scalar>& f1,
                      const CoprimeFactorization<Scalar>& f2, NestIndex nest) {
  detail::require(f1.input_space() == f2.input_space() &&
                      f1.output_space() == f2.output_space(),
                  "directed_gap_n: plants live on different signal spaces");
  const LtvOperator<Scalar> p1 = graph_projection(f1.M, f1.N, nest);
  const LtvOperator<Scalar> p2 = graph_projection(f2.M, f2.N, nest);
  const LtvOperator<Scalar> en =
      truncate(LtvOperator<Scalar>::identity(p1.domain()), nest,
               TruncationSide::Both, /*complement=*/true);
  return operator_norm((en - p2) * p1);
}

template <typename Scalar>
GapReport<Scalar> tv_gap(const CoprimeFactorization<Scalar>& f1,
                         const CoprimeFactorization<Scalar>& f2) {
  GapReport<Scalar> rep;
  const Index T = f1.M.horizon();
  for (Index n = -1; n < T; ++n) {
    const LtvOperator<Scalar> p1 = graph_projection(f1.M, f1.N, n);
    const LtvOperator<Scalar> p2 = graph_projection(f2.M, f2.N, n);
    const LtvOperator<Scalar> en =
        truncate(LtvOperator<Scalar>::identity(p1.domain()), NestIndex(n),
                 TruncationSide::Both, /*complement=*/true);
    const Scalar d12 = operator_norm((en - p2) * p1);
    const Scalar d21 = operator_norm((en - p1) * p2);
    const Scalar dn = operator_norm(p1 - p2);
    rep.per_n_directed_12.push_back(d12);
    rep.per_n_directed_21.push_back(d21);
    rep.per_n_delta.push_back(dn);
    rep.directed_12 = std::max(rep.directed_12, d12);
    rep.directed_21 = std::max(rep.directed_21, d21);
    rep.max_identity_residual =
        std::max(rep.max_identity_residual, std::abs(dn - std::max(d12, d21)));
  }
  rep.alpha = std::max(rep.directed_12, rep.directed_21);
  return rep;
}

template <typename Scalar>
GapReport<Scalar> tv_gap(const LtvOperator<Scalar>& plant1,
                         const LtvOperator<Scalar>& plant2) {
  return tv_gap(factorize(plant1), factorize(plant2));
}

// Random plants in the normalized-coprime-factor ball of radius r around P:
// P1 = (N + dN)(M + dM)^{-1} with ||[dM; dN]|| < r, each returned with its
// gap alpha(P, P1).  Samples whose M + dM loses causal invertibility are
// rejected and redrawn.
template <typename Scalar>
std::vector<std::pair<LtvOperator<Scalar>, Scalar>> sample_coprime_ball(
    const LtvOperator<Scalar>& plant, Scalar radius, Index count,
    std::uint64_t seed) {
  if (!(radius > Scalar(0)))
    throw std::invalid_argument("sample_coprime_ball: radius must be positive");
  const CoprimeFactorization<Scalar> f = factorize(plant);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));

  std::vector<std::pair<LtvOperator<Scalar>, Scalar>> out;
  out.reserve(static_cast<std::size_t>(count));
  int rejected = 0;
  while (static_cast<Index>(out.size()) < count) {
    if (rejected > 1000)
      throw std::runtime_error("sample_coprime_ball: too many rejected samples");
    LtvOperator<Scalar> dm =
        random_causal<Scalar>(f.input_space(), f.input_space(), rng);
    LtvOperator<Scalar> dn =
        random_causal<Scalar>(f.input_space(), f.output_space(), rng);
    const Scalar norm = operator_norm(stack_col(dm, dn));
    if (!(norm > Scalar(0))) continue;
    const Scalar target = radius * unit(rng);
    dm = scale(target / norm, dm);
    dn = scale(target / norm, dn);

    const LtvOperator<Scalar> m1 = f.M + dm;
    bool ok = true;
    for (Index k = 0; k < m1.horizon() && ok; ++k) {
      Eigen::JacobiSVD<MatrixX<Scalar>> svd(MatrixX<Scalar>(m1.block(k, k)));
      if (svd.singularValues()(svd.singularValues().size() - 1) < Scalar(1e-8))
        ok = false;
    }
    if (!ok) {
      ++rejected;
      continue;
    }
    LtvOperator<Scalar> p1 = compose(f.N + dn, solve_causal_inverse(m1));
    const Scalar alpha = tv_gap(plant, p1).alpha;
    out.emplace_back(std::move(p1), alpha);
  }
  return out;
}

}  // namespace ltvgap

#endif  // LTVGAP_GAP_HPP
