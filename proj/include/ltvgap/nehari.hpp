#ifndef LTVGAP_NEHARI_HPP
#define LTVGAP_NEHARI_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "ltvgap/flatten.hpp"
#include "ltvgap/operator.hpp"

namespace ltvgap {

// Hankel operator with symbol R acting on a causal Hilbert-Schmidt test
// operator A: the strictly anticausal part of R * A.
template <typename Scalar>
LtvOperator<Scalar> hankel_apply(const LtvOperator<Scalar>& symbol,
                                 const LtvOperator<Scalar>& a,
                                 Scalar tol = Scalar(1e-10)) {
  if (!is_causal(a, tol))
    throw std::invalid_argument("hankel_apply: test operator must be causal");
  return anticausal_part(compose(symbol, a));
}

// Explicit matrix of A |-> (I - P)(symbol * A) from causal coordinates to
// strictly anticausal coordinates.  Its largest singular value is the
// Hankel norm of the symbol.
template <typename Scalar>
FlattenedMap<Scalar> flatten_hankel(const LtvOperator<Scalar>& symbol) {
  OperatorBasis<Scalar> domain(symbol.domain(), symbol.domain(), CoordPattern::Causal);
  return flatten_left_multiplication(symbol, domain, CoordPattern::StrictlyAnticausal);
}

// Distance from the symbol to the causal operators, by the corner sweep
// sup_n || P_n R (I - P_n) ||.  Agrees with the flattened Hankel norm.
template <typename Scalar>
Scalar distance_to_causal(const LtvOperator<Scalar>& symbol) {
  return max_corner_norm(symbol);
}

namespace detail {

// Pseudo-inverse of the symmetric matrix (gamma^2 I - G) with eigenvalues
// below a relative threshold treated as zero.
template <typename Scalar>
MatrixX<Scalar> defect_pinv(const MatrixX<Scalar>& gram, Scalar gamma) {
  const Index n = gram.rows();
  MatrixX<Scalar> shifted = Scalar(-1) * gram;
  shifted.diagonal().array() += gamma * gamma;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(
      (shifted + shifted.transpose()) / Scalar(2));
  const Scalar cut = gamma * gamma * Scalar(1e-12);
  VectorX<Scalar> inv = es.eigenvalues();
  for (Index i = 0; i < n; ++i) inv(i) = es.eigenvalues()(i) > cut ? Scalar(1) / es.eigenvalues()(i) : Scalar(0);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// Optimal causal correction: a causal Q with || R + Q || equal to the
// distance from R to the causal operators.  Completion proceeds column by
// column from the right; each step fills the on-and-below-diagonal part of
// one block column with the central norm-preserving choice
//   x = -D (gamma^2 I - B^T B)^+ B^T b,
// where b is the known top of the current column, B the known rows above
// the completed columns, and D the completed rows to the right.
template <typename Scalar>
LtvOperator<Scalar> nehari_extension(const LtvOperator<Scalar>& symbol) {
  const Index T = symbol.horizon();
  const Scalar gamma = distance_to_causal(symbol);
  const auto& dom = symbol.domain();
  const auto& cod = symbol.codomain();

  MatrixX<Scalar> g = MatrixX<Scalar>::Zero(cod.total(), dom.total());
  for (Index i = 0; i < T; ++i)
    for (Index j = i + 1; j < T; ++j)
      g.block(cod.offset(i), dom.offset(j), cod.dim(i), dom.dim(j)) =
          symbol.matrix().block(cod.offset(i), dom.offset(j), cod.dim(i), dom.dim(j));

  for (Index j = T - 1; j >= 0; --j) {
    const Index rsplit = cod.offset(j);                  // rows above the diagonal block
    const Index c0 = dom.offset(j), cw = dom.dim(j);     // current column stripe
    const Index cdone = dom.offset(j + 1);               // first completed column
    const Index rbot = cod.total() - rsplit;
    const Index cright = dom.total() - cdone;

    MatrixX<Scalar> x = MatrixX<Scalar>::Zero(rbot, cw);
    if (cright > 0 && rsplit > 0) {
      const auto b = g.block(0, c0, rsplit, cw);
      const auto upper = g.block(0, cdone, rsplit, cright);
      const auto done = g.block(rsplit, cdone, rbot, cright);
      const MatrixX<Scalar> pinv =
          detail::defect_pinv<Scalar>(upper.transpose() * upper, gamma);
      x.noalias() = -done * (pinv * (upper.transpose() * b));
    }
    g.block(rsplit, c0, rbot, cw) = x;
  }

  return LtvOperator<Scalar>(dom, cod, g - symbol.matrix());
}

}  // namespace ltvgap

#endif  // LTVGAP_NEHARI_HPP
