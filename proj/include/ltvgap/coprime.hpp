#ifndef LTVGAP_COPRIME_HPP
#define LTVGAP_COPRIME_HPP

#include <algorithm>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>

#include "ltvgap/operator.hpp"

namespace ltvgap {

namespace detail {

// Unique factorization W = A^T A with A block lower triangular and
// symmetric positive definite diagonal blocks; W must be positive
// definite.  The scalar-level factor comes from a Cholesky factorization
// in reversed coordinate order, then a block-diagonal orthogonal
// correction makes each diagonal block symmetric.
template <typename Scalar>
MatrixX<Scalar> spd_factor_gram(const MatrixX<Scalar>& w, const SignalSpace& space) {
  const MatrixX<Scalar> wr = w.reverse();
  Eigen::LLT<MatrixX<Scalar>> llt(wr);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("spd_factor_gram: matrix is not positive definite");
  const MatrixX<Scalar> ltil = llt.matrixL();
  MatrixX<Scalar> a = ltil.transpose().reverse();
  for (Index k = 0; k < space.horizon(); ++k) {
    auto blk = a.block(space.offset(k), space.offset(k), space.dim(k), space.dim(k));
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(
        blk, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixX<Scalar> theta = svd.matrixV() * svd.matrixU().transpose();
    a.middleRows(space.offset(k), space.dim(k)) =
        (theta * a.middleRows(space.offset(k), space.dim(k))).eval();
  }
  return a;
}

// Unique factorization W = A A^T with the same structure.
template <typename Scalar>
MatrixX<Scalar> spd_factor_cogram(const MatrixX<Scalar>& w, const SignalSpace& space) {
  Eigen::LLT<MatrixX<Scalar>> llt(w);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("spd_factor_cogram: matrix is not positive definite");
  MatrixX<Scalar> a = llt.matrixL();
  for (Index k = 0; k < space.horizon(); ++k) {
    auto blk = a.block(space.offset(k), space.offset(k), space.dim(k), space.dim(k));
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(
        blk, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixX<Scalar> theta = svd.matrixV() * svd.matrixU().transpose();
    a.middleCols(space.offset(k), space.dim(k)) =
        (a.middleCols(space.offset(k), space.dim(k)) * theta).eval();
  }
  return a;
}

}  // namespace detail

template <typename Scalar = double>
struct RightFactors {
  LtvOperator<Scalar> M, N;
};

template <typename Scalar = double>
struct LeftFactors {
  LtvOperator<Scalar> Mhat, Nhat;
};

template <typename Scalar = double>
struct BezoutCompletion {
  LtvOperator<Scalar> U, V, Uhat, Vhat;
};

template <typename Scalar = double>
struct CoprimeResiduals {
  Scalar rcf_isometry = 0;
  Scalar lcf_coisometry = 0;
  Scalar doubly_coprime_left = 0;
  Scalar doubly_coprime_right = 0;
  Scalar quotient_right = 0;
  Scalar quotient_left = 0;

  Scalar max() const {
    return std::max({rcf_isometry, lcf_coisometry, doubly_coprime_left,
                     doubly_coprime_right, quotient_right, quotient_left});
  }
  bool accepted(Scalar tol = Scalar(1e-8)) const { return max() < tol; }
};

// Normalized doubly coprime factorization of a causal plant:
// P = N M^{-1} = Mhat^{-1} Nhat with [M; N] an isometry and
// (Mhat, Nhat) a co-isometry, completed so that
//   [[Vhat, -Uhat], [-Nhat, Mhat]] and [[M, U], [N, V]]
// are inverse to each other.  All eight operators are causal.
template <typename Scalar = double>
struct CoprimeFactorization {
  LtvOperator<Scalar> M, N, Mhat, Nhat, U, V, Uhat, Vhat;
  CoprimeResiduals<Scalar> residuals;

  const SignalSpace& input_space() const { return M.domain(); }
  const SignalSpace& output_space() const { return Mhat.domain(); }

  // Pair (X, Y) with X N + Y M = I.
  std::pair<LtvOperator<Scalar>, LtvOperator<Scalar>> bezout_pair() const {
    return {scale(Scalar(-1), Uhat), Vhat};
  }
};

// Normalized right coprime factors: factor I + P^T P = A^T A with A causal
// and causally invertible, then M = A^{-1}, N = P M.
template <typename Scalar>
RightFactors<Scalar> normalized_rcf(const LtvOperator<Scalar>& plant) {
  const SignalSpace& u = plant.domain();
  MatrixX<Scalar> w = plant.matrix().transpose() * plant.matrix();
  w.diagonal().array() += Scalar(1);
  const MatrixX<Scalar> a = detail::spd_factor_gram(w, u);
  LtvOperator<Scalar> m = solve_causal_inverse(LtvOperator<Scalar>(u, u, a));
  LtvOperator<Scalar> n = compose(plant, m);
  return {std::move(m), std::move(n)};
}

// Normalized left coprime factors: factor I + P P^T = A A^T, then
// Mhat = A^{-1}, Nhat = Mhat P.
template <typename Scalar>
LeftFactors<Scalar> normalized_lcf(const LtvOperator<Scalar>& plant) {
  const SignalSpace& y = plant.codomain();
  MatrixX<Scalar> w = plant.matrix() * plant.matrix().transpose();
  w.diagonal().array() += Scalar(1);
  const MatrixX<Scalar> a = detail::spd_factor_cogram(w, y);
  LtvOperator<Scalar> mhat = solve_causal_inverse(LtvOperator<Scalar>(y, y, a));
  LtvOperator<Scalar> nhat = compose(mhat, plant);
  return {std::move(mhat), std::move(nhat)};
}

// The zero-controller completion U = Uhat = 0, V = Mhat^{-1}, Vhat = M^{-1}.
// Every finite-horizon causal plant is stabilized by the zero controller,
// and M, Mhat are causally invertible by construction.
template <typename Scalar>
BezoutCompletion<Scalar> bezout_completion(const LtvOperator<Scalar>& m,
                                           const LtvOperator<Scalar>& n,
                                           const LtvOperator<Scalar>& mhat,
                                           const LtvOperator<Scalar>& nhat) {
  (void)nhat;
  const SignalSpace& u = m.domain();
  const SignalSpace& y = mhat.domain();
  return {LtvOperator<Scalar>::zero(y, u), solve_causal_inverse(mhat),
          LtvOperator<Scalar>::zero(y, u), solve_causal_inverse(m)};
}

// The 2x2 operator matrices of the doubly coprime identity.
template <typename Scalar>
LtvOperator<Scalar> right_factor_matrix(const CoprimeFactorization<Scalar>& f) {
  return stack_row(stack_col(f.M, f.N), stack_col(f.U, f.V));
}
template <typename Scalar>
LtvOperator<Scalar> left_factor_matrix(const CoprimeFactorization<Scalar>& f) {
  return stack_row(stack_col(f.Vhat, scale(Scalar(-1), f.Nhat)),
                   stack_col(scale(Scalar(-1), f.Uhat), f.Mhat));
}

template <typename Scalar>
CoprimeResiduals<Scalar> verify_doubly_coprime(const CoprimeFactorization<Scalar>& f,
                                               const LtvOperator<Scalar>& plant) {
  CoprimeResiduals<Scalar> r;
  const Index du = f.input_space().total();
  const Index dy = f.output_space().total();
  r.rcf_isometry = detail::spectral_norm(
      (f.M.matrix().transpose() * f.M.matrix() +
       f.N.matrix().transpose() * f.N.matrix() -
       MatrixX<Scalar>::Identity(du, du)).eval());
  r.lcf_coisometry = detail::spectral_norm(
      (f.Mhat.matrix() * f.Mhat.matrix().transpose() +
       f.Nhat.matrix() * f.Nhat.matrix().transpose() -
       MatrixX<Scalar>::Identity(dy, dy)).eval());
  const LtvOperator<Scalar> lf = left_factor_matrix(f);
  const LtvOperator<Scalar> rf = right_factor_matrix(f);
  const MatrixX<Scalar> eye = MatrixX<Scalar>::Identity(du + dy, du + dy);
  r.doubly_coprime_left = detail::spectral_norm((lf.matrix() * rf.matrix() - eye).eval());
  r.doubly_coprime_right = detail::spectral_norm((rf.matrix() * lf.matrix() - eye).eval());
  r.quotient_right =
      operator_norm(compose(f.N, solve_causal_inverse(f.M)) - plant);
  r.quotient_left =
      operator_norm(compose(solve_causal_inverse(f.Mhat), f.Nhat) - plant);
  return r;
}

// Full pipeline: normalized right and left factors, zero-controller
// completion, residual report.
template <typename Scalar>
CoprimeFactorization<Scalar> factorize(const LtvOperator<Scalar>& plant) {
  auto [m, n] = normalized_rcf(plant);
  auto [mhat, nhat] = normalized_lcf(plant);
  auto bez = bezout_completion(m, n, mhat, nhat);
  CoprimeFactorization<Scalar> f{std::move(m),        std::move(n),
                                 std::move(mhat),     std::move(nhat),
                                 std::move(bez.U),    std::move(bez.V),
                                 std::move(bez.Uhat), std::move(bez.Vhat),
                                 {}};
  f.residuals = verify_doubly_coprime(f, plant);
  return f;
}

// Re-parameterized completion U + MQ, V + NQ, Uhat + Q Mhat, Vhat + Q Nhat
// for a causal Q; preserves the doubly coprime identity.
template <typename Scalar>
CoprimeFactorization<Scalar> shift_completion(const CoprimeFactorization<Scalar>& f,
                                              const LtvOperator<Scalar>& q) {
  CoprimeFactorization<Scalar> g = f;
  g.U = f.U + compose(f.M, q);
  g.V = f.V + compose(f.N, q);
  g.Uhat = f.Uhat + compose(q, f.Mhat);
  g.Vhat = f.Vhat + compose(q, f.Nhat);
  return g;
}

}  // namespace ltvgap

#endif  // LTVGAP_COPRIME_HPP
