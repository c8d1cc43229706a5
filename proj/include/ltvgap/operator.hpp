#ifndef LTVGAP_OPERATOR_HPP
#define LTVGAP_OPERATOR_HPP

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ltvgap/signal_space.hpp"

namespace ltvgap {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// A linear map between finite-horizon signal spaces, stored as a dense
// matrix partitioned into horizon x horizon blocks.  Causal maps are the
// block lower triangular ones; arbitrary (non-causal) maps are allowed.
template <typename Scalar = double>
class LtvOperator {
 public:
  LtvOperator() = default;

  LtvOperator(SignalSpace domain, SignalSpace codomain, MatrixX<Scalar> entries)
      : domain_(std::move(domain)), codomain_(std::move(codomain)),
        mat_(std::move(entries)) {
    if (domain_.horizon() != codomain_.horizon())
      throw std::invalid_argument("LtvOperator: domain and codomain horizons differ");
    if (mat_.rows() != codomain_.total() || mat_.cols() != domain_.total())
      throw std::invalid_argument(
          "LtvOperator: entry matrix is " + std::to_string(mat_.rows()) + "x" +
          std::to_string(mat_.cols()) + ", expected " +
          std::to_string(codomain_.total()) + "x" + std::to_string(domain_.total()));
  }

  static LtvOperator zero(const SignalSpace& domain, const SignalSpace& codomain) {
    return LtvOperator(domain, codomain,
                       MatrixX<Scalar>::Zero(codomain.total(), domain.total()));
  }

  static LtvOperator identity(const SignalSpace& space) {
    return LtvOperator(space, space,
                       MatrixX<Scalar>::Identity(space.total(), space.total()));
  }

  const SignalSpace& domain() const { return domain_; }
  const SignalSpace& codomain() const { return codomain_; }
  Index horizon() const { return domain_.horizon(); }
  const MatrixX<Scalar>& matrix() const { return mat_; }
  MatrixX<Scalar>& matrix() { return mat_; }

  auto block(Index i, Index j) {
    return mat_.block(codomain_.offset(i), domain_.offset(j),
                      codomain_.dim(i), domain_.dim(j));
  }
  auto block(Index i, Index j) const {
    return mat_.block(codomain_.offset(i), domain_.offset(j),
                      codomain_.dim(i), domain_.dim(j));
  }

 private:
  SignalSpace domain_;
  SignalSpace codomain_;
  MatrixX<Scalar> mat_;
};

using LtvOperatorXd = LtvOperator<double>;

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

// Largest singular value of a dense matrix; deterministic reduction.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0 || m.cols() == 0) return typename Derived::Scalar(0);
  Eigen::BDCSVD<MatrixX<typename Derived::Scalar>> svd(m.derived());
  return svd.singularValues()(0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Algebra

template <typename Scalar>
LtvOperator<Scalar> compose(const LtvOperator<Scalar>& a, const LtvOperator<Scalar>& b) {
  detail::require(a.domain() == b.codomain(), "compose: inner spaces differ");
  return LtvOperator<Scalar>(b.domain(), a.codomain(), a.matrix() * b.matrix());
}

template <typename Scalar>
LtvOperator<Scalar> adjoint(const LtvOperator<Scalar>& x) {
  return LtvOperator<Scalar>(x.codomain(), x.domain(), x.matrix().transpose());
}

template <typename Scalar>
LtvOperator<Scalar> add(const LtvOperator<Scalar>& a, const LtvOperator<Scalar>& b) {
  detail::require(a.domain() == b.domain() && a.codomain() == b.codomain(),
                  "add: spaces differ");
  return LtvOperator<Scalar>(a.domain(), a.codomain(), a.matrix() + b.matrix());
}

template <typename Scalar>
LtvOperator<Scalar> scale(Scalar c, const LtvOperator<Scalar>& x) {
  return LtvOperator<Scalar>(x.domain(), x.codomain(), c * x.matrix());
}

template <typename Scalar>
LtvOperator<Scalar> operator*(const LtvOperator<Scalar>& a, const LtvOperator<Scalar>& b) {
  return compose(a, b);
}
template <typename Scalar>
LtvOperator<Scalar> operator+(const LtvOperator<Scalar>& a, const LtvOperator<Scalar>& b) {
  return add(a, b);
}
template <typename Scalar>
LtvOperator<Scalar> operator-(const LtvOperator<Scalar>& a, const LtvOperator<Scalar>& b) {
  detail::require(a.domain() == b.domain() && a.codomain() == b.codomain(),
                  "subtract: spaces differ");
  return LtvOperator<Scalar>(a.domain(), a.codomain(), a.matrix() - b.matrix());
}
template <typename Scalar>
LtvOperator<Scalar> operator*(Scalar c, const LtvOperator<Scalar>& x) {
  return scale(c, x);
}
template <typename Scalar>
LtvOperator<Scalar> operator-(const LtvOperator<Scalar>& x) {
  return scale(Scalar(-1), x);
}

// Inverse of a causal operator with invertible diagonal blocks, by block
// forward substitution.  The result is causal by construction.
template <typename Scalar>
LtvOperator<Scalar> solve_causal_inverse(const LtvOperator<Scalar>& x) {
  detail::require(x.domain().dims() == x.codomain().dims(),
                  "solve_causal_inverse: operator must be square per step");
  const Index T = x.horizon();
  std::vector<MatrixX<Scalar>> diag_inv(static_cast<std::size_t>(T));
  for (Index k = 0; k < T; ++k) {
    const MatrixX<Scalar> d = x.block(k, k);
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(d);
    const Scalar smin = svd.singularValues()(svd.singularValues().size() - 1);
    const Scalar smax = svd.singularValues()(0);
    if (!(smin > Scalar(0)) || smax / smin > Scalar(1e14))
      throw std::runtime_error(
          "solve_causal_inverse: singular diagonal block at step " +
          std::to_string(k) + " (smallest singular value " +
          std::to_string(static_cast<double>(smin)) + ")");
    diag_inv[static_cast<std::size_t>(k)] =
        Eigen::PartialPivLU<MatrixX<Scalar>>(d).inverse();
  }
  LtvOperator<Scalar> inv = LtvOperator<Scalar>::zero(x.codomain(), x.domain());
  for (Index j = 0; j < T; ++j) {
    inv.block(j, j) = diag_inv[static_cast<std::size_t>(j)];
    for (Index i = j + 1; i < T; ++i) {
      MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(x.codomain().dim(i), x.domain().dim(j));
      for (Index k = j; k < i; ++k) acc.noalias() += x.block(i, k) * inv.block(k, j);
      inv.block(i, j) = -diag_inv[static_cast<std::size_t>(i)] * acc;
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Truncation and nest projection

enum class TruncationSide { Left, Right, Both };

// P_n X, X P_n or P_n X P_n; with complement = true, P_n is replaced by
// Q_n = I - P_n on each applied side.
template <typename Scalar>
LtvOperator<Scalar> truncate(const LtvOperator<Scalar>& x, NestIndex n,
                             TruncationSide side, bool complement = false) {
  n.validate(x.domain());
  MatrixX<Scalar> m = x.matrix();
  const bool left = side != TruncationSide::Right;
  const bool right = side != TruncationSide::Left;
  if (left) {
    const Index keep = n.kept(x.codomain());
    if (complement)
      m.topRows(keep).setZero();
    else
      m.bottomRows(m.rows() - keep).setZero();
  }
  if (right) {
    const Index keep = n.kept(x.domain());
    if (complement)
      m.leftCols(keep).setZero();
    else
      m.rightCols(m.cols() - keep).setZero();
  }
  return LtvOperator<Scalar>(x.domain(), x.codomain(), std::move(m));
}

// Block lower triangular part of X, diagonal blocks included.  Orthogonal
// projection of the Hilbert-Schmidt space onto the causal operators.
template <typename Scalar>
LtvOperator<Scalar> nest_project(const LtvOperator<Scalar>& x) {
  MatrixX<Scalar> m = x.matrix();
  const Index T = x.horizon();
  for (Index i = 0; i < T; ++i)
    for (Index j = i + 1; j < T; ++j)
      m.block(x.codomain().offset(i), x.domain().offset(j),
              x.codomain().dim(i), x.domain().dim(j)).setZero();
  return LtvOperator<Scalar>(x.domain(), x.codomain(), std::move(m));
}

// (I - P)X, the strictly block upper triangular part.
template <typename Scalar>
LtvOperator<Scalar> anticausal_part(const LtvOperator<Scalar>& x) {
  return x - nest_project(x);
}

// ---------------------------------------------------------------------------
// Norms

template <typename Scalar>
Scalar operator_norm(const LtvOperator<Scalar>& x) {
  return detail::spectral_norm(x.matrix());
}

template <typename Scalar>
Scalar hs_norm(const LtvOperator<Scalar>& x) {
  return x.matrix().norm();
}

template <typename Scalar>
Scalar hs_inner(const LtvOperator<Scalar>& a, const LtvOperator<Scalar>& b) {
  detail::require(a.domain() == b.domain() && a.codomain() == b.codomain(),
                  "hs_inner: spaces differ");
  return (a.matrix().array() * b.matrix().array()).sum();
}

// sup_n || P_n X (I - P_n) ||, the largest upper-corner norm.  Equals the
// operator-norm distance from X to the causal operators.
template <typename Scalar>
Scalar max_corner_norm(const LtvOperator<Scalar>& x) {
  const Index T = x.horizon();
  Scalar best(0);
  for (Index n = 0; n + 1 < T; ++n) {
    const Index rows = x.codomain().offset(n + 1);
    const Index col0 = x.domain().offset(n + 1);
    const Scalar v = detail::spectral_norm(
        x.matrix().block(0, col0, rows, x.domain().total() - col0));
    best = std::max(best, v);
  }
  return best;
}

template <typename Scalar>
bool is_causal(const LtvOperator<Scalar>& x, Scalar tol = Scalar(1e-10)) {
  return max_corner_norm(x) <= tol;
}

// ---------------------------------------------------------------------------
// Structure transforms

// Adjoint composed with time reversal on both spaces.  Maps causal
// operators to causal operators and is a contravariant involution:
// reverse_adjoint(A * B) = reverse_adjoint(B) * reverse_adjoint(A).
template <typename Scalar>
LtvOperator<Scalar> reverse_adjoint(const LtvOperator<Scalar>& x) {
  const Index r = x.matrix().rows(), c = x.matrix().cols();
  MatrixX<Scalar> m(c, r);
  for (Index a = 0; a < c; ++a)
    for (Index b = 0; b < r; ++b) m(a, b) = x.matrix()(r - 1 - b, c - 1 - a);
  return LtvOperator<Scalar>(x.codomain().reversed(), x.domain().reversed(),
                             std::move(m));
}

// Column [top; bottom] into the interleaved direct-sum codomain.
template <typename Scalar>
LtvOperator<Scalar> stack_col(const LtvOperator<Scalar>& top,
                              const LtvOperator<Scalar>& bottom) {
  detail::require(top.domain() == bottom.domain(), "stack_col: domains differ");
  const SignalSpace sum = direct_sum(top.codomain(), bottom.codomain());
  LtvOperator<Scalar> out = LtvOperator<Scalar>::zero(top.domain(), sum);
  for (Index i = 0; i < sum.horizon(); ++i) {
    const Index dt = top.codomain().dim(i);
    for (Index j = 0; j < sum.horizon(); ++j) {
      out.block(i, j).topRows(dt) = top.block(i, j);
      out.block(i, j).bottomRows(bottom.codomain().dim(i)) = bottom.block(i, j);
    }
  }
  return out;
}

// Row (left, right) over the interleaved direct-sum domain.
template <typename Scalar>
LtvOperator<Scalar> stack_row(const LtvOperator<Scalar>& left,
                              const LtvOperator<Scalar>& right) {
  detail::require(left.codomain() == right.codomain(), "stack_row: codomains differ");
  const SignalSpace sum = direct_sum(left.domain(), right.domain());
  LtvOperator<Scalar> out = LtvOperator<Scalar>::zero(sum, left.codomain());
  for (Index j = 0; j < sum.horizon(); ++j) {
    const Index dl = left.domain().dim(j);
    for (Index i = 0; i < sum.horizon(); ++i) {
      out.block(i, j).leftCols(dl) = left.block(i, j);
      out.block(i, j).rightCols(right.domain().dim(j)) = right.block(i, j);
    }
  }
  return out;
}

// Components of a map into direct_sum(top_space, bottom_space).
template <typename Scalar>
std::pair<LtvOperator<Scalar>, LtvOperator<Scalar>> split_col(
    const LtvOperator<Scalar>& stacked, const SignalSpace& top_space,
    const SignalSpace& bottom_space) {
  detail::require(stacked.codomain() == direct_sum(top_space, bottom_space),
                  "split_col: codomain is not the given direct sum");
  LtvOperator<Scalar> top = LtvOperator<Scalar>::zero(stacked.domain(), top_space);
  LtvOperator<Scalar> bottom = LtvOperator<Scalar>::zero(stacked.domain(), bottom_space);
  for (Index i = 0; i < stacked.horizon(); ++i)
    for (Index j = 0; j < stacked.horizon(); ++j) {
      top.block(i, j) = stacked.block(i, j).topRows(top_space.dim(i));
      bottom.block(i, j) = stacked.block(i, j).bottomRows(bottom_space.dim(i));
    }
  return {std::move(top), std::move(bottom)};
}

template <typename Scalar>
std::pair<LtvOperator<Scalar>, LtvOperator<Scalar>> split_row(
    const LtvOperator<Scalar>& stacked, const SignalSpace& left_space,
    const SignalSpace& right_space) {
  detail::require(stacked.domain() == direct_sum(left_space, right_space),
                  "split_row: domain is not the given direct sum");
  LtvOperator<Scalar> left = LtvOperator<Scalar>::zero(left_space, stacked.codomain());
  LtvOperator<Scalar> right = LtvOperator<Scalar>::zero(right_space, stacked.codomain());
  for (Index i = 0; i < stacked.horizon(); ++i)
    for (Index j = 0; j < stacked.horizon(); ++j) {
      left.block(i, j) = stacked.block(i, j).leftCols(left_space.dim(j));
      right.block(i, j) = stacked.block(i, j).rightCols(right_space.dim(j));
    }
  return {std::move(left), std::move(right)};
}

// ---------------------------------------------------------------------------
// Random operators (seeded; used by sampling routines and self tests)

template <typename Scalar, typename Rng>
LtvOperator<Scalar> random_operator(const SignalSpace& domain,
                                    const SignalSpace& codomain, Rng& rng,
                                    bool causal = false) {
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  LtvOperator<Scalar> out = LtvOperator<Scalar>::zero(domain, codomain);
  auto& m = out.matrix();
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) m(r, c) = gauss(rng);
  return causal ? nest_project(out) : out;
}

template <typename Scalar, typename Rng>
LtvOperator<Scalar> random_causal(const SignalSpace& domain,
                                  const SignalSpace& codomain, Rng& rng) {
  return random_operator<Scalar>(domain, codomain, rng, true);
}

}  // namespace ltvgap

#endif  // LTVGAP_OPERATOR_HPP
