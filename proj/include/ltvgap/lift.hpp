#ifndef LTVGAP_LIFT_HPP
#define LTVGAP_LIFT_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "ltvgap/operator.hpp"

namespace ltvgap {

// State-space data of a discrete-time system over a finite horizon:
//   x_{k+1} = A_k x_k + B_k u_k,   y_k = C_k x_k + D_k u_k.
// A_k maps the state at step k to the state at step k+1, so state
// dimensions may vary along the horizon.
template <typename Scalar = double>
struct StateSpaceData {
  std::vector<MatrixX<Scalar>> A, B, C, D;
};

// Lift a state-space description (with zero initial state) to the causal
// block lower triangular operator mapping input signals to output signals.
template <typename Scalar>
LtvOperator<Scalar> lift_state_space(const StateSpaceData<Scalar>& sys) {
  const std::size_t T = sys.A.size();
  if (T < 1) throw std::invalid_argument("lift_state_space: horizon must be >= 1");
  if (sys.B.size() != T || sys.C.size() != T || sys.D.size() != T)
    throw std::invalid_argument("lift_state_space: A, B, C, D lengths differ");

  std::vector<Index> in_dims(T), out_dims(T);
  for (std::size_t k = 0; k < T; ++k) {
    const Index n_k = sys.A[k].cols();
    if (sys.A[k].rows() != (k + 1 < T ? sys.A[k + 1].cols() : sys.A[k].rows()))
      throw std::invalid_argument(
          "lift_state_space: state dimension mismatch between A_" +
          std::to_string(k) + " and A_" + std::to_string(k + 1));
    if (sys.B[k].rows() != sys.A[k].rows() || sys.C[k].cols() != n_k ||
        sys.D[k].rows() != sys.C[k].rows() || sys.D[k].cols() != sys.B[k].cols())
      throw std::invalid_argument("lift_state_space: inconsistent shapes at step " +
                                  std::to_string(k));
    in_dims[k] = sys.D[k].cols();
    out_dims[k] = sys.D[k].rows();
  }

  LtvOperator<Scalar> out =
      LtvOperator<Scalar>::zero(SignalSpace(in_dims), SignalSpace(out_dims));
  for (Index j = 0; j < static_cast<Index>(T); ++j) {
    out.block(j, j) = sys.D[static_cast<std::size_t>(j)];
    // phi = A_{i-1} ... A_{j+1} B_j accumulated one step at a time.
    MatrixX<Scalar> phi = sys.B[static_cast<std::size_t>(j)];
    for (Index i = j + 1; i < static_cast<Index>(T); ++i) {
      out.block(i, j) = sys.C[static_cast<std::size_t>(i)] * phi;
      if (i + 1 < static_cast<Index>(T)) phi = sys.A[static_cast<std::size_t>(i)] * phi;
    }
  }
  return out;
}

// Block Toeplitz lifting of an FIR convolution y_k = sum_j h_j u_{k-j};
// each tap multiplies the d x d identity.
template <typename Scalar>
LtvOperator<Scalar> toeplitz_lift(const std::vector<Scalar>& taps, Index block_dim,
                                  Index horizon) {
  if (taps.empty()) throw std::invalid_argument("toeplitz_lift: need at least one tap");
  if (block_dim < 1) throw std::invalid_argument("toeplitz_lift: block dim must be >= 1");
  const SignalSpace space = SignalSpace::uniform(horizon, block_dim);
  LtvOperator<Scalar> out = LtvOperator<Scalar>::zero(space, space);
  for (Index i = 0; i < horizon; ++i)
    for (Index j = 0; j <= i; ++j) {
      const std::size_t lag = static_cast<std::size_t>(i - j);
      if (lag < taps.size())
        out.block(i, j) = taps[lag] * MatrixX<Scalar>::Identity(block_dim, block_dim);
    }
  return out;
}

// The one-step delay on a uniform space; toeplitz_lift({0, 1}, ...) in
// closed form.
template <typename Scalar = double>
LtvOperator<Scalar> shift_operator(Index horizon, Index block_dim = 1) {
  return toeplitz_lift<Scalar>({Scalar(0), Scalar(1)}, block_dim, horizon);
}

}  // namespace ltvgap

#endif  // LTVGAP_LIFT_HPP
