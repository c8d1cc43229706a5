#ifndef LTVGAP_SYNTHESIS_HPP
#define LTVGAP_SYNTHESIS_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ltvgap/margin.hpp"
#include "ltvgap/nehari.hpp"

namespace ltvgap {

// Residuals of the structural identities the proof operators satisfy.
template <typename Scalar = double>
struct ProofOperatorChecks {
  Scalar projector_idempotent = 0;
  Scalar projector_self_adjoint = 0;
  Scalar gamma_xi_identity = 0;  // Gamma Xi = I on the causal test space
  Scalar xi_gamma_identity = 0;  // Xi Gamma = I on S
  Scalar norm_identity = 0;      // tau(Gamma)^2 + ||Upsilon||^2 - 1
  Scalar xi_norm = 0;
  Scalar upsilon_norm = 0;
  Scalar tau_gamma = 0;  // minimal gain of Gamma on S
};

// Flattened forms of the three operators behind the margin formulas:
//   Xi      = Pi_1 [U; V]            on causal test operators,
//   Gamma   = (-Nhat, Mhat)          restricted to S,
//   Upsilon = (I - P)[-Nhat^*; Mhat^*],
// where S is the orthogonal complement of [M; N] A_2 inside the causal
// pairs and Pi_1 = I - [M; N] P (M^*, N^*) projects onto it.
template <typename Scalar = double>
struct ProofOperators {
  CoprimeFactorization<Scalar> factors;
  FlattenedMap<Scalar> xi;       // causal(Y,Y) -> causal pairs (ambient)
  FlattenedMap<Scalar> gamma;    // causal pairs (ambient) -> causal(Y,Y)
  FlattenedMap<Scalar> upsilon;  // causal(Y,Y) -> anticausal pairs
  MatrixX<Scalar> pi1;           // projector onto S in ambient coordinates
  MatrixX<Scalar> s_basis;       // orthonormal basis of S, ambient coordinates
  ProofOperatorChecks<Scalar> checks;

  MatrixX<Scalar> gamma_on_s() const { return gamma.matrix * s_basis; }
};

template <typename Scalar>
ProofOperators<Scalar> build_proof_operators(const CoprimeFactorization<Scalar>& f) {
  ProofOperators<Scalar> po;
  po.factors = f;
  po.xi = flatten_xi(f);
  po.upsilon = flatten_hankel(symbol_upsilon(f));

  const SignalSpace& y = f.output_space();
  const LtvOperator<Scalar> kmn = stack_col(f.M, f.N);
  const SignalSpace& u = f.input_space();
  const OperatorBasis<Scalar>& amb = po.xi.codomain_basis;

  po.pi1 = MatrixX<Scalar>::Zero(amb.dim(), amb.dim());
  for (Index jd = 0; jd < amb.dim(); ++jd) {
    const auto [p, q] = amb.coord(jd);
    const Index qstep = y.step_of(q);
    VectorX<Scalar> z = kmn.matrix().row(p).transpose();
    for (Index row = 0; row < u.total(); ++row)
      if (u.step_of(row) < qstep) z(row) = Scalar(0);
    VectorX<Scalar> img = -(kmn.matrix() * z);
    img(p) += Scalar(1);
    const auto [lo, hi] = amb.column_range(q);
    for (Index ic = lo; ic < hi; ++ic) po.pi1(ic, jd) = img(amb.coord(ic).first);
  }

  po.checks.projector_idempotent = detail::spectral_norm((po.pi1 * po.pi1 - po.pi1).eval());
  po.checks.projector_self_adjoint =
      detail::spectral_norm((po.pi1 - po.pi1.transpose()).eval());
  if (po.checks.projector_idempotent > Scalar(1e-10) ||
      po.checks.projector_self_adjoint > Scalar(1e-10))
    throw std::runtime_error("build_proof_operators: Pi_1 is not an orthogonal projection");

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(
      (po.pi1 + po.pi1.transpose()) / Scalar(2));
  Index s_dim = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > Scalar(0.5)) ++s_dim;
  po.s_basis = es.eigenvectors().rightCols(s_dim);
  if (s_dim != po.xi.domain_basis.dim())
    throw std::runtime_error("build_proof_operators: unexpected dimension of S");

  const LtvOperator<Scalar> row_nm = stack_row(scale(Scalar(-1), f.Nhat), f.Mhat);
  po.gamma = flatten_left_multiplication(row_nm, amb, CoordPattern::Causal);

  const Index na = po.xi.domain_basis.dim();
  po.checks.gamma_xi_identity = detail::spectral_norm(
      (po.gamma.matrix * po.xi.matrix - MatrixX<Scalar>::Identity(na, na)).eval());
  po.checks.xi_gamma_identity = detail::spectral_norm(
      (po.s_basis.transpose() * po.xi.matrix * po.gamma.matrix * po.s_basis -
       MatrixX<Scalar>::Identity(s_dim, s_dim)).eval());

  Eigen::BDCSVD<MatrixX<Scalar>> gsvd(po.gamma_on_s());
  po.checks.tau_gamma = gsvd.singularValues()(gsvd.singularValues().size() - 1);
  po.checks.xi_norm = po.xi.norm();
  po.checks.upsilon_norm = po.upsilon.norm();
  po.checks.norm_identity =
      std::abs(po.checks.tau_gamma * po.checks.tau_gamma +
               po.checks.upsilon_norm * po.checks.upsilon_norm - Scalar(1));
  return po;
}

template <typename Scalar = double>
struct SchmidtResiduals {
  Scalar hankel_action = 0;          // Upsilon X - lambda Y*
  Scalar hankel_adjoint_action = 0;  // Upsilon^* Y* - lambda X
  Scalar gamma_action = 0;           // Gamma W - (1-lambda^2)^{1/2} X
  Scalar gamma_adjoint_action = 0;   // Gamma^* X - (1-lambda^2)^{1/2} W
  Scalar xi_action = 0;              // Xi X - (1-lambda^2)^{-1/2} W
  Scalar xi_adjoint_action = 0;      // Xi^* W - (1-lambda^2)^{-1/2} X

  Scalar max() const {
    return std::max({hankel_action, hankel_adjoint_action, gamma_action,
                     gamma_adjoint_action, xi_action, xi_adjoint_action});
  }
};

// One singular triple of Upsilon together with the associated vectors of
// Gamma and Xi and the residuals of all six coupled relations.
template <typename Scalar = double>
struct SchmidtData {
  Scalar lambda = 0;
  LtvOperator<Scalar> X;       // causal, unit Hilbert-Schmidt norm
  LtvOperator<Scalar> Y_star;  // strictly anticausal pair
  LtvOperator<Scalar> W;       // element of S, unit Hilbert-Schmidt norm
  SchmidtResiduals<Scalar> residuals;
};

template <typename Scalar>
std::vector<SchmidtData<Scalar>> schmidt_pairs(const ProofOperators<Scalar>& po,
                                               Index count) {
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(
      po.upsilon.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  std::vector<SchmidtData<Scalar>> out;
  const Index avail = svd.singularValues().size();
  for (Index i = 0; i < std::min(count, avail); ++i) {
    const Scalar lambda = svd.singularValues()(i);
    if (lambda >= Scalar(1) - Scalar(1e-12))
      throw std::runtime_error("schmidt_pairs: singular value at or above 1");
    if (lambda <= Scalar(1e-12)) break;
    const Scalar mu = std::sqrt(Scalar(1) - lambda * lambda);

    const VectorX<Scalar> x = svd.matrixV().col(i);
    const VectorX<Scalar> y = svd.matrixU().col(i);
    const VectorX<Scalar> w = (po.gamma.matrix.transpose() * x) / mu;

    SchmidtData<Scalar> sd;
    sd.lambda = lambda;
    sd.residuals.hankel_action = (po.upsilon.matrix * x - lambda * y).norm();
    sd.residuals.hankel_adjoint_action =
        (po.upsilon.matrix.transpose() * y - lambda * x).norm();
    sd.residuals.gamma_action = (po.gamma.matrix * w - mu * x).norm();
    sd.residuals.gamma_adjoint_action = (po.gamma.matrix.transpose() * x - mu * w).norm();
    sd.residuals.xi_action = (po.xi.matrix * x - w / mu).norm();
    sd.residuals.xi_adjoint_action = (po.xi.matrix.transpose() * w - x / mu).norm();
    sd.X = po.upsilon.domain_basis.devectorize(x);
    sd.Y_star = po.upsilon.codomain_basis.devectorize(y);
    sd.W = po.xi.codomain_basis.devectorize(w);
    out.push_back(std::move(sd));
  }
  return out;
}

template <typename Scalar = double>
struct SchmidtCriterionReport {
  Scalar causal_part_residual = 0;  // Z must be strictly anticausal
  Scalar s_membership_residual = 0; // W must lie in S
  Scalar x_residual = 0;            // reconstructed X vs stored, up to sign
  Scalar y_residual = 0;            // reconstructed Y* vs stored, up to sign
};

// Singular-value criterion for Upsilon: with
//   Z := [-Nhat^*; Mhat^*](-Nhat, Mhat) W - (1 - lambda^2) W,
// lambda is a singular value exactly when Z is strictly anticausal and
// W lies in S; the Schmidt vectors are then recovered as
//   X = (1-lambda^2)^{-1/2} (-Nhat, Mhat) W,  Y* = Z / (lambda (1-lambda^2)^{1/2}).
template <typename Scalar>
SchmidtCriterionReport<Scalar> schmidt_criterion_check(const ProofOperators<Scalar>& po,
                                                       const SchmidtData<Scalar>& sd) {
  const auto& f = po.factors;
  const Scalar lambda = sd.lambda;
  const Scalar mu2 = Scalar(1) - lambda * lambda;
  const LtvOperator<Scalar> row_nm = stack_row(scale(Scalar(-1), f.Nhat), f.Mhat);
  const LtvOperator<Scalar> col_hat = symbol_upsilon(f);

  const LtvOperator<Scalar> gw = compose(row_nm, sd.W);
  const LtvOperator<Scalar> z = compose(col_hat, gw) - scale(mu2, sd.W);

  SchmidtCriterionReport<Scalar> rep;
  rep.causal_part_residual = hs_norm(nest_project(z));
  const VectorX<Scalar> w = po.xi.codomain_basis.vectorize(sd.W);
  rep.s_membership_residual = (po.pi1 * w - w).norm();

  const LtvOperator<Scalar> x_rec = scale(Scalar(1) / std::sqrt(mu2), gw);
  rep.x_residual = std::min(hs_norm(x_rec - sd.X), hs_norm(x_rec + sd.X));
  const LtvOperator<Scalar> y_rec = scale(Scalar(1) / (lambda * std::sqrt(mu2)), z);
  rep.y_residual = std::min(hs_norm(y_rec - sd.Y_star), hs_norm(y_rec + sd.Y_star));
  return rep;
}

// Optimal causal parameter: Q_o = nehari_extension(R) attains
//   || [U + M Q_o; V + N Q_o] || = (1 + ||H_R||^2)^{1/2} = 1 / r_o.
// Verified against the achieved stacked norm and against the alignment
// identity Q_o X_o = -(M^T U + N^T V) X_o + ||Xi|| (M^T, N^T) W_o on the
// top singular vector X_o of Xi, with W_o = Xi X_o / ||Xi||.
template <typename Scalar>
LtvOperator<Scalar> optimal_q(const CoprimeFactorization<Scalar>& f) {
  const LtvOperator<Scalar> r = symbol_R(f);
  const Scalar dist = distance_to_causal(r);
  const LtvOperator<Scalar> q = nehari_extension(r);

  const Scalar target = std::sqrt(Scalar(1) + dist * dist);
  const Scalar achieved = operator_norm(stack_col(f.U + f.M * q, f.V + f.N * q));
  if (std::abs(achieved - target) > Scalar(1e-8))
    throw std::runtime_error("optimal_q: achieved norm misses the optimum");

  const FlattenedMap<Scalar> xi = flatten_xi(f);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(xi.matrix,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Scalar xi_norm = svd.singularValues()(0);
  const VectorX<Scalar> xo = svd.matrixV().col(0);
  const LtvOperator<Scalar> x_op = xi.domain_basis.devectorize(xo);
  const LtvOperator<Scalar> w_op =
      xi.codomain_basis.devectorize((xi.matrix * xo) / xi_norm);
  const LtvOperator<Scalar> kmn = stack_col(f.M, f.N);
  const LtvOperator<Scalar> rhs =
      scale(Scalar(-1), compose(r, x_op)) +
      scale(xi_norm, compose(adjoint(kmn), w_op));
  const Scalar align = hs_norm(compose(q, x_op) - rhs);
  if (align > Scalar(1e-7))
    throw std::runtime_error("optimal_q: alignment identity residual " +
                             std::to_string(static_cast<double>(align)));
  return q;
}

template <typename Scalar = double>
struct ControllerSynthesis {
  LtvOperator<Scalar> C;
  // Norms of the four closed-loop maps [[I, -C], [-P, I]]^{-1}, ordered
  // (w1->e1, w2->e1, w1->e2, w2->e2).
  std::array<Scalar, 4> closed_loop_norms{};
  Scalar achieved_margin = 0;      // 1 / || [U + M Q; V + N Q] ||
  Scalar achieved_margin_row = 0;  // 1 / || [Vhat + Q Nhat, -(Uhat + Q Mhat)] ||
};

// C = (U + M Q)(V + N Q)^{-1} with a well-posedness certificate for the
// feedback loop of C with the factorized plant.
template <typename Scalar>
ControllerSynthesis<Scalar> robust_controller(const CoprimeFactorization<Scalar>& f,
                                              const LtvOperator<Scalar>& q) {
  const LtvOperator<Scalar> numer = f.U + f.M * q;
  const LtvOperator<Scalar> denom = f.V + f.N * q;
  for (Index k = 0; k < denom.horizon(); ++k) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(MatrixX<Scalar>(denom.block(k, k)));
    const Scalar smin = svd.singularValues()(svd.singularValues().size() - 1);
    const Scalar smax = svd.singularValues()(0);
    if (!(smin > Scalar(0)) || smax / smin > Scalar(1e10))
      throw std::runtime_error(
          "robust_controller: V + N Q has a near-singular diagonal block at step " +
          std::to_string(k));
  }

  ControllerSynthesis<Scalar> out;
  out.C = compose(numer, solve_causal_inverse(denom));

  const LtvOperator<Scalar> plant = compose(f.N, solve_causal_inverse(f.M));
  const SignalSpace& u = f.input_space();
  const SignalSpace& y = f.output_space();
  const LtvOperator<Scalar> loop =
      stack_row(stack_col(LtvOperator<Scalar>::identity(u), scale(Scalar(-1), plant)),
                stack_col(scale(Scalar(-1), out.C), LtvOperator<Scalar>::identity(y)));
  const LtvOperator<Scalar> h = solve_causal_inverse(loop);
  const auto [hu, hy] = split_row(h, u, y);
  const auto [h11, h21] = split_col(hu, u, y);
  const auto [h12, h22] = split_col(hy, u, y);
  out.closed_loop_norms = {operator_norm(h11), operator_norm(h12),
                           operator_norm(h21), operator_norm(h22)};

  out.achieved_margin = Scalar(1) / operator_norm(stack_col(numer, denom));
  out.achieved_margin_row =
      Scalar(1) / operator_norm(stack_row(f.Vhat + q * f.Nhat,
                                          scale(Scalar(-1), f.Uhat + q * f.Mhat)));
  return out;
}

}  // namespace ltvgap

#endif  // LTVGAP_SYNTHESIS_HPP
