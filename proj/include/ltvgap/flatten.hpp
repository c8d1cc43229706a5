#ifndef LTVGAP_FLATTEN_HPP
#define LTVGAP_FLATTEN_HPP

#include <stdexcept>
#include <utility>
#include <vector>

#include "ltvgap/operator.hpp"

namespace ltvgap {

// Which scalar coordinates of an operator span the subspace.
enum class CoordPattern { Causal, StrictlyAnticausal, Full };

// An orthonormal coordinate basis for a subspace of Hilbert-Schmidt
// operators between two signal spaces: the elementary matrices at the
// listed (row, col) positions.  Coordinates are ordered column-major.
template <typename Scalar = double>
class OperatorBasis {
 public:
  OperatorBasis() = default;

  OperatorBasis(SignalSpace op_domain, SignalSpace op_codomain, CoordPattern pattern)
      : op_domain_(std::move(op_domain)), op_codomain_(std::move(op_codomain)),
        pattern_(pattern) {
    for (Index c = 0; c < op_domain_.total(); ++c) {
      const Index cs = op_domain_.step_of(c);
      col_start_.push_back(static_cast<Index>(coords_.size()));
      for (Index r = 0; r < op_codomain_.total(); ++r) {
        const Index rs = op_codomain_.step_of(r);
        const bool keep = pattern == CoordPattern::Full ||
                          (pattern == CoordPattern::Causal ? rs >= cs : rs < cs);
        if (keep) coords_.emplace_back(r, c);
      }
    }
    col_start_.push_back(static_cast<Index>(coords_.size()));
  }

  const SignalSpace& op_domain() const { return op_domain_; }
  const SignalSpace& op_codomain() const { return op_codomain_; }
  CoordPattern pattern() const { return pattern_; }
  Index dim() const { return static_cast<Index>(coords_.size()); }
  const std::pair<Index, Index>& coord(Index k) const {
    return coords_[static_cast<std::size_t>(k)];
  }
  const std::vector<std::pair<Index, Index>>& coords() const { return coords_; }
  // Coordinate range [first, second) whose operator column is c.
  std::pair<Index, Index> column_range(Index c) const {
    return {col_start_[static_cast<std::size_t>(c)],
            col_start_[static_cast<std::size_t>(c) + 1]};
  }

  VectorX<Scalar> vectorize(const LtvOperator<Scalar>& x) const {
    detail::require(x.domain() == op_domain_ && x.codomain() == op_codomain_,
                    "OperatorBasis::vectorize: spaces differ");
    VectorX<Scalar> v(dim());
    for (Index k = 0; k < dim(); ++k) v(k) = x.matrix()(coords_[k].first, coords_[k].second);
    return v;
  }

  LtvOperator<Scalar> devectorize(const VectorX<Scalar>& v) const {
    detail::require(v.size() == dim(), "OperatorBasis::devectorize: length mismatch");
    LtvOperator<Scalar> x = LtvOperator<Scalar>::zero(op_domain_, op_codomain_);
    for (Index k = 0; k < dim(); ++k)
      x.matrix()(coords_[k].first, coords_[k].second) = v(k);
    return x;
  }

  friend bool operator==(const OperatorBasis& a, const OperatorBasis& b) {
    return a.op_domain_ == b.op_domain_ && a.op_codomain_ == b.op_codomain_ &&
           a.pattern_ == b.pattern_;
  }

 private:
  SignalSpace op_domain_;
  SignalSpace op_codomain_;
  CoordPattern pattern_ = CoordPattern::Full;
  std::vector<std::pair<Index, Index>> coords_;
  std::vector<Index> col_start_;
};

// Dense matrix of a linear map between two operator subspaces, expressed
// in their elementary coordinate bases.
template <typename Scalar = double>
struct FlattenedMap {
  OperatorBasis<Scalar> domain_basis;
  OperatorBasis<Scalar> codomain_basis;
  MatrixX<Scalar> matrix;

  Scalar norm() const { return detail::spectral_norm(matrix); }

  VectorX<Scalar> apply(const VectorX<Scalar>& v) const { return matrix * v; }

  LtvOperator<Scalar> apply(const LtvOperator<Scalar>& x) const {
    return codomain_basis.devectorize(matrix * domain_basis.vectorize(x));
  }
};

// Flatten A |-> pattern-part of (symbol * A), where A runs over the domain
// basis.  The image of an elementary matrix e_p e_q^T is the rank-one
// operator symbol.col(p) e_q^T, so the flattened matrix has one nonzero
// column stripe per operator column.
template <typename Scalar>
FlattenedMap<Scalar> flatten_left_multiplication(const LtvOperator<Scalar>& symbol,
                                                 const OperatorBasis<Scalar>& domain_basis,
                                                 CoordPattern image_pattern) {
  detail::require(domain_basis.op_codomain() == symbol.domain(),
                  "flatten_left_multiplication: symbol does not act on the basis");
  OperatorBasis<Scalar> codomain_basis(domain_basis.op_domain(), symbol.codomain(),
                                       image_pattern);
  MatrixX<Scalar> big = MatrixX<Scalar>::Zero(codomain_basis.dim(), domain_basis.dim());
  for (Index jd = 0; jd < domain_basis.dim(); ++jd) {
    const auto [p, q] = domain_basis.coord(jd);
    const auto [lo, hi] = codomain_basis.column_range(q);
    for (Index ic = lo; ic < hi; ++ic)
      big(ic, jd) = symbol.matrix()(codomain_basis.coord(ic).first, p);
  }
  return {domain_basis, std::move(codomain_basis), std::move(big)};
}

}  // namespace ltvgap

#endif  // LTVGAP_FLATTEN_HPP
