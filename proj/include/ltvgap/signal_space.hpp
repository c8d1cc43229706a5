#ifndef LTVGAP_SIGNAL_SPACE_HPP
#define LTVGAP_SIGNAL_SPACE_HPP

#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ltvgap {

using Index = Eigen::Index;

// A finite-horizon signal space: T time steps with per-step block
// dimensions d_0, ..., d_{T-1}.  Operators between two such spaces are
// stored as dense matrices partitioned into T x T blocks.
class SignalSpace {
 public:
  SignalSpace() = default;

  explicit SignalSpace(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty())
      throw std::invalid_argument("SignalSpace: horizon must be at least 1");
    offsets_.resize(dims_.size() + 1);
    offsets_[0] = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (dims_[k] < 1)
        throw std::invalid_argument("SignalSpace: block dimension at step " +
                                    std::to_string(k) + " must be >= 1");
      offsets_[k + 1] = offsets_[k] + dims_[k];
    }
  }

  static SignalSpace uniform(Index horizon, Index dim = 1) {
    if (horizon < 1)
      throw std::invalid_argument("SignalSpace: horizon must be at least 1");
    return SignalSpace(std::vector<Index>(static_cast<std::size_t>(horizon), dim));
  }

  Index horizon() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index step) const { return dims_[static_cast<std::size_t>(step)]; }
  Index offset(Index step) const { return offsets_[static_cast<std::size_t>(step)]; }
  Index total() const { return offsets_.back(); }
  const std::vector<Index>& dims() const { return dims_; }

  // Time step owning a global coordinate.
  Index step_of(Index global) const {
    Index lo = 0, hi = horizon() - 1;
    while (lo < hi) {
      const Index mid = (lo + hi + 1) / 2;
      if (offset(mid) <= global)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  // Same horizon, dims reversed in time.
  SignalSpace reversed() const {
    std::vector<Index> rd(dims_.rbegin(), dims_.rend());
    return SignalSpace(std::move(rd));
  }

  friend bool operator==(const SignalSpace& a, const SignalSpace& b) {
    return a.dims_ == b.dims_;
  }
  friend bool operator!=(const SignalSpace& a, const SignalSpace& b) {
    return !(a == b);
  }

 private:
  std::vector<Index> dims_;
  std::vector<Index> offsets_;
};

// Per-step interleaved direct sum: step k of the result has dimension
// a.dim(k) + b.dim(k), with the a-coordinates first.  Truncating the sum
// space at step n truncates both components at step n, so the product
// nest is the ordinary nest of the combined space.
inline SignalSpace direct_sum(const SignalSpace& a, const SignalSpace& b) {
  if (a.horizon() != b.horizon())
    throw std::invalid_argument("direct_sum: horizons differ");
  std::vector<Index> dims(static_cast<std::size_t>(a.horizon()));
  for (Index k = 0; k < a.horizon(); ++k)
    dims[static_cast<std::size_t>(k)] = a.dim(k) + b.dim(k);
  return SignalSpace(std::move(dims));
}

// Index into the truncation nest: P_n keeps time steps 0..n.
// n = -1 is the zero projection, n = infinity the identity.
struct NestIndex {
  static constexpr Index kInfinity = std::numeric_limits<Index>::max();

  Index n = kInfinity;

  NestIndex() = default;
  NestIndex(Index k) : n(k) {}  // NOLINT: implicit by design

  static NestIndex infinity() { return NestIndex(kInfinity); }

  bool is_infinite() const { return n == kInfinity; }

  void validate(const SignalSpace& space) const {
    if (is_infinite()) return;
    if (n < -1 || n >= space.horizon())
      throw std::invalid_argument("NestIndex: n = " + std::to_string(n) +
                                  " outside {-1, ..., T-1} for horizon " +
                                  std::to_string(space.horizon()));
  }

  // Number of leading global coordinates kept by P_n.
  Index kept(const SignalSpace& space) const {
    if (is_infinite()) return space.total();
    if (n < 0) return 0;
    return space.offset(n + 1);
  }
};

}  // namespace ltvgap

#endif  // LTVGAP_SIGNAL_SPACE_HPP
