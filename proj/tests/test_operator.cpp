#include <doctest.h>

#include <random>

#include "ltvgap/lift.hpp"
#include "ltvgap/operator.hpp"

using namespace ltvgap;

namespace {

SignalSpace varying_space() { return SignalSpace({1, 2, 1, 2}); }

LtvOperatorXd random_op(const SignalSpace& dom, const SignalSpace& cod,
                        std::uint64_t seed, bool causal = false) {
  std::mt19937_64 rng(seed);
  return random_operator<double>(dom, cod, rng, causal);
}

}  // namespace

TEST_CASE("signal space bookkeeping") {
  const SignalSpace s({2, 1, 3});
  CHECK(s.horizon() == 3);
  CHECK(s.total() == 6);
  CHECK(s.offset(2) == 3);
  CHECK(s.step_of(0) == 0);
  CHECK(s.step_of(2) == 1);
  CHECK(s.step_of(5) == 2);
  CHECK(s.reversed().dims() == std::vector<Index>{3, 1, 2});
  CHECK_THROWS_AS(SignalSpace({1, 0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(SignalSpace(std::vector<Index>{}), std::invalid_argument);
}

TEST_CASE("identity, zero and shift basics") {
  const auto shift = shift_operator(3);
  CHECK(shift.matrix()(1, 0) == 1.0);
  CHECK(shift.matrix()(2, 1) == 1.0);
  CHECK(shift.matrix().sum() == 2.0);
  CHECK(operator_norm(shift) == doctest::Approx(1.0).epsilon(1e-14));

  const auto up = adjoint(shift);
  CHECK(up.matrix()(0, 1) == 1.0);
  CHECK(is_causal(shift));
  CHECK_FALSE(is_causal(up));

  const auto two_step = shift * shift;
  CHECK(two_step.matrix()(2, 0) == 1.0);
  CHECK(two_step.matrix().sum() == 1.0);
}

TEST_CASE("norms") {
  const SignalSpace s = SignalSpace::uniform(3);
  MatrixX<double> d = MatrixX<double>::Zero(3, 3);
  d.diagonal() << 1, 3, 2;
  CHECK(operator_norm(LtvOperatorXd(s, s, d)) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(hs_norm(LtvOperatorXd::identity(SignalSpace::uniform(4))) ==
        doctest::Approx(2.0).epsilon(1e-14));

  const auto a = random_op(varying_space(), varying_space(), 11);
  const auto b = random_op(varying_space(), varying_space(), 12);
  CHECK(hs_inner(a, b) ==
        doctest::Approx((a.matrix().array() * b.matrix().array()).sum()).epsilon(1e-14));
}

TEST_CASE("solve_causal_inverse matches the Neumann series") {
  const auto shift = shift_operator(3);
  const auto inv = solve_causal_inverse(LtvOperatorXd::identity(shift.domain()) + shift);
  const auto expect = LtvOperatorXd::identity(shift.domain()) - shift + shift * shift;
  CHECK((inv - expect).matrix().norm() < 1e-14);

  SUBCASE("exact inverse on random causal operators with varying dims") {
    const SignalSpace s = varying_space();
    auto x = random_op(s, s, 21, true);
    for (Index k = 0; k < s.horizon(); ++k)
      x.block(k, k) += 3.0 * MatrixX<double>::Identity(s.dim(k), s.dim(k));
    const auto inv2 = solve_causal_inverse(x);
    CHECK(is_causal(inv2, 0.0));
    CHECK((x * inv2 - LtvOperatorXd::identity(s)).matrix().norm() < 1e-12);
    CHECK((inv2 * x - LtvOperatorXd::identity(s)).matrix().norm() < 1e-12);
  }

  SUBCASE("singular diagonal block is reported with its step") {
    auto x = LtvOperatorXd::identity(SignalSpace::uniform(3));
    x.matrix()(1, 1) = 0.0;
    CHECK_THROWS_WITH_AS(solve_causal_inverse(x),
                         doctest::Contains("step 1"), std::runtime_error);
  }
}

TEST_CASE("truncation projections") {
  const SignalSpace s = SignalSpace::uniform(2, 2);
  const auto eye = LtvOperatorXd::identity(s);
  const auto t = truncate(eye, 0, TruncationSide::Left);
  CHECK(t.matrix().topLeftCorner(2, 2).isIdentity(0.0));
  CHECK(t.matrix().bottomRightCorner(2, 2).isZero(0.0));

  const auto x = random_op(varying_space(), varying_space(), 31);
  CHECK((truncate(x, NestIndex::infinity(), TruncationSide::Both) - x).matrix().norm() == 0.0);
  CHECK(truncate(x, -1, TruncationSide::Both).matrix().norm() == 0.0);

  SUBCASE("P_n is idempotent and self-adjoint; P_n P_m = P_min(n,m)") {
    for (Index n = -1; n < x.horizon(); ++n) {
      const auto pn = truncate(LtvOperatorXd::identity(x.domain()), n, TruncationSide::Left);
      CHECK((pn * pn - pn).matrix().norm() < 1e-12);
      CHECK((pn - adjoint(pn)).matrix().norm() == 0.0);
      for (Index m = -1; m < x.horizon(); ++m) {
        const auto pm = truncate(LtvOperatorXd::identity(x.domain()), m, TruncationSide::Left);
        const auto pmin = truncate(LtvOperatorXd::identity(x.domain()), std::min(n, m),
                                   TruncationSide::Left);
        CHECK((pn * pm - pmin).matrix().norm() < 1e-12);
      }
    }
  }

  SUBCASE("complement flag gives Q_n = I - P_n") {
    const auto qx = truncate(x, 1, TruncationSide::Left, true);
    const auto px = truncate(x, 1, TruncationSide::Left);
    CHECK((qx + px - x).matrix().norm() == 0.0);
  }
}

TEST_CASE("nest projection") {
  const SignalSpace s = SignalSpace::uniform(2, 2);
  auto x = random_op(s, s, 41);
  const auto lower = nest_project(x);
  CHECK(lower.matrix().topRightCorner(2, 2).isZero(0.0));
  CHECK((lower.matrix() - x.matrix()).topLeftCorner(2, 2).isZero(0.0));
  CHECK((nest_project(lower) - lower).matrix().norm() == 0.0);

  SUBCASE("orthogonal split of the Hilbert-Schmidt norm") {
    const auto y = random_op(varying_space(), varying_space(), 42);
    const double total = hs_norm(y) * hs_norm(y);
    const double causal = hs_norm(nest_project(y)) * hs_norm(nest_project(y));
    const double anti = hs_norm(anticausal_part(y)) * hs_norm(anticausal_part(y));
    CHECK(total == doctest::Approx(causal + anti).epsilon(1e-12));
  }

  SUBCASE("causality characterization") {
    const auto c = random_op(varying_space(), varying_space(), 43, true);
    CHECK(is_causal(c, 0.0));
    CHECK((nest_project(c) - c).matrix().norm() == 0.0);
    auto bad = c;
    bad.matrix()(0, bad.matrix().cols() - 1) = 1e-3;
    CHECK_FALSE(is_causal(bad));
    CHECK((nest_project(bad) - bad).matrix().norm() > 0.0);
  }
}

TEST_CASE("causal algebra closure") {
  const SignalSpace s = varying_space();
  const auto a = random_op(s, s, 51, true);
  const auto b = random_op(s, s, 52, true);
  CHECK(is_causal(a * b, 0.0));
  CHECK(is_causal(a + b, 0.0));
  CHECK(is_causal(2.5 * a, 0.0));
}

TEST_CASE("adjoint is contravariant") {
  const auto a = random_op(SignalSpace({2, 1, 2}), SignalSpace({1, 1, 3}), 61);
  const auto b = random_op(SignalSpace({1, 2, 2}), SignalSpace({2, 1, 2}), 62);
  CHECK((adjoint(a * b) - adjoint(b) * adjoint(a)).matrix().norm() < 1e-12);
}

TEST_CASE("reverse_adjoint is a causal contravariant involution") {
  const auto a = random_op(SignalSpace({2, 1, 2}), SignalSpace({1, 1, 3}), 71);
  const auto b = random_op(SignalSpace({1, 2, 2}), SignalSpace({2, 1, 2}), 72);
  CHECK((reverse_adjoint(reverse_adjoint(a)) - a).matrix().norm() == 0.0);
  CHECK((reverse_adjoint(a * b) - reverse_adjoint(b) * reverse_adjoint(a)).matrix().norm() <
        1e-12);
  CHECK(operator_norm(reverse_adjoint(a)) == doctest::Approx(operator_norm(a)).epsilon(1e-12));

  const auto c = random_op(SignalSpace({1, 2, 2}), SignalSpace({2, 1, 2}), 73, true);
  CHECK(is_causal(reverse_adjoint(c), 0.0));
}

TEST_CASE("stacking round trips and respects the interleaved nest") {
  const SignalSpace u({1, 2, 1});
  const SignalSpace y({2, 1, 1});
  const auto a = random_op(u, u, 81, true);
  const auto b = random_op(u, y, 82, true);
  const auto col = stack_col(a, b);
  CHECK(is_causal(col, 0.0));
  const auto [ta, tb] = split_col(col, u, y);
  CHECK((ta - a).matrix().norm() == 0.0);
  CHECK((tb - b).matrix().norm() == 0.0);
  CHECK(operator_norm(col) ==
        doctest::Approx(std::sqrt(detail::spectral_norm(
                            (a.matrix().transpose() * a.matrix() +
                             b.matrix().transpose() * b.matrix()).eval())))
            .epsilon(1e-12));

  const auto c = random_op(y, u, 83);
  const auto row = stack_row(a, c);
  const auto [la, lc] = split_row(row, u, y);
  CHECK((la - a).matrix().norm() == 0.0);
  CHECK((lc - c).matrix().norm() == 0.0);
}

TEST_CASE("float instantiation compiles and behaves") {
  const auto shift = shift_operator<float>(3);
  CHECK(is_causal(shift, 0.0f));
  CHECK(operator_norm(shift) == doctest::Approx(1.0f));
  const auto inv = solve_causal_inverse(LtvOperator<float>::identity(shift.domain()) + shift);
  CHECK(is_causal(inv, 0.0f));
}
