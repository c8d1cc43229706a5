#include <doctest.h>

#include <random>

#include "ltvgap/lift.hpp"
#include "ltvgap/margin.hpp"

using namespace ltvgap;

namespace {

LtvOperatorXd static_gain(double g, Index T) { return toeplitz_lift<double>({g}, 1, T); }

LtvOperatorXd random_plant(Index T, std::uint64_t seed, Index d = 1) {
  std::mt19937_64 rng(seed);
  const SignalSpace s = SignalSpace::uniform(T, d);
  auto p = random_causal<double>(s, s, rng);
  return scale(1.0 / std::max(1.0, operator_norm(p)), p);
}

}  // namespace

TEST_CASE("margin symbol") {
  const SignalSpace s = SignalSpace::uniform(3);
  CHECK(symbol_R(factorize(LtvOperatorXd::zero(s, s))).matrix().norm() == 0.0);

  SUBCASE("static plants give a causal symbol") {
    const auto f = factorize(static_gain(0.7, 4));
    CHECK(is_causal(symbol_R(f), 1e-13));
    CHECK(distance_to_causal(symbol_R(f)) < 1e-13);
  }

  SUBCASE("the delay gives the unit upper shift") {
    const auto f = factorize(shift_operator(3));
    const auto r = symbol_R(f);
    CHECK((r - adjoint(shift_operator(3))).matrix().norm() < 1e-13);
  }
}

TEST_CASE("upper margin formula") {
  const SignalSpace s = SignalSpace::uniform(3);
  CHECK(r_upper(factorize(LtvOperatorXd::zero(s, s))).r_o == doctest::Approx(1.0).epsilon(1e-14));

  for (double g : {0.5, 1.0, 2.0})
    CHECK(r_upper(factorize(static_gain(g, 4))).r_o == doctest::Approx(1.0).epsilon(1e-12));

  for (Index T : {2, 3, 5, 8}) {
    const auto up = r_upper(factorize(shift_operator(T)));
    CHECK(up.hankel_norm_R == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(up.r_o == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("alternate margin formula agrees") {
  const SignalSpace s = SignalSpace::uniform(3);
  const auto alt0 = r_upper_alt(factorize(LtvOperatorXd::zero(s, s)));
  CHECK(alt0.upsilon_norm < 1e-14);
  CHECK(alt0.r_o_alt == doctest::Approx(1.0).epsilon(1e-14));

  const auto alt = r_upper_alt(factorize(shift_operator(4)));
  CHECK(alt.upsilon_norm == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(alt.r_o_alt == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  for (std::uint64_t seed = 1; seed < 9; ++seed) {
    const auto f = factorize(random_plant(5, seed));
    CHECK(std::abs(r_upper(f).r_o - r_upper_alt(f).r_o_alt) < 1e-8);
  }
}

TEST_CASE("r_o only depends on the plant, not the completion") {
  const auto p = random_plant(4, 33, 2);
  const auto f = factorize(p);
  const double base = r_upper(f).r_o;
  std::mt19937_64 rng(34);
  for (int i = 0; i < 3; ++i) {
    const auto q = random_causal<double>(f.output_space(), f.input_space(), rng);
    const auto g = shift_completion(f, q);
    CHECK(std::abs(r_upper(g).r_o - base) < 1e-9);
  }
}

TEST_CASE("margin profile") {
  SUBCASE("unrestricted entry recovers 1/r_o") {
    const auto f = factorize(random_plant(5, 41));
    const auto profile = margin_profile(f);
    REQUIRE(!profile.empty());
    CHECK(profile.front().n == -1);
    CHECK(profile.front().value ==
          doctest::Approx(1.0 / r_upper(f).r_o).epsilon(1e-8));
  }

  SUBCASE("static plants have an all-ones profile") {
    const auto profile = margin_profile(factorize(static_gain(1.5, 5)));
    for (const auto& e : profile) CHECK(e.value == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("entries are nonincreasing and bounded by the norm") {
    const auto f = factorize(random_plant(6, 42));
    const auto profile = margin_profile(f);
    const double full = profile.front().value;
    for (std::size_t k = 0; k + 1 < profile.size(); ++k) {
      CHECK(profile[k].value >= profile[k + 1].value - 1e-12);
      CHECK(profile[k].value <= full + 1e-12);
    }
    CHECK(profile.back().boundary);
  }
}

TEST_CASE("corona criterion") {
  SUBCASE("static normalized factors are isometric through every truncation") {
    for (double g : {0.0, 0.5, 1.0, 2.0}) {
      const auto f = factorize(static_gain(g, 4));
      CHECK(corona_criterion(f.M, f.N) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("identity columns") {
    const SignalSpace s = SignalSpace::uniform(3);
    CHECK(corona_criterion(LtvOperatorXd::identity(s), LtvOperatorXd::zero(s, s)) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("delay factors, against the explicit left inverse") {
    const auto f = factorize(shift_operator(3));
    const double value = corona_criterion(f.M, f.N);
    CHECK(value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    const double bound = operator_norm(stack_row(f.Vhat, scale(-1.0, f.Uhat)));
    CHECK(value <= bound + 1e-10);
  }

  SUBCASE("zero columns have no bounded left inverse") {
    const SignalSpace s = SignalSpace::uniform(2);
    CHECK(std::isinf(corona_criterion(LtvOperatorXd::zero(s, s), LtvOperatorXd::zero(s, s))));
  }
}

TEST_CASE("ball equivalence radius") {
  const SignalSpace s = SignalSpace::uniform(3);
  CHECK(ball_equivalence_radius(factorize(LtvOperatorXd::zero(s, s))) ==
        doctest::Approx(1.0).epsilon(1e-14));

  SUBCASE("delay: row and column optima coincide") {
    const auto f = factorize(shift_operator(4));
    CHECK(ball_equivalence_radius(f) == doctest::Approx(r_upper(f).r_o).epsilon(1e-8));
  }

  SUBCASE("never exceeds one, and reversal preserves the distance") {
    for (std::uint64_t seed = 50; seed < 55; ++seed) {
      const auto f = factorize(random_plant(4, seed));
      CHECK(ball_equivalence_radius(f) <= 1.0 + 1e-12);
      const auto row_symbol = compose(f.Vhat, adjoint(f.Nhat)) +
                              compose(f.Uhat, adjoint(f.Mhat));
      const double direct = distance_to_causal(row_symbol);
      const double reversed = distance_to_causal(reverse_adjoint(row_symbol));
      CHECK(direct == doctest::Approx(reversed).epsilon(1e-10));
      CHECK(ball_equivalence_radius(f) ==
            doctest::Approx(1.0 / std::sqrt(1.0 + direct * direct)).epsilon(1e-10));
    }
  }
}

TEST_CASE("time-invariant margin oracle") {
  CHECK(lti_margin_oracle<double>({0, 1}, 60) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  for (double g : {0.5, 1.0, 3.0})
    CHECK(lti_margin_oracle<double>({g}, 40) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("delay with gain has the closed-form margin at every horizon") {
    const double g = 0.5;
    const double oracle = lti_margin_oracle<double>({0, g}, 80);
    CHECK(oracle == doctest::Approx(1.0 / std::sqrt(1.0 + g * g)).epsilon(1e-12));
    const auto f = factorize(toeplitz_lift<double>({0, g}, 1, 12));
    CHECK(r_upper(f).r_o == doctest::Approx(oracle).epsilon(1e-10));
  }

  SUBCASE("two-tap plant converges to the oracle") {
    const std::vector<double> taps{1.0, 0.5};
    const double oracle = lti_margin_oracle(taps, 120);
    const auto f = factorize(toeplitz_lift(taps, 1, 30));
    CHECK(std::abs(r_upper(f).r_o - oracle) < 1e-3);
  }
}

TEST_CASE("full margin report") {
  const auto f = factorize(shift_operator(6));
  const auto rep = margin_report(f);
  CHECK(rep.r_o == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(rep.cross_residual < 1e-8);
  CHECK(rep.hankel_norm_R == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.corona_value >= 1.0 - 1e-12);
  CHECK(rep.r_opt_lower == doctest::Approx(rep.r_o).epsilon(1e-14));
  CHECK(rep.r_opt_upper >= rep.r_opt_lower - 1e-12);
}
