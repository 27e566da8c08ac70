#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "opo/phase_noise.hpp"

using namespace opo;

namespace {

using R = QuadratureVariances<double>;
using Jitter = PhaseNoiseModel<double>;

const R operating_point{21.24, 0.149};
const double paper_jitter = deg_to_rad(4.3);

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("Gauss-Hermite rule") {
  const auto rule = gauss_hermite<double>(20);
  CHECK(rule.weights.sum() == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  // int t^2 exp(-t^2) = sqrt(pi)/2, int t^4 exp(-t^2) = 3 sqrt(pi)/4
  CHECK((rule.weights.array() * rule.nodes.array().square()).sum() ==
        doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-13));
  CHECK((rule.weights.array() * rule.nodes.array().pow(4)).sum() ==
        doctest::Approx(3 * std::sqrt(std::numbers::pi) / 4).epsilon(1e-12));
  for (Eigen::Index i = 0; i < 10; ++i) {
    CHECK(rule.nodes(i) == doctest::Approx(-rule.nodes(19 - i)).epsilon(1e-12));
  }
}

TEST_CASE("exact degradation") {
  const auto none = degrade_exact(operating_point, Jitter{0.0});
  CHECK(none.plus() == operating_point.plus());
  CHECK(none.minus() == operating_point.minus());

  const auto r = degrade_exact(operating_point, Jitter{paper_jitter});
  CHECK(std::abs(r.minus_db() - -5.68) <= 0.1);
  CHECK(std::abs(r.plus_db() - 13.25) <= 0.1);
  // independent evaluation of the closed form
  CHECK(r.minus_db() == doctest::Approx(-5.7328406).epsilon(1e-6));
  CHECK(r.plus_db() == doctest::Approx(13.2473245).epsilon(1e-7));

  const auto scrambled = degrade_exact(operating_point, Jitter{10.0});
  const double mean = (operating_point.plus() + operating_point.minus()) / 2;
  CHECK(std::abs(scrambled.plus() - mean) <= 1e-6);
  CHECK(std::abs(scrambled.minus() - mean) <= 1e-6);

  CHECK_THROWS_AS(degrade_exact(operating_point, Jitter{-0.1}), ValidationError);
}

TEST_CASE("small-angle degradation") {
  const auto none = degrade_approx(operating_point, Jitter{0.0});
  CHECK(none.plus() == operating_point.plus());
  CHECK(none.minus() == operating_point.minus());

  const auto swapped = degrade_approx(operating_point, Jitter{std::numbers::pi / 2});
  CHECK(swapped.plus() == operating_point.minus());
  CHECK(swapped.minus() == operating_point.plus());

  const auto r = degrade_approx(operating_point, Jitter{paper_jitter});
  // 0.149 cos^2(4.3 deg) + 21.24 sin^2(4.3 deg)
  CHECK(r.minus() == doctest::Approx(0.2675696).epsilon(1e-6));
  CHECK(r.minus_db() == doctest::Approx(-5.7256).epsilon(1e-4));
  CHECK(std::abs(r.minus_db() - degrade_exact(operating_point, Jitter{paper_jitter}).minus_db()) <= 0.05);
}

TEST_CASE("quadrature oracle") {
  for (const R& in : {operating_point, R{3.0, 0.4}, R{150.0, 0.05}}) {
    const auto q = degrade_quadrature_oracle(in, Jitter{0.075});
    const auto e = degrade_exact(in, Jitter{0.075});
    CHECK(rel(q.plus(), e.plus()) <= 1e-9);
    CHECK(rel(q.minus(), e.minus()) <= 1e-9);
  }
  const auto same = degrade_quadrature_oracle(operating_point, Jitter{0.0});
  CHECK(same.plus() == operating_point.plus());
  CHECK(same.minus() == operating_point.minus());

  for (double theta : {0.01, 0.3, 1.0, 3.0}) {
    const auto fixed = degrade_quadrature_oracle(R{1.0, 1.0}, Jitter{theta});
    CHECK(fixed.plus() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fixed.minus() == doctest::Approx(1.0).epsilon(1e-14));
  }

  CHECK_THROWS_AS(degrade_quadrature_oracle(operating_point, Jitter{0.1}, 8), ValidationError);
  // Rapid oscillation of cos^2 across the Gaussian: refinements keep disagreeing.
  CHECK_THROWS_AS(degrade_quadrature_oracle(operating_point, Jitter{10.0}), QuadratureError);
}

TEST_CASE("degradation properties") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    const double r_minus = 0.01 + 0.99 * unit(rng);
    const double r_plus = 1.0 + 300.0 * unit(rng);
    return R{r_plus, r_minus};
  };

  SUBCASE("sum conservation, contraction and oracle agreement") {
    for (int i = 0; i < 1000; ++i) {
      const R in = draw();
      const double theta = 0.5 * unit(rng);
      const double sum = in.plus() + in.minus();
      const R forms[] = {degrade_exact(in, Jitter{theta}), degrade_approx(in, Jitter{theta}),
                         degrade_quadrature_oracle(in, Jitter{theta})};
      for (const auto& f : forms) {
        CHECK(std::abs(f.plus() + f.minus() - sum) <= 1e-12 * sum);
        CHECK(f.plus() <= in.plus());
        CHECK(f.minus() >= in.minus());
      }
      CHECK(rel(forms[2].plus(), forms[0].plus()) <= 1e-9);
      CHECK(rel(forms[2].minus(), forms[0].minus()) <= 1e-9);
    }
  }
  SUBCASE("exact mixes less than the small-angle form") {
    for (int i = 1; i < 200; ++i) {
      const double theta = (std::numbers::pi / 2) * i / 200.0;
      const auto e = degrade_exact(operating_point, Jitter{theta});
      const auto a = degrade_approx(operating_point, Jitter{theta});
      CHECK(e.minus() < a.minus());
      CHECK(e.plus() > a.plus());
    }
  }
  SUBCASE("exact and small-angle agree within 0.1 dB up to 5 deg over the operating range") {
    // paper efficiencies and detuning, pump parameter up to ~0.9 (450 mW of a 568 mW threshold)
    const double alpha = 0.95269, rho = 0.931677, Omega = 0.0278578;
    for (int ix = 0; ix <= 90; ++ix) {
      const R in = forward_variances(alpha, rho, ix / 100.0, Omega);
      for (int it = 0; it <= 50; ++it) {
        const Jitter j{deg_to_rad(5.0 * it / 50)};
        const auto e = degrade_exact(in, j);
        const auto a = degrade_approx(in, j);
        CHECK(std::abs(e.minus_db() - a.minus_db()) <= 0.1);
        CHECK(std::abs(e.plus_db() - a.plus_db()) <= 0.1);
      }
    }
  }
  SUBCASE("squeezed level nondecreasing in jitter") {
    for (int trial = 0; trial < 20; ++trial) {
      const R in = draw();
      double prev_exact = in.minus(), prev_approx = in.minus();
      for (int i = 1; i <= 100; ++i) {
        const Jitter j{(std::numbers::pi / 4) * i / 100.0};
        const double e = degrade_exact(in, j).minus();
        const double a = degrade_approx(in, j).minus();
        CHECK(e >= prev_exact);
        CHECK(a >= prev_approx);
        prev_exact = e;
        prev_approx = a;
      }
    }
  }
}

TEST_CASE("validity flag beyond 45 degrees") {
  CHECK_FALSE(beyond_small_angle(Jitter{paper_jitter}));
  CHECK(beyond_small_angle(Jitter{1.0}));
}
