#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "orlicz/nfunction.hpp"
#include "oracles.hpp"

using namespace orlicz;

TEST_SUITE_BEGIN("nfunction");

namespace {

// The Young-pair built-ins (valid N-functions on all of [0, inf)).
std::vector<NFunction> nfunction_builtins() {
  return {NFunction::power(1.5), NFunction::power(2.0),  NFunction::power(3.0),
          NFunction::exp_minus(), NFunction::log_entropy(), NFunction::exp_power(2.0)};
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace

TEST_CASE("evaluation matches closed forms") {
  CHECK(NFunction::exp_minus()(0.0) == 0.0);
  CHECK(NFunction::power(2.0)(2.0) == doctest::Approx(2.0).epsilon(1e-14));
  // (1+t)log(1+t)-t at t=1
  CHECK(NFunction::log_entropy()(1.0) ==
        doctest::Approx(0.3862943611198906).epsilon(1e-12));
}

TEST_CASE("evaluation rejects negative arguments") {
  CHECK_THROWS_AS(NFunction::power(2.0)(-1.0), std::domain_error);
  CHECK_THROWS_AS(NFunction::power(2.0).density(-0.5), std::domain_error);
}

TEST_CASE("inverse") {
  NFunction sq = NFunction::power(2.0, 1.0);  // t^2
  CHECK(sq.inverse(4.0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(sq.inverse(4.0, 1e-12) == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(sq.inverse(0.0) == 0.0);
  NFunction e = NFunction::exp_minus();
  CHECK(e.inverse(std::exp(1.0) - 2.0, 1e-12) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("conjugate density by monotone inversion") {
  NFunction g1 = NFunction::power(2.0);  // density tau
  CHECK(g1.conjugate_density(3.0) == doctest::Approx(3.0).epsilon(1e-10));
  NFunction g2 = NFunction::exp_minus();  // density e^t - 1, inverse log(1+s)
  CHECK(g2.conjugate_density(std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(g2.conjugate_density(0.0) == 0.0);
}

TEST_CASE("conjugate pairs match the classical closed forms") {
  for (double alpha : {1.5, 2.0, 3.0}) {
    const double beta = alpha / (alpha - 1.0);
    NFunction Gs = NFunction::power(alpha).conjugate();
    for (int i = 1; i <= 64; ++i) {
      const double v = 10.0 * i / 64.0;
      CHECK(rel_err(Gs(v), std::pow(v, beta) / beta) < 1e-7);
    }
  }
  NFunction Es = NFunction::exp_minus().conjugate();
  for (int i = 1; i <= 64; ++i) {
    const double v = 3.0 * i / 64.0;
    CHECK(rel_err(Es(v), (1.0 + v) * std::log1p(v) - v) < 1e-7);
  }
}

TEST_CASE("conjugate agrees with the sup-scan oracle") {
  for (const NFunction& G : {NFunction::power(1.5), NFunction::exp_minus()}) {
    NFunction Gs = G.conjugate();
    for (double s : {0.25, 1.0, 3.0, 7.5}) {
      CHECK(rel_err(Gs(s), oracles::conjugate_sup_scan(G, s)) < 1e-5);
    }
  }
}

TEST_CASE("biconjugation returns the original function") {
  for (const NFunction& G : nfunction_builtins()) {
    NFunction Gss = G.conjugate().conjugate();
    for (int i = 0; i < 40; ++i) {
      const double t = std::pow(10.0, -2.0 + 4.0 * i / 39.0);
      if (!std::isfinite(G(t))) continue;  // beyond double range both sides blow up
      CHECK(rel_err(Gss(t), G(t)) < 1e-5);
    }
  }
}

TEST_CASE("young gap examples") {
  NFunction half_sq = NFunction::power(2.0);  // t^2/2, self-conjugate
  CHECK(young_gap(half_sq, 0.0, 0.0) == 0.0);
  CHECK(std::abs(young_gap(half_sq, 3.0, 3.0)) < 1e-9);
  CHECK(young_gap(half_sq, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("young inequality and equality curve across built-ins") {
  for (const NFunction& G : nfunction_builtins()) {
    NFunction Gs = G.conjugate();
    for (int i = 0; i <= 20; ++i) {
      for (int j = 0; j <= 20; ++j) {
        const double a = 20.0 * i / 20.0;
        const double b = 20.0 * j / 20.0;
        CHECK(young_gap(G, Gs, a, b) >= -1e-9);
      }
    }
    for (int i = 0; i <= 20; ++i) {
      const double a = 20.0 * i / 20.0;
      const double b = G.density(a);
      // direct quadrature handles b = g(a) far beyond the cached range
      const double gap = young_gap(G, a, b);
      const double scale = std::max(1.0, a * b);
      CHECK(gap / scale <= 1e-6);
      CHECK(gap / scale >= -1e-9);
    }
  }
}

TEST_CASE("doubling: scaled powers have scale-free constants") {
  NFunction G = NFunction::power(2.0, 3.0);  // 3 t^2
  Delta2Report rep = delta2_check(G, {1.0, 100.0});
  CHECK(rep.satisfied);
  CHECK(rep.T == 0.0);
  CHECK(rep.k == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(rep.p_bound == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.k > 2.0);
}

TEST_CASE("doubling: power-log satisfies with ratio bound alpha + 1") {
  Delta2Report rep = delta2_check(NFunction::power_log(2.0), {1.0, 100.0});
  CHECK(rep.satisfied);
  CHECK(rep.p_bound == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(rep.T == doctest::Approx(1.0));
  CHECK(rep.k > 2.0);
}

TEST_CASE("doubling: exponential growth fails on [1, 100]") {
  Delta2Report r1 = delta2_check(NFunction::exp_minus(), {1.0, 100.0});
  CHECK_FALSE(r1.satisfied);
  // the ratio itself grows without bound: spot-check by direct evaluation
  NFunction G = NFunction::exp_minus();
  auto ratio = [&](double t) { return t * G.density(t) / G(t); };
  CHECK(ratio(10.0) > ratio(1.0) * 2.0);
  CHECK(ratio(50.0) > ratio(10.0) * 2.0);
  CHECK(ratio(100.0) > ratio(50.0) * 1.5);

  Delta2Report r2 = delta2_check(NFunction::exp_power(2.0), {1.0, 100.0});
  CHECK_FALSE(r2.satisfied);
}

TEST_CASE("comparison verdicts") {
  const double p = 2.0, eps = 0.5;
  NFunction plog = NFunction::from_closed_form(
      "plog",
      [p](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return std::pow(t, p - 1.0) * (p * (std::log(t) + 1.0) + 1.0);
        return std::pow(t, p - 1.0) * (p * (1.0 - std::log(t)) - 1.0);
      },
      [p](double t) {
        if (t <= 0.0) return 0.0;
        return std::pow(t, p) * (std::abs(std::log(t)) + 1.0);
      });
  NFunction tp = NFunction::power(p, 1.0);
  NFunction tpe = NFunction::power(p + eps, 1.0);

  SUBCASE("t^p (|log t|+1) grows strictly slower than t^{p+eps}") {
    ComparisonVerdict v = compare(plog, tpe, {1.0, 1e8, 16});
    CHECK(v.relation == GrowthRelation::strictly_slower);
  }
  SUBCASE("G and G(k t) are equivalent") {
    NFunction G = NFunction::exp_minus();
    NFunction Gk = NFunction::from_closed_form(
        "exp_minus(3t)", [G](double t) { return 3.0 * G.density(3.0 * t); },
        [G](double t) { return G(3.0 * t); });
    ComparisonVerdict v = compare(G, Gk, {1.0, 1e4, 16});
    CHECK(v.relation == GrowthRelation::equivalent);
    // witnesses certify the sandwich at every probe beyond x0
    for (double x : ProbeRange{v.x0, 1e4, 8}.points()) {
      CHECK(G(v.a * x) <= Gk(x) * (1.0 + 1e-9));
      CHECK(Gk(x) <= G(v.b * x) * (1.0 + 1e-9));
    }
  }
  SUBCASE("strictly-slower chain") {
    CHECK(compare(tp, plog, {1.0, 1e8, 16}).relation == GrowthRelation::strictly_slower);
    CHECK(compare(plog, tpe, {1.0, 1e8, 16}).relation == GrowthRelation::strictly_slower);
    // and dominance the other way around
    CHECK(compare(tpe, plog, {1.0, 1e8, 16}).relation == GrowthRelation::dominates);
  }
}

TEST_CASE("inverse product bounds") {
  for (const NFunction& G : nfunction_builtins()) {
    NFunction Gs = G.conjugate();
    for (double t : ProbeRange{1e-3, 1e3, 8}.points()) {
      const double prod = G.inverse(t, 1e-10) * Gs.inverse(t, 1e-10);
      CHECK(prod > t * (1.0 - 1e-6));
      CHECK(prod <= 2.0 * t * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("superadditivity and inverse subadditivity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 20.0);
  for (const NFunction& G : {NFunction::power(1.5), NFunction::exp_minus()}) {
    for (int k = 0; k < 200; ++k) {
      const double a = U(rng), b = U(rng);
      CHECK(G(a) + G(b) <= G(a + b) * (1.0 + 1e-12) + 1e-9);
      const double ia = G.inverse(a, 1e-10), ib = G.inverse(b, 1e-10);
      CHECK(G.inverse(a + b, 1e-10) <= (ia + ib) * (1.0 + 1e-8) + 1e-12);
    }
  }
}

TEST_CASE("conjugation reverses pointwise order beyond a threshold") {
  // G1 = t^2/2 <= G2 = t^2 everywhere, so G2* <= G1* beyond g2(0) = 0
  NFunction G1 = NFunction::power(2.0);
  NFunction G2 = NFunction::power(2.0, 1.0);
  NFunction G1s = G1.conjugate();
  NFunction G2s = G2.conjugate();
  for (double y : ProbeRange{1e-2, 1e2, 8}.points()) {
    CHECK(G2s(y) <= G1s(y) * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("composition and weighted sums stay in the class") {
  NFunction comp = NFunction::compose(NFunction::power(2.0), NFunction::log_entropy());
  CHECK(validate(comp, {1e-5, 1e4, 16}).ok());
  NFunction sum = NFunction::weighted_sum(
      {{1.0, NFunction::power(1.6)}, {0.5, NFunction::power(1.9)}});
  CHECK(validate(sum, {1e-6, 1e6, 16}).ok());
  // chain-rule density agrees with a centered difference of the value
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    const double h = 1e-6 * t;
    const double fd = (comp(t + h) - comp(t - h)) / (2.0 * h);
    CHECK(std::abs(comp.density(t) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("built-ins validate; the growth example does not near zero") {
  for (const NFunction& G : nfunction_builtins()) {
    CHECK(validate(G, {1e-5, 1e4, 16}).ok());
  }
  CHECK_FALSE(validate(NFunction::power_log(2.0), {1e-5, 1e4, 16}).ok());
  CHECK(validate(NFunction::power_log(2.0), {1.0, 1e4, 16}).convex);
}

TEST_CASE("tabulated density round trip") {
  std::vector<std::pair<double, double>> nodes;
  for (int i = 1; i <= 200; ++i) {
    const double t = 0.05 * i;
    nodes.emplace_back(t, t);  // density of t^2/2
  }
  NFunction T = NFunction::tabulated(nodes, {1e-6, 1e3, 128});
  for (double t : {0.5, 1.0, 3.0, 8.0}) {
    CHECK(rel_err(T(t), 0.5 * t * t) < 1e-4);
  }
  CHECK_THROWS_AS(NFunction::tabulated({{1.0, 1.0}, {0.5, 2.0}}), std::domain_error);
}

TEST_SUITE_END();
