#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "orlicz/modular.hpp"
#include "oracles.hpp"

using namespace orlicz;

TEST_SUITE_BEGIN("modular");

namespace {

GridFunction random_function(const Grid& g, std::mt19937_64& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> U(-amp, amp);
  GridFunction u(g);
  for (int i = 0; i < g.num_nodes(); ++i) u[i] = U(rng);
  return u;
}

// smooth Dirichlet bump field from low sine modes
GridFunction random_bumps(const Grid& g, std::mt19937_64& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int modes = 3;
  std::vector<double> a(modes * modes);
  for (auto& x : a) x = U(rng);
  GridFunction u(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto xy = g.coord(i);
    const double xh = (xy[0] - g.lower(0)) / (g.upper(0) - g.lower(0));
    const double yh = g.dim() == 2 ? (xy[1] - g.lower(1)) / (g.upper(1) - g.lower(1)) : 0.5;
    double s = 0.0;
    for (int k = 1; k <= modes; ++k) {
      for (int l = 1; l <= modes; ++l) {
        s += a[(k - 1) * modes + (l - 1)] / (k + l) * std::sin(k * M_PI * xh) *
             (g.dim() == 2 ? std::sin(l * M_PI * yh) : 1.0);
      }
    }
    u[i] = amp * s;
  }
  return u;
}

}  // namespace

TEST_CASE("modular basics") {
  Grid g = Grid::interval(0.0, 1.0, 257);
  CHECK(modular(GridFunction(g), NFunction::exp_minus()) == 0.0);
  GridFunction one(g, 1.0);
  CHECK(modular(one, NFunction::power(2.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(is_in_orlicz_class(one, NFunction::power(2.0, 1.0)));
}

TEST_CASE("orlicz class is not closed under scaling (dyadic demo)") {
  // G(t) = e^t - 1 with f = k/2 on the k-th dyadic interval: the modular of f
  // stays summable while the modular of 2f grows past any cap as the grid
  // resolves more levels.
  NFunction G = NFunction::from_closed_form(
      "exp1", [](double t) { return std::exp(t); }, [](double t) { return std::expm1(t); });
  auto dyadic_level = [](int m) {
    Grid g = Grid::interval(0.0, 1.0, (1 << m) + 1);
    GridFunction f = GridFunction::sample(g, [m](double x) {
      if (x <= 0.0) return 0.0;
      const double k = std::ceil(-std::log2(x) - 1e-12);
      return std::min(k, static_cast<double>(m)) / 2.0;
    });
    return f;
  };
  // exact series: sum (sqrt(e)/2)^k - sum 2^-k = 3.695...
  double prev_single = 0.0, prev_double = 0.0;
  for (int m : {10, 14, 18}) {
    GridFunction f = dyadic_level(m);
    const double rho_f = modular(f, G);
    CHECK(rho_f < 4.0);
    if (prev_single > 0.0) CHECK(rho_f - prev_single < 0.5);  // partial sums stabilize
    prev_single = rho_f;
    GridFunction twof = f;
    twof *= 2.0;
    const double rho_2f = modular(twof, G);
    CHECK(rho_2f > prev_double * 2.0);  // partial sums keep growing
    prev_double = rho_2f;
  }
  CHECK(prev_single == doctest::Approx(3.695).epsilon(0.1));
  CHECK(prev_double > 100.0);  // past any fixed cap as levels grow
}

TEST_CASE("luxemburg norm equals the classical p-norm for pure powers") {
  std::mt19937_64 rng(21);
  Grid g = Grid::interval(0.0, 1.0, 257);
  for (double p : {1.5, 2.0, 4.0}) {
    NFunction G = NFunction::power(p, 1.0);  // t^p
    for (int k = 0; k < 50; ++k) {
      GridFunction u = random_function(g, rng, 2.0);
      const double got = luxemburg_norm(u, G);
      const double want = oracles::lp_norm(u, p);
      CHECK(std::abs(got - want) <= 1e-8 * std::max(1.0, want));
    }
  }
  CHECK(luxemburg_norm(GridFunction(g), NFunction::power(2.0)) == 0.0);
}

TEST_CASE("indicator norms follow the closed formulas") {
  Grid g = Grid::interval(0.0, 1.0, 257);
  GridFunction chi = indicator_cells(g, [](double x) { return x > 0.25 && x < 0.75; });
  const double mes = integrate(chi);  // grid measure of the node set
  for (const NFunction& G : {NFunction::power(2.0), NFunction::exp_minus()}) {
    const double lux = luxemburg_norm(chi, G);
    CHECK(lux == doctest::Approx(1.0 / G.inverse(1.0 / mes, 1e-12)).epsilon(1e-8));
    NFunction Gs = G.conjugate();
    const double orl = orlicz_norm(chi, G);
    CHECK(orl == doctest::Approx(mes * Gs.inverse(1.0 / mes, 1e-12)).epsilon(1e-6));
  }
}

TEST_CASE("orlicz norm sandwich") {
  std::mt19937_64 rng(22);
  Grid g = Grid::interval(0.0, 1.0, 257);
  for (const NFunction& G :
       {NFunction::power(2.0), NFunction::exp_minus(), NFunction::log_entropy()}) {
    for (int k = 0; k < 40; ++k) {
      GridFunction u = random_function(g, rng, 3.0);
      const double lux = luxemburg_norm(u, G);
      const double orl = orlicz_norm(u, G);
      CHECK(lux <= orl + 1e-8);
      CHECK(orl <= 2.0 * lux + 1e-8);
    }
  }
  CHECK(orlicz_norm(GridFunction(g), NFunction::power(2.0)) == 0.0);
}

TEST_CASE("dual-sup brute force validates the Amemiya route at toy scale") {
  Grid g = Grid::interval(0.0, 1.0, 8);
  std::mt19937_64 rng(23);
  for (const NFunction& G : {NFunction::power(2.0), NFunction::exp_minus()}) {
    NFunction Gs = G.conjugate();
    for (int k = 0; k < 3; ++k) {
      GridFunction u = random_function(g, rng, 2.0);
      const double amemiya = orlicz_norm(u, G);
      const double brute = oracles::dual_sup_bruteforce(u, Gs);
      CHECK(std::abs(amemiya - brute) <= 0.02 * std::max(1.0, amemiya));
    }
  }
}

TEST_CASE("holder inequalities") {
  Grid g = Grid::interval(0.0, 1.0, 257);
  std::mt19937_64 rng(24);

  SUBCASE("zero factor") {
    HolderReport rep = holder_check(GridFunction(g), random_function(g, rng),
                                    NFunction::power(2.0));
    CHECK(rep.lhs == 0.0);
    CHECK(rep.pass);
  }

  SUBCASE("random pairs under the quadratic function") {
    NFunction G = NFunction::power(2.0);  // t^2/2: Cauchy-Schwarz territory
    for (int k = 0; k < 100; ++k) {
      GridFunction u = random_function(g, rng, 2.0);
      GridFunction v = random_function(g, rng, 2.0);
      HolderReport rep = holder_check(u, v, G);
      CHECK(rep.pass);
      // independent check against closed-form L2 norms
      const double l2u = oracles::lp_norm(u, 2.0);
      const double l2v = oracles::lp_norm(v, 2.0);
      CHECK(rep.lhs <= l2u * l2v * (1.0 + 1e-10) + 1e-12);
    }
  }

  SUBCASE("pairing against the density image is an exact modular identity") {
    NFunction G = NFunction::exp_minus();
    NFunction Gs = G.conjugate();
    GridFunction u = random_bumps(Grid::interval(0.0, 1.0, 129), rng, 1.5);
    GridFunction v = u;
    for (int i = 0; i < v.size(); ++i) v[i] = G.density(std::abs(u[i]));
    GridFunction uv = u;
    for (int i = 0; i < uv.size(); ++i) uv[i] = std::abs(u[i] * v[i]);
    const double lhs = integrate(uv);
    const double rhs = modular(u, G) + modular(v, Gs);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("modular-norm inequalities on both branches") {
  Grid g = Grid::interval(0.0, 1.0, 257);
  std::mt19937_64 rng(25);

  ModularNormReport zero = modular_norm_inequalities(GridFunction(g), NFunction::power(2.0));
  CHECK(zero.pass);

  for (const NFunction& G : {NFunction::power(1.5, 1.0), NFunction::exp_minus()}) {
    GridFunction base = random_function(g, rng, 1.0);
    for (double target : {0.5, 2.0}) {
      GridFunction u = base;
      u *= target / luxemburg_norm(base, G);
      ModularNormReport rep = modular_norm_inequalities(u, G);
      CHECK(rep.branch == (target < 1.0 ? -1 : +1));
      CHECK(rep.pass);
    }
  }

  // closed-form check for the pure power: rho = ||u||^p on the unit sphere
  NFunction G = NFunction::power(3.0, 1.0);
  GridFunction u = random_function(g, rng, 1.0);
  u *= 0.5 / luxemburg_norm(u, G);
  CHECK(modular(u, G) == doctest::Approx(std::pow(0.5, 3.0)).epsilon(1e-8));
}

TEST_CASE("steklov averaging") {
  Grid g = Grid::rectangle(0.0, 1.0, 33, 0.0, 1.0, 33);
  const double r = 0.12;
  SteklovOperator S(g, r);

  SUBCASE("constants are preserved where the ball fits inside") {
    GridFunction c(g, 2.5);
    GridFunction sc = S.apply(c);
    for (int i = 0; i < g.num_nodes(); ++i) {
      const auto xy = g.coord(i);
      const double d = std::min(std::min(xy[0], 1.0 - xy[0]), std::min(xy[1], 1.0 - xy[1]));
      if (d > r + 2.0 * g.spacing(0)) {
        CHECK(sc[i] == doctest::Approx(2.5).epsilon(1e-12));
      }
      CHECK(sc[i] <= 2.5 * (1.0 + 1e-12));  // zero extension shrinks near the edge
    }
  }

  SUBCASE("norm contraction") {
    std::mt19937_64 rng(26);
    for (const NFunction& G : {NFunction::power(2.0), NFunction::exp_minus()}) {
      for (int k = 0; k < 10; ++k) {
        GridFunction u = random_function(g, rng, 2.0);
        GridFunction su = S.apply(u);
        CHECK(modular(su, G) <= modular(u, G) * (1.0 + 1e-12) + 1e-12);
        CHECK(orlicz_norm(su, G) <= orlicz_norm(u, G) + 1e-8);
        CHECK(luxemburg_norm(su, G) <= luxemburg_norm(u, G) + 1e-8);
      }
    }
  }

  SUBCASE("linear functions average to their midpoint value inside") {
    Grid g1 = Grid::interval(0.0, 1.0, 129);
    GridFunction x = GridFunction::sample(g1, [](double t) { return t; });
    const double r1 = 0.1;
    GridFunction sx = steklov(x, r1);
    const double x0 = 0.5;
    const int i0 = 64;
    CHECK(std::abs(sx[i0] - x0) <= g1.spacing(0) * g1.spacing(0) + 1e-12);
  }

  SUBCASE("radius below the spacing is an error") {
    CHECK_THROWS_AS(SteklovOperator(g, 0.5 * g.spacing(0)), std::domain_error);
  }
}

TEST_CASE("poincare inequality") {
  NFunction G = NFunction::power(2.0, 1.0);

  Grid g1 = Grid::interval(0.0, 1.0, 257);
  PoincareReport zero = poincare_check(GridFunction(g1), G);
  CHECK(zero.pass);
  CHECK(zero.lhs == 0.0);

  GridFunction s = GridFunction::sample(g1, [](double t) { return std::sin(M_PI * t); });
  PoincareReport rep = poincare_check(s, G);
  CHECK(rep.pass);
  CHECK(rep.d == doctest::Approx(2.0));
  CHECK(rep.lhs == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(rep.rhs == doctest::Approx(4.0 * M_PI * M_PI * 0.5).epsilon(1e-2));

  Grid g2 = Grid::rectangle(0.0, 1.0, 33, 0.0, 1.0, 33);
  std::mt19937_64 rng(27);
  for (int k = 0; k < 20; ++k) {
    GridFunction u = random_bumps(g2, rng, 2.0);
    CHECK(poincare_check(u, NFunction::power(1.8)).pass);
  }

  GridFunction bad(g1, 1.0);
  CHECK_THROWS_AS(poincare_check(bad, G), std::domain_error);
}

TEST_CASE("luxemburg norm axioms") {
  Grid g = Grid::interval(0.0, 1.0, 129);
  std::mt19937_64 rng(28);
  NFunction G = NFunction::exp_minus();

  for (int k = 0; k < 50; ++k) {
    GridFunction u = random_function(g, rng, 2.0);
    const double alpha = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    GridFunction au = u;
    au *= alpha;
    CHECK(luxemburg_norm(au, G) ==
          doctest::Approx(alpha * luxemburg_norm(u, G)).epsilon(1e-8));
  }
  for (int k = 0; k < 200; ++k) {
    GridFunction u = random_function(g, rng, 2.0);
    GridFunction v = random_function(g, rng, 2.0);
    GridFunction sum = u;
    sum += v;
    CHECK(luxemburg_norm(sum, G) <=
          luxemburg_norm(u, G) + luxemburg_norm(v, G) + 1e-8);
  }
  GridFunction spike(g);
  spike[64] = 1e-9;
  CHECK(luxemburg_norm(spike, G) > 0.0);
}

TEST_CASE("norm monotonicity in the pointwise order") {
  Grid g = Grid::interval(0.0, 1.0, 129);
  std::mt19937_64 rng(29);
  NFunction G = NFunction::power(1.5);
  for (int k = 0; k < 30; ++k) {
    GridFunction u2 = random_function(g, rng, 2.0);
    GridFunction u1 = u2;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < u1.size(); ++i) u1[i] *= U(rng);
    CHECK(luxemburg_norm(u1, G) <= luxemburg_norm(u2, G) + 1e-8);
    CHECK(orlicz_norm(u1, G) <= orlicz_norm(u2, G) + 1e-8);
  }
}

TEST_CASE("norm convergence dominates modular convergence") {
  Grid g = Grid::interval(0.0, 1.0, 129);
  std::mt19937_64 rng(30);
  NFunction G = NFunction::exp_minus();
  GridFunction w = random_function(g, rng, 1.0);
  double prev_rho = kInf;
  for (int n = 1; n <= 24; ++n) {
    GridFunction diff = w;
    diff *= std::pow(0.5, n);
    const double rho = modular(diff, G);
    CHECK(rho <= prev_rho);
    prev_rho = rho;
  }
  CHECK(prev_rho < 1e-8);

  // doubling case (pure power): modular convergence forces norm convergence
  NFunction P = NFunction::power(2.0, 1.0);
  for (int n = 1; n <= 10; ++n) {
    GridFunction diff = w;
    diff *= std::pow(0.5, n);
    CHECK(luxemburg_norm(diff, P) == doctest::Approx(std::sqrt(modular(diff, P))).epsilon(1e-8));
  }

  // without doubling, modular-null sequences need not be norm-null: spikes
  // with rho -> 0 keep luxemburg norm 1/2
  Grid gd = Grid::interval(0.0, 1.0, (1 << 12) + 1);
  for (double n : {2.0, 3.0, 4.0}) {
    const double target_mes = 1.0 / G(2.0 * n);
    GridFunction spike = indicator_cells(gd, [&](double x) { return x < target_mes; });
    const double mes = integrate(spike);
    spike *= n;
    const double rho = modular(spike, G);
    CHECK(rho <= mes * G(n) * 1.01);
    const double lux = luxemburg_norm(spike, G);
    CHECK(lux == doctest::Approx(n / G.inverse(1.0 / mes, 1e-12)).epsilon(1e-8));
    CHECK(lux > 0.4);
  }
}

TEST_CASE("bounded modular families are uniformly integrable") {
  Grid g = Grid::interval(0.0, 1.0, 1025);
  std::mt19937_64 rng(31);
  NFunction G = NFunction::exp_minus();
  NFunction Gs = G.conjugate();

  std::vector<GridFunction> family;
  double C = 0.0;
  for (int k = 0; k < 10; ++k) {
    GridFunction u = random_bumps(g, rng, 2.0);
    C = std::max(C, modular(u, G));
    family.push_back(std::move(u));
  }
  for (const GridFunction& u : family) {
    CHECK(orlicz_norm(u, G) <= modular(u, G) + 1.0 + 1e-8);  // norm below modular + 1
  }
  double prev_bound = kInf;
  for (double width : {0.2, 0.05, 0.01}) {
    GridFunction chi = indicator_cells(g, [&](double x) { return std::abs(x - 0.5) < width; });
    const double bound = (C + 1.0) * orlicz_norm(chi, Gs);
    CHECK(bound < prev_bound);
    prev_bound = bound;
    for (const GridFunction& u : family) {
      GridFunction cut = chi;
      for (int i = 0; i < cut.size(); ++i) cut[i] *= std::abs(u[i]);
      CHECK(integrate(cut) <= bound * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_SUITE_END();
