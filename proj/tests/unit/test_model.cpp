#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <vector>

#include <boost/math/differentiation/finite_difference.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bubbletower/error.hpp"
#include "bubbletower/model.hpp"

using namespace bubbletower;
using boost::math::differentiation::finite_difference_derivative;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double kPi = std::numbers::pi;

ModelPtr shared(Model m) { return std::make_shared<const Model>(std::move(m)); }

std::vector<double> log_probe(double lo, double hi, int n) {
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return r;
}

// Energy of a soliton by quadrature of Q_r^2 + g(Q)^2/r^2 against r dr, with
// Q_r taken by numerical differentiation of the profile.
double quadrature_energy(const Soliton& s) {
  const Model& m = s.model();
  auto density = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double qr = finite_difference_derivative([&](double x) { return s.value(x); }, r);
    const double g = m.g(s.value(r));
    return (qr * qr + g * g / (r * r)) * r;
  };
  return gauss_kronrod<double, 61>::integrate(density, 0.0, 1.0, 20, 1e-12) +
         gauss_kronrod<double, 61>::integrate(density, 1.0, std::numeric_limits<double>::infinity(),
                                              20, 1e-12);
}

Model custom(const char* g, const char* gp, const char* gpp, double bracket) {
  return make_custom_model(
      {Expression::parse(g), Expression::parse(gp), Expression::parse(gpp), std::nullopt, std::nullopt, "t"},
      bracket);
}

}  // namespace

TEST_CASE("sphere model callbacks") {
  const Model m = make_model(ModelKind::SphereEquivariant, 1);
  CHECK(m.g(kPi / 2) == doctest::Approx(1.0));
  CHECK(std::abs(m.f(kPi / 2)) < 1e-15);
  bool has0 = false, hasPi = false;
  for (const auto& v : m.vacua()) {
    if (v.value == 0.0) {
      has0 = true;
      CHECK(v.slope == 1.0);
    }
    if (std::abs(v.value - kPi) < 1e-15) {
      hasPi = true;
      CHECK(v.slope == -1.0);
    }
  }
  CHECK(has0);
  CHECK(hasPi);
}

TEST_CASE("yang-mills substitution") {
  const Model m = make_model(ModelKind::YangMills);
  CHECK(m.f(0.0) == 0.0);
  CHECK(m.f(1.0) == 0.0);
  CHECK(m.f(0.5) == doctest::Approx(-0.75));
}

TEST_CASE("G matches adaptive quadrature of |g|") {
  const std::vector<Model> models = {make_model(ModelKind::SphereEquivariant, 1),
                                     make_model(ModelKind::SphereEquivariant, 2),
                                     make_model(ModelKind::SphereEquivariant, 3),
                                     make_model(ModelKind::YangMills),
                                     make_model(ModelKind::Semilinear6D)};
  for (const auto& m : models) {
    for (double x : {-7.5, -3.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.0, kPi, 5.9, 9.0}) {
      CAPTURE(m.name());
      CAPTURE(x);
      auto abs_g = [&](double y) { return std::abs(m.g(y)); };
      const double q = x >= 0 ? gauss_kronrod<double, 61>::integrate(abs_g, 0.0, x, 20, 1e-14)
                              : -gauss_kronrod<double, 61>::integrate(abs_g, x, 0.0, 20, 1e-14);
      CHECK(m.G(x) == doctest::Approx(q).epsilon(1e-10));
    }
  }
  CHECK(make_model(ModelKind::SphereEquivariant, 2).G(kPi) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(make_model(ModelKind::YangMills).G(2.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("f = g g', f' = g'^2 + g g'' and F' = f on a dense probe") {
  struct Case {
    Model m;
    double lo, hi;
  };
  // The 6-d square root is real only for |psi| < 6.
  const std::vector<Case> cases = {{make_model(ModelKind::SphereEquivariant, 1), -10, 10},
                                   {make_model(ModelKind::SphereEquivariant, 3), -10, 10},
                                   {make_model(ModelKind::YangMills), -3, 3},
                                   {make_model(ModelKind::Semilinear6D), -5.9, 5.9}};
  for (const auto& c : cases) {
    double worst_f = 0.0, worst_fp = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double x = c.lo + (c.hi - c.lo) * i / 10000.0;
      const double g = c.m.g(x), gp = c.m.g_prime(x), gpp = c.m.g_second(x);
      const double scale = std::max(1.0, std::abs(c.m.f(x)));
      worst_f = std::max(worst_f, std::abs(c.m.f(x) - g * gp) / scale);
      worst_fp = std::max(worst_fp, std::abs(c.m.f_prime(x) - (gp * gp + g * gpp)) /
                                        std::max(1.0, std::abs(c.m.f_prime(x))));
    }
    CAPTURE(c.m.name());
    CHECK(worst_f <= 1e-12);
    CHECK(worst_fp <= 1e-12);
  }
  // F(psi) = 2 psi^2 - |psi|^3 / 3 differentiates to f; potential = 2F.
  const Model s = make_model(ModelKind::Semilinear6D);
  for (int i = 0; i <= 10000; ++i) {
    const double x = -9.0 + 18.0 * i / 10000.0;
    // The high-order difference stencil straddles the kink of |psi|^3 near 0.
    if (std::abs(x) < 0.05) continue;
    auto F = [](double y) { return 2 * y * y - std::pow(std::abs(y), 3) / 3; };
    CHECK(s.potential(x) == doctest::Approx(2 * F(x)).epsilon(1e-13));
    const double dF = finite_difference_derivative(F, x);
    CHECK(std::abs(dF - s.f(x)) <= 1e-9 * std::max(1.0, std::abs(s.f(x))));
  }
}

TEST_CASE("soliton examples") {
  auto sphere = shared(make_model(ModelKind::SphereEquivariant, 1));
  auto ym = shared(make_model(ModelKind::YangMills));
  auto sl = shared(make_model(ModelKind::Semilinear6D));
  CHECK(make_soliton(sl, {0, 1}, 1.0).native_value(0.0) == 576.0);
  const Soliton q = make_soliton(sphere, {0, 1}, 1.0);
  CHECK(q.value(1.0) == doctest::Approx(kPi / 2));
  CHECK(q.value(0.0) == 0.0);
  CHECK(q.at_infinity() == doctest::Approx(kPi));
  CHECK(q.value(1e12) == doctest::Approx(kPi));
  const Soliton y = make_soliton(ym, {0, 1}, 1.0);
  CHECK(y.value(1.0) == 0.0);
  CHECK(y.value(0.0) == 1.0);
  CHECK(y.at_infinity() == -1.0);

  // Scale covariance.
  const Soliton q3 = make_soliton(sphere, {2, -1}, 0.25);
  for (double r : {0.01, 0.3, 4.0}) CHECK(q3.value(r) == doctest::Approx(q3.rescaled(1.0).value(r / 0.25)));
  const Soliton w = make_soliton(sl, {0, -1}, 0.1);
  CHECK(w.native_value(0.05) == doctest::Approx(-ground_state_W(0.5) / 0.01));
  CHECK(w.value(0.05) == doctest::Approx(0.05 * 0.05 * w.native_value(0.05)));

  CHECK_THROWS_AS(make_soliton(sphere, {0, 1}, 0.0), Error);
  CHECK_THROWS_AS(make_soliton(ym, {1, 1}, 1.0), Error);
  CHECK_THROWS_AS(make_soliton(sphere, {0, 2}, 1.0), Error);
}

TEST_CASE("soliton energies agree with quadrature of the energy density") {
  const double expected[] = {4.0, 8.0, 12.0};
  for (int k = 1; k <= 3; ++k) {
    auto m = shared(make_model(ModelKind::SphereEquivariant, k));
    const Soliton q = make_soliton(m, {0, 1}, 1.0);
    const double e = soliton_energy(*m, q);
    CHECK(e == doctest::Approx(expected[k - 1]).epsilon(1e-14));
    CHECK(std::abs(e - quadrature_energy(q)) <= 1e-6 * e);
    const Soliton shifted = make_soliton(m, {3, -1}, 2.5);
    CHECK(soliton_energy(*m, shifted) == doctest::Approx(e).epsilon(1e-12));
  }
  auto ym = shared(make_model(ModelKind::YangMills));
  const Soliton y = make_soliton(ym, {0, 1}, 1.0);
  CHECK(soliton_energy(*ym, y) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(soliton_energy(*ym, y) - quadrature_energy(y)) <= 1e-6 * 8.0 / 3.0);
  auto density = [](double r) { return 32 * r * r * r / std::pow(1 + r * r, 4); };
  CHECK(gauss_kronrod<double, 61>::integrate(density, 0.0, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(8.0 / 3.0).epsilon(1e-10));

  auto sl = shared(make_model(ModelKind::Semilinear6D));
  CHECK_THROWS_AS(soliton_energy(*sl, make_soliton(sl, {0, 1}, 1.0)), Error);
}

TEST_CASE("closed-form soliton residuals") {
  const auto three = std::vector<double>{0.1, 1.0, 10.0};
  const auto wide = log_probe(1e-3, 1e3, 601);
  std::vector<Soliton> sols;
  for (int k = 1; k <= 3; ++k) {
    auto m = shared(make_model(ModelKind::SphereEquivariant, k));
    sols.push_back(make_soliton(m, {0, 1}, 1.0));
    sols.push_back(make_soliton(m, {-1, -1}, 0.01));
  }
  auto ym = shared(make_model(ModelKind::YangMills));
  sols.push_back(make_soliton(ym, {0, 1}, 1.0));
  sols.push_back(make_soliton(ym, {0, -1}, 30.0));
  auto sl = shared(make_model(ModelKind::Semilinear6D));
  sols.push_back(make_soliton(sl, {0, 1}, 1.0));
  sols.push_back(make_soliton(sl, {0, -1}, 0.2));
  for (const auto& s : sols) {
    CAPTURE(s.model().name());
    CAPTURE(s.scale());
    const auto a = soliton_residuals(s, three);
    CHECK(a.ode <= 1e-10);
    CHECK(a.bogomolny <= 1e-10);
    const auto b = soliton_residuals(s, wide);
    CHECK(b.ode <= 1e-8);
    CHECK(b.bogomolny <= 1e-8);
    // Adjacency: no vacuum strictly between Q(0) and Q(inf).
    const double lo = std::min(s.at_origin(), s.at_infinity());
    const double hi = std::max(s.at_origin(), s.at_infinity());
    for (const auto& v : s.model().vacua()) CHECK(!(v.value > lo + 1e-12 && v.value < hi - 1e-12));
  }
}

TEST_CASE("hand-derived first-order relations") {
  auto sphere = shared(make_model(ModelKind::SphereEquivariant, 1));
  const Soliton q = make_soliton(sphere, {0, 1}, 1.0);
  auto ym = shared(make_model(ModelKind::YangMills));
  const Soliton y = make_soliton(ym, {0, 1}, 1.0);
  for (double r : {0.1, 1.0, 10.0}) {
    CHECK(r * q.dr(r) == doctest::Approx(2 * r / (1 + r * r)).epsilon(1e-14));
    CHECK(r * q.dr(r) == doctest::Approx(std::sin(q.value(r))).epsilon(1e-12));
    CHECK(r * y.dr(r) == doctest::Approx(-4 * r * r / std::pow(1 + r * r, 2)).epsilon(1e-14));
    CHECK(r * y.dr(r) == doctest::Approx(-ym->g(y.value(r))).epsilon(1e-12));
  }
}

TEST_CASE("ground state solves -Laplace W = W^2 in six dimensions") {
  // Radial Laplacian at the origin is 6 W''(0); W''(0) from an even difference.
  const double h = 1e-4;
  const double w0 = ground_state_W(0.0);
  const double lap0 = 6.0 * 2.0 * (ground_state_W(h) - w0) / (h * h);
  CHECK(std::abs(lap0 + w0 * w0) <= 1e-5 * w0 * w0);
  for (double r : {0.05, 0.2, 1.0, 3.0}) {
    const double d = 1e-4 * r;
    const double wpp = (ground_state_W(r + d) - 2 * ground_state_W(r) + ground_state_W(r - d)) / (d * d);
    const double wp = (ground_state_W(r + d) - ground_state_W(r - d)) / (2 * d);
    const double lap = wpp + 5.0 * wp / r;
    CHECK(std::abs(lap + ground_state_W(r) * ground_state_W(r)) <=
          1e-5 * std::max(1.0, ground_state_W(r) * ground_state_W(r)));
    CHECK(ground_state_W_dr(r) == doctest::Approx(wp).epsilon(1e-7));
  }
}

TEST_CASE("finite-difference residual path agrees with the closed form") {
  auto m = shared(make_model(ModelKind::SphereEquivariant, 2));
  const Soliton q = make_soliton(m, {1, 1}, 0.7);
  const auto probe = log_probe(1e-2, 1e2, 41);
  const auto fd = profile_residuals(*m, [&](double r) { return q.value(r); }, probe);
  CHECK(fd.ode <= 1e-6);
  CHECK(fd.bogomolny <= 1e-8);
  const auto bad = profile_residuals(*m, [&](double r) { return q.value(1.1 * r) + 0.01; }, probe);
  CHECK(bad.bogomolny > 1e-3);
}

TEST_CASE("assumption report") {
  const auto s = check_assumptions(make_model(ModelKind::SphereEquivariant, 1), 4.0);
  REQUIRE(s.vacua.size() == 3);
  CHECK(s.vacua[0].vacuum.value == doctest::Approx(-kPi));
  CHECK(s.vacua[1].vacuum.value == 0.0);
  CHECK(s.vacua[2].vacuum.value == doctest::Approx(kPi));
  for (const auto& v : s.vacua) {
    CHECK(std::abs(v.vacuum.slope) == 1.0);
    CHECK(v.vacuum.curvature == 0.0);
  }
  CHECK(s.a1_growth);
  CHECK(s.a2_discrete);
  CHECK(s.a3);
  CHECK(s.pass());

  const auto y = check_assumptions(make_model(ModelKind::YangMills), 2.0);
  REQUIRE(y.vacua.size() == 2);
  CHECK(y.vacua[0].vacuum.slope == 2.0);
  CHECK(y.vacua[1].vacuum.slope == -2.0);
  CHECK(y.a3);
  CHECK(y.pass());

  const auto c = check_assumptions(custom("x^2", "2*x", "2", 1.0), 1.0);
  REQUIRE(c.vacua.size() == 1);
  CHECK(std::abs(c.vacua[0].vacuum.value) < 1e-6);
  CHECK(c.vacua[0].vacuum.slope == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_FALSE(c.a3_prime);
  CHECK_FALSE(c.pass());

  // x - x^3: unit slope at 0 with g''(0) = 0, slope -2 at the outer zeros.
  const auto q = check_assumptions(custom("x - x^3", "1 - 3*x^2", "-6*x", 3.0), 3.0);
  REQUIRE(q.vacua.size() == 3);
  CHECK(q.vacua[1].vacuum.slope == doctest::Approx(1.0));
  CHECK(q.vacua[1].flat_if_unit);
  CHECK(q.vacua[0].vacuum.slope == doctest::Approx(-2.0));
  CHECK(q.a3_prime);
  const auto bent = check_assumptions(custom("x + x^2", "1 + 2*x", "2", 3.0), 3.0);
  CHECK_FALSE(bent.a3_prime);
}

TEST_CASE("vacuum enumeration recovers the analytic zeros") {
  const Model m = make_model(ModelKind::SphereEquivariant, 2);
  const auto found = enumerate_vacua(m, 10.0);
  REQUIRE(found.size() == m.vacua().size());
  for (std::size_t i = 0; i < found.size(); ++i)
    CHECK(std::abs(found[i].value - m.vacua()[i].value) <= 1e-11);
  const Model y = make_model(ModelKind::YangMills);
  const auto fy = enumerate_vacua(y, 10.0);
  REQUIRE(fy.size() == 2);
  CHECK(std::abs(fy[0].value + 1.0) <= 1e-11);
  CHECK(std::abs(fy[1].value - 1.0) <= 1e-11);
}

TEST_CASE("custom models") {
  const Model m = custom("sin(x)", "cos(x)", "-sin(x)", 4.0);
  CHECK(m.vacua().size() == 3);
  CHECK(m.G(kPi) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(m.f(0.3) == doctest::Approx(std::sin(0.3) * std::cos(0.3)));

  try {
    (void)make_custom_model({Expression::parse("sin(x)"), Expression::parse("cos(x)"),
                             Expression::parse("-sin(x)"), Expression::parse("sin(x)*cos(x)*1.001"),
                             std::nullopt, "bad"},
                            4.0);
    FAIL("expected inconsistency");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentModel);
  }

  const char* path = "test_model_manifest.ini";
  {
    std::ofstream out(path);
    out << "g = 1 - psi^2\ng_prime = -2*psi\ng_second = -2\nf = -2*psi*(1 - psi^2)\nbracket = 3\n";
  }
  const Model loaded = parse_model(std::string("custom:") + path);
  CHECK(loaded.kind() == ModelKind::Custom);
  CHECK(loaded.vacua().size() == 2);
  CHECK(loaded.G(2.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(loaded.name() == std::string("custom:") + path);
  std::remove(path);
  CHECK_THROWS_AS(parse_model("custom:/nonexistent/model.ini"), Error);
}

TEST_CASE("model strings") {
  CHECK(parse_model("sphere:k=3").k() == 3);
  CHECK(parse_model("sphere:k=3").name() == "sphere:k=3");
  CHECK(parse_model("yang-mills").kind() == ModelKind::YangMills);
  CHECK(parse_model("semilinear6d").k() == 2);
  for (const char* bad : {"sphere", "sphere:k=0", "sphere:k=x", "ym", ""}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_model(bad), Error);
  }
}
