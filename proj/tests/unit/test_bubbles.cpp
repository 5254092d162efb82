#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bubbletower/bubbles.hpp"
#include "bubbletower/error.hpp"
#include "bubbletower/initial_data.hpp"

using namespace bubbletower;

namespace {

constexpr double kPi = std::numbers::pi;

ModelPtr shared(Model m) { return std::make_shared<const Model>(std::move(m)); }
ModelPtr sphere(int k = 1) { return shared(make_model(ModelKind::SphereEquivariant, k)); }

FieldState soliton_state(const ModelPtr& model, SolitonBranch br, double scale, const RadialGrid& grid) {
  const Soliton q(model, br, scale);
  return FieldState::from_profile(model, grid, [&](double r) { return q.value(r); }, [](double) { return 0.0; });
}

RadialGrid scaled(const RadialGrid& g, double lambda) {
  std::vector<double> nodes = g.nodes();
  for (auto& x : nodes) x *= lambda;
  return RadialGrid::from_nodes(std::move(nodes));
}

FieldState two_bubble(const RadialGrid& grid, double noise) {
  return make_initial_data(sphere(), "builtin:two-bubble:inner=1e-3,outer=1,noise=" + format_double(noise) + ",seed=7",
                           grid);
}

RadialGrid tower_grid() { return RadialGrid::graded(6000, 200.0, 0.9985); }

}  // namespace

TEST_CASE("delta schedule increases below delta/2") {
  const auto s = make_delta_schedule(*sphere());
  CHECK(s.delta == doctest::Approx(kPi / 4));
  CHECK(s.deltas.size() == 8);
  CHECK(s.deltas.front() > 0.0);
  for (std::size_t j = 1; j < s.deltas.size(); ++j) CHECK(s.deltas[j] > s.deltas[j - 1]);
  CHECK(s.deltas.back() < s.delta / 2);
  CHECK(s.at(1) == doctest::Approx(kPi / 16));
  CHECK(s.at(20) == s.deltas.back());
  CHECK(make_delta_schedule(make_model(ModelKind::YangMills)).delta == doctest::Approx(0.5));
  CHECK(make_delta_schedule(make_model(ModelKind::Semilinear6D)).delta == doctest::Approx(1.5));
  CHECK_THROWS_AS(make_delta_schedule(0.0), Error);
}

TEST_CASE("outer scale of a sphere soliton") {
  auto model = sphere();
  const auto grid = RadialGrid::uniform(100000, 100.0);
  const auto s = soliton_state(model, {0, 1}, 1.0, grid);
  const auto r = outer_scale(s, kPi, 0.1);
  REQUIRE(r.has_value());

  // Bisection on |Q(r) - pi| = 0.1.
  double lo = 1.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kPi - 2.0 * std::atan(mid) >= 0.1 ? lo : hi) = mid;
  }
  CHECK(*r == doctest::Approx(lo).epsilon(1e-7));
  CHECK(*r == doctest::Approx(std::tan((kPi - 0.1) / 2)).epsilon(1e-7));
  CHECK(*r == doctest::Approx(19.98).epsilon(1e-3));

  CHECK_FALSE(outer_scale(FieldState::vacuum(model, grid, kPi), kPi, 0.1).has_value());
  CHECK_THROWS_AS(outer_scale(s, kPi, 0.0), Error);
}

TEST_CASE("outer scale is scale covariant") {
  auto model = sphere();
  const auto grid = RadialGrid::graded(3000, 50.0, 0.998);
  const auto s = soliton_state(model, {0, 1}, 1.0, grid);
  for (double lam : {1e-3, 0.37, 42.0}) {
    const auto g2 = scaled(grid, lam);
    const auto r1 = outer_scale(grid, s.psi, kPi, 0.3);
    const auto r2 = outer_scale(g2, s.psi, kPi, 0.3);
    REQUIRE(r1.has_value());
    REQUIRE(r2.has_value());
    CHECK(*r2 == doctest::Approx(lam * *r1).epsilon(1e-14));
  }
}

TEST_CASE("fit recovers an exact soliton scale") {
  auto model = sphere();
  const auto grid = RadialGrid::graded(6000, 10.0, 0.9985);
  const auto s = soliton_state(model, {0, 1}, 0.01, grid);
  const auto fit = fit_bubble(s, 0.01 / 8, 0.08, branches_ending_at(*model, kPi));
  REQUIRE(fit.found);
  CHECK(fit.soliton->branch().offset == 0);
  CHECK(fit.soliton->branch().orientation == 1);
  CHECK(fit.soliton->scale() == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(fit.residual <= 1e-10);
  CHECK(fit.prefit_norm > 1.0);
}

TEST_CASE("fit under small noise") {
  auto model = sphere();
  const auto grid = RadialGrid::graded(6000, 10.0, 0.9985);
  const Soliton q(model, {0, 1}, 0.01);
  const auto noise = smooth_noise(1e-3, 1e-3, 1.0, 3);
  const auto s = FieldState::from_profile(
      model, grid, [&](double r) { return q.value(r) + noise(r); }, [](double) { return 0.0; });
  const auto fit = fit_bubble(s, 0.01 / 8, 0.08, branches_ending_at(*model, kPi));
  REQUIRE(fit.found);
  CHECK(fit.soliton->scale() == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("fit on a vacuum window finds no bubble") {
  auto model = sphere();
  const auto grid = RadialGrid::uniform(2000, 10.0);
  const auto fit = fit_bubble(FieldState::vacuum(model, grid, kPi), 0.5, 4.0, branches_ending_at(*model, kPi));
  CHECK_FALSE(fit.found);
  CHECK_FALSE(fit.reason.empty());
  CHECK_THROWS_AS(fit_bubble(FieldState::vacuum(model, grid, kPi), 0.5, 4.0, {}), Error);
  CHECK_THROWS_AS(fit_bubble(FieldState::vacuum(model, grid, kPi), 4.0, 0.5, branches_ending_at(*model, kPi)), Error);
}

TEST_CASE("single soliton decomposes exactly") {
  auto model = sphere();
  const auto grid = tower_grid();
  const auto s = soliton_state(model, {0, 1}, 0.5, grid);
  const auto dec = decompose(s);
  REQUIRE(dec.J() == 1);
  CHECK(dec.bubbles[0].soliton.scale() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(dec.norms.sup_b0 <= 1e-8);
  CHECK(dec.norms.h_cross_l2 <= 1e-8);
  CHECK(dec.norms.l2_b1 == 0.0);
  for (double d : dec.norms.dyadic) CHECK(d <= 1e-8);
  CHECK(dec.chain_closed);
  CHECK(dec.exterior == doctest::Approx(kPi));
  CHECK(dec.interior == doctest::Approx(0.0));
}

TEST_CASE("vacuum decomposes to nothing") {
  const auto grid = RadialGrid::uniform(1000, 10.0);
  const auto dec = decompose(FieldState::vacuum(sphere(), grid, kPi));
  CHECK(dec.J() == 0);
  CHECK(dec.norms.sup_b0 == 0.0);
  CHECK(dec.norms.h_cross_l2 == 0.0);
  CHECK(dec.events.size() == 1);
}

TEST_CASE("two-bubble tower") {
  const auto grid = tower_grid();
  const auto s = two_bubble(grid, 1e-3);
  const auto dec = decompose(s);
  REQUIRE(dec.J() == 2);
  CHECK(dec.bubbles[0].soliton.scale() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(dec.bubbles[1].soliton.scale() == doctest::Approx(1e-3).epsilon(0.05));
  CHECK(dec.norms.relative <= 1e-2);
  CHECK(dec.scales_ratio.size() == 1);
  CHECK(dec.scales_ratio[0] <= 0.125);

  // Chain: Q_1(inf) = exterior vacuum, Q_2(inf) = Q_1(0), Q_2(0) = psi(0).
  CHECK(dec.bubbles[0].soliton.at_infinity() == doctest::Approx(kPi));
  CHECK(dec.bubbles[1].soliton.at_infinity() == doctest::Approx(dec.bubbles[0].soliton.at_origin()));
  CHECK(dec.bubbles[1].soliton.at_origin() == doctest::Approx(s.psi.front()));
  CHECK(dec.chain_closed);

  CHECK(dec.budget.within);
  CHECK(dec.budget.mismatch <= 0.05);
  CHECK(dec.budget.extraction_energy.size() == 2);
  CHECK(dec.budget.C <= 1.0);
  MESSAGE("relative residual " << dec.norms.relative << ", energy mismatch " << dec.budget.mismatch);

  const auto again = decompose(anchored_residual(dec));
  CHECK(again.J() == 0);
}

TEST_CASE("decomposition is scale covariant") {
  const auto grid = tower_grid();
  const auto s = two_bubble(grid, 1e-3);
  const auto base = decompose(s);
  REQUIRE(base.J() == 2);
  for (double lam : {0.01, 30.0}) {
    FieldState t = s;
    t.grid = scaled(grid, lam);
    const auto dec = decompose(t);
    REQUIRE(dec.J() == 2);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(dec.scales()[j] == doctest::Approx(lam * base.scales()[j]).epsilon(1e-6));
  }
}

TEST_CASE("separation cap stops close bubbles") {
  auto model = sphere();
  const auto grid = tower_grid();
  const Soliton qo(model, {0, 1}, 1.0), qi(model, {0, 1}, 0.3);
  const auto s = FieldState::from_profile(
      model, grid, [&](double r) { return qo.value(r) - kPi + qi.value(r); }, [](double) { return 0.0; });
  const auto dec = decompose(s);
  CHECK(dec.J() <= 1);
  CHECK_FALSE(dec.chain_closed);
  CHECK_FALSE(dec.events.empty());
}

TEST_CASE("yang-mills and semilinear bubbles") {
  const auto grid = tower_grid();
  auto ym = shared(make_model(ModelKind::YangMills));
  const auto dy = decompose(soliton_state(ym, {0, -1}, 0.2, grid));
  REQUIRE(dy.J() == 1);
  CHECK(dy.bubbles[0].soliton.branch().orientation == -1);
  CHECK(dy.bubbles[0].soliton.scale() == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(dy.norms.h_cross_l2 <= 1e-8);

  auto semi = shared(make_model(ModelKind::Semilinear6D));
  const auto ds = decompose(soliton_state(semi, {0, -1}, 0.5, grid));
  REQUIRE(ds.J() == 1);
  CHECK(ds.bubbles[0].soliton.branch().orientation == -1);
  CHECK(ds.bubbles[0].soliton.scale() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(ds.norms.sup_b0 <= 1e-8);
}

TEST_CASE("residual norms of a known bump") {
  auto model = sphere();
  const auto grid = RadialGrid::uniform(400000, 12.0);
  const double c = 0.05;
  const Soliton q(model, {0, 1}, 1.0);
  const auto s = FieldState::from_profile(
      model, grid, [&](double r) { return q.value(r) + c * r * std::exp(-r * r); }, [](double) { return 0.0; });
  BubbleDecomposition dec;
  dec.model = model;
  dec.residual = bubble_residual(s, {q});
  dec.bubbles.push_back({q, 0.0, 0.0, 0.0, 0.0, 0.0});
  const auto n = residual_norms(dec);
  // int ((c e^{-r^2}(1 - 2r^2))^2 + (c e^{-r^2})^2) r dr = c^2 / 2, up to the tail at R_max.
  CHECK(n.h_b0 * n.h_b0 == doctest::Approx(c * c / 2).epsilon(1e-8));
  CHECK(n.sup_b0 == doctest::Approx(c / std::sqrt(2.0 * std::exp(1.0))).epsilon(1e-6));
  CHECK(n.dyadic.size() == 1);
}

TEST_CASE("annulus virial split") {
  auto model = sphere();
  const auto grid = RadialGrid::graded(8000, 2000.0, 0.9985);

  SUBCASE("single soliton is harmonic-virial neutral") {
    const auto s = soliton_state(model, {0, 1}, 1.0, grid);
    const auto dec = decompose(s);
    const auto v = annulus_virial_split(s, dec);
    double scale = 0.0;
    for (const auto& reg : v.regions) scale += std::abs(reg.fprime_term) + std::abs(reg.f2_term);
    CHECK(v.regions.size() == 3);
    CHECK(std::abs(v.total) <= 1e-4 * scale);
    CHECK(std::abs(v.soliton_total - v.total) <= 1e-8 * scale);
  }
  SUBCASE("vacuum") {
    const auto s = FieldState::vacuum(model, grid, kPi);
    const auto v = annulus_virial_split(s, decompose(s));
    CHECK(std::abs(v.total) <= 1e-20);
    CHECK(v.regions.size() == 1);
    CHECK(std::isnan(v.coercivity));
  }
  SUBCASE("soliton plus residual bump") {
    const Soliton q(model, {0, 1}, 1.0);
    const auto s = FieldState::from_profile(
        model, grid, [&](double r) { return q.value(r) + 0.05 * r * r * std::exp(-r * r); },
        [](double) { return 0.0; });
    const auto dec = decompose(s);
    REQUIRE(dec.J() == 1);
    const auto v = annulus_virial_split(s, dec);
    CHECK(v.residual_h2 > 0.0);
    CHECK(std::isfinite(v.coercivity));
    MESSAGE("observed coercivity constant " << v.coercivity);
  }
}

TEST_CASE("two-bubble regions tile the grid") {
  const auto grid = tower_grid();
  const auto s = two_bubble(grid, 0.0);
  const auto dec = decompose(s);
  REQUIRE(dec.J() == 2);
  const auto v = annulus_virial_split(s, dec);
  REQUIRE(v.regions.size() == 5);
  std::vector<std::pair<double, double>> spans;
  for (const auto& reg : v.regions) spans.emplace_back(reg.r_lo, reg.r_hi);
  std::sort(spans.begin(), spans.end());
  CHECK(spans.front().first == 0.0);
  CHECK(spans.back().second == doctest::Approx(grid.r_max()));
  for (std::size_t i = 1; i < spans.size(); ++i) CHECK(spans[i].first == doctest::Approx(spans[i - 1].second));
}

TEST_CASE("energy concentration floor") {
  auto model = sphere();
  const auto grid = RadialGrid::uniform(40000, 20.0);

  SUBCASE("vacuum") {
    const auto f = energy_concentration_floor(FieldState::vacuum(model, grid, 0.0), 1.0, 2.0);
    CHECK(f.delta == 0.0);
    CHECK(f.floor == 0.0);
    CHECK(f.holds);
  }
  SUBCASE("soliton at r0 = 1") {
    const auto f = energy_concentration_floor(soliton_state(model, {0, 1}, 1.0, grid), 1.0, 2.0);
    CHECK(f.delta == doctest::Approx(kPi / 2));
    // 2 int Q_r^2 r dr over [1/2, 2] = 4 (1/(1 + 1/4) - 1/(1 + 4)).
    CHECK(f.annulus_energy == doctest::Approx(2.4).epsilon(1e-6));
    CHECK(f.hoelder_bound == doctest::Approx(kPi * kPi / 4 / (8 * std::log(2.0))));
    CHECK(f.holds);
  }
  SUBCASE("log-linear ramp saturates the Hoelder step") {
    // psi moves by (1 + eps) delta/2 across [r0/gamma, gamma r0] at constant r psi_r.
    const double delta = 0.1, L = 1.0, eps = 0.01;
    const double c = 0.5 * delta * (1 + eps) / (2 * L);
    const auto s = FieldState::from_profile(
        model, grid, [&](double r) { return delta + c * std::clamp(std::log(r), -L, L); },
        [](double) { return 0.0; });
    const auto f = energy_concentration_floor(s, 1.0, std::exp(L));
    CHECK(f.delta == doctest::Approx(delta));
    CHECK(f.holds);
    CHECK(f.floor == f.hoelder_bound);
    CHECK(f.hoelder_margin >= 1.0);
    CHECK(f.hoelder_margin < 2.0);
  }
  CHECK_THROWS_AS(energy_concentration_floor(FieldState::vacuum(model, grid, 0.0), 1.0, 1.0), Error);
  CHECK_THROWS_AS(energy_concentration_floor(FieldState::vacuum(model, grid, 0.0), 15.0, 2.0), Error);
  auto semi = shared(make_model(ModelKind::Semilinear6D));
  CHECK_THROWS_AS(energy_concentration_floor(FieldState::vacuum(semi, grid, 0.0), 1.0, 2.0), Error);
}

TEST_CASE("G-modulus gap is bounded by half the window energy") {
  auto model = sphere();
  const auto grid = RadialGrid::uniform(4000, 10.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(-3.0, 3.0), pos(0.05, 9.5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto noise = smooth_noise(amp(rng), 0.1, 5.0, static_cast<unsigned>(trial + 1));
    const auto s = FieldState::from_profile(
        model, grid, [&](double r) { return noise(r) * r / (1 + r); }, [](double) { return 0.0; });
    double r1 = pos(rng), r2 = pos(rng);
    if (r1 > r2) std::swap(r1, r2);
    if (r2 - r1 < 1e-3) continue;
    CHECK(g_modulus_gap(s, r1, r2) <= 0.5 * energy(s, r1, r2).total + 1e-12);
  }
}
