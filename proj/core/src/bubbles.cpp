#include "bubbletower/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bubbletower/error.hpp"

namespace bubbletower {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGroundStatePeak = 6.0;

// Same stencils as radial_derivative, at one node.
double deriv_at(const RadialGrid& g, const std::vector<double>& v, std::size_t i) {
  const std::size_t n = g.size();
  auto one_sided = [&](std::size_t a, std::size_t b, std::size_t c) {
    const double x0 = g[a], x1 = g[b], x2 = g[c];
    const double h1 = x1 - x0, h2 = x2 - x0;
    return (v[b] * h2 * h2 - v[c] * h1 * h1 - v[a] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h2 - h1));
  };
  if (i == 0) return one_sided(0, 1, 2);
  if (i + 1 == n) return one_sided(n - 1, n - 2, n - 3);
  const double hm = g[i] - g[i - 1], hp = g[i + 1] - g[i];
  return (hm * hm * (v[i + 1] - v[i]) + hp * hp * (v[i] - v[i - 1])) / (hm * hp * (hm + hp));
}

// H inner product int (u_r w_r + u w / r^2) r dr over [a, b] for nodal arrays.
// Only nodes in [first(), last()] are read.
class WindowNorm {
 public:
  WindowNorm(const RadialGrid& grid, double a, double b) : grid_(grid), a_(a), b_(b) {
    const std::size_t n = grid.size();
    ia_ = grid.locate(a);
    ib_ = std::min(grid.locate(b) + 1, n - 1);
    first_ = ia_ >= 2 ? ia_ - 2 : 0;
    last_ = std::min(n - 1, ib_ + 2);
    if (last_ + 1 == n) first_ = std::min(first_, n - 3);
    dens_.assign(n, 0.0);
  }

  std::size_t first() const { return first_; }
  std::size_t last() const { return last_; }

  double inner(const std::vector<double>& u, const std::vector<double>& w) {
    for (std::size_t i = ia_; i <= ib_; ++i) {
      const double r = grid_[i];
      const double ur = deriv_at(grid_, u, i), wr = deriv_at(grid_, w, i);
      dens_[i] = r > 0.0 ? ur * wr + u[i] * w[i] / (r * r) : 2.0 * ur * wr;
    }
    return integrate_r(grid_, dens_, a_, b_);
  }

 private:
  const RadialGrid& grid_;
  double a_, b_;
  std::size_t ia_ = 0, ib_ = 0, first_ = 0, last_ = 0;
  std::vector<double> dens_;
};

struct ScaleFit {
  double x = 0.0;  // log lambda
  double value = std::numeric_limits<double>::infinity();
};

ScaleFit fit_branch(const ModelPtr& model, const RadialGrid& grid, const std::vector<double>& v, WindowNorm& norm,
                    SolitonBranch branch, const FitOptions& opt, std::vector<double>& d, std::vector<double>& jac) {
  auto residual = [&](double x) {
    const Soliton q(model, branch, std::exp(x));
    for (std::size_t i = norm.first(); i <= norm.last(); ++i) d[i] = v[i] - q.value(grid[i]);
    return norm.inner(d, d);
  };

  const double lo = std::log(std::max(grid.h_min(), 1e-300)), hi = std::log(grid.r_max());
  const auto steps = std::max<std::size_t>(
      4, static_cast<std::size_t>(std::ceil((hi - lo) / std::log(10.0) * opt.scan_per_decade)));
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= steps; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps);
    const double f = residual(x);
    if (f < best_value) {
      best_value = f;
      best = k;
    }
  }
  auto lattice = [&](std::size_t k) { return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps); };
  double a = lattice(best == 0 ? 0 : best - 1), b = lattice(std::min(best + 1, steps));

  ScaleFit out{lattice(best), best_value};
  auto consider = [&](double x, double f) {
    if (f < out.value || (f == out.value && x < out.x)) out = {x, f};
  };

  // Golden section in log lambda.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), e = a + inv_phi * (b - a);
  double fc = residual(c), fe = residual(e);
  consider(c, fc);
  consider(e, fe);
  while (b - a > opt.rel_tol) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = residual(c);
      consider(c, fc);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = residual(e);
      consider(e, fe);
    }
  }

  // Gauss-Newton polish: d(x + s) ~ d(x) + s r Q_r.
  for (int it = 0; it < 8; ++it) {
    const double f0 = residual(out.x);
    const Soliton q(model, branch, std::exp(out.x));
    for (std::size_t i = norm.first(); i <= norm.last(); ++i) jac[i] = grid[i] * q.dr(grid[i]);
    const double jj = norm.inner(jac, jac);
    if (!(jj > 0.0)) break;
    const double s = std::clamp(-norm.inner(d, jac) / jj, -0.25, 0.25);
    if (!std::isfinite(s) || std::abs(s) < 1e-16 || out.x + s < lo || out.x + s > hi) break;
    const double f1 = residual(out.x + s);
    if (!(f1 < f0)) break;
    out = {out.x + s, f1};
  }
  return out;
}

// Largest rho with |Q(rho) - m| >= delta for the unit-scale soliton.
double unit_outer_radius(const ModelPtr& model, SolitonBranch branch, double m, double delta) {
  const Soliton q(model, branch, 1.0);
  auto dev = [&](double x) { return std::abs(q.value(x) - m) - delta; };
  double hi = 1.0;
  for (int guard = 0; dev(hi) >= 0.0; ++guard) {
    if (guard > 200) fail(ErrorCode::NumericalFailure, "soliton tail does not fall below delta");
    hi *= 2.0;
  }
  double lo = hi / 2.0;
  for (int guard = 0; dev(lo) < 0.0; ++guard) {
    if (guard > 200) fail(ErrorCode::NumericalFailure, "soliton never reaches delta from its exterior value");
    hi = lo;
    lo /= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dev(mid) >= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double quadratic_energy(const FieldState& res, double slope, bool native) {
  const auto& grid = res.grid;
  const auto br = radial_derivative(grid, res.psi);
  std::vector<double> dens(res.size());
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const double r = grid[i], b = res.psi[i], b1 = res.psit[i];
    if (native) {
      const double q = i == 0 ? -br[0] : br[i] - 2.0 * b / r;
      dens[i] = q * q + b1 * b1;
    } else {
      const double w = i == 0 ? br[0] : b / r;
      dens[i] = br[i] * br[i] + b1 * b1 + slope * slope * w * w;
    }
  }
  const double e = integrate_r(grid, dens, 0.0, grid.r_max());
  return native ? 0.5 * std::pow(std::numbers::pi, 3) * e : e;
}

FieldState without_velocity(FieldState s) {
  std::fill(s.psit.begin(), s.psit.end(), 0.0);
  return s;
}

// f'(v) v_r^2 and f(v)^2 / r^2 at the nodes, with the origin limit (f'(v0) v_r(0))^2.
std::pair<std::vector<double>, std::vector<double>> virial_densities(const Model& model, const RadialGrid& grid,
                                                                      const std::vector<double>& v) {
  const auto vr = radial_derivative(grid, v);
  std::vector<double> fp(v.size()), f2(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = grid[i];
    fp[i] = model.f_prime(v[i]) * vr[i] * vr[i];
    if (r > 0.0) {
      const double f = model.f(v[i]);
      f2[i] = f * f / (r * r);
    } else {
      const double lim = model.f_prime(v[i]) * vr[i];
      f2[i] = lim * lim;
    }
  }
  return {std::move(fp), std::move(f2)};
}

std::vector<double> soliton_nodes(const Soliton& q, const RadialGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = q.value(grid[i]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double DeltaSchedule::at(std::size_t j) const {
  require(j >= 1 && !deltas.empty(), "delta schedule levels start at 1");
  return deltas[std::min(j, deltas.size()) - 1];
}

DeltaSchedule make_delta_schedule(double delta, std::size_t levels) {
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  require(levels >= 1, "delta schedule needs at least one level");
  DeltaSchedule s;
  s.delta = delta;
  for (std::size_t j = 1; j <= levels; ++j) s.deltas.push_back(0.5 * delta * (1.0 - std::ldexp(1.0, -static_cast<int>(j))));
  return s;
}

DeltaSchedule make_delta_schedule(const Model& model, std::size_t levels) {
  if (model.kind() == ModelKind::Semilinear6D) return make_delta_schedule(0.25 * kGroundStatePeak, levels);
  const double gap = model.min_vacuum_gap();
  if (!std::isfinite(gap))
    fail(ErrorCode::InconsistentModel, "model " + model.name() + " has fewer than two vacua in its bracket");
  return make_delta_schedule(0.25 * gap, levels);
}

std::optional<double> outer_scale(const RadialGrid& grid, const std::vector<double>& v, double target, double delta) {
  require(delta > 0.0, "outer_scale needs delta > 0");
  require(v.size() == grid.size(), "outer_scale: values do not match the grid");
  for (std::size_t i = v.size(); i-- > 0;) {
    const double a = v[i] - target;
    if (!(std::abs(a) >= delta)) continue;
    if (i + 1 == v.size()) return grid[i];
    const double b = v[i + 1] - target;
    const double level = a > 0.0 ? delta : -delta;
    const double w = (level - a) / (b - a);
    return grid[i] + w * (grid[i + 1] - grid[i]);
  }
  return std::nullopt;
}

std::optional<double> outer_scale(const FieldState& state, double target, double delta) {
  return outer_scale(state.grid, state.psi, target, delta);
}

BubbleFit fit_bubble(const ModelPtr& model, const RadialGrid& grid, const std::vector<double>& v, double r_a,
                     double r_b, const std::vector<SolitonBranch>& candidates, const FitOptions& opt) {
  require(!candidates.empty(), "fit_bubble needs at least one candidate branch");
  require(v.size() == grid.size() && grid.size() >= 4, "fit_bubble: values do not match the grid");
  require(r_a < r_b, "fit window must satisfy r_a < r_b");
  require(opt.rel_tol > 0.0 && opt.scan_per_decade > 0, "fit options must be positive");
  BubbleFit out;
  out.r_a = std::max(r_a, grid[1]);
  out.r_b = std::min(r_b, grid.r_max());
  if (!(out.r_a < out.r_b)) fail(ErrorCode::OutOfRange, "fit window misses the grid");

  WindowNorm norm(grid, out.r_a, out.r_b);
  std::vector<double> d(grid.size(), 0.0), jac(grid.size(), 0.0);
  const double m = Soliton(model, candidates.front(), 1.0).at_infinity();
  for (std::size_t i = norm.first(); i <= norm.last(); ++i) d[i] = v[i] - m;
  out.prefit_norm = std::sqrt(std::max(0.0, norm.inner(d, d)));

  std::optional<std::pair<SolitonBranch, ScaleFit>> best;
  for (const auto& br : candidates) {
    const ScaleFit f = fit_branch(model, grid, v, norm, br, opt, d, jac);
    if (!best) {
      best = {br, f};
      continue;
    }
    const double ref = std::max(f.value, best->second.value);
    const bool tie = std::abs(f.value - best->second.value) <= 1e-9 * ref;
    if ((tie && f.x < best->second.x) || (!tie && f.value < best->second.value)) best = {br, f};
  }
  out.residual = std::sqrt(std::max(0.0, best->second.value));
  out.soliton.emplace(model, best->first, std::exp(best->second.x));
  if (!(out.prefit_norm > 0.0)) {
    out.reason = "window is at the vacuum";
  } else if (out.residual > opt.reject_ratio * out.prefit_norm) {
    out.reason = "fit residual " + format_double(out.residual) + " exceeds " + format_double(opt.reject_ratio) +
                 " x window norm " + format_double(out.prefit_norm);
  } else {
    out.found = true;
  }
  return out;
}

BubbleFit fit_bubble(const FieldState& state, double r_a, double r_b, const std::vector<SolitonBranch>& candidates,
                     const FitOptions& opt) {
  return fit_bubble(state.model, state.grid, state.psi, r_a, r_b, candidates, opt);
}

// ---------------------------------------------------------------------------

std::vector<double> BubbleDecomposition::scales() const {
  std::vector<double> out;
  for (const auto& b : bubbles) out.push_back(b.soliton.scale());
  return out;
}

FieldState bubble_residual(const FieldState& state, const std::vector<Soliton>& bubbles) {
  FieldState res = state;
  const double m = state.model->is_wave_map() ? state.boundary_value_infinity : 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    double b = state.psi[i] - m;
    for (const auto& q : bubbles) b -= q.value(state.grid[i]) - q.at_infinity();
    res.psi[i] = b;
  }
  res.boundary_value_origin = 0.0;
  res.boundary_value_infinity = 0.0;
  return res;
}

FieldState anchored_residual(const BubbleDecomposition& dec) {
  FieldState s = dec.residual;
  for (auto& v : s.psi) v += dec.interior;
  s.model = dec.model;
  s.boundary_value_infinity = dec.interior;
  s.boundary_value_origin = dec.model->is_wave_map() ? dec.model->nearest_vacuum(s.psi.front()).value : 0.0;
  return s;
}

BubbleDecomposition decompose(const FieldState& state, const DeltaSchedule& schedule, const DecomposeOptions& opt) {
  state.validate();
  require(opt.separation_cap > 0.0 && opt.separation_cap < 1.0, "separation cap must lie in (0, 1)");
  require(opt.window_factor > 1.0, "fit window factor must exceed 1");
  const Model& model = *state.model;
  const auto& grid = state.grid;
  const bool native = !model.is_wave_map();

  BubbleDecomposition dec;
  dec.model = state.model;
  dec.schedule = schedule;
  double m = native ? 0.0 : state.boundary_value_infinity;
  dec.exterior = m;
  std::vector<double> h = state.psi;
  const double total = energy(state).total;

  for (std::size_t j = 1; j <= opt.max_bubbles; ++j) {
    const std::string level = "level " + std::to_string(j) + ": ";
    const double delta = schedule.at(j);
    const auto r = outer_scale(grid, h, m, delta);
    if (!r) {
      dec.events.push_back(level + "no radius with |psi - " + format_double(m) + "| >= " + format_double(delta));
      break;
    }
    const auto cands = branches_ending_at(model, m);
    if (cands.empty()) {
      dec.events.push_back(level + "no soliton branch ends at " + format_double(m));
      break;
    }
    const double lambda0 = *r / unit_outer_radius(state.model, cands.front(), m, delta);
    const double a = std::max(lambda0 / opt.window_factor, grid[1]);
    const double b = std::min(lambda0 * opt.window_factor, grid.r_max());
    if (!(a < b)) {
      dec.events.push_back(level + "fit window below the grid resolution");
      break;
    }
    const BubbleFit fit = fit_bubble(state.model, grid, h, a, b, cands, opt.fit);
    if (!fit.found) {
      dec.events.push_back(level + "rejected: " + fit.reason);
      break;
    }
    const Soliton& q = *fit.soliton;
    if (!dec.bubbles.empty() && q.scale() > opt.separation_cap * dec.bubbles.back().soliton.scale()) {
      dec.events.push_back(level + "scale " + format_double(q.scale()) + " not separated from " +
                           format_double(dec.bubbles.back().soliton.scale()));
      break;
    }
    for (std::size_t i = 0; i < h.size(); ++i) h[i] -= q.value(grid[i]) - q.at_origin();
    m = q.at_origin();

    const FieldState lone = FieldState::from_profile(
        state.model, grid, [&](double x) { return q.value(x); }, [](double) { return 0.0; });
    dec.bubbles.push_back({q, *r, delta, fit.residual, fit.prefit_norm, energy(lone).total});
    FieldState hs = state;
    hs.psi = h;
    hs.boundary_value_infinity = m;
    dec.budget.extraction_energy.push_back(energy(hs).total);
  }
  if (dec.bubbles.size() == opt.max_bubbles) dec.events.push_back("bubble cap reached");
  dec.interior = m;

  dec.residual = state;
  for (std::size_t i = 0; i < h.size(); ++i) dec.residual.psi[i] = h[i] - m;
  dec.residual.boundary_value_origin = 0.0;
  dec.residual.boundary_value_infinity = 0.0;
  dec.chain_closed = std::abs(dec.residual.psi.front()) <= 1e-9;

  for (std::size_t j = 1; j < dec.bubbles.size(); ++j)
    dec.scales_ratio.push_back(dec.bubbles[j].soliton.scale() / dec.bubbles[j - 1].soliton.scale());

  auto& bud = dec.budget;
  bud.total = total;
  bud.tol = opt.budget_tol;
  for (const auto& b : dec.bubbles) bud.bubbles += b.energy;
  const double slope = native ? 0.0 : model.nearest_vacuum(dec.exterior).slope;
  bud.residual = quadratic_energy(dec.residual, slope, native);
  const double scale = std::abs(total);
  bud.mismatch = scale > 0.0 ? std::abs(total - bud.bubbles - bud.residual) / scale : 0.0;
  for (double e : bud.extraction_energy) bud.C = std::max(bud.C, scale > 0.0 ? e / scale : 0.0);
  bud.within = bud.mismatch <= bud.tol;

  dec.norms = residual_norms(dec);
  return dec;
}

BubbleDecomposition decompose(const FieldState& state, const DecomposeOptions& opt) {
  return decompose(state, make_delta_schedule(*state.model, opt.max_bubbles), opt);
}

ResidualNorms residual_norms(const BubbleDecomposition& dec) {
  ResidualNorms n;
  const FieldState& res = dec.residual;
  const auto& grid = res.grid;
  const double R = grid.r_max();
  for (double v : res.psi) n.sup_b0 = std::max(n.sup_b0, std::abs(v));
  std::vector<double> b1sq(res.size());
  for (std::size_t i = 0; i < res.size(); ++i) b1sq[i] = res.psit[i] * res.psit[i];
  n.l2_b1 = std::sqrt(integrate_r(grid, b1sq, 0.0, R));
  const FieldState still = without_velocity(res);
  n.h_b0 = std::sqrt(h_norm(still, 0.0, R, 0.0));
  n.h_cross_l2 = std::sqrt(h_norm(res, 0.0, R, 0.0));

  double prev = R;
  for (const auto& b : dec.bubbles) {
    const double lam = b.soliton.scale();
    const double beta = std::pow(prev / lam, 0.25);
    const double lo = std::min(lam / beta, R), hi = std::min(lam * beta, R);
    n.dyadic_windows.emplace_back(lo, hi);
    n.dyadic.push_back(std::sqrt(h_norm(still, lo, hi, 0.0)));
    prev = lam;
  }

  n.energy_norm = std::sqrt(std::max(0.0, dec.budget.total));
  for (const auto& b : dec.bubbles) n.bubble_norm_sum += std::sqrt(std::max(0.0, b.energy));
  const double denom = dec.bubbles.empty() ? n.energy_norm : n.bubble_norm_sum;
  n.relative = denom > 0.0 ? n.h_cross_l2 / denom : (n.h_cross_l2 == 0.0 ? 0.0 : kNaN);
  return n;
}

// ---------------------------------------------------------------------------

const char* region_name(RegionKind kind) {
  switch (kind) {
    case RegionKind::Exterior: return "exterior";
    case RegionKind::Annulus: return "annulus";
    case RegionKind::Gap: return "gap";
    case RegionKind::Core: return "core";
  }
  return "?";
}

VirialSplit annulus_virial_split(const FieldState& state, const BubbleDecomposition& dec) {
  require(state.size() == dec.residual.size(), "decomposition does not belong to this state");
  const Model& model = *state.model;
  const auto& grid = state.grid;
  const double R = grid.r_max();
  const auto lam = dec.scales();
  const std::size_t J = lam.size();

  std::vector<double> up(J), down(J);
  for (std::size_t j = 0; j < J; ++j) up[j] = std::pow((j == 0 ? R : lam[j - 1]) / lam[j], 0.25);
  for (std::size_t j = 0; j < J; ++j) down[j] = j + 1 < J ? std::pow(lam[j] / lam[j + 1], 0.25) : up[j];

  VirialSplit out;
  auto clip = [R](double r) { return std::clamp(r, 0.0, R); };
  auto add = [&](RegionKind kind, std::size_t index, double lo, double hi) {
    VirialRegion reg;
    reg.kind = kind;
    reg.index = index;
    reg.r_lo = clip(lo);
    reg.r_hi = clip(std::max(lo, hi));
    out.regions.push_back(reg);
  };
  if (J == 0) {
    add(RegionKind::Exterior, 0, 0.0, R);
  } else {
    add(RegionKind::Exterior, 0, lam[0] * up[0], R);
    for (std::size_t j = 0; j < J; ++j) {
      add(RegionKind::Annulus, j + 1, lam[j] / down[j], lam[j] * up[j]);
      if (j + 1 < J) add(RegionKind::Gap, j + 1, lam[j + 1] * up[j + 1], lam[j] / down[j]);
    }
    add(RegionKind::Core, J, 0.0, lam[J - 1] / down[J - 1]);
  }

  const auto [fp, f2] = virial_densities(model, grid, state.psi);
  for (auto& reg : out.regions) {
    reg.fprime_term = integrate_r(grid, fp, reg.r_lo, reg.r_hi);
    reg.f2_term = integrate_r(grid, f2, reg.r_lo, reg.r_hi);
    out.total += reg.fprime_term + reg.f2_term;
  }
  for (std::size_t j = 0; j < J; ++j) {
    const auto [qfp, qf2] = virial_densities(model, grid, soliton_nodes(dec.bubbles[j].soliton, grid));
    out.soliton_total += integrate_r(grid, qfp, 0.0, R) + integrate_r(grid, qf2, 0.0, R);
    for (auto& reg : out.regions) {
      if (reg.kind != RegionKind::Annulus || reg.index != j + 1) continue;
      reg.soliton_fprime = integrate_r(grid, qfp, reg.r_lo, reg.r_hi);
      reg.soliton_f2 = integrate_r(grid, qf2, reg.r_lo, reg.r_hi);
    }
  }
  out.residual_h2 = h_norm(without_velocity(dec.residual), 0.0, R, 0.0);
  out.coercivity = out.residual_h2 > 0.0 ? (out.total - out.soliton_total) / out.residual_h2 : kNaN;
  return out;
}

ConcentrationFloor energy_concentration_floor(const FieldState& state, double r0, double gamma) {
  const Model& model = *state.model;
  if (!model.is_wave_map())
    fail(ErrorCode::InvalidArgument, "energy_concentration_floor is defined for wave-map models only");
  require(gamma > 1.0, "gamma must exceed 1");
  require(r0 > 0.0, "r0 must be positive");
  const EnergyReport e = energy(state, r0 / gamma, r0 * gamma);

  ConcentrationFloor out;
  out.gradient_part = e.gradient;
  out.potential_part = e.potential;
  out.annulus_energy = e.gradient + e.potential;
  const double x0 = state.psi_at(r0);
  out.delta = model.distance_to_vacua(x0);
  const double L = std::log(gamma);
  out.hoelder_bound = out.delta * out.delta / (8.0 * L);

  double gmin = std::numeric_limits<double>::infinity();
  constexpr int kSamples = 4096;
  for (int i = 0; i <= kSamples; ++i) {
    const double x = x0 - 0.5 * out.delta + out.delta * static_cast<double>(i) / kSamples;
    const double g = model.g(x);
    gmin = std::min(gmin, g * g);
  }
  out.potential_bound = 2.0 * L * gmin;
  out.floor = std::min(out.hoelder_bound, out.potential_bound);
  out.holds = out.annulus_energy >= out.floor;
  out.hoelder_margin = out.hoelder_bound > 0.0 ? out.gradient_part / out.hoelder_bound : kNaN;
  return out;
}

}  // namespace bubbletower
