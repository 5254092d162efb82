#include "verify_suite.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "bubbletower/error.hpp"

namespace bubbletower::cli {

namespace {

constexpr double kResidualTol = 1e-8;
constexpr double kRelativeTol = 1e-6;
constexpr double kBoolTol = 0.5;

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

template <class F>
double integrate_half_line(F f) {
  // Every integrand here decays at least like r^-3; past 1e100 the profiles
  // overflow to inf/inf, so the tail is cut there.
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double r) { return r > 1e100 ? 0.0 : f(r); }, 0.0,
                              std::numeric_limits<double>::infinity());
}

void add(std::vector<CheckRow>& rows, const std::string& model, std::string check, double value, double tol,
         std::string note = {}) {
  rows.push_back({model, std::move(check), value, tol, false, std::move(note)});
}

void soliton_rows(std::vector<CheckRow>& rows, const ModelPtr& model, const std::string& name) {
  const Soliton q(model, {0, 1}, 1.0);
  const auto radii = probe_radii();
  const auto res = soliton_residuals(q, radii);
  add(rows, name, "ode residual", res.ode, kResidualTol);
  add(rows, name, "bogomolny residual", res.bogomolny, kResidualTol);

  if (model->is_wave_map()) {
    const double quad = quadrature_energy(q);
    const double closed = soliton_energy(*model, q);
    add(rows, name, "energy: quadrature vs 2|G(m)-G(l)|", std::abs(quad - closed) / closed, kRelativeTol,
        "E=" + format_value(closed));
    if (auto e = expected_soliton_energy(*model))
      add(rows, name, "energy: stated value", std::abs(closed - *e) / *e, kRelativeTol, "expected " + format_value(*e));
  }
  const auto hv = harmonic_virial(q);
  add(rows, name, "harmonic virial", std::abs(hv.value) / hv.scale, kRelativeTol);
  if (model->kind() == ModelKind::Semilinear6D) {
    const auto p = pohozaev();
    add(rows, name, "pohozaev", std::abs(p.value) / p.scale, kRelativeTol);
  }
}

}  // namespace

std::vector<double> probe_radii() {
  std::vector<double> r(241);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::pow(10.0, -3.0 + 6.0 * static_cast<double>(i) / 240.0);
  return r;
}

double quadrature_energy(const Soliton& q) {
  const Model& m = q.model();
  return integrate_half_line([&](double r) {
    if (r == 0.0) return 0.0;
    const double qr = q.dr(r), gr = m.g(q.value(r)) / r;
    return (qr * qr + gr * gr) * r;
  });
}

SignedIntegral harmonic_virial(const Soliton& q) {
  const Model& m = q.model();
  SignedIntegral out;
  out.value = integrate_half_line([&](double r) {
    if (r == 0.0) return 0.0;
    const double v = q.value(r), qr = q.dr(r), fr = m.f(v) / r;
    return (m.f_prime(v) * qr * qr + fr * fr) * r;
  });
  out.scale = integrate_half_line([&](double r) {
    const double qr = q.dr(r);
    return std::abs(m.f_prime(q.value(r))) * qr * qr * r;
  });
  return out;
}

SignedIntegral pohozaev() {
  SignedIntegral out;
  out.value = integrate_half_line([](double r) {
    const double a = ground_state_W_dr(r) * r * r, b = ground_state_W(r) * r * r;
    return a * a * r - (r > 0.0 ? b * b * b / r : 0.0);
  });
  out.scale = integrate_half_line([](double r) {
    const double a = ground_state_W_dr(r) * r * r;
    return a * a * r;
  });
  return out;
}

std::optional<double> expected_soliton_energy(const Model& model) {
  switch (model.kind()) {
    case ModelKind::SphereEquivariant: return 4.0 * model.k();
    case ModelKind::YangMills: return 8.0 / 3.0;
    default: return std::nullopt;
  }
}

std::vector<CheckRow> run_verify(const std::vector<std::string>& models, std::optional<double> tolerance) {
  std::vector<std::string> names = models;
  if (names.empty()) names = {"sphere:k=1", "sphere:k=2", "yang-mills", "semilinear6d"};
  std::vector<CheckRow> rows;
  for (const auto& name : names) {
    ModelPtr model;
    try {
      model = std::make_shared<const Model>(parse_model(name));
      add(rows, name, "model loads (f = g g')", 0.0, kBoolTol);
    } catch (const Error& e) {
      add(rows, name, "model loads (f = g g')", 1.0, kBoolTol, e.what());
      continue;
    }
    if (model->is_wave_map()) {
      const auto a = check_assumptions(*model, model->bracket());
      add(rows, name, "assumptions A1 A2 A3'", a.pass() ? 0.0 : 1.0, kBoolTol,
          std::to_string(a.vacua.size()) + " vacua");
    }
    if (model->kind() != ModelKind::Custom) soliton_rows(rows, model, name);
  }
  for (auto& row : rows) {
    if (tolerance) row.tolerance = *tolerance;
    row.pass = row.value < row.tolerance;
  }
  return rows;
}

bool all_pass(const std::vector<CheckRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

std::string format_table(const std::vector<CheckRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %-36s %-11s %-11s %s\n", "model", "check", "value", "tol", "result");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-14s %-36s %-11.3g %-11.3g %s", r.model.c_str(), r.check.c_str(), r.value,
                  r.tolerance, r.pass ? "pass" : "FAIL");
    out << line;
    if (!r.note.empty()) out << "  " << r.note;
    out << '\n';
  }
  return out.str();
}

}  // namespace bubbletower::cli
