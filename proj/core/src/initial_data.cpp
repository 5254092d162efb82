#include "bubbletower/initial_data.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

#include "bubbletower/error.hpp"

namespace bubbletower {

namespace {

constexpr double kPi = std::numbers::pi;

double parse_number(std::string_view text, std::string_view key) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v))
    fail(ErrorCode::InvalidArgument, "bad value for data parameter '" + std::string(key) + "': '" +
                                         std::string(text) + "'");
  return v;
}

void check_keys(const DataSpec& d, std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : d.params) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) fail(ErrorCode::InvalidArgument, "unknown parameter '" + k + "' for data family '" + d.family + "'");
  }
}

double first_vacuum(const Model& m) {
  for (const auto& v : m.vacua())
    if (v.value >= -1e-12) return v.value;
  require(!m.vacua().empty(), "model has no vacuum in its bracket");
  return m.vacua().back().value;
}

FieldState soliton_data(const ModelPtr& model, const DataSpec& d, const RadialGrid& grid) {
  check_keys(d, {"scale", "offset", "orientation"});
  require(model->kind() != ModelKind::Semilinear6D, "use builtin:ground-state for semilinear6d");
  const Soliton q(model, {static_cast<int>(d.get("offset", 0)), static_cast<int>(d.get("orientation", 1))},
                  d.get("scale", 1.0));
  return FieldState::from_profile(model, grid, [&](double r) { return q.value(r); }, [](double) { return 0.0; });
}

FieldState ground_state_data(const ModelPtr& model, const DataSpec& d, const RadialGrid& grid) {
  check_keys(d, {"scale", "sign", "amp"});
  require(model->kind() == ModelKind::Semilinear6D, "builtin:ground-state needs the semilinear6d model");
  const double sign = d.get("sign", 1.0), amp = d.get("amp", 1.0);
  require(sign == 1.0 || sign == -1.0, "ground-state sign must be +1 or -1");
  const Soliton q(model, {0, static_cast<int>(sign)}, d.get("scale", 1.0));
  return FieldState::from_profile(model, grid, [&](double r) { return amp * q.value(r); },
                                  [](double) { return 0.0; });
}

// Q(r/s) plus an inward push b (r Q_r) exp(-(r/ws)^2), with b chosen so that the
// grid energy equals amp times the exact soliton energy.
FieldState degree1_data(const ModelPtr& model, const DataSpec& d, const RadialGrid& grid) {
  check_keys(d, {"amp", "width", "scale"});
  require(model->is_wave_map(), "builtin:degree1 needs a wave-map model");
  const double amp = d.get("amp", 1.05), w = d.get("width", 3.0);
  require(amp >= 1.0, "degree1 amp must be >= 1 (energy in units of E(Q))");
  require(w > 0.0, "degree1 width must be positive");
  const Soliton q(model, {0, 1}, d.get("scale", 0.25));
  const double ws = w * q.scale();
  auto push = [&](double r) { return r * q.dr(r) * std::exp(-(r / ws) * (r / ws)); };
  FieldState s = FieldState::from_profile(model, grid, [&](double r) { return q.value(r); }, push);
  const auto e = energy(s);
  const double K = e.kinetic, deficit = amp * soliton_energy(*model, q) - (e.total - e.kinetic);
  require(K > 0.0, "degree1 push has zero norm on this grid");
  require(deficit >= 0.0, "degree1 amp is below the energy of Q on this grid");
  const double b = std::sqrt(deficit / K);
  for (double& v : s.psit) v *= b;
  return s;
}

// vacuum + amp (r/c)^m exp(-((r - c)/w)^2): smooth, compactly concentrated,
// and matching the r^m behaviour that finite energy requires at the origin.
FieldState bump_data(const ModelPtr& model, const DataSpec& d, const RadialGrid& grid) {
  check_keys(d, {"amp", "center", "width", "vacuum"});
  const double l = d.get("vacuum", first_vacuum(*model));
  const auto& vac = model->nearest_vacuum(l);
  const double amp = d.get("amp", 0.1), c = d.get("center", 1.0), w = d.get("width", 0.25);
  require(c > 0.0 && w > 0.0, "bump center and width must be positive");
  const double m = std::max(1.0, std::round(std::abs(vac.slope)));
  return FieldState::from_profile(
      model, grid,
      [&](double r) { return vac.value + amp * std::pow(r / c, m) * std::exp(-((r - c) / w) * ((r - c) / w)); },
      [](double) { return 0.0; });
}

FieldState two_bubble_data(const ModelPtr& model, const DataSpec& d, const RadialGrid& grid) {
  check_keys(d, {"inner", "outer", "noise", "seed"});
  require(model->kind() == ModelKind::SphereEquivariant, "builtin:two-bubble needs a sphere model");
  const double inner = d.get("inner", 1e-3), outer = d.get("outer", 1.0);
  require(inner > 0.0 && outer > inner, "two-bubble needs 0 < inner < outer");
  const Soliton qo(model, {0, 1}, outer), qi(model, {0, 1}, inner);
  const auto noise = smooth_noise(d.get("noise", 0.0), inner, outer, static_cast<unsigned>(d.get("seed", 1)));
  return FieldState::from_profile(
      model, grid, [&](double r) { return qo.value(r) - kPi + qi.value(r) + noise(r); },
      [](double) { return 0.0; });
}

}  // namespace

double DataSpec::get(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

DataSpec parse_data_spec(std::string_view spec) {
  DataSpec d;
  if (spec.starts_with("snapshot:")) {
    d.family = "snapshot";
    d.path = std::string(spec.substr(9));
    require(!d.path.empty(), "snapshot data spec needs a path");
    return d;
  }
  if (!spec.starts_with("builtin:"))
    fail(ErrorCode::InvalidArgument, "data spec must start with 'builtin:' or 'snapshot:': '" + std::string(spec) + "'");
  spec.remove_prefix(8);
  const auto colon = spec.find(':');
  d.family = std::string(spec.substr(0, colon));
  if (colon == std::string_view::npos) return d;
  std::string_view rest = spec.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      fail(ErrorCode::InvalidArgument, "data parameter must be key=value: '" + std::string(item) + "'");
    const std::string key(item.substr(0, eq));
    d.params[key] = parse_number(item.substr(eq + 1), key);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return d;
}

FieldState make_initial_data(const ModelPtr& model, const DataSpec& d, const RadialGrid& grid) {
  require(model != nullptr, "initial data needs a model");
  if (d.family == "snapshot") {
    FieldState s = read_snapshot(d.path);
    if (s.model->name() != model->name())
      fail(ErrorCode::InvalidArgument, "snapshot model '" + s.model->name() + "' differs from '" + model->name() + "'");
    s.model = model;
    return s;
  }
  if (d.family == "vacuum") {
    check_keys(d, {"value"});
    return FieldState::vacuum(model, grid, model->nearest_vacuum(d.get("value", first_vacuum(*model))).value);
  }
  if (d.family == "soliton") return soliton_data(model, d, grid);
  if (d.family == "ground-state") return ground_state_data(model, d, grid);
  if (d.family == "degree1") return degree1_data(model, d, grid);
  if (d.family == "bump") return bump_data(model, d, grid);
  if (d.family == "two-bubble") return two_bubble_data(model, d, grid);
  fail(ErrorCode::InvalidArgument, "unknown data family '" + d.family + "'");
}

FieldState make_initial_data(const ModelPtr& model, std::string_view spec, const RadialGrid& grid) {
  return make_initial_data(model, parse_data_spec(spec), grid);
}

std::function<double(double)> smooth_noise(double amplitude, double r_lo, double r_hi, unsigned seed) {
  if (amplitude == 0.0) return [](double) { return 0.0; };
  require(r_lo > 0.0 && r_hi >= r_lo, "noise range must be positive and ordered");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(std::log(r_lo), std::log(r_hi)), weight(-1.0, 1.0);
  std::vector<std::pair<double, double>> bumps(8);
  for (auto& [c, a] : bumps) {
    c = centre(rng);
    a = weight(rng);
  }
  return [amplitude, bumps](double r) {
    if (r <= 0.0) return 0.0;
    const double x = std::log(r);
    double sum = 0.0;
    for (const auto& [c, a] : bumps) sum += a * std::exp(-2.0 * (x - c) * (x - c));
    return amplitude * sum;
  };
}

}  // namespace bubbletower
