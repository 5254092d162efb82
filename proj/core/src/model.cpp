#include "bubbletower/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bubbletower/error.hpp"

namespace bubbletower {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGroundA = 1.0 / 24.0;

double sgn(double v) { return (v > 0) - (v < 0); }

// 4 - 2|psi|/3, clamped at zero beyond |psi| = 6.
double semilinear_radicand(double x) { return std::max(0.0, 4.0 - 2.0 * std::abs(x) / 3.0); }

double sphere_G(int k, double x) {
  const double ax = std::abs(x);
  const double n = std::floor(ax / kPi);
  return sgn(x) * k * (2.0 * n + 1.0 - std::cos(ax - n * kPi));
}

double yang_mills_G(double x) {
  const double ax = std::abs(x);
  const double v = ax <= 1.0 ? ax - ax * ax * ax / 3.0 : ax * ax * ax / 3.0 - ax + 4.0 / 3.0;
  return sgn(x) * v;
}

double semilinear_G(double x) {
  // Antiderivative of y sqrt(4 - 2y/3) written in A = 4 - 2y/3.
  auto prim = [](double a) { return 8.0 / 3.0 * std::pow(a, 1.5) - 0.4 * std::pow(a, 2.5); };
  const double a = semilinear_radicand(x);
  return sgn(x) * 2.25 * (prim(4.0) - prim(a));
}

double quad_abs(const std::function<double(double)>& g, double a, double b) {
  if (a == b) return 0.0;
  auto abs_g = [&](double y) { return std::abs(g(y)); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(abs_g, a, b, 15, 1e-13);
}

std::vector<Vacuum> analytic_vacua(const Model& m, double bracket) {
  std::vector<Vacuum> out;
  auto push = [&](double l) { out.push_back({l, m.g_prime(l), m.g_second(l)}); };
  switch (m.kind()) {
    case ModelKind::SphereEquivariant: {
      const int n = static_cast<int>(std::floor(bracket / kPi + 1e-12));
      for (int i = -n; i <= n; ++i) {
        Vacuum v{i * kPi, m.k() * ((i % 2 == 0) ? 1.0 : -1.0), 0.0};
        out.push_back(v);
      }
      break;
    }
    case ModelKind::YangMills:
      if (bracket >= 1.0) {
        push(-1.0);
        push(1.0);
      }
      break;
    case ModelKind::Semilinear6D:
      out.push_back({0.0, 2.0, 0.0});
      break;
    case ModelKind::Custom:
      return enumerate_vacua(m, bracket);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double Model::g(double x) const {
  switch (kind_) {
    case ModelKind::SphereEquivariant: return k_ * std::sin(x);
    case ModelKind::YangMills: return 1.0 - x * x;
    case ModelKind::Semilinear6D: return x * std::sqrt(semilinear_radicand(x));
    case ModelKind::Custom: return custom_->g(x);
  }
  return 0.0;
}

double Model::g_prime(double x) const {
  switch (kind_) {
    case ModelKind::SphereEquivariant: return k_ * std::cos(x);
    case ModelKind::YangMills: return -2.0 * x;
    case ModelKind::Semilinear6D: {
      const double a = semilinear_radicand(x);
      if (a <= 0.0) return 0.0;
      return std::sqrt(a) - std::abs(x) / (3.0 * std::sqrt(a));
    }
    case ModelKind::Custom: return custom_->g_prime(x);
  }
  return 0.0;
}

double Model::g_second(double x) const {
  switch (kind_) {
    case ModelKind::SphereEquivariant: return -k_ * std::sin(x);
    case ModelKind::YangMills: return -2.0;
    case ModelKind::Semilinear6D: {
      const double a = semilinear_radicand(x);
      if (a <= 0.0) return 0.0;
      const double s = std::sqrt(a);
      return -sgn(x) * (2.0 / (3.0 * s) + std::abs(x) / (9.0 * a * s));
    }
    case ModelKind::Custom: return custom_->g_second(x);
  }
  return 0.0;
}

double Model::f(double x) const {
  switch (kind_) {
    case ModelKind::SphereEquivariant: {
      // Reduced mod pi so that f vanishes exactly at the vacua n*pi.
      const double y = x - kPi * std::round(x / kPi);
      return 0.5 * k_ * k_ * std::sin(2.0 * y);
    }
    case ModelKind::YangMills: return -2.0 * x * (1.0 - x * x);
    case ModelKind::Semilinear6D: return 4.0 * x - std::abs(x) * x;
    case ModelKind::Custom:
      return custom_->f ? (*custom_->f)(x) : custom_->g(x) * custom_->g_prime(x);
  }
  return 0.0;
}

double Model::f_prime(double x) const {
  switch (kind_) {
    case ModelKind::SphereEquivariant: return k_ * k_ * std::cos(2.0 * x);
    case ModelKind::YangMills: return 6.0 * x * x - 2.0;
    case ModelKind::Semilinear6D: return 4.0 - 2.0 * std::abs(x);
    case ModelKind::Custom: {
      if (custom_->f_prime) return (*custom_->f_prime)(x);
      const double gp = custom_->g_prime(x);
      return gp * gp + custom_->g(x) * custom_->g_second(x);
    }
  }
  return 0.0;
}

double Model::potential(double x) const {
  if (kind_ == ModelKind::Semilinear6D) {
    const double ax = std::abs(x);
    return 4.0 * x * x - 2.0 * ax * ax * ax / 3.0;
  }
  // g^2 is pi-periodic for the sphere; reduce so it vanishes exactly at the vacua.
  const double v = kind_ == ModelKind::SphereEquivariant ? g(x - kPi * std::round(x / kPi)) : g(x);
  return v * v;
}

double Model::G(double x) const {
  switch (kind_) {
    case ModelKind::SphereEquivariant: return sphere_G(k_, x);
    case ModelKind::YangMills: return yang_mills_G(x);
    case ModelKind::Semilinear6D: return semilinear_G(x);
    case ModelKind::Custom: {
      const auto& g = custom_->g;
      const std::function<double(double)> fn = [&g](double y) { return g(y); };
      return x >= 0 ? quad_abs(fn, 0.0, x) : -quad_abs(fn, x, 0.0);
    }
  }
  return 0.0;
}

double Model::min_vacuum_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < vacua_.size(); ++i)
    gap = std::min(gap, vacua_[i].value - vacua_[i - 1].value);
  return gap;
}

const Vacuum& Model::nearest_vacuum(double x) const {
  if (vacua_.empty()) fail(ErrorCode::OutOfRange, "model has no vacuum inside its bracket");
  const Vacuum* best = &vacua_.front();
  for (const auto& v : vacua_)
    if (std::abs(v.value - x) < std::abs(best->value - x)) best = &v;
  return *best;
}

double Model::distance_to_vacua(double x) const { return std::abs(nearest_vacuum(x).value - x); }

std::string Model::name() const {
  switch (kind_) {
    case ModelKind::SphereEquivariant: return "sphere:k=" + std::to_string(k_);
    case ModelKind::YangMills: return "yang-mills";
    case ModelKind::Semilinear6D: return "semilinear6d";
    case ModelKind::Custom: return "custom:" + custom_->label;
  }
  return {};
}

// ---------------------------------------------------------------------------

Model make_model(ModelKind kind, int k, double bracket) {
  require(std::isfinite(bracket) && bracket > 0, "vacuum bracket must be positive and finite");
  if (kind == ModelKind::Custom)
    fail(ErrorCode::InvalidArgument, "custom models are built from callbacks, not make_model");
  Model m;
  m.kind_ = kind;
  m.bracket_ = bracket;
  switch (kind) {
    case ModelKind::SphereEquivariant:
      require(k >= 1, "equivariance index k must be >= 1");
      m.k_ = k;
      break;
    case ModelKind::YangMills: m.k_ = 2; break;
    case ModelKind::Semilinear6D: m.k_ = 2; break;
    case ModelKind::Custom: break;
  }
  m.vacua_ = analytic_vacua(m, bracket);
  return m;
}

Model make_custom_model(CustomCallbacks cb, double bracket) {
  require(std::isfinite(bracket) && bracket > 0, "vacuum bracket must be positive and finite");
  constexpr int kProbe = 10000;
  constexpr double kTol = 1e-8;
  for (int i = 0; i <= kProbe; ++i) {
    const double x = -bracket + 2.0 * bracket * i / kProbe;
    const double g = cb.g(x), gp = cb.g_prime(x), gpp = cb.g_second(x);
    if (!std::isfinite(g) || !std::isfinite(gp) || !std::isfinite(gpp))
      fail(ErrorCode::InconsistentModel, "custom g callbacks are not finite at x=" + std::to_string(x));
    auto check = [&](double given, double expected, const char* what) {
      const double scale = std::max({1.0, std::abs(given), std::abs(expected)});
      if (!(std::abs(given - expected) <= kTol * scale))
        fail(ErrorCode::InconsistentModel, std::string(what) + " disagrees with g callbacks at x=" +
                                               std::to_string(x));
    };
    if (cb.f) check((*cb.f)(x), g * gp, "f");
    if (cb.f_prime) check((*cb.f_prime)(x), gp * gp + g * gpp, "f_prime");
  }
  Model m;
  m.kind_ = ModelKind::Custom;
  m.bracket_ = bracket;
  m.custom_ = std::make_shared<const CustomCallbacks>(std::move(cb));
  m.vacua_ = enumerate_vacua(m, bracket);
  int k = 1;
  for (const auto& v : m.vacua_) k = std::max(k, static_cast<int>(std::lround(std::abs(v.slope))));
  m.k_ = k;
  return m;
}

Model load_custom_manifest(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::Io, "cannot read model manifest '" + path + "': " + e.message());
  }
  auto get = [&](const char* key) -> std::optional<Expression> {
    if (auto v = tree.get_optional<std::string>(key)) return Expression::parse(*v);
    return std::nullopt;
  };
  auto g = get("g"), gp = get("g_prime"), gpp = get("g_second");
  if (!g || !gp || !gpp)
    fail(ErrorCode::InvalidArgument, "model manifest '" + path + "' needs g, g_prime and g_second");
  CustomCallbacks cb{*g, *gp, *gpp, get("f"), get("f_prime"), path};
  return make_custom_model(std::move(cb), tree.get<double>("bracket", Model::kDefaultBracket));
}

Model parse_model(std::string_view spec) {
  if (spec == "yang-mills") return make_model(ModelKind::YangMills);
  if (spec == "semilinear6d") return make_model(ModelKind::Semilinear6D);
  if (spec.starts_with("sphere:k=")) {
    const std::string digits(spec.substr(9));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      fail(ErrorCode::InvalidArgument, "bad equivariance index in '" + std::string(spec) + "'");
    return make_model(ModelKind::SphereEquivariant, std::stoi(digits));
  }
  if (spec.starts_with("custom:")) return load_custom_manifest(std::string(spec.substr(7)));
  fail(ErrorCode::InvalidArgument, "unknown model '" + std::string(spec) + "'");
}

std::vector<Vacuum> enumerate_vacua(const Model& model, double bracket) {
  require(std::isfinite(bracket) && bracket > 0, "vacuum bracket must be positive and finite");
  constexpr int kSamples = 20000;
  constexpr double kTol = 1e-12;
  const double h = 2.0 * bracket / kSamples;
  std::vector<double> xs(kSamples + 1), gs(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) {
    xs[i] = -bracket + h * i;
    gs[i] = model.g(xs[i]);
  }
  double gscale = 0.0;
  for (double v : gs) gscale = std::max(gscale, std::abs(v));
  if (gscale == 0.0) fail(ErrorCode::InvalidArgument, "g vanishes identically on the bracket");

  std::vector<double> roots;
  for (int i = 0; i < kSamples; ++i) {
    if (gs[i] == 0.0) {
      roots.push_back(xs[i]);
      continue;
    }
    if (gs[i] * gs[i + 1] < 0.0) {
      double a = xs[i], b = xs[i + 1], ga = gs[i];
      while (b - a > kTol) {
        const double c = 0.5 * (a + b);
        const double gc = model.g(c);
        if (gc == 0.0) a = b = c;
        else if ((gc < 0) == (ga < 0)) a = c, ga = gc;
        else b = c;
      }
      roots.push_back(0.5 * (a + b));
    }
  }
  if (gs[kSamples] == 0.0) roots.push_back(xs[kSamples]);

  // Touching zeros: interior local minima of |g| without a sign change.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 1; i < kSamples; ++i) {
    const double a0 = std::abs(gs[i - 1]), a1 = std::abs(gs[i]), a2 = std::abs(gs[i + 1]);
    if (!(a1 <= a0 && a1 <= a2) || gs[i - 1] * gs[i + 1] < 0.0 || a1 == 0.0) continue;
    double a = xs[i - 1], b = xs[i + 1];
    while (b - a > kTol) {
      const double c = b - invphi * (b - a), d = a + invphi * (b - a);
      if (std::abs(model.g(c)) < std::abs(model.g(d))) b = d;
      else a = c;
    }
    const double x = 0.5 * (a + b);
    if (std::abs(model.g(x)) <= 1e-12 * gscale) roots.push_back(x);
  }

  std::sort(roots.begin(), roots.end());
  std::vector<Vacuum> out;
  for (double r : roots) {
    if (!out.empty() && r - out.back().value < 1e-8) continue;
    out.push_back({r, model.g_prime(r), model.g_second(r)});
  }
  return out;
}

// ---------------------------------------------------------------------------

double ground_state_W(double r) {
  const double d = kGroundA + r * r;
  return 1.0 / (d * d);
}

double ground_state_W_dr(double r) {
  const double d = kGroundA + r * r;
  return -4.0 * r / (d * d * d);
}

Soliton::Soliton(ModelPtr model, SolitonBranch branch, double scale)
    : model_(std::move(model)), branch_(branch), scale_(scale) {
  require(model_ != nullptr, "soliton needs a model");
  require(std::isfinite(scale) && scale > 0, "soliton scale must be positive and finite");
  require(branch.orientation == 1 || branch.orientation == -1, "soliton orientation must be +1 or -1");
  switch (model_->kind()) {
    case ModelKind::SphereEquivariant: break;
    case ModelKind::YangMills:
    case ModelKind::Semilinear6D:
      require(branch.offset == 0, "this model has no offset soliton branches");
      break;
    case ModelKind::Custom:
      fail(ErrorCode::InvalidArgument, "custom models carry no closed-form soliton family");
  }
}

Soliton make_soliton(ModelPtr model, SolitonBranch branch, double scale) {
  return Soliton(std::move(model), branch, scale);
}

double Soliton::value(double r) const {
  const double s = r / scale_;
  const double o = branch_.orientation;
  switch (model_->kind()) {
    case ModelKind::SphereEquivariant:
      return branch_.offset * kPi + o * 2.0 * std::atan(std::pow(s, model_->k()));
    case ModelKind::YangMills: {
      const double s2 = s * s;
      return o * (1.0 - s2) / (1.0 + s2);
    }
    case ModelKind::Semilinear6D: {
      const double s2 = s * s, d = kGroundA + s2;
      return o * s2 / (d * d);
    }
    case ModelKind::Custom: break;
  }
  return 0.0;
}

double Soliton::dr(double r) const {
  const double s = r / scale_;
  const double o = branch_.orientation;
  switch (model_->kind()) {
    case ModelKind::SphereEquivariant: {
      const int k = model_->k();
      const double sk = std::pow(s, k);
      return o * 2.0 * k * std::pow(s, k - 1) / (1.0 + sk * sk) / scale_;
    }
    case ModelKind::YangMills: {
      const double d = 1.0 + s * s;
      return o * (-4.0 * s) / (d * d) / scale_;
    }
    case ModelKind::Semilinear6D: {
      const double s2 = s * s, d = kGroundA + s2;
      return o * 2.0 * s * (kGroundA - s2) / (d * d * d) / scale_;
    }
    case ModelKind::Custom: break;
  }
  return 0.0;
}

double Soliton::drr(double r) const {
  const double s = r / scale_;
  const double o = branch_.orientation;
  const double l2 = scale_ * scale_;
  switch (model_->kind()) {
    case ModelKind::SphereEquivariant: {
      const int k = model_->k();
      const double s2k = std::pow(s, 2 * k);
      const double lead = k == 1 ? 0.0 : (k - 1) * std::pow(s, k - 2);
      const double tail = (k + 1) * std::pow(s, 3 * k - 2);
      const double d = 1.0 + s2k;
      return o * 2.0 * k * (lead - tail) / (d * d) / l2;
    }
    case ModelKind::YangMills: {
      const double s2 = s * s, d = 1.0 + s2;
      return o * (12.0 * s2 - 4.0) / (d * d * d) / l2;
    }
    case ModelKind::Semilinear6D: {
      const double a = kGroundA, s2 = s * s, d = a + s2;
      return o * 2.0 * (a * a - 8.0 * a * s2 + 3.0 * s2 * s2) / (d * d * d * d) / l2;
    }
    case ModelKind::Custom: break;
  }
  return 0.0;
}

double Soliton::at_origin() const {
  switch (model_->kind()) {
    case ModelKind::SphereEquivariant: return branch_.offset * kPi;
    case ModelKind::YangMills: return branch_.orientation;
    default: return 0.0;
  }
}

double Soliton::at_infinity() const {
  switch (model_->kind()) {
    case ModelKind::SphereEquivariant: return (branch_.offset + branch_.orientation) * kPi;
    case ModelKind::YangMills: return -branch_.orientation;
    default: return 0.0;
  }
}

double Soliton::native_value(double r) const {
  require(model_->kind() == ModelKind::Semilinear6D, "native profile exists only for semilinear6d");
  return branch_.orientation * ground_state_W(r / scale_) / (scale_ * scale_);
}

std::vector<SolitonBranch> branches_ending_at(const Model& model, double exterior) {
  std::vector<SolitonBranch> out;
  switch (model.kind()) {
    case ModelKind::SphereEquivariant: {
      const double n = std::round(exterior / kPi);
      if (std::abs(exterior - n * kPi) > 1e-9) break;
      out.push_back({static_cast<int>(n) - 1, 1});
      out.push_back({static_cast<int>(n) + 1, -1});
      break;
    }
    case ModelKind::YangMills:
      if (std::abs(exterior + 1.0) <= 1e-9) out.push_back({0, 1});
      if (std::abs(exterior - 1.0) <= 1e-9) out.push_back({0, -1});
      break;
    case ModelKind::Semilinear6D:
      if (std::abs(exterior) <= 1e-9) {
        out.push_back({0, 1});
        out.push_back({0, -1});
      }
      break;
    case ModelKind::Custom: break;
  }
  return out;
}

double soliton_energy(const Model& model, const Soliton& s) {
  if (!model.is_wave_map())
    fail(ErrorCode::InvalidArgument, "soliton_energy is defined for wave-map models only");
  return 2.0 * std::abs(model.G(s.at_infinity()) - model.G(s.at_origin()));
}

SolitonResiduals soliton_residuals(const Soliton& s, std::span<const double> radii) {
  const Model& m = s.model();
  SolitonResiduals out;
  double plus = 0.0, minus = 0.0, absolute = 0.0;
  for (double r : radii) {
    require(r > 0, "probe radii must be positive");
    const double q = s.value(r), qr = s.dr(r), qrr = s.drr(r), g = m.g(q);
    out.ode = std::max(out.ode, std::abs(r * r * qrr + r * qr - m.f(q)));
    plus = std::max(plus, std::abs(r * qr - g));
    minus = std::max(minus, std::abs(r * qr + g));
    absolute = std::max(absolute, std::abs(std::abs(r * qr) - std::abs(g)));
  }
  // The 6-d profile crosses |psi| = 6 where its first-order relation flips sign.
  out.bogomolny = m.kind() == ModelKind::Semilinear6D ? absolute : std::min(plus, minus);
  return out;
}

// ---------------------------------------------------------------------------

AssumptionReport check_assumptions(const Model& model, double bracket) {
  AssumptionReport rep;
  rep.bracket = bracket;
  const double gb_pos = model.G(bracket), gb_neg = model.G(-bracket);
  const double gh_pos = model.G(bracket / 2), gh_neg = model.G(-bracket / 2);
  rep.a1_growth = gb_pos > 0 && gb_neg < 0 && std::abs(gb_pos) >= 1.25 * std::abs(gh_pos) &&
                  std::abs(gb_neg) >= 1.25 * std::abs(gh_neg);

  const auto vacua = analytic_vacua(model, bracket);
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < vacua.size(); ++i)
    rep.min_gap = std::min(rep.min_gap, vacua[i].value - vacua[i - 1].value);
  rep.a2_discrete = !vacua.empty() && rep.min_gap > 1e-6;

  rep.a3 = rep.a3_prime = !vacua.empty();
  for (const auto& v : vacua) {
    VacuumCheck c;
    c.vacuum = v;
    const double slope = std::abs(v.slope);
    const double rounded = std::round(slope);
    c.integer_slope = rounded >= 1.0 && std::abs(slope - rounded) <= 1e-9;
    c.flat_if_unit = !(c.integer_slope && rounded == 1.0) || std::abs(v.curvature) <= 1e-9;
    c.a3_strict = c.integer_slope && rounded <= 2.0 && c.flat_if_unit;
    rep.a3 = rep.a3 && c.a3_strict;
    rep.a3_prime = rep.a3_prime && c.integer_slope && c.flat_if_unit;
    rep.vacua.push_back(c);
  }
  return rep;
}

}  // namespace bubbletower
