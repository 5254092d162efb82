#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bubbletower/expression.hpp"

namespace bubbletower {

enum class ModelKind { Semilinear6D, SphereEquivariant, YangMills, Custom };

// A zero l of g together with g'(l) and g''(l).
struct Vacuum {
  double value = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
};

// Closed-form callbacks for a user supplied target. f and f' default to
// g g' and g'^2 + g g''; when given explicitly they are checked against them.
struct CustomCallbacks {
  Expression g, g_prime, g_second;
  std::optional<Expression> f, f_prime;
  std::string label = "custom";
};

// One equation family  psi_tt - psi_rr - psi_r / r + f(psi) / r^2 = 0  with
// f = g g'. The 6-d focusing equation is carried in the psi = r^2 u variable,
// where f(psi) = 4 psi - |psi| psi and F(psi) = 2 psi^2 - |psi|^3 / 3; its
// "g" is the signed square root psi sqrt(4 - 2|psi|/3) of 2F, real for
// |psi| <= 6 (which covers the ground state, whose psi peaks at exactly 6).
//
// Immutable after construction.
class Model {
 public:
  static constexpr double kDefaultBracket = 10.0;

  ModelKind kind() const { return kind_; }
  int k() const { return k_; }
  bool is_wave_map() const { return kind_ != ModelKind::Semilinear6D; }

  double g(double x) const;
  double g_prime(double x) const;
  double g_second(double x) const;
  double f(double x) const;
  double f_prime(double x) const;

  // Potential density numerator: g^2 for wave maps, 2F for the 6-d equation,
  // so that the energy density is psi_t^2 + psi_r^2 + potential(psi) / r^2.
  double potential(double x) const;

  // G(x) = int_0^x |g(y)| dy.
  double G(double x) const;

  const std::vector<Vacuum>& vacua() const { return vacua_; }
  double bracket() const { return bracket_; }
  double min_vacuum_gap() const;
  // Nearest vacuum to x; throws if the model has none in its bracket.
  const Vacuum& nearest_vacuum(double x) const;
  double distance_to_vacua(double x) const;

  // CLI model string: "sphere:k=<k>", "yang-mills", "semilinear6d", "custom:<label>".
  std::string name() const;

 private:
  friend Model make_model(ModelKind, int, double);
  friend Model make_custom_model(CustomCallbacks, double);

  ModelKind kind_ = ModelKind::SphereEquivariant;
  int k_ = 1;
  double bracket_ = kDefaultBracket;
  std::vector<Vacuum> vacua_;
  std::shared_ptr<const CustomCallbacks> custom_;
};

using ModelPtr = std::shared_ptr<const Model>;

// Built-in families. k is the equivariance index for the sphere model and is
// ignored otherwise (the 6-d equation stores 2 since psi ~ r^2 at the origin).
Model make_model(ModelKind kind, int k = 1, double bracket = Model::kDefaultBracket);
Model make_custom_model(CustomCallbacks callbacks, double bracket = Model::kDefaultBracket);

// Parses "sphere:k=<int>", "yang-mills", "semilinear6d" or "custom:<path>".
// A custom manifest is key = value text with keys g, g_prime, g_second and
// optionally f, f_prime, bracket.
Model parse_model(std::string_view spec);
Model load_custom_manifest(const std::string& path);

// Zeros of g on [-bracket, bracket]: sign changes refined by bisection plus
// touching zeros found as local minima of |g|.
std::vector<Vacuum> enumerate_vacua(const Model& model, double bracket);

// ---------------------------------------------------------------------------
// Solitons

// Sphere: Q(r) = offset*pi + orientation * 2 arctan((r/scale)^k).
// Yang-Mills: orientation * (1 - s^2) / (1 + s^2), offset must be 0.
// Semilinear6D: orientation * s^2 W(s) in the psi view (sign l_j = orientation).
struct SolitonBranch {
  int offset = 0;
  int orientation = 1;
};

class Soliton {
 public:
  Soliton(ModelPtr model, SolitonBranch branch, double scale);

  const Model& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  SolitonBranch branch() const { return branch_; }
  double scale() const { return scale_; }

  double value(double r) const;
  double dr(double r) const;
  double drr(double r) const;
  double at_origin() const;
  double at_infinity() const;

  // Native 6-d profile  l * scale^-2 W(r / scale)  (Semilinear6D only).
  double native_value(double r) const;

  Soliton rescaled(double scale) const { return Soliton(model_, branch_, scale); }

 private:
  ModelPtr model_;
  SolitonBranch branch_;
  double scale_;
};

Soliton make_soliton(ModelPtr model, SolitonBranch branch, double scale);

// Ground state W(x) = 1 / (1/24 + |x|^2)^2 of the 6-d equation.
double ground_state_W(double r);
double ground_state_W_dr(double r);

// Branches whose profile tends to `exterior` at infinity: the candidates for
// the outermost remaining bubble in a decomposition.
std::vector<SolitonBranch> branches_ending_at(const Model& model, double exterior);

// 2 |G(Q(inf)) - G(Q(0))|. Throws for the 6-d equation.
double soliton_energy(const Model& model, const Soliton& s);

struct SolitonResiduals {
  double ode = 0.0;        // sup |r^2 (Q_rr + Q_r / r) - f(Q)|
  double bogomolny = 0.0;  // min over sign of sup |r Q_r -+ g(Q)|
};

SolitonResiduals soliton_residuals(const Soliton& s, std::span<const double> radii);

// Same residuals for an arbitrary profile using 4th-order central differences
// with step h * r.
template <class Profile>
SolitonResiduals profile_residuals(const Model& model, const Profile& q,
                                   std::span<const double> radii, double rel_step = 1e-3);

// ---------------------------------------------------------------------------
// Assumption checks

struct VacuumCheck {
  Vacuum vacuum;
  bool integer_slope = false;  // |g'(l)| is an integer >= 1
  bool flat_if_unit = false;   // |g'(l)| = 1  implies g''(l) = 0
  bool a3_strict = false;      // g'(l) in {-2,-1,1,2} and the unit condition
};

struct AssumptionReport {
  double bracket = 0.0;
  std::vector<VacuumCheck> vacua;
  bool a1_growth = false;
  bool a2_discrete = false;
  double min_gap = 0.0;
  bool a3 = false;
  bool a3_prime = false;

  bool pass() const { return a1_growth && a2_discrete && a3_prime; }
};

AssumptionReport check_assumptions(const Model& model, double bracket);

// ---------------------------------------------------------------------------

template <class Profile>
SolitonResiduals profile_residuals(const Model& model, const Profile& q,
                                   std::span<const double> radii, double rel_step) {
  SolitonResiduals out;
  double bog_plus = 0.0, bog_minus = 0.0;
  for (double r : radii) {
    const double h = rel_step * r;
    const double qm2 = q(r - 2 * h), qm1 = q(r - h), q0 = q(r), qp1 = q(r + h), qp2 = q(r + 2 * h);
    const double d1 = (qm2 - 8 * qm1 + 8 * qp1 - qp2) / (12 * h);
    const double d2 = (-qm2 + 16 * qm1 - 30 * q0 + 16 * qp1 - qp2) / (12 * h * h);
    const double ode = r * r * d2 + r * d1 - model.f(q0);
    if (std::abs(ode) > out.ode) out.ode = std::abs(ode);
    bog_plus = std::max(bog_plus, std::abs(r * d1 - model.g(q0)));
    bog_minus = std::max(bog_minus, std::abs(r * d1 + model.g(q0)));
  }
  out.bogomolny = std::min(bog_plus, bog_minus);
  return out;
}

}  // namespace bubbletower
