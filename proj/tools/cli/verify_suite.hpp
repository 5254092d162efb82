#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bubbletower/model.hpp"

namespace bubbletower::cli {

struct CheckRow {
  std::string model;
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

// Models as CLI strings; empty means the four built-ins. A tolerance override
// replaces every row's threshold. A row passes iff value < tolerance.
std::vector<CheckRow> run_verify(const std::vector<std::string>& models, std::optional<double> tolerance = {});

bool all_pass(const std::vector<CheckRow>& rows);
std::string format_table(const std::vector<CheckRow>& rows);

// Individual closed-form checks, shared with the acceptance runner.

// Probe radii 10^[-3, 3], 241 points.
std::vector<double> probe_radii();

// int_0^inf (Q_r^2 + g(Q)^2 / r^2) r dr by double-exponential quadrature.
double quadrature_energy(const Soliton& q);

struct SignedIntegral {
  double value = 0.0;
  double scale = 0.0;  // integral of the absolute reference term
};

// int (f'(Q) Q_r^2 + f(Q)^2 / r^2) r dr, scale int |f'(Q)| Q_r^2 r dr.
SignedIntegral harmonic_virial(const Soliton& q);

// int (|W'|^2 - W^3) r^5 dr, scale int |W'|^2 r^5 dr.
SignedIntegral pohozaev();

// Closed-form soliton energy stated for the built-in families: 4k for the
// sphere, 8/3 for Yang-Mills. Empty for other models.
std::optional<double> expected_soliton_energy(const Model& model);

}  // namespace bubbletower::cli
