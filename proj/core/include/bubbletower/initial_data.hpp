#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "bubbletower/grid.hpp"

namespace bubbletower {

// Data spec grammar:
//   builtin:<family>[:key=value[,key=value...]]   or   snapshot:<path>
// Families:
//   vacuum        value=<l>                       (default: first vacuum >= 0)
//   soliton       scale, offset, orientation      (wave maps)
//   ground-state  scale, sign, amp                (semilinear6d; amp scales the profile)
//   degree1       amp, width, scale               Q(r/scale) with an inward push
//                 b r Q_r exp(-(r/(width scale))^2), b set so that E = amp E(Q)
//                 (defaults amp=1.05, width=3, scale=0.25)
//   bump          amp, center, width, vacuum      vacuum + amp (r/center)^m exp(-((r-center)/width)^2),
//                                                 m = |g'(vacuum)|
//   two-bubble    inner, outer, noise, seed       Q(r/outer) - pi + Q(r/inner) plus smooth noise
//                                                 (sphere models)
struct DataSpec {
  std::string family;
  std::map<std::string, double> params;
  std::string path;  // snapshot:<path>

  double get(const std::string& key, double fallback) const;
};

DataSpec parse_data_spec(std::string_view spec);

FieldState make_initial_data(const ModelPtr& model, const DataSpec& spec, const RadialGrid& grid);
FieldState make_initial_data(const ModelPtr& model, std::string_view spec, const RadialGrid& grid);

// Smooth perturbation: amplitude times a sum of eight Gaussian bumps in log r
// with centres drawn from [r_lo, r_hi]. Vanishes at the origin and at infinity.
std::function<double(double)> smooth_noise(double amplitude, double r_lo, double r_hi, unsigned seed);

}  // namespace bubbletower
