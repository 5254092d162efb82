#pragma once

#include <map>
#include <string>
#include <vector>

#include "bubbletower/grid.hpp"

namespace bubbletower {

// Time-ordered snapshots plus named series aligned to the snapshot times.
struct Trajectory {
  std::vector<FieldState> snapshots;
  std::vector<double> times;
  std::map<std::string, std::vector<double>> series;
  // Blow-up time estimate for blow-up runs, final time for global runs.
  double T_ref = 0.0;
  bool blowup_mode = false;

  // Appends a snapshot; times must increase strictly.
  void add(FieldState s);
  // Appends one value to a series; the series must then have one entry per snapshot.
  void record(const std::string& name, double value);

  std::size_t size() const { return snapshots.size(); }
  const std::vector<double>& get(const std::string& name) const;
  bool has(const std::string& name) const { return series.count(name) != 0; }
};

}  // namespace bubbletower
