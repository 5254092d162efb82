#include "bubbletower/trajectory.hpp"

#include "bubbletower/error.hpp"

namespace bubbletower {

void Trajectory::add(FieldState s) {
  if (!times.empty() && !(s.t > times.back()))
    fail(ErrorCode::InvalidArgument, "snapshot times must increase strictly");
  times.push_back(s.t);
  snapshots.push_back(std::move(s));
}

void Trajectory::record(const std::string& name, double value) {
  auto& v = series[name];
  v.push_back(value);
  if (v.size() != times.size())
    fail(ErrorCode::InvalidArgument, "series '" + name + "' is not aligned with the snapshots");
}

const std::vector<double>& Trajectory::get(const std::string& name) const {
  auto it = series.find(name);
  if (it == series.end()) fail(ErrorCode::OutOfRange, "no series named '" + name + "'");
  return it->second;
}

}  // namespace bubbletower
