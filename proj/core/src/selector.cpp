#include "bubbletower/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bubbletower/error.hpp"
#include "bubbletower/grid.hpp"

namespace bubbletower {

namespace {

double slope(const std::vector<double>& t, const std::vector<double>& P, std::size_t i, std::size_t j) {
  return (P[j] - P[i]) / (t[j] - t[i]);
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Upper convex hull of (t_j, P_j) built right to left; answers the largest
// slope from a point left of every stored point.
class LeftTangentHull {
 public:
  LeftTangentHull(const std::vector<double>& t, const std::vector<double>& P) : t_(t), P_(P) {}

  void add(std::size_t p) {
    while (hull_.size() >= 2) {
      const std::size_t q1 = hull_.back(), q2 = hull_[hull_.size() - 2];
      const double cross = (t_[q2] - t_[p]) * (P_[q1] - P_[p]) - (P_[q2] - P_[p]) * (t_[q1] - t_[p]);
      if (cross > 0.0) break;
      hull_.pop_back();
    }
    hull_.push_back(p);
  }

  double max_slope_from(std::size_t s) const {
    const std::size_t L = hull_.size();
    auto vertex = [&](std::size_t m) { return hull_[L - 1 - m]; };
    std::size_t lo = 0, hi = L - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (slope(t_, P_, s, vertex(mid + 1)) > slope(t_, P_, s, vertex(mid)))
        lo = mid + 1;
      else
        hi = mid;
    }
    return slope(t_, P_, s, vertex(lo));
  }

  bool empty() const { return hull_.empty(); }

 private:
  const std::vector<double>& t_;
  const std::vector<double>& P_;
  std::vector<std::size_t> hull_;
};

struct Sweep {
  double value;
  double tau;
};

// sup over j in (i, j_last] of the forward average, earliest maximiser;
// one sample gap when the range is empty.
Sweep forward_sup(const std::vector<double>& t, const std::vector<double>& P, std::size_t i, std::size_t j_last) {
  if (j_last <= i) {
    const std::size_t a = i + 1 < t.size() ? i : i - 1;
    return {slope(t, P, a, a + 1), t[a + 1] - t[a]};
  }
  Sweep best{slope(t, P, i, i + 1), t[i + 1] - t[i]};
  for (std::size_t j = i + 2; j <= j_last; ++j) {
    const double v = slope(t, P, i, j);
    if (v > best.value) best = {v, t[j] - t[i]};
  }
  return best;
}

// Last sample index j with t_j - t_i < t_i / 4 (global admissible range).
std::size_t global_range_end(const std::vector<double>& t, std::size_t i) {
  std::size_t j = i;
  while (j + 1 < t.size() && t[j + 1] - t[i] < 0.25 * t[i]) ++j;
  return j;
}

SampledSeries scaled(const SampledSeries& s, double scale) {
  SampledSeries out = s;
  for (double& v : out.values) v /= scale;
  return out;
}

void check_pair(const SampledSeries& g, const SampledSeries& h) {
  g.validate();
  h.validate();
  require(g.mode == h.mode, "g and h series must share the mode");
  require(g.times == h.times, "g and h series must share the sample times");
}

}  // namespace

void SampledSeries::validate() const {
  require(times.size() == values.size(), "series times and values differ in length");
  require(times.size() >= 2, "series needs at least two samples");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]) && std::isfinite(values[i]), "series has non-finite entries");
    if (i > 0) require(times[i] > times[i - 1], "series times must increase strictly");
  }
  if (mode == SeriesMode::Global) require(times.front() > 0.0, "global series times must be positive");
}

std::vector<double> prefix_integrals(const std::vector<double>& t, const std::vector<double>& v, SeriesMode mode) {
  const std::size_t n = t.size();
  std::vector<double> P(n);
  if (mode == SeriesMode::Blowup) {
    P[n - 1] = 0.0;
    for (std::size_t i = n - 1; i-- > 0;) P[i] = P[i + 1] - 0.5 * (t[i + 1] - t[i]) * (v[i] + v[i + 1]);
    return P;
  }
  P[0] = t[0] * v[0];
  for (std::size_t i = 1; i < n; ++i) P[i] = P[i - 1] + 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return P;
}

std::vector<double> prefix_integrals(const SampledSeries& s) { return prefix_integrals(s.times, s.values, s.mode); }

Anchors build_anchors(const SampledSeries& g) {
  g.validate();
  for (double v : g.values)
    if (v < 0.0) fail(ErrorCode::HypothesisFailed, "g must be non-negative (found " + format_double(v) + ")");
  const auto& t = g.times;
  const auto P = prefix_integrals(g);
  const std::size_t n = t.size();
  Anchors a;

  if (g.mode == SeriesMode::Blowup) {
    const double H = t.back();
    auto tail = [&](std::size_t i) { return (P[n - 1] - P[i]) / (H - t[i]); };
    std::size_t i = 0;
    a.index.push_back(0);
    a.t.push_back(t[0]);
    a.average.push_back(tail(0));
    for (;;) {
      std::size_t next = n;
      for (std::size_t j = i + 1; j + 1 < n; ++j) {
        if (H - t[j] <= 0.25 * (H - t[i]) && tail(j) <= 0.25 * tail(i)) {
          next = j;
          break;
        }
      }
      if (next == n) break;
      i = next;
      a.index.push_back(i);
      a.t.push_back(t[i]);
      a.average.push_back(tail(i));
    }
  } else {
    std::size_t i = 0;
    while (i + 1 < n && P[i] <= 0.0) ++i;
    if (P[i] <= 0.0) i = 0;
    double W = P[i] / t[i];
    a.index.push_back(i);
    a.t.push_back(t[i]);
    a.average.push_back(W);
    for (;;) {
      std::size_t next = n;
      double Wn = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (t[j] <= 2.0 * t[i]) continue;
        const double w = slope(t, P, i, j);
        if (w <= 0.25 * W) {
          next = j;
          Wn = w;
          break;
        }
      }
      if (next == n) break;
      i = next;
      W = Wn;
      a.index.push_back(i);
      a.t.push_back(t[i]);
      a.average.push_back(W);
    }
  }
  if (a.index.size() < 2)
    fail(ErrorCode::HypothesisFailed, std::string(g.mode == SeriesMode::Blowup ? "tail" : "window") +
                                          " average of g does not decay: stuck at " + format_double(a.average.back()));
  return a;
}

LambdaSteps build_lambda(const std::vector<double>& anchors) {
  require(!anchors.empty(), "lambda needs at least one anchor");
  for (std::size_t i = 1; i < anchors.size(); ++i) require(anchors[i] > anchors[i - 1], "anchors must increase");
  return LambdaSteps{anchors};
}

double LambdaSteps::operator()(double t) const {
  const auto k = std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin();
  return std::ldexp(1.0, static_cast<int>(std::max<std::ptrdiff_t>(k, 1)));
}

std::vector<double> weighted_sum(const TimeSelection& sel, const SampledSeries& g, const SampledSeries& h) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = sel.lambda(g.times[i]) * (g.values[i] / sel.g_scale) + h.values[i] / sel.h_scale;
  return v;
}

TimeSelection select_times(const SampledSeries& g, const SampledSeries& h, const SelectOptions& opt) {
  check_pair(g, h);
  require(opt.tol_sel > 0.0, "tol_sel must be positive");
  TimeSelection sel;
  sel.mode = g.mode;
  sel.tol_sel = opt.tol_sel;
  if (opt.normalize) {
    const double gs = sup_abs(g.values), hs = sup_abs(h.values);
    sel.g_scale = gs > 0.0 ? gs : 1.0;
    sel.h_scale = hs > 0.0 ? hs : 1.0;
  }
  const auto anchors = build_anchors(scaled(g, sel.g_scale));
  if (anchors.index.size() < 3)
    fail(ErrorCode::HypothesisFailed,
         "only " + std::to_string(anchors.index.size()) + " anchors in the sampled horizon (need 3)");
  sel.anchors = anchors.t;
  sel.anchor_index = anchors.index;
  sel.lambda = build_lambda(anchors.t);

  const auto& t = g.times;
  const std::size_t n = t.size();
  const std::size_t K = anchors.index.size();

  // h averages must not grow along the anchors.
  {
    const auto Ph = prefix_integrals(scaled(h, sel.h_scale));
    auto avg = [&](std::size_t i) {
      return g.mode == SeriesMode::Blowup ? (Ph[n - 1] - Ph[i]) / (t[n - 1] - t[i]) : Ph[i] / t[i];
    };
    const double first = std::abs(avg(anchors.index.front())), last = std::abs(avg(anchors.index.back()));
    if (!(last < first || last <= opt.tol_sel))
      fail(ErrorCode::HypothesisFailed, "averages of h do not decay along the anchors: " + format_double(first) +
                                            " -> " + format_double(last));
  }

  const auto v = weighted_sum(sel, g, h);
  const auto P = prefix_integrals(t, v, g.mode);

  if (g.mode == SeriesMode::Blowup) {
    const double H = t[n - 1];
    std::vector<double> tails(K);
    bool positive = true;
    for (std::size_t k = 0; k < K; ++k) {
      tails[k] = (P[n - 1] - P[anchors.index[k]]) / (H - t[anchors.index[k]]);
      positive = positive && tails[k] > 0.0;
    }
    std::vector<double> w = v;
    if (!positive) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto k = std::upper_bound(anchors.t.begin(), anchors.t.end(), t[i]) - anchors.t.begin();
        if (k >= 1) w[i] += 4.0 * std::abs(tails[k - 1]) + std::ldexp(1.0, -static_cast<int>(k));
      }
    }
    const auto Pw = prefix_integrals(t, w, g.mode);
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t a = anchors.index[k];
      const double mid = 0.5 * (t[a] + H);
      std::size_t best = n - 1;
      double best_v = slope(t, Pw, a, n - 1);
      for (std::size_t s = a + 1; s < n; ++s) {
        if (t[s] < mid) continue;
        const double val = slope(t, Pw, a, s);
        if (val > best_v || (val == best_v && s < best)) {
          best_v = val;
          best = s;
        }
      }
      const Sweep c = forward_sup(t, P, best, n - 1);
      sel.t_tilde.push_back(t[best]);
      sel.t_tilde_index.push_back(best);
      sel.certificates.push_back(c.value);
      sel.certificate_tau.push_back(c.tau);
      sel.case_used.push_back(positive ? 1 : 2);
      sel.epsilon.push_back(positive ? 0.0 : std::abs(tails[k]));
    }
  } else {
    for (std::size_t k = 0; k + 1 < K; ++k) {
      const std::size_t a = anchors.index[k], b = anchors.index[k + 1];
      const double half = t[a] + 0.5 * (t[b] - t[a]);
      std::size_t s_max = a;
      while (s_max + 1 < b && t[s_max + 1] <= half) ++s_max;
      LeftTangentHull hull(t, P);
      for (std::size_t j = b; j > s_max; --j) hull.add(j);
      std::size_t best = s_max;
      double best_v = hull.max_slope_from(s_max);
      for (std::size_t s = s_max;; --s) {
        const double m = hull.max_slope_from(s);
        if (m <= best_v) {
          best_v = m;
          best = s;
        }
        if (s == a) break;
        hull.add(s);
      }
      const Sweep c = forward_sup(t, P, best, global_range_end(t, best));
      sel.t_tilde.push_back(t[best]);
      sel.t_tilde_index.push_back(best);
      sel.certificates.push_back(c.value);
      sel.certificate_tau.push_back(c.tau);
      sel.case_used.push_back(1);
      sel.epsilon.push_back(0.0);
    }
  }
  sel.meets_tolerance = !sel.certificates.empty() && sel.certificates.back() <= opt.tol_sel;
  return sel;
}

CertifyReport certify(const TimeSelection& sel, const SampledSeries& g, const SampledSeries& h) {
  check_pair(g, h);
  require(g.mode == sel.mode, "selection and series modes differ");
  require(sel.t_tilde_index.size() == sel.certificates.size(), "selection is inconsistent");
  const auto& t = g.times;
  const std::size_t n = t.size();
  const auto v = weighted_sum(sel, g, h);
  const auto P = prefix_integrals(t, v, g.mode);
  CertifyReport rep;
  for (std::size_t k = 0; k < sel.certificates.size(); ++k) {
    const std::size_t i = sel.t_tilde_index[k];
    require(i < n && t[i] == sel.t_tilde[k], "selected time does not match the series samples");
    // Dense sweep: every later sample in the admissible range is a tau endpoint.
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sel.mode == SeriesMode::Global && !(t[j] - t[i] < 0.25 * t[i])) break;
      sup = std::max(sup, (P[j] - P[i]) / (t[j] - t[i]));
    }
    if (sup == -std::numeric_limits<double>::infinity()) {
      const std::size_t a = i + 1 < n ? i : i - 1;
      sup = (P[a + 1] - P[a]) / (t[a + 1] - t[a]);
    }
    rep.recomputed.push_back(sup);
    const double d = std::abs(sup - sel.certificates[k]);
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::isnan(d) ? std::numeric_limits<double>::infinity() : d);
  }
  rep.ok = rep.max_discrepancy <= 1e-12;
  return rep;
}

}  // namespace bubbletower
