#pragma once

#include <cstddef>
#include <vector>

namespace bubbletower {

enum class SeriesMode { Blowup, Global };

// Samples of g(t) or h(t). Blow-up series live on (0, 1) with the horizon
// taken as the last sample; global series on (0, inf).
struct SampledSeries {
  std::vector<double> times;
  std::vector<double> values;
  SeriesMode mode = SeriesMode::Blowup;

  std::size_t size() const { return times.size(); }
  // Throws InvalidArgument unless times increase strictly, values are finite
  // and there are at least two samples.
  void validate() const;
};

// Trapezoid antiderivative at the samples. Blow-up series are anchored at the
// horizon, P[i] = -int_{t_i}^{H} v, so tail integrals near H keep their relative
// precision. Global series use P[i] = int_0^{t_i} v with v held at v_0 on [0, t_0].
std::vector<double> prefix_integrals(const SampledSeries& s);
std::vector<double> prefix_integrals(const std::vector<double>& times, const std::vector<double>& values,
                                     SeriesMode mode);

struct Anchors {
  std::vector<std::size_t> index;
  std::vector<double> t;
  // Blow-up: tail average (1/(H - t_k)) int_{t_k}^H g.
  // Global: window average over [t_{k-1}, t_k] (t_0 = 0).
  std::vector<double> average;
};

// Greedy scan; each anchor is the first sample after the previous one that
// satisfies both the gap rule (H - t_{k+1} <= (H - t_k)/4, resp. t_{k+1} > 2 t_k)
// and the quarter decay of the averages. Throws HypothesisFailed if g < 0
// somewhere or no second anchor exists (the message carries the stuck average).
Anchors build_anchors(const SampledSeries& g);

// lambda(t) = 2^k on [t_k, t_{k+1}), 2 below t_1.
struct LambdaSteps {
  std::vector<double> breaks;

  double operator()(double t) const;
};

LambdaSteps build_lambda(const std::vector<double>& anchors);

struct SelectOptions {
  double tol_sel = 1e-3;
  bool normalize = true;
};

struct TimeSelection {
  SeriesMode mode = SeriesMode::Blowup;
  std::vector<double> anchors;
  std::vector<std::size_t> anchor_index;
  LambdaSteps lambda;
  std::vector<double> t_tilde;
  std::vector<std::size_t> t_tilde_index;
  // sup over sampled tau in the admissible range of (1/tau) int (lambda g + h),
  // on the normalised series; certificate_tau is the maximiser.
  std::vector<double> certificates;
  std::vector<double> certificate_tau;
  // 1 or 2 per selected time; epsilon is the repair size (0 in case 1).
  std::vector<int> case_used;
  std::vector<double> epsilon;
  double g_scale = 1.0;
  double h_scale = 1.0;
  double tol_sel = 1e-3;
  bool meets_tolerance = false;
};

// Blow-up: t~_k maximises the average of w over [t_k, s] for s in [(t_k + H)/2, H],
// with w = lambda g + h (case 1, all tail averages positive) or w = lambda g + h + f
// (case 2, f = sum (4 eps_k + 2^-k) on [t_k, t_{k+1}), eps_k = |tail average|).
// Certificates range over tau in (0, H - t~_k].
// Global: t~_k in [t_k, (t_k + t_{k+1})/2] minimises sup_{tau in (0, t_{k+1} - s)}
// of the forward average; certificates range over tau in (0, t~_k / 4).
// An empty tau range falls back to one sample gap.
TimeSelection select_times(const SampledSeries& g, const SampledSeries& h, const SelectOptions& opt = {});

struct CertifyReport {
  std::vector<double> recomputed;
  double max_discrepancy = 0.0;
  bool ok = true;  // max_discrepancy <= 1e-12
};

// Recomputes every certificate by a dense sweep over sampled tau.
CertifyReport certify(const TimeSelection& sel, const SampledSeries& g, const SampledSeries& h);

// lambda(t_i) g_i / g_scale + h_i / h_scale at the samples.
std::vector<double> weighted_sum(const TimeSelection& sel, const SampledSeries& g, const SampledSeries& h);

}  // namespace bubbletower
