#include "app.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <algorithm>
#include <functional>

#include <CLI11.hpp>

#include "bubbletower/bubbles.hpp"
#include "bubbletower/diagnostics.hpp"
#include "bubbletower/error.hpp"
#include "bubbletower/initial_data.hpp"
#include "bubbletower/selector.hpp"
#include "bubbletower/solver.hpp"
#include "run_io.hpp"
#include "verify_suite.hpp"

extern char** environ;

namespace bubbletower::cli {

namespace {

struct GridArgs {
  std::string policy = "graded";
  std::size_t n = 4096;
  double rmax = 8.0;
  double ratio = 0.999;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "grid cells")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--rmax", rmax, "outer radius")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--grid", policy, "uniform or graded")->check(CLI::IsMember({"uniform", "graded"}))
        ->capture_default_str();
    cmd->add_option("--ratio", ratio, "cell ratio of graded grids")->capture_default_str();
  }

  RadialGrid make() const {
    return policy == "graded" ? RadialGrid::graded(n, rmax, ratio) : RadialGrid::uniform(n, rmax);
  }

  json to_json() const { return {{"policy", policy}, {"cells", n}, {"r_max", rmax}, {"ratio", ratio}}; }
};

struct SolveArgs {
  double tend = 1.0, cfl = 0.5, cadence = 0.0, refine = 64.0, gradient_cap = 0.0;
  int max_refine = 12;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tend", tend, "final time")->capture_default_str();
    cmd->add_option("--cfl", cfl, "dt / h_min")->capture_default_str();
    cmd->add_option("--cadence", cadence, "time between snapshots (0: every 64 steps)")->capture_default_str();
    cmd->add_option("--refine-threshold", refine, "cells per concentration scale before refining")
        ->capture_default_str();
    cmd->add_option("--max-refine", max_refine, "refinement levels before a dt-floor stop")->capture_default_str();
    cmd->add_option("--gradient-cap", gradient_cap, "blow-up stop on sup |psi_r| (0: 1e6 / R_max)")
        ->capture_default_str();
  }

  SolveConfig make() const {
    SolveConfig c;
    c.t_end = tend;
    c.cfl = cfl;
    c.snapshot_cadence = cadence;
    c.refine_threshold = refine;
    c.max_refine_levels = max_refine;
    c.blowup_gradient_cap = gradient_cap;
    c.validate();
    return c;
  }

  json to_json() const {
    return {{"t_end", tend},          {"cfl", cfl},
            {"cadence", cadence},     {"refine_threshold", refine},
            {"max_refine", max_refine}, {"gradient_cap", gradient_cap}};
  }

  std::vector<std::string> argv() const {
    return {"--tend",       format_double(tend),   "--cfl",          format_double(cfl),
            "--cadence",    format_double(cadence), "--refine-threshold", format_double(refine),
            "--max-refine", std::to_string(max_refine), "--gradient-cap", format_double(gradient_cap)};
  }
};

ModelPtr load_model(const std::string& spec) { return std::make_shared<const Model>(parse_model(spec)); }

std::string short_hash(const json& j) { return sha256_text(j.dump()).substr(0, 12); }

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string model, data, out;
  GridArgs grid;
  SolveArgs solve;
};

json simulation_inputs(const SimulateArgs& a) {
  json in = {{"model", a.model}, {"data", a.data}, {"grid", a.grid.to_json()}, {"solve", a.solve.to_json()}};
  const DataSpec spec = parse_data_spec(a.data);
  if (spec.family == "snapshot") in["data_sha256"] = sha256_file(spec.path);
  if (a.model.rfind("custom:", 0) == 0) in["model_sha256"] = sha256_file(a.model.substr(7));
  return in;
}

int cmd_simulate(const SimulateArgs& a) {
  const ModelPtr model = load_model(a.model);
  const RadialGrid grid = a.grid.make();
  const SolveConfig cfg = a.solve.make();
  const FieldState init = make_initial_data(model, a.data, grid);
  const json inputs = simulation_inputs(a);
  const fs::path dir = a.out.empty() ? default_output("sim-" + short_hash(inputs)) : fs::path(a.out);

  const EvolveResult res = evolve(init, cfg);
  const Trajectory& traj = res.trajectory;

  fs::create_directories(dir / "series");
  json snaps = json::array(), files = json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.csv", i);
    write_snapshot((dir / name).string(), traj.snapshots[i]);
    json e = file_entry(dir, dir / name);
    e["t"] = traj.times[i];
    snaps.push_back(std::move(e));
  }
  for (const auto& [name, values] : traj.series) {
    write_series(dir.string(), name, traj.times, values);
    files.push_back(file_entry(dir, dir / "series" / (name + ".csv")));
  }

  const auto& rep = res.report;
  json manifest = inputs;
  manifest["tool"] = "bubbletower";
  manifest["version"] = kToolVersion;
  manifest["input_hash"] = sha256_text(inputs.dump());
  manifest["stop_reason"] = to_string(rep.reason);
  manifest["blowup"] = rep.detected;
  manifest["T_est"] = rep.detected ? rep.T_est : traj.times.back();
  manifest["t_final"] = traj.times.back();
  manifest["steps"] = rep.steps;
  manifest["refine_levels"] = rep.refine_levels;
  manifest["snapshots"] = std::move(snaps);
  manifest["files"] = std::move(files);
  write_json(dir / "manifest.json", manifest);

  std::cout << "run=" << dir.string() << " stop=" << to_string(rep.reason) << " t=" << format_double(traj.times.back())
            << " snapshots=" << traj.size();
  if (rep.detected) std::cout << " T_est=" << format_double(rep.T_est);
  std::cout << '\n';
  return rep.detected ? kExitBlowup : kExitOk;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string run;
  std::vector<std::string> series;
  std::string mode = "auto";
  double lambda = 0.5, lambda0 = 0.5, A = 0.0;
  double T = 0.0;
};

const std::vector<std::string> kAllSeries = {"energy", "eext", "g", "h", "flux", "virial", "cone"};

int cmd_diagnose(const DiagnoseArgs& a) {
  const fs::path dir(a.run);
  LoadedRun run = load_run(dir);
  Trajectory& traj = run.trajectory;
  if (a.mode == "blowup") traj.blowup_mode = true;
  if (a.mode == "global") {
    traj.blowup_mode = false;
    traj.T_ref = traj.times.back();
  }
  if (a.T > 0.0) traj.T_ref = a.T;

  const bool explicit_list = !a.series.empty();
  const auto& wanted = explicit_list ? a.series : kAllSeries;
  for (const auto& w : wanted)
    if (std::find(kAllSeries.begin(), kAllSeries.end(), w) == kAllSeries.end())
      fail(ErrorCode::InvalidArgument, "unknown series '" + w + "'");

  const std::string d = dir.string();
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::vector<double>& t, const std::vector<double>& v) {
    write_series(d, name, t, v);
    written.push_back(name);
  };
  auto want = [&](const char* name) { return std::find(wanted.begin(), wanted.end(), name) != wanted.end(); };
  auto attempt = [&](const char* name, const std::function<void()>& body) {
    if (!want(name)) return;
    try {
      body();
    } catch (const Error& e) {
      if (explicit_list) throw;
      std::cerr << "skipped " << name << ": " << e.what() << '\n';
    }
  };

  const bool wave = traj.snapshots.front().model->is_wave_map();
  attempt("energy", [&] {
    std::vector<double> e;
    for (const auto& s : traj.snapshots) e.push_back(energy(s).total);
    emit("energy", traj.times, e);
  });
  attempt("eext", [&] {
    const auto w = exterior_selfsimilar_energy(traj, a.lambda, a.A);
    emit("eext", w.t, w.value);
    if (traj.blowup_mode) {
      emit("eext_T_minus", w.t, w.value_T_minus);
      emit("eext_T_plus", w.t, w.value_T_plus);
    }
  });
  const VirialMode vm = traj.blowup_mode ? VirialMode::Blowup : VirialMode::Global;
  if (want("g") || want("h")) {
    std::optional<VirialSeries> vs;
    auto get = [&]() -> const VirialSeries& {
      if (!vs) vs = virial_series(traj, vm);
      return *vs;
    };
    attempt("g", [&] { emit("g", get().t, get().g); });
    attempt("h", [&] { emit("h", get().t, get().h); });
  }
  attempt("flux", [&] {
    const auto r = flux_identity_residual(traj, ConeGeometry::of(traj));
    emit("flux_residual", r.t, r.residual);
  });
  attempt("virial", [&] {
    if (wave) {
      const auto r = virial_identity_residual(traj, VirialIdentity::WaveMap);
      emit("virial_residual", r.t, r.residual);
    } else {
      const auto r2 = virial_identity_residual(traj, VirialIdentity::Mult2u);
      emit("virial_residual_2u", r2.t, r2.residual);
      const auto r3 = virial_identity_residual(traj, VirialIdentity::Mult3u);
      emit("virial_residual_3u", r3.t, r3.residual);
    }
  });
  attempt("cone", [&] {
    const auto w = pointwise_cone_bound(traj, a.lambda0);
    emit("cone_bound", w.t, w.value);
  });

  json index = {{"mode", traj.blowup_mode ? "blowup" : "global"},
                {"T_ref", traj.T_ref},
                {"lambda", a.lambda},
                {"lambda0", a.lambda0},
                {"series", json::array()}};
  for (const auto& name : written) index["series"].push_back(file_entry(dir, dir / "series" / (name + ".csv")));
  write_json(dir / "series" / "index.json", index);
  for (const auto& name : written) std::cout << (dir / "series" / (name + ".csv")).string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// select-times

struct SelectArgs {
  std::string run, g, h, out, mode;
  double tol = 1e-3;
  bool raw = false;
};

SampledSeries load_series(const std::string& path, SeriesMode mode) {
  if (!fs::exists(path)) fail(ErrorCode::Io, "missing series '" + path + "'");
  auto [t, v] = read_series(path);
  SampledSeries s{std::move(t), std::move(v), mode};
  s.validate();
  return s;
}

int cmd_select_times(const SelectArgs& a) {
  std::string gpath = a.g, hpath = a.h;
  std::string mode = a.mode;
  fs::path out = a.out;
  if (!a.run.empty()) {
    const fs::path dir(a.run);
    if (gpath.empty()) gpath = (dir / "series" / "g.csv").string();
    if (hpath.empty()) hpath = (dir / "series" / "h.csv").string();
    if (mode.empty()) mode = read_json(dir / "manifest.json").value("blowup", false) ? "blowup" : "global";
    if (out.empty()) out = dir / "selection.json";
  }
  if (gpath.empty() || hpath.empty()) fail(ErrorCode::InvalidArgument, "select-times needs --run or both --g-series and --h-series");
  if (mode.empty()) mode = "blowup";
  if (out.empty()) out = "selection.json";
  const SeriesMode sm = mode == "global" ? SeriesMode::Global : SeriesMode::Blowup;

  const SampledSeries g = load_series(gpath, sm), h = load_series(hpath, sm);
  SelectOptions opt;
  opt.tol_sel = a.tol;
  opt.normalize = !a.raw;
  const TimeSelection sel = select_times(g, h, opt);
  const CertifyReport cert = certify(sel, g, h);

  json doc = {{"mode", mode},
              {"tol_sel", sel.tol_sel},
              {"g_scale", sel.g_scale},
              {"h_scale", sel.h_scale},
              {"anchors", sel.anchors},
              {"anchor_index", sel.anchor_index},
              {"lambda_breaks", sel.lambda.breaks},
              {"t_tilde", sel.t_tilde},
              {"t_tilde_index", sel.t_tilde_index},
              {"certificates", sel.certificates},
              {"certificate_tau", sel.certificate_tau},
              {"case_used", sel.case_used},
              {"epsilon", sel.epsilon},
              {"meets_tolerance", sel.meets_tolerance},
              {"certify", {{"max_discrepancy", cert.max_discrepancy}, {"ok", cert.ok}}},
              {"inputs", {{"g", gpath}, {"h", hpath}}}};
  write_json(out, doc);
  std::cout << "selected=" << sel.t_tilde.size() << " last_certificate="
            << (sel.certificates.empty() ? std::string("none") : format_double(sel.certificates.back()))
            << " meets_tolerance=" << (sel.meets_tolerance ? "yes" : "no") << " out=" << out.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeArgs {
  std::string snapshot, run, out;
  long index = -1;
  DecomposeOptions opt;
};

std::string join_scales(const std::vector<double>& v) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", v[i]);
    if (i) s += ',';
    s += buf;
  }
  return s.empty() ? "-" : s;
}

json decomposition_json(const FieldState& state, const BubbleDecomposition& dec) {
  json bubbles = json::array();
  for (const auto& b : dec.bubbles) {
    const auto br = b.soliton.branch();
    bubbles.push_back({{"family", state.model->name()},
                       {"branch", {{"offset", br.offset}, {"orientation", br.orientation}}},
                       {"scale", b.soliton.scale()},
                       {"orientation", br.orientation},
                       {"value_at_origin", b.soliton.at_origin()},
                       {"value_at_infinity", b.soliton.at_infinity()},
                       {"outer_radius", b.outer_radius},
                       {"delta", b.delta},
                       {"fit_residual", b.fit_residual},
                       {"prefit_norm", b.prefit_norm},
                       {"energy", b.energy}});
  }
  const auto& n = dec.norms;
  json dyadic = json::array();
  for (std::size_t j = 0; j < n.dyadic.size(); ++j)
    dyadic.push_back({{"r_lo", n.dyadic_windows[j].first}, {"r_hi", n.dyadic_windows[j].second}, {"h", n.dyadic[j]}});
  const auto& bud = dec.budget;
  const VirialSplit split = annulus_virial_split(state, dec);
  json regions = json::array();
  for (const auto& r : split.regions)
    regions.push_back({{"kind", region_name(r.kind)},
                       {"index", r.index},
                       {"r_lo", r.r_lo},
                       {"r_hi", r.r_hi},
                       {"fprime_term", r.fprime_term},
                       {"f2_term", r.f2_term},
                       {"soliton_fprime", r.soliton_fprime},
                       {"soliton_f2", r.soliton_f2}});
  return {{"model", state.model->name()},
          {"t", state.t},
          {"J", dec.J()},
          {"exterior", dec.exterior},
          {"interior", dec.interior},
          {"chain_closed", dec.chain_closed},
          {"bubbles", bubbles},
          {"scales_ratio", dec.scales_ratio},
          {"schedule", {{"delta", dec.schedule.delta}, {"deltas", dec.schedule.deltas}}},
          {"norms",
           {{"sup_b0", n.sup_b0},
            {"l2_b1", n.l2_b1},
            {"h_b0", n.h_b0},
            {"h_cross_l2", n.h_cross_l2},
            {"energy_norm", n.energy_norm},
            {"bubble_norm_sum", n.bubble_norm_sum},
            {"relative", n.relative},
            {"dyadic", dyadic}}},
          {"energy_budget",
           {{"total", bud.total},
            {"bubbles", bud.bubbles},
            {"residual", bud.residual},
            {"mismatch", bud.mismatch},
            {"tol", bud.tol},
            {"within", bud.within},
            {"extraction_energy", bud.extraction_energy},
            {"C", bud.C}}},
          {"virial_split",
           {{"regions", regions},
            {"total", split.total},
            {"soliton_total", split.soliton_total},
            {"residual_h2", split.residual_h2},
            {"coercivity", split.coercivity}}},
          {"events", dec.events}};
}

int cmd_decompose(const DecomposeArgs& a) {
  fs::path snap = a.snapshot;
  if (snap.empty()) {
    if (a.run.empty()) fail(ErrorCode::InvalidArgument, "decompose needs --snapshot or --run");
    const json m = read_json(fs::path(a.run) / "manifest.json");
    const auto& list = m.at("snapshots");
    if (list.empty()) fail(ErrorCode::Io, "run lists no snapshots");
    const long count = static_cast<long>(list.size());
    const long i = a.index < 0 ? count + a.index : a.index;
    if (i < 0 || i >= count) fail(ErrorCode::InvalidArgument, "snapshot index out of range");
    snap = fs::path(a.run) / list[static_cast<std::size_t>(i)].at("path").get<std::string>();
  }
  if (!fs::exists(snap)) fail(ErrorCode::Io, "missing snapshot '" + snap.string() + "'");
  const FieldState state = read_snapshot(snap.string());
  const BubbleDecomposition dec = decompose(state, a.opt);

  const fs::path out = a.out.empty() ? snap.parent_path() : fs::path(a.out);
  fs::create_directories(out);
  write_json(out / "decomposition.json", decomposition_json(state, dec));
  write_snapshot((out / "residual.csv").string(), dec.residual);

  char h[32];
  std::snprintf(h, sizeof h, "%.6g", dec.norms.h_cross_l2);
  std::cout << "J=" << dec.J() << " scales=" << join_scales(dec.scales()) << " residualH=" << h << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::vector<std::string> models;
  std::optional<double> tolerance;
};

int cmd_verify(const VerifyArgs& a) {
  const auto rows = run_verify(a.models, a.tolerance);
  std::cout << format_table(rows);
  const bool ok = all_pass(rows);
  std::cout << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string model, data, out;
  std::vector<std::string> values;
  int jobs = 1;
  GridArgs grid;
  SolveArgs solve;
};

int cmd_sweep(const SweepArgs& a) {
  if (a.data.find("{}") == std::string::npos) fail(ErrorCode::InvalidArgument, "--data must contain '{}'");
  if (a.values.empty()) fail(ErrorCode::InvalidArgument, "--values is empty");
  load_model(a.model);
  const json key = {{"model", a.model}, {"data", a.data}, {"values", a.values}, {"grid", a.grid.to_json()},
                    {"solve", a.solve.to_json()}};
  const fs::path dir = a.out.empty() ? default_output("sweep-" + short_hash(key)) : fs::path(a.out);
  fs::create_directories(dir);
  const std::string self = fs::read_symlink("/proc/self/exe").string();

  struct Job {
    std::string value, data;
    fs::path out;
    pid_t pid = 0;
    int exit = -1;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    Job j;
    j.value = a.values[k];
    j.data = a.data;
    j.data.replace(j.data.find("{}"), 2, j.value);
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", k);
    j.out = dir / name;
    jobs.push_back(std::move(j));
  }

  auto launch = [&](Job& j) {
    std::vector<std::string> args = {self,          "simulate",   "--model",        a.model,
                                     "--data",      j.data,       "--out",          j.out.string(),
                                     "--n",         std::to_string(a.grid.n), "--rmax", format_double(a.grid.rmax),
                                     "--grid",      a.grid.policy, "--ratio",       format_double(a.grid.ratio)};
    for (auto& s : a.solve.argv()) args.push_back(s);
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    argv.push_back(nullptr);
    if (posix_spawn(&j.pid, self.c_str(), nullptr, nullptr, argv.data(), environ) != 0)
      fail(ErrorCode::Io, "cannot start '" + self + "'");
  };
  auto reap = [&]() {
    int status = 0;
    const pid_t pid = waitpid(-1, &status, 0);
    for (auto& j : jobs)
      if (j.pid == pid) j.exit = WIFEXITED(status) ? WEXITSTATUS(status) : kExitFailure;
  };

  const std::size_t width = static_cast<std::size_t>(std::max(1, a.jobs));
  std::size_t next = 0, running = 0;
  while (next < jobs.size() || running > 0) {
    while (running < width && next < jobs.size()) {
      launch(jobs[next++]);
      ++running;
    }
    reap();
    --running;
  }

  json runs = json::array();
  bool ok = true;
  for (const auto& j : jobs) {
    runs.push_back({{"value", j.value}, {"data", j.data}, {"dir", j.out.filename().string()}, {"exit", j.exit}});
    ok = ok && (j.exit == kExitOk || j.exit == kExitBlowup);
    std::cout << j.value << " exit=" << j.exit << " run=" << j.out.string() << '\n';
  }
  json doc = key;
  doc["runs"] = runs;
  write_json(dir / "sweep.json", doc);
  return ok ? kExitOk : kExitFailure;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::HypothesisFailed: return kExitHypothesis;
    case ErrorCode::NumericalFailure:
    case ErrorCode::CapacityExceeded: return kExitFailure;
    default: return kExitUsage;
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"bubbletower: radial wave maps, Yang-Mills and the 6-d focusing wave equation"};
  app.set_config("--config", "", "key = value file; [section] applies to the subcommand of that name");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "evolve initial data and write a run directory");
  c_sim->add_option("--model", sim.model, "sphere:k=<k>, yang-mills, semilinear6d or custom:<file>")->required();
  c_sim->add_option("--data", sim.data, "builtin:<family>[:k=v,...] or snapshot:<file>")->required();
  c_sim->add_option("--out", sim.out, "run directory (default $BUBBLETOWER_DATA_DIR/sim-<hash>)");
  sim.grid.attach(c_sim);
  sim.solve.attach(c_sim);

  DiagnoseArgs diag;
  auto* c_diag = app.add_subcommand("diagnose", "compute diagnostic series for a run");
  c_diag->add_option("--run", diag.run, "run directory")->required();
  c_diag->add_option("--series", diag.series, "energy eext g h flux virial cone (default: all)");
  c_diag->add_option("--mode", diag.mode, "auto, blowup or global")
      ->check(CLI::IsMember({"auto", "blowup", "global"}))
      ->capture_default_str();
  c_diag->add_option("--lambda", diag.lambda, "inner fraction of the self-similar window")->capture_default_str();
  c_diag->add_option("--lambda0", diag.lambda0, "inner fraction for the pointwise bound")->capture_default_str();
  c_diag->add_option("--A", diag.A, "offset of the global-mode window")->capture_default_str();
  c_diag->add_option("--T", diag.T, "override the reference time");

  SelectArgs sel;
  auto* c_sel = app.add_subcommand("select-times", "pick times where the averaged virial terms are small");
  c_sel->add_option("--run", sel.run, "run directory with series/g.csv and series/h.csv");
  c_sel->add_option("--g-series", sel.g, "g series CSV");
  c_sel->add_option("--h-series", sel.h, "h series CSV");
  c_sel->add_option("--mode", sel.mode, "blowup or global")->check(CLI::IsMember({"blowup", "global"}));
  c_sel->add_option("--tol", sel.tol, "certificate target")->capture_default_str();
  c_sel->add_flag("--raw", sel.raw, "do not normalise g and h");
  c_sel->add_option("--out", sel.out, "output JSON");

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "split a snapshot into rescaled solitons and a residual");
  c_dec->add_option("--snapshot", dec.snapshot, "snapshot CSV");
  c_dec->add_option("--run", dec.run, "run directory");
  c_dec->add_option("--index", dec.index, "snapshot index in the run (negative counts from the end)")
      ->capture_default_str();
  c_dec->add_option("--out", dec.out, "output directory (default: next to the snapshot)");
  c_dec->add_option("--max-bubbles", dec.opt.max_bubbles)->capture_default_str();
  c_dec->add_option("--separation-cap", dec.opt.separation_cap)->capture_default_str();
  c_dec->add_option("--window-factor", dec.opt.window_factor)->capture_default_str();
  c_dec->add_option("--reject-ratio", dec.opt.fit.reject_ratio)->capture_default_str();
  c_dec->add_option("--budget-tol", dec.opt.budget_tol)->capture_default_str();

  VerifyArgs ver;
  auto* c_ver = app.add_subcommand("verify", "closed-form verification battery");
  c_ver->add_option("--model", ver.models, "models to check (default: the built-ins)");
  c_ver->add_option("--tolerance", ver.tolerance, "replace every threshold");

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "run simulate over a list of parameter values");
  c_sw->add_option("--model", sw.model)->required();
  c_sw->add_option("--data", sw.data, "data spec with {} where the value goes")->required();
  c_sw->add_option("--values", sw.values, "values substituted for {}")->required()->delimiter(',');
  c_sw->add_option("--jobs", sw.jobs, "concurrent simulate processes")->capture_default_str();
  c_sw->add_option("--out", sw.out, "sweep directory");
  sw.grid.attach(c_sw);
  sw.solve.attach(c_sw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_diag->parsed()) return cmd_diagnose(diag);
    if (c_sel->parsed()) return cmd_select_times(sel);
    if (c_dec->parsed()) return cmd_decompose(dec);
    if (c_ver->parsed()) return cmd_verify(ver);
    if (c_sw->parsed()) return cmd_sweep(sw);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& s : copy) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data());
}

}  // namespace bubbletower::cli
