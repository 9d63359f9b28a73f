// Copyright 2026 The gravscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gravscan/agreement.hpp"
#include "gravscan/annotation.hpp"
#include "gravscan/baselines.hpp"
#include "gravscan/features.hpp"
#include "gravscan/io.hpp"
#include "gravscan/metrics.hpp"
#include "gravscan/simulation.hpp"

#include <CLI11.hpp>

using namespace gravscan;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kInvalid = 4 };

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::pair<int, int> parse_grid(const std::string& spec) {
  int rows = 0, cols = 0;
  const auto x = spec.find('x');
  if (x == std::string::npos) throw UsageError("grid must look like <rows>x<cols>, got '" + spec + "'");
  const char* b = spec.data();
  const auto r1 = std::from_chars(b, b + x, rows);
  const auto r2 = std::from_chars(b + x + 1, b + spec.size(), cols);
  if (r1.ec != std::errc() || r1.ptr != b + x || r2.ec != std::errc() ||
      r2.ptr != b + spec.size()) {
    throw UsageError("grid must look like <rows>x<cols>, got '" + spec + "'");
  }
  return {rows, cols};
}

std::pair<std::string, double> parse_feature_arg(const std::string& arg) {
  const auto colon = arg.rfind(':');
  if (colon == std::string::npos) throw UsageError("feature map must be <pgm>:<alpha>");
  double alpha = 0.0;
  const char* b = arg.data() + colon + 1;
  const char* e = arg.data() + arg.size();
  const auto r = std::from_chars(b, e, alpha);
  if (r.ec != std::errc() || r.ptr != e) throw UsageError("bad alpha in '" + arg + "'");
  return {arg.substr(0, colon), alpha};
}

std::vector<Scanpath> read_all(const std::vector<std::string>& paths) {
  std::vector<Scanpath> out;
  for (const std::string& p : paths) out.push_back(read_scanpath(p));
  return out;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string image;
  std::string frames;
  double fps = 25.0;
  std::vector<std::string> features;
  std::string out;
  std::string saliency_out;
  double saliency_sigma = 0.03;
  bool emit_trajectory = false;
  SimParams params;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* sim = app.add_subcommand("simulate", "Simulate a gravitational scanpath over a stimulus");
  auto* img = sim->add_option("--image", a.image, "Still stimulus (PGM)");
  auto* frm = sim->add_option("--frames", a.frames, "Directory of PGM video frames");
  img->excludes(frm);
  sim->add_option("--fps", a.fps, "Frame rate of --frames and of emitted replay samples")
      ->capture_default_str();
  sim->add_option("--feature-map", a.features, "Extra static mass source <pgm>:<alpha> (repeatable)");
  sim->add_option("--duration", a.params.duration, "Simulated time, s")->capture_default_str();
  sim->add_option("--alpha-gradient", a.params.alpha_gradient, "Weight of brightness-gradient mass")
      ->capture_default_str();
  sim->add_option("--alpha-motion", a.params.alpha_motion, "Weight of frame-difference mass")
      ->capture_default_str();
  sim->add_option("--lambda", a.params.lambda, "Damping, 1/s")->capture_default_str();
  sim->add_option("--beta", a.params.beta, "Inhibition-of-return rate, 1/s (0 disables)")
      ->capture_default_str();
  sim->add_option("--sigma", a.params.sigma, "Inhibition footprint width, diagonal units")
      ->capture_default_str();
  sim->add_option("--epsilon", a.params.epsilon, "Kernel softening, diagonal units (0 = one pixel)")
      ->capture_default_str();
  sim->add_option("--dt", a.params.dt, "Integration step, s")->capture_default_str();
  sim->add_option("--vel-threshold", a.params.vel_threshold,
                  "Fixation speed threshold, diagonal units/s")
      ->capture_default_str();
  sim->add_option("--min-fixation", a.params.min_fixation, "Minimum fixation duration, s")
      ->capture_default_str();
  sim->add_option("--seed", a.params.seed, "Random seed (the dynamics are deterministic)")
      ->capture_default_str();
  sim->add_option("--out", a.out, "Output scanpath JSON")->required();
  sim->add_flag("--emit-trajectory", a.emit_trajectory,
                "Store replay samples at --fps in the output");
  sim->add_option("--saliency-out", a.saliency_out, "Also write the by-product saliency map (PGM)");
  sim->add_option("--saliency-sigma", a.saliency_sigma, "Blob width of the by-product map")
      ->capture_default_str();
}

int run_simulate(const SimulateArgs& a) {
  if (a.image.empty() == a.frames.empty()) throw UsageError("give exactly one of --image, --frames");
  FrameSequence seq;
  if (!a.image.empty()) {
    seq.frames.push_back(read_pgm(a.image));
    seq.fps = a.fps;
  } else {
    seq = read_frame_dir(a.frames, a.fps);
  }
  SimParams p = a.params;
  p.fps = a.fps;

  std::vector<ExternalFeature> ext;
  for (const std::string& arg : a.features) {
    const auto [path, alpha] = parse_feature_arg(arg);
    ExternalFeature f;
    f.alpha = alpha;
    f.maps.push_back(external_feature(read_pgm(path)));
    ext.push_back(std::move(f));
  }

  SimResult r = integrate(seq, ext, p);
  if (a.emit_trajectory) r.scanpath.trajectory = resample(r.trajectory, p.fps);
  write_scanpath(r.scanpath, a.out);
  if (!a.saliency_out.empty()) {
    const SaliencyMap m =
        scanpath_to_saliency(std::span(&r.scanpath, 1), a.saliency_sigma, seq.grid());
    write_pgm(m.values, a.saliency_out);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct WtaArgs {
  std::string saliency;
  int n_fix = 10;
  double radius = 0.1;
  WtaOptions options;
  std::string out;
};

void add_wta(CLI::App& app, WtaArgs& a) {
  auto* w = app.add_subcommand("wta", "Winner-take-all fixation sequence from a saliency map");
  w->add_option("--saliency", a.saliency, "Saliency map (PGM)")->required();
  w->add_option("--num-fixations", a.n_fix, "Number of fixations")->capture_default_str();
  w->add_option("--radius", a.radius, "Inhibition disk radius, diagonal units")
      ->capture_default_str();
  w->add_option("--duration", a.options.duration, "Total viewing time split over fixations, s")
      ->capture_default_str();
  w->add_option("--tie-jitter", a.options.tie_jitter,
                "Uniform noise relative to the map max (0 = off)")
      ->capture_default_str();
  w->add_option("--seed", a.options.seed, "Seed for --tie-jitter")->capture_default_str();
  w->add_option("--out", a.out, "Output scanpath JSON")->required();
}

int run_wta(const WtaArgs& a) {
  write_scanpath(wta_scanpath(read_saliency(a.saliency), a.n_fix, a.radius, a.options), a.out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string map;
  std::vector<std::string> fixations;
  std::string ref;
  std::string hyp;
  std::vector<std::string> refs;
  std::vector<std::string> hyps;
  std::string grid = "5x5";
  EvalConfig config;
  std::string manifest;
  std::string predictions;
  std::string csv_out;
  std::string kl_out;
};

void add_eval(CLI::App& app, EvalArgs& a, CLI::App*& sal, CLI::App*& sp, CLI::App*& amp,
              CLI::App*& batch) {
  auto* ev = app.add_subcommand("eval", "Evaluate saliency maps and scanpaths");
  ev->require_subcommand(1);

  sal = ev->add_subcommand("saliency", "AUC-Judd and NSS of a map against fixations");
  sal->add_option("--map", a.map, "Saliency map (PGM)")->required();
  sal->add_option("--fixations", a.fixations, "Scanpath JSON files whose fixations are pooled")
      ->required();

  sp = ev->add_subcommand("scanpath", "String edit distance and STDE of two scanpaths");
  sp->add_option("--ref", a.ref, "Reference scanpath JSON")->required();
  sp->add_option("--hyp", a.hyp, "Hypothesis scanpath JSON")->required();
  sp->add_option("--grid", a.grid, "String-edit quantizer <rows>x<cols>")->capture_default_str();
  sp->add_option("--kmax", a.config.stde.k_max, "Longest STDE window")->capture_default_str();
  sp->add_option("--stde-scale", a.config.stde.scale, "STDE distance scale, diagonal units")
      ->capture_default_str();

  amp = ev->add_subcommand("amplitude", "KL divergence of saccade-amplitude histograms");
  amp->add_option("--ref", a.refs, "Reference scanpath JSON files")->required();
  amp->add_option("--hyp", a.hyps, "Hypothesis scanpath JSON files")->required();
  amp->add_option("--bins", a.config.bins, "Uniform bins over [0, 1]")->capture_default_str();
  amp->add_option("--smoothing-eps", a.config.smoothing_eps, "Added to every bin count")
      ->capture_default_str();

  batch = ev->add_subcommand("batch", "Per-pair metric table over a stimulus manifest");
  batch->add_option("--manifest", a.manifest, "Stimulus manifest (reference scanpaths)")
      ->required();
  batch->add_option("--predictions", a.predictions, "Predictions manifest")->required();
  batch->add_option("--grid", a.grid, "String-edit quantizer <rows>x<cols>")
      ->capture_default_str();
  batch->add_option("--kmax", a.config.stde.k_max, "Longest STDE window")->capture_default_str();
  batch->add_option("--stde-scale", a.config.stde.scale, "STDE distance scale, diagonal units")
      ->capture_default_str();
  batch->add_option("--bins", a.config.bins, "Uniform amplitude bins over [0, 1]")
      ->capture_default_str();
  batch->add_option("--smoothing-eps", a.config.smoothing_eps, "Added to every bin count")
      ->capture_default_str();
  batch->add_option("--csv", a.csv_out, "CSV report path (default: standard output)");
  batch->add_option("--kl-json", a.kl_out, "Amplitude-KL summary JSON path");
}

int run_eval_saliency(const EvalArgs& a) {
  const SaliencyMap m = read_saliency(a.map);
  std::vector<Fixation> fix;
  for (const Scanpath& s : read_all(a.fixations)) {
    if (!(s.grid == m.grid)) throw ValidationError("scanpath grid does not match the map");
    fix.insert(fix.end(), s.fixations.begin(), s.fixations.end());
  }
  std::cout << "auc=" << num(auc_judd(m, fix)) << " nss=" << num(nss(m, fix)) << "\n";
  return kOk;
}

int run_eval_scanpath(EvalArgs a) {
  const auto [rows, cols] = parse_grid(a.grid);
  const Scanpath ref = read_scanpath(a.ref);
  const Scanpath hyp = read_scanpath(a.hyp);
  if (!(ref.grid == hyp.grid)) throw ValidationError("reference and hypothesis grids differ");
  const GridQuantizer q(rows, cols, ref.grid);
  std::cout << "string_edit=" << string_edit(ref, hyp, q)
            << " stde=" << num(stde(ref, hyp, a.config.stde)) << "\n";
  return kOk;
}

int run_eval_amplitude(const EvalArgs& a) {
  std::vector<double> ra, ha;
  for (const Scanpath& s : read_all(a.refs)) {
    const auto v = saccade_amplitudes(s);
    ra.insert(ra.end(), v.begin(), v.end());
  }
  for (const Scanpath& s : read_all(a.hyps)) {
    const auto v = saccade_amplitudes(s);
    ha.insert(ha.end(), v.begin(), v.end());
  }
  const double kl = kl_divergence(amplitude_histogram(ra, a.config.bins),
                                  amplitude_histogram(ha, a.config.bins), a.config.smoothing_eps);
  std::cout << "kl=" << num(kl) << "\n";
  return kOk;
}

int run_eval_batch(EvalArgs a) {
  std::tie(a.config.grid_rows, a.config.grid_cols) = parse_grid(a.grid);
  const StimulusManifest manifest = read_stimulus_manifest(a.manifest);
  std::map<std::string, const StimulusEntry*> by_id;
  for (const StimulusEntry& e : manifest.stimuli) by_id[e.id] = &e;

  std::vector<EvalPair> pairs;
  for (const PredictionEntry& p : read_prediction_manifest(a.predictions)) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw ValidationError("prediction '" + p.id + "' has no stimulus");
    EvalPair pair{p.id, read_scanpath(it->second->scanpath), read_scanpath(p.scanpath),
                  std::nullopt};
    if (p.saliency) pair.saliency = read_saliency(*p.saliency);
    pairs.push_back(std::move(pair));
  }
  const BatchEvaluation b = evaluate_batch(pairs, a.config);
  const std::string csv = format_batch_csv(b);
  if (a.csv_out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(a.csv_out, csv);
  }
  if (!a.kl_out.empty()) write_text_file(a.kl_out, format_kl_summary(b, a.config));
  return kOk;
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string image;
  std::string frames;
  std::string scanpath;
  double fps = 25.0;
  std::string out_dir;
};

void add_render(CLI::App& app, RenderArgs& a) {
  auto* r = app.add_subcommand("render", "Numbered PPM frames with the focus marked in red");
  auto* img = r->add_option("--image", a.image, "Still stimulus (PGM)");
  auto* frm = r->add_option("--frames", a.frames, "Directory of PGM video frames at --fps");
  img->excludes(frm);
  r->add_option("--scanpath", a.scanpath, "Scanpath JSON")->required();
  r->add_option("--fps", a.fps, "Output frame rate")->capture_default_str();
  r->add_option("--out-dir", a.out_dir, "Output directory")->required();
}

int run_render(const RenderArgs& a) {
  if (a.image.empty() == a.frames.empty()) throw UsageError("give exactly one of --image, --frames");
  FrameSequence seq;
  if (!a.image.empty()) {
    seq.frames.push_back(read_pgm(a.image));
    seq.fps = a.fps;
  } else {
    seq = read_frame_dir(a.frames, a.fps);
  }
  const Scanpath sp = read_scanpath(a.scanpath);
  if (!(sp.grid == seq.grid())) throw ValidationError("scanpath grid does not match the stimulus");
  std::vector<TrajectorySample> samples;
  if (sp.trajectory.empty()) {
    samples = replay_trajectory(sp, a.fps, sp.end_time());
  } else {
    std::vector<TrajectoryState> dense;
    for (const TrajectorySample& t : sp.trajectory) dense.push_back({Point(t.x, t.y), {}, t.t});
    samples = resample(dense, a.fps);
  }
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw IoError("cannot create '" + a.out_dir + "': " + ec.message());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto idx = std::min<std::size_t>(
        seq.frames.size() - 1, static_cast<std::size_t>(std::floor(samples[k].t * seq.fps + 1e-9)));
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.ppm", k);
    write_render_frame(seq.frames[idx], Point(samples[k].x, samples[k].y), fs::path(a.out_dir) / name);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct AgreementArgs {
  std::string store;
  int threshold = 3;
  bool json = false;
};

void add_agreement(CLI::App& app, AgreementArgs& a) {
  auto* g = app.add_subcommand("agreement", "Crowd accuracy table and Fleiss kappa set");
  g->add_option("--store", a.store, "JSON-lines label store")->required();
  g->add_option("--expert-threshold", a.threshold, "Minimum self-rated expertise of an expert")
      ->capture_default_str();
  g->add_flag("--json", a.json, "Print the report as JSON");
}

int run_agreement(const AgreementArgs& a) {
  if (!fs::exists(a.store)) throw IoError("label store '" + a.store + "' does not exist");
  const CrowdReport r = crowd_report(read_label_store(a.store), a.threshold);
  std::cout << (a.json ? format_crowd_json(r) : format_crowd_table(r));
  return kOk;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  int port = 8080;
  AnnotationService::Config config;
  std::string static_dir;
};

void add_serve(CLI::App& app, ServeArgs& a) {
  auto* s = app.add_subcommand("serve", "Run the crowd-annotation HTTP service");
  s->add_option("--port", a.port, "TCP port")->capture_default_str();
  s->add_option("--manifest", a.config.manifest, "Stimulus manifest")->required();
  s->add_option("--store", a.config.store, "JSON-lines label store")->required();
  s->add_option("--seed", a.config.seed, "Session sampling seed (used when no state file exists)")
      ->capture_default_str();
  s->add_option("--per-class", a.config.per_class, "Stimuli per truth class in a session")
      ->capture_default_str();
  s->add_option("--replay-fps", a.config.replay_fps, "Replay sample rate")->capture_default_str();
  s->add_option("--expert-threshold", a.config.expertise_threshold,
                "Minimum self-rated expertise of an expert")
      ->capture_default_str();
  s->add_option("--static", a.static_dir, "Directory of UI files served at /");
}

int run_serve(const ServeArgs& a) {
  AnnotationService svc(a.config);
  std::optional<fs::path> web;
  if (!a.static_dir.empty()) web = a.static_dir;
  std::cerr << "listening on port " << a.port << "\n";
  serve_annotations(svc, a.port, web);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gravitational scanpath simulation and evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SimulateArgs sim;
  WtaArgs wta;
  EvalArgs ev;
  RenderArgs render;
  AgreementArgs agree;
  ServeArgs serve;
  CLI::App *ev_sal = nullptr, *ev_sp = nullptr, *ev_amp = nullptr, *ev_batch = nullptr;
  add_simulate(app, sim);
  add_wta(app, wta);
  add_eval(app, ev, ev_sal, ev_sp, ev_amp, ev_batch);
  add_render(app, render);
  add_agreement(app, agree);
  add_serve(app, serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (app.got_subcommand("simulate")) return run_simulate(sim);
    if (app.got_subcommand("wta")) return run_wta(wta);
    if (ev_sal->parsed()) return run_eval_saliency(ev);
    if (ev_sp->parsed()) return run_eval_scanpath(ev);
    if (ev_amp->parsed()) return run_eval_amplitude(ev);
    if (ev_batch->parsed()) return run_eval_batch(ev);
    if (app.got_subcommand("render")) return run_render(render);
    if (app.got_subcommand("agreement")) return run_agreement(agree);
    if (app.got_subcommand("serve")) return run_serve(serve);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const UndefinedMetric& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
