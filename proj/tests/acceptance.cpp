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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "gravscan/agreement.hpp"
#include "gravscan/baselines.hpp"
#include "gravscan/field.hpp"
#include "gravscan/ior.hpp"
#include "gravscan/metrics.hpp"
#include "gravscan/simulation.hpp"
#include "synthetic.hpp"

using namespace gravscan;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome string_edit_criterion() {
  const auto t0 = Clock::now();
  auto osa = [](const std::string& a, const std::string& b) {
    return osa_distance(std::span<const char>(a), std::span<const char>(b));
  };
  const bool worked = osa("ABC", "ACB") == 1 && osa("ABC", "BAC") == 1;

  // memoized recursion over the OSA definition
  auto oracle = [](const std::string& a, const std::string& b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) {
      if (i == 0) return j;
      if (j == 0) return i;
      if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
      std::size_t best = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1,
                                   d(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        best = std::min(best, d(i - 2, j - 2) + 1);
      }
      return memo[{i, j}] = best;
    };
    return d(a.size(), b.size());
  };
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(0, 8);
  std::uniform_int_distribution<int> sym('A', 'E');
  int mismatches = 0;
  for (int k = 0; k < 1000; ++k) {
    std::string a(len(rng), 'A'), b(len(rng), 'A');
    for (char& c : a) c = static_cast<char>(sym(rng));
    for (char& c : b) c = static_cast<char>(sym(rng));
    mismatches += osa(a, b) != oracle(a, b);
  }
  const double secs = seconds_since(t0);
  return {worked && mismatches == 0 && secs < 5.0,
          fmt("ABC/ACB=%zu ABC/BAC=%zu oracle mismatches=%d/1000 time=%.2fs", osa("ABC", "ACB"),
              osa("ABC", "BAC"), mismatches, secs)};
}

Outcome field_criterion() {
  const auto t0 = Clock::now();
  const RetinaGrid g(64, 64);
  MassField point{g, ImageD::Zero(64, 64)};
  point.mu(20, 30) = 1.0 / g.pixel_area();
  const Point x0 = g.to_normalized(30, 20);
  const Point e = eval_field(point, x0 + Point(1.0, 0.0), 1e-9);
  const double closed_err = (e - Point(-1.0 / (2.0 * std::numbers::pi), 0.0)).norm();

  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double eps = default_softening(g);
  const FieldEvaluator<double> field(g, eps);
  double worst_lin = 0.0, worst_sup = 0.0;
  for (int k = 0; k < 100; ++k) {
    ImageD m1(64, 64), m2(64, 64);
    for (Eigen::Index i = 0; i < m1.size(); ++i) {
      m1.data()[i] = u(rng);
      m2.data()[i] = u(rng);
    }
    const Point a(u(rng) * g.x_extent(), u(rng) * g.y_extent());
    const double c = 0.5 + 4.0 * u(rng);
    const Point e1 = field(m1, a);
    const Point e2 = field(m2, a);
    const Point ec = field(ImageD(c * m1), a);
    const Point es = field(ImageD(m1 + m2), a);
    worst_lin = std::max(worst_lin, (ec - c * e1).norm() / (c * e1).norm());
    worst_sup = std::max(worst_sup, (es - (e1 + e2)).norm() / es.norm());
  }
  const double secs = seconds_since(t0);
  return {closed_err <= 1e-9 && worst_lin <= 1e-12 && worst_sup <= 1e-12 && secs < 10.0,
          fmt("closed-form err=%.2e linearity=%.2e superposition=%.2e time=%.2fs", closed_err,
              worst_lin, worst_sup, secs)};
}

Outcome ior_criterion() {
  const RetinaGrid g(32, 32);
  const Point a = g.to_normalized(16, 16);
  IORField ior = IORField::zeros(g, 0.1, 0.05);
  for (int k = 0; k < 10000; ++k) ior.advance(a, 1e-3);
  const double err = std::abs(ior.inhibition(16, 16) - (1.0 - std::exp(-1.0)));

  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double lo = 1.0, hi = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    IORField f = IORField::zeros(g, 0.05 + 2.0 * u(rng), 0.01 + 0.2 * u(rng));
    Point p(u(rng) * g.x_extent(), u(rng) * g.y_extent());
    for (int step = 0; step < 500; ++step) {
      p += Point(u(rng) - 0.5, u(rng) - 0.5) * 0.05;
      p = p.cwiseMax(Point::Zero()).cwiseMin(g.max_position());
      f.advance(p, 0.001 + 0.05 * u(rng));
      lo = std::min(lo, f.inhibition.minCoeff());
      hi = std::max(hi, f.inhibition.maxCoeff());
    }
  }
  return {err <= 1e-6 && lo >= 0.0 && hi <= 1.0,
          fmt("I(10s)=%.8f err=%.2e range over 100 trajectories=[%.3g, %.6g]",
              ior.inhibition(16, 16), err, lo, hi)};
}

Outcome integrator_criterion() {
  const double k = 4.0;
  SimParams p;
  p.lambda = 4.0;
  p.duration = 10.0;
  p.dt = 1e-3;
  const Point target(0.2, 0.2);
  IntegrateOptions opt;
  opt.initial_position = target + Point(0.3, 0.0);
  opt.force_override = [&](const Point& a, double) -> Point { return -k * (a - target); };
  const SimResult r = integrate(testing::still(ImageD::Zero(256, 256)), {}, p, opt);
  double worst = 0.0;
  for (const TrajectoryState& s : r.trajectory) {
    const double x = target.x() + 0.3 * (1.0 + 2.0 * s.t) * std::exp(-2.0 * s.t);
    worst = std::max({worst, std::abs(s.a.x() - x), std::abs(s.a.y() - target.y())});
  }
  return {worst <= 1e-3 && std::abs(r.trajectory.back().t - 10.0) < 1e-9,
          fmt("max |error| over [0, 10] s = %.3e (%zu steps)", worst, r.trajectory.size() - 1)};
}

Outcome exploration_criterion() {
  const auto t0 = Clock::now();
  const int n = testing::kTwoBlobSize;
  const FrameSequence seq = testing::still(testing::blob_image(n, n, testing::two_blobs()));
  const RetinaGrid& g = seq.grid();
  const Point c1 = g.to_normalized(100, 110);
  const Point c2 = g.to_normalized(170, 160);
  const SimResult with_ior = integrate(seq, {}, SimParams{});
  double d1 = 1e9, d2 = 1e9;
  for (const TrajectoryState& s : with_ior.trajectory) {
    d1 = std::min(d1, (s.a - c1).norm());
    d2 = std::min(d2, (s.a - c2).norm());
  }
  const double secs = seconds_since(t0);

  SimParams frozen;
  frozen.beta = 0.0;
  const SimResult no_ior = integrate(seq, {}, frozen);
  double near2 = 1e9;
  bool stayed = true;
  for (const TrajectoryState& s : no_ior.trajectory) {
    near2 = std::min(near2, (s.a - c2).norm());
    stayed = stayed && (s.a - c1).norm() < (s.a - c2).norm();
  }
  const double settle = (no_ior.trajectory.back().a - c1).norm();
  return {d1 <= 0.05 && d2 <= 0.05 && secs < 10.0 && stayed && near2 > 0.05,
          fmt("beta=0.5: min dist blob1=%.4f blob2=%.4f time=%.2fs | beta=0: min dist blob2=%.4f "
              "final dist blob1=%.4f stayed-in-basin=%s",
              d1, d2, secs, near2, settle, stayed ? "yes" : "no")};
}

Outcome metrics_criterion() {
  std::mt19937_64 rng(656);
  std::uniform_int_distribution<int> count(0, 30);
  double kl_self = 0.0, kl_min = 1e9;
  for (int k = 0; k < 1000; ++k) {
    Histogram a = Histogram::uniform(50, 0.0, 1.0), b = a;
    for (auto& c : a.counts) c = static_cast<std::uint64_t>(count(rng));
    for (auto& c : b.counts) c = static_cast<std::uint64_t>(count(rng));
    a.counts[k % 50] += 1;
    b.counts[(k * 7) % 50] += 1;
    kl_self = std::max(kl_self, kl_divergence(a, a, 1e-9));
    kl_min = std::min(kl_min, kl_divergence(a, b, 1e-9));
  }

  const RetinaGrid g2(2, 2);
  SaliencyMap m{g2, ImageD::Zero(2, 2)};
  m.values(0, 0) = 1.0;
  const Fixation at{0.0, 0.0, 0.0, 0.1};
  const double nss_v = nss(m, std::span(&at, 1));
  const double nss_err = std::abs(nss_v - std::sqrt(3.0));

  const RetinaGrid g(128, 128);
  std::uniform_int_distribution<int> pix(0, 127);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto fixations = [&](int n) {
    std::vector<Fixation> f;
    for (int k = 0; k < n; ++k) {
      const Point p = g.to_normalized(pix(rng), pix(rng));
      f.push_back({p.x(), p.y(), 0.2 * k, 0.1});
    }
    return f;
  };
  const auto fix = fixations(100);
  SaliencyMap perfect{g, ImageD::Zero(128, 128)}, inverted{g, ImageD::Ones(128, 128)};
  for (const Fixation& f : fix) {
    const auto [c, r] = g.to_pixel(f.position());
    perfect.values(r, c) = 1.0;
    inverted.values(r, c) = 0.0;
  }
  const double auc_p = auc_judd(perfect, fix);
  const double auc_i = auc_judd(inverted, fix);
  double auc_sum = 0.0;
  for (int t = 0; t < 100; ++t) {
    SaliencyMap rnd{g, ImageD(128, 128)};
    for (Eigen::Index i = 0; i < rnd.values.size(); ++i) rnd.values.data()[i] = u(rng);
    auc_sum += auc_judd(rnd, fixations(100));
  }
  const double auc_r = auc_sum / 100.0;

  const RetinaGrid gs(300, 400);
  const Scanpath path = testing::random_path(gs, 6, rng);
  const double st_id = stde(path, path);
  const Point far(gs.x_extent(), gs.y_extent());
  const double st_corner = stde(testing::path_through(gs, {far}),
                                testing::path_through(gs, {Point(0, 0), Point(0, 0)}), {.k_max = 1});
  const double st_err = std::abs(st_corner - std::exp(-2.0));

  const bool ok = kl_self <= 1e-12 && kl_min >= 0.0 && nss_err <= 1e-9 && auc_p == 1.0 &&
                  auc_i <= 0.01 && std::abs(auc_r - 0.5) <= 0.05 && st_id == 1.0 &&
                  st_err <= 1e-9;
  return {ok, fmt("KL(p,p)max=%.1e KLmin=%.3g NSS=%.9f AUC perfect=%.3f inverted=%.4f "
                  "random=%.4f STDE id=%.3f corner=%.9f",
                  kl_self, kl_min, nss_v, auc_p, auc_i, auc_r, st_id, st_corner)};
}

Outcome fleiss_criterion() {
  const double perfect = fleiss_kappa({{{5, 0}, {0, 5}, {5, 0}, {0, 5}}, 5});
  const double two_item = fleiss_kappa({{{2, 0}, {1, 1}}, 2});
  std::mt19937_64 rng(1000);
  std::bernoulli_distribution coin(0.5);
  JudgmentMatrix random{{}, 5};
  for (int i = 0; i < 1000; ++i) {
    CategoryCounts c{0, 0};
    for (int k = 0; k < 5; ++k) ++c[coin(rng) ? 0 : 1];
    random.items.push_back(c);
  }
  const double mc = fleiss_kappa(random);

  // 35 annotators, 20 items each from a pool of 40 + 40
  std::vector<std::string> humans, synths;
  for (int k = 0; k < 40; ++k) {
    humans.push_back("h" + std::to_string(k));
    synths.push_back("s" + std::to_string(k));
  }
  std::uniform_int_distribution<int> expertise(1, 5);
  std::bernoulli_distribution right(0.55);
  std::vector<JudgmentRecord> recs;
  for (int a = 0; a < 35; ++a) {
    std::shuffle(humans.begin(), humans.end(), rng);
    std::shuffle(synths.begin(), synths.end(), rng);
    const int e = expertise(rng);
    for (int k = 0; k < 20; ++k) {
      JudgmentRecord r;
      r.session_id = "a" + std::to_string(a);
      r.stimulus_id = k < 10 ? humans[k] : synths[k - 10];
      r.truth = k < 10 ? Provenance::human : Provenance::synthetic;
      const Provenance wrong = r.truth == Provenance::human ? Provenance::synthetic : Provenance::human;
      r.label = right(rng) ? r.truth : wrong;
      r.expertise = e;
      recs.push_back(r);
    }
  }
  const auto t0 = Clock::now();
  const CrowdReport rep = crowd_report(recs, 3);
  const std::string table = format_crowd_table(rep);
  const double secs = seconds_since(t0);
  const std::string header = table.substr(table.find('\n') + 1, table.find('\n', table.find('\n') + 1) - table.find('\n') - 1);
  const auto bars = std::count(header.begin(), header.end(), '|');
  const bool schema = bars == 6 && rep.overall && rep.expert && rep.naive &&
                      rep.human_labeled_human && rep.synthetic_labeled_human &&
                      table.find(" (") != std::string::npos;

  const bool ok = perfect == 1.0 && std::abs(two_item + 1.0 / 3.0) <= 1e-9 &&
                  std::abs(mc) <= 0.05 && schema && secs < 1.0;
  return {ok, fmt("perfect=%.1f two-item=%.12f random(N=1000,n=5)=%.4f crowd_report: %zu "
                  "annotators, %d columns, overall=%.3f (%.3f), time=%.4fs",
                  perfect, two_item, mc, rep.annotators, static_cast<int>(bars) - 1,
                  rep.overall ? rep.overall->mean : -1.0, rep.overall ? rep.overall->std : -1.0,
                  secs)};
}

Outcome pipeline_criterion() {
  // random multi-blob stimuli, split into a reference half and an evaluation half
  std::mt19937_64 rng(658);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int w = 128, h = 96;
  std::vector<ImageD> images;
  for (int s = 0; s < 20; ++s) {
    std::vector<testing::Blob> blobs;
    const int count = 3 + s % 3;
    for (int b = 0; b < count; ++b) {
      blobs.push_back({10 + u(rng) * (w - 20), 10 + u(rng) * (h - 20), 5 + 4 * u(rng),
                       0.5 + 0.5 * u(rng)});
    }
    images.push_back(testing::blob_image(w, h, blobs));
  }
  std::vector<double> ref_amp, grav_amp, wta_amp;
  for (std::size_t s = 0; s < images.size(); ++s) {
    const FrameSequence seq = testing::still(images[s]);
    const RetinaGrid& g = seq.grid();
    std::size_t fixations = 0;
    for (int start = 0; start < 2; ++start) {
      IntegrateOptions opt;
      opt.initial_position = Point(u(rng) * g.x_extent(), u(rng) * g.y_extent());
      const SimResult r = integrate(seq, {}, SimParams{}, opt);
      const auto amps = saccade_amplitudes(r.scanpath);
      (s % 2 == 0 ? ref_amp : grav_amp).insert((s % 2 == 0 ? ref_amp : grav_amp).end(),
                                               amps.begin(), amps.end());
      fixations += r.scanpath.fixations.size();
    }
    if (s % 2 == 0) continue;
    // WTA over the stimulus itself, matched to the gravitational fixation count
    const SaliencyMap sal{g, images[s] / images[s].maxCoeff()};
    const int n_fix = std::max<int>(2, static_cast<int>(fixations / 2));
    for (int start = 0; start < 2; ++start) {
      const auto wamps = saccade_amplitudes(wta_scanpath(sal, n_fix, 0.1));
      wta_amp.insert(wta_amp.end(), wamps.begin(), wamps.end());
    }
  }
  const Histogram ref = amplitude_histogram(ref_amp, 50);
  const double kl_grav = kl_divergence(ref, amplitude_histogram(grav_amp, 50), 1e-9);
  const double kl_wta = kl_divergence(ref, amplitude_histogram(wta_amp, 50), 1e-9);
  return {kl_grav < kl_wta,
          fmt("KL(ref || gravitational)=%.4f < KL(ref || WTA)=%.4f nats "
              "(saccades ref=%zu grav=%zu wta=%zu)",
              kl_grav, kl_wta, ref_amp.size(), grav_amp.size(), wta_amp.size())};
}

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(GRAVSCAN_CLI) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome determinism_criterion() {
  const fs::path dir = fs::temp_directory_path() / ("gravscan_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  write_pgm(testing::blob_image(96, 72, {{25, 30, 6}, {70, 40, 7, 0.8}}), dir / "img.pgm");
  std::mt19937_64 rng(659);
  write_scanpath(testing::random_path(RetinaGrid(96, 72), 6, rng), dir / "ref.json");

  struct Case {
    std::string name;
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Case> cases{
      {"simulate",
       "simulate --image " + q(dir / "img.pgm") + " --duration 2 --seed 7 --emit-trajectory "
       "--saliency-out " + q(dir / "sal@.pgm") + " --out " + q(dir / "sim@.json"),
       {"sim@.json", "sal@.pgm"}},
      {"wta", "wta --saliency " + q(dir / "img.pgm") + " --num-fixations 4 --seed 7 --out " +
                  q(dir / "wta@.json"),
       {"wta@.json"}},
      {"eval saliency",
       "eval saliency --map " + q(dir / "img.pgm") + " --fixations " + q(dir / "ref.json"), {}},
      {"eval scanpath",
       "eval scanpath --ref " + q(dir / "ref.json") + " --hyp " + q(dir / "wta1.json"), {}},
      {"eval amplitude",
       "eval amplitude --ref " + q(dir / "ref.json") + " --hyp " + q(dir / "sim1.json"), {}},
  };
  std::vector<std::string> bad;
  for (const Case& c : cases) {
    std::string outputs[2];
    for (int run = 1; run <= 2; ++run) {
      std::string args = c.args;
      for (auto pos = args.find('@'); pos != std::string::npos; pos = args.find('@')) {
        args.replace(pos, 1, std::to_string(run));
      }
      const Run r = cli(args);
      if (r.code != 0) {
        bad.push_back(c.name + " (exit " + std::to_string(r.code) + ")");
        break;
      }
      outputs[run - 1] = r.out;
      for (std::string f : c.files) {
        f.replace(f.find('@'), 1, std::to_string(run));
        outputs[run - 1] += read_text_file(dir / f);
      }
    }
    if (outputs[0].empty() || outputs[0] != outputs[1]) bad.push_back(c.name);
  }
  std::string detail = std::to_string(cases.size()) + " invocations run twice";
  if (!bad.empty()) {
    detail += ", differing or failing:";
    for (const auto& b : bad) detail += " " + b;
  } else {
    detail += ", all byte-identical";
  }
  fs::remove_all(dir);
  return {bad.empty(), detail};
}

}  // namespace

int main() {
  criterion("string-edit", string_edit_criterion);
  criterion("gravitational-field", field_criterion);
  criterion("ior", ior_criterion);
  criterion("integrator", integrator_criterion);
  criterion("exploration", exploration_criterion);
  criterion("metrics-suite", metrics_criterion);
  criterion("fleiss-kappa", fleiss_criterion);
  criterion("pipeline-amplitude-kl", pipeline_criterion);
  criterion("determinism", determinism_criterion);
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
