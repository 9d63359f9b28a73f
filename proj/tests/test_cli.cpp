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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "gravscan/agreement.hpp"
#include "synthetic.hpp"

using namespace gravscan;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(GRAVSCAN_CLI) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const fs::path& work() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("gravscan_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    write_pgm(testing::blob_image(96, 72, {{30, 30, 6}, {70, 45, 6, 0.8}}), d / "blob2.pgm");
    write_pgm(ImageD::Constant(72, 96, 0.5), d / "flat.pgm");
    return d;
  }();
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("simulate writes a valid scanpath and is byte-reproducible") {
  const fs::path a = work() / "sim_a.json";
  const fs::path b = work() / "sim_b.json";
  const std::string args = "simulate --image " + q(work() / "blob2.pgm") +
                           " --duration 2 --emit-trajectory --seed 5 --out ";
  const Run r = cli(args + q(a));
  REQUIRE(r.code == 0);
  REQUIRE(cli(args + q(b)).code == 0);
  const Scanpath sp = read_scanpath(a);
  CHECK(sp.provenance == Provenance::synthetic);
  CHECK(sp.grid == RetinaGrid(96, 72));
  CHECK(sp.trajectory.size() == 51);
  CHECK(read_text_file(a) == read_text_file(b));
}

TEST_CASE("wta and eval outputs are byte-reproducible") {
  const fs::path sal = work() / "sal.pgm";
  write_pgm(testing::blob_image(96, 72, {{20, 20, 5}, {60, 50, 5, 0.7}, {80, 10, 4, 0.5}}), sal);
  const std::string wta = "wta --saliency " + q(sal) + " --num-fixations 3 --radius 0.15 --out ";
  REQUIRE(cli(wta + q(work() / "w1.json")).code == 0);
  REQUIRE(cli(wta + q(work() / "w2.json")).code == 0);
  CHECK(read_text_file(work() / "w1.json") == read_text_file(work() / "w2.json"));
  CHECK(read_scanpath(work() / "w1.json").fixations.size() == 3);

  const std::string ev = "eval saliency --map " + q(sal) + " --fixations " + q(work() / "w1.json");
  const Run e1 = cli(ev);
  const Run e2 = cli(ev);
  REQUIRE(e1.code == 0);
  CHECK(e1.out == e2.out);
  CHECK(e1.out.rfind("auc=", 0) == 0);
  CHECK(e1.out.find(" nss=") != std::string::npos);

  const std::string amp = "eval amplitude --ref " + q(work() / "w1.json") + " --hyp " +
                          q(work() / "w2.json") + " --bins 50";
  const Run k = cli(amp);
  REQUIRE(k.code == 0);
  CHECK(k.out == "kl=0.0\n");
}

TEST_CASE("eval scanpath on identical files") {
  std::mt19937_64 rng(3);
  const fs::path h = work() / "h.json";
  write_scanpath(testing::random_path(RetinaGrid(96, 72), 5, rng), h);
  const Run r = cli("eval scanpath --ref " + q(h) + " --hyp " + q(h) + " --grid 5x5");
  CHECK(r.code == 0);
  CHECK(r.out == "string_edit=0 stde=1.0\n");
}

TEST_CASE("exit codes: usage, I/O, validation") {
  const Run bad_flag = cli("eval scanpath --nope");
  CHECK(bad_flag.code == 2);
  CHECK(bad_flag.out.find("--help") != std::string::npos);
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("eval scanpath --ref a --hyp b --grid five").code == 2);
  std::mt19937_64 rng(3);
  const fs::path h = work() / "g.json";
  write_scanpath(testing::random_path(RetinaGrid(96, 72), 3, rng), h);
  CHECK(cli("eval scanpath --ref " + q(h) + " --hyp " + q(h) + " --grid five").code == 2);

  CHECK(cli("simulate --image " + q(work() / "missing.pgm") + " --out x.json").code == 3);
  CHECK(cli("agreement --store " + q(work() / "missing.jsonl")).code == 3);

  write_scanpath(testing::path_through(RetinaGrid(96, 72), {Point(0.2, 0.2)}), work() / "one.json");
  const Run flat = cli("eval saliency --map " + q(work() / "flat.pgm") + " --fixations " +
                       q(work() / "one.json"));
  CHECK(flat.code == 4);
  CHECK(flat.out.find("constant") != std::string::npos);

  write_text_file(work() / "broken.json", "{\"width\": 3");
  CHECK(cli("eval scanpath --ref " + q(work() / "broken.json") + " --hyp " + q(h)).code == 4);
  CHECK(cli("simulate --image " + q(work() / "blob2.pgm") + " --dt 0.5 --out " +
            q(work() / "x.json"))
            .code == 4);
}

TEST_CASE("help lists every flag with its default") {
  const Run sim = cli("simulate --help");
  CHECK(sim.code == 0);
  for (const char* s : {"--lambda FLOAT [5]", "--beta FLOAT [0.5]", "--sigma FLOAT [0.05]",
                        "--epsilon FLOAT [0]", "--dt FLOAT [0.001]", "--alpha-gradient",
                        "--seed", "--emit-trajectory", "--feature-map"}) {
    CHECK_MESSAGE(sim.out.find(s) != std::string::npos, s);
  }
  const Run sp = cli("eval scanpath --help");
  CHECK(sp.out.find("--grid TEXT [5x5]") != std::string::npos);
  CHECK(sp.out.find("--kmax INT [3]") != std::string::npos);
  const Run amp = cli("eval amplitude --help");
  CHECK(amp.out.find("--bins UINT [50]") != std::string::npos);
  CHECK(amp.out.find("[1e-09]") != std::string::npos);
  for (const char* sub : {"wta", "render", "agreement", "serve", "eval saliency", "eval batch"}) {
    CHECK(cli(std::string(sub) + " --help").code == 0);
  }
}

TEST_CASE("render writes numbered PPM frames") {
  const fs::path sp = work() / "r.json";
  write_scanpath(testing::path_through(RetinaGrid(96, 72), {Point(0.2, 0.2), Point(0.5, 0.3)}), sp);
  const fs::path out = work() / "frames";
  const Run r = cli("render --image " + q(work() / "blob2.pgm") + " --scanpath " + q(sp) +
                    " --fps 10 --out-dir " + q(out));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "frame_00000.ppm"));
  CHECK(fs::exists(out / "frame_00003.ppm"));
  CHECK(read_text_file(out / "frame_00000.ppm").rfind("P6\n96 72\n255\n", 0) == 0);
}

TEST_CASE("agreement prints the table and kappa set") {
  const fs::path store = work() / "labels.jsonl";
  std::string lines;
  for (int a = 0; a < 3; ++a) {
    for (int k = 0; k < 4; ++k) {
      JudgmentRecord r;
      r.session_id = "s" + std::to_string(a);
      r.stimulus_id = "i" + std::to_string(k);
      r.truth = k % 2 ? Provenance::human : Provenance::synthetic;
      r.label = r.truth;
      r.expertise = 1 + 2 * a;
      r.session_size = 4;
      lines += format_judgment(r) + "\n";
    }
  }
  write_text_file(store, lines);
  const Run r = cli("agreement --store " + q(store) + " --expert-threshold 3");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Expert evaluators") != std::string::npos);
  CHECK(r.out.find("1.00 (0.00)") != std::string::npos);
  CHECK(r.out.find("kappa: overall=1.00") != std::string::npos);
  const Run j = cli("agreement --json --store " + q(store));
  CHECK(j.out.find("\"kappa_overall\": 1.0") != std::string::npos);
}

TEST_CASE("eval batch writes the per-pair table") {
  const fs::path manifest = testing::write_corpus(work() / "corpus", 2, 1);
  std::mt19937_64 rng(9);
  write_scanpath(testing::random_path(RetinaGrid(24, 16), 4, rng), work() / "corpus" / "p0.json");
  write_text_file(work() / "corpus" / "preds.json",
                  R"({"predictions":[{"id":"h0","scanpath":"p0.json","saliency":"h0.pgm"},)"
                  R"({"id":"h1","scanpath":"h1.json"}]})");
  const fs::path csv = work() / "batch.csv";
  const fs::path kl = work() / "kl.json";
  const Run r = cli("eval batch --manifest " + q(manifest) + " --predictions " +
                    q(work() / "corpus" / "preds.json") + " --csv " + q(csv) + " --kl-json " + q(kl));
  REQUIRE(r.code == 0);
  const std::string text = read_text_file(csv);
  CHECK(text.rfind("id,auc,nss,string_edit,stde\nh0,", 0) == 0);
  CHECK(text.find("\nh1,,,0,1.0") == std::string::npos);  // formatted with %.10g
  CHECK(text.find("\nh1,,,0,1\n") != std::string::npos);
  CHECK(text.find("\nmean,") != std::string::npos);
  CHECK(read_text_file(kl).find("\"units\": \"nats\"") != std::string::npos);
}
