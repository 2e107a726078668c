#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"
#include "cebeam/experiment.hpp"
#include "cebeam/fdbf.hpp"
#include "cebeam/imaging.hpp"
#include "cebeam/metrics.hpp"

using namespace cebeam;
namespace fs = std::filesystem;

namespace {

std::string tiny_config(const fs::path& out, unsigned workers, std::uint64_t seed = 11) {
  std::ostringstream ss;
  ss << "pulse.f0_hz = 3e6\n"
     << "pulse.bandwidth_hz = 1.8e6\n"
     << "pulse.duration_s = 11.1e-6\n"
     << "array.elements = 8\n"
     << "scatterer = 0.012 0.0 1.0 0\n"
     << "scatterer = 0.020 0.05 0.7 0\n"
     << "beam.theta_min_rad = -0.08\n"
     << "beam.theta_max_rad = 0.08\n"
     << "beam.theta_count = 4\n"
     << "run.methods = pre, post, focus\n"
     << "run.nq_list = 3, 9\n"
     << "noise.rms = 0.001\n"
     << "noise.seed = " << seed << "\n"
     << "run.workers = " << workers << "\n"
     << "output.dir = " << out.string() << "\n";
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t file_hash(const fs::path& p) {
  return dsp::Hasher{}.add(slurp(p)).digest();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("experiment sweep produces the expected artifact set") {
  TempDir tmp("cebeam_exp_run");
  std::ostringstream log;
  const auto cfg = parse_config(tiny_config(tmp.path, 1));
  const auto res = run_experiment(cfg, log);

  CHECK(fs::exists(tmp.path / "complexity.csv"));
  CHECK(fs::exists(tmp.path / "manifest.txt"));
  CHECK(fs::exists(tmp.path / "psf.csv"));
  for (const char* tag : {"pre", "post", "focus_nq3", "focus_nq9"}) {
    CHECK(fs::exists(tmp.path / ("image_" + std::string(tag) + ".pgm")));
    for (int t = 0; t < 4; ++t)
      CHECK(fs::exists(tmp.path / ("line_" + std::string(tag) + "_t" + std::to_string(t) + ".bin")));
  }
  CHECK(res.lut_builds == 4);

  // every output appears in the manifest with the config hash
  const auto manifest = slurp(tmp.path / "manifest.txt");
  CHECK(manifest.find("line_pre_t0.bin") != std::string::npos);
  CHECK(manifest.find("complexity.csv") != std::string::npos);

  // complexity rows: header + nq x p combinations
  std::ifstream csv(tmp.path / "complexity.csv");
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 1 + 2 * 1);
}

TEST_CASE("empty method list warns and succeeds") {
  TempDir tmp("cebeam_exp_empty");
  std::ostringstream log;
  auto cfg = parse_config(tiny_config(tmp.path, 1));
  cfg.methods.clear();
  const auto res = run_experiment(cfg, log);
  CHECK(res.outputs.empty());
  CHECK(!res.warnings.empty());
}

TEST_CASE("fixed seed gives byte-identical outputs across worker counts") {
  TempDir tmp1("cebeam_exp_det1");
  TempDir tmp2("cebeam_exp_det2");
  std::ostringstream log;
  run_experiment(parse_config(tiny_config(tmp1.path, 1)), log);
  run_experiment(parse_config(tiny_config(tmp2.path, 3)), log);

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(tmp1.path)) {
    if (entry.is_directory()) continue;
    const auto name = entry.path().filename();
    CAPTURE(name.string());
    REQUIRE(fs::exists(tmp2.path / name));
    CHECK(file_hash(entry.path()) == file_hash(tmp2.path / name));
    ++compared;
  }
  CHECK(compared > 10);
}

TEST_CASE("LUT cache reuse, invalidation and collision handling") {
  TempDir tmp("cebeam_exp_cache");
  std::ostringstream log;
  const auto cfg = parse_config(tiny_config(tmp.path, 1));

  const auto r1 = run_experiment(cfg, log);
  CHECK(r1.lut_builds == 4);
  CHECK(r1.lut_cache_hits == 0);

  const auto r2 = run_experiment(cfg, log);
  CHECK(r2.lut_builds == 0);
  CHECK(r2.lut_cache_hits == 4);

  SUBCASE("rebuilt tables are bit identical") {
    std::vector<std::pair<fs::path, std::uint64_t>> before;
    for (const auto& e : fs::directory_iterator(tmp.path / "luts"))
      before.emplace_back(e.path(), file_hash(e.path()));
    auto forced = cfg;
    forced.rebuild_luts = true;
    const auto r3 = run_experiment(forced, log);
    CHECK(r3.lut_builds == 4);
    for (const auto& [p, h] : before) CHECK(file_hash(p) == h);
  }

  SUBCASE("a 1 um geometry change misses the cache") {
    auto moved = cfg;
    moved.pitch = moved.pitch_or_default() + 1e-6;
    const auto r3 = run_experiment(moved, log);
    CHECK(r3.lut_builds == 4);
  }

  SUBCASE("a cache entry whose content disagrees is a hard error") {
    // rewrite one cached table with a different angle but the same name
    const auto dir = tmp.path / "luts";
    const auto first = fs::directory_iterator(dir)->path();
    auto q = load_q_table(first);
    q.theta += 0.01;
    save_q_table(first, q);
    CHECK_THROWS_AS(run_experiment(cfg, log), stale_lut_error);
  }
}

TEST_CASE("near-field blur ranking on image rows: post worse than focus") {
  // 3x3 scatterer grid; compare -3 dB blob width on the image row through
  // the shallowest reflectors
  TempDir tmp("cebeam_exp_blur");
  std::ostringstream ss;
  ss << "pulse.f0_hz = 3e6\n"
     << "pulse.bandwidth_hz = 2.5e6\n"
     << "pulse.duration_s = 24e-6\n"
     << "array.elements = 64\n";
  for (double r : {0.012, 0.022, 0.032})
    for (double th : {-0.15, 0.0, 0.15}) ss << "scatterer = " << r << ' ' << th << " 1 0\n";
  ss << "beam.theta_min_rad = -0.25\n"
     << "beam.theta_max_rad = 0.25\n"
     << "beam.theta_count = 41\n"
     << "run.methods = post, focus\n"
     << "run.nq_list = 9\n"
     << "output.dir = " << tmp.path.string() << "\n";
  std::ostringstream log;
  run_experiment(parse_config(ss.str()), log);

  // image-level blur: pixels of the row within 20 dB of the row maximum
  const auto width_at = [&](const fs::path& csv_img, std::size_t row) {
    std::ifstream in(csv_img);
    std::string line;
    for (std::size_t r = 0; r <= row; ++r) std::getline(in, line);
    std::vector<double> vals;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    const double top = *std::max_element(vals.begin(), vals.end());
    return static_cast<double>(std::count_if(vals.begin(), vals.end(),
                                             [&](double v) { return v > top - 20.0; }));
  };
  // row through the 12 mm scatterers (pixel pitch 0.2 mm)
  const std::size_t row = static_cast<std::size_t>(12.0 / 0.2);
  const double w_post = width_at(tmp.path / "image_post.csv", row);
  const double w_focus = width_at(tmp.path / "image_focus_nq9.csv", row);
  CHECK(w_post > w_focus);
}

TEST_CASE("cli binary maps error classes to exit codes") {
  TempDir tmp("cebeam_exp_cli");
  const auto cfg_path = tmp.path / "run.cfg";
  {
    std::ofstream out(cfg_path);
    out << tiny_config(tmp.path / "out", 1);
  }
  const std::string cli = CEBEAM_CLI_PATH;

  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > " + (tmp.path / "stdout.txt").string() +
                            " 2> " + (tmp.path / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  CHECK(run("run --config " + cfg_path.string()) == 0);
  CHECK(fs::exists(tmp.path / "out" / "manifest.txt"));
  CHECK(run("run --config /no/such/file.cfg") == 1);

  // numerical failure: empty band (all-zero phantom reflectivity)
  const auto bad = tmp.path / "bad.cfg";
  {
    std::ofstream out(bad);
    out << "scatterer = 0.01 0 0 0\nbeam.theta_list_rad = 0\nrun.methods = focus\n"
        << "output.dir = " << (tmp.path / "out2").string() << "\n";
  }
  CHECK(run("run --config " + bad.string()) == 2);

  // i/o failure: output directory path blocked by an existing file
  const auto blocker = tmp.path / "blocked";
  {
    std::ofstream out(blocker);
    out << "x";
  }
  CHECK(run("run --config " + cfg_path.string() + " --out " +
            (blocker / "sub").string()) == 3);

  // export-waveform round trip through the cli
  CHECK(run("export-waveform --config " + cfg_path.string() + " --out " +
            (tmp.path / "wave.txt").string()) == 0);
  CHECK(fs::exists(tmp.path / "wave.txt"));

  // build-luts twice: second pass reports cache hits
  CHECK(run("build-luts --config " + cfg_path.string()) == 0);
  CHECK(run("build-luts --config " + cfg_path.string()) == 0);
  const auto text = slurp(tmp.path / "stdout.txt");
  CHECK(text.find("4 cache hits") != std::string::npos);
}
