// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pref/cli.hpp"
#include "pref/tasks/geometry.hpp"
#include "pref/tasks/image.hpp"
#include "pref/tasks/sdf.hpp"
#include "pref/transform.hpp"
#include "pref/verify/checks.hpp"
#include "pref/verify/oracles.hpp"

using namespace pref;
using namespace pref::tasks;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, value);
  return buffer;
}

Outcome from_check(const verify::CheckResult& r, double budget_seconds) {
  const bool in_time = r.seconds < budget_seconds;
  return {r.passed && in_time, r.detail + "; " + fmt("%.1f s", r.seconds) + " (budget " + fmt("%.0f s)", budget_seconds)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<nlohmann::json> read_records(const fs::path& p) {
  std::vector<nlohmann::json> records;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  return records;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::run(args, o, e);
  if (out != nullptr) *out = o.str();
  if (code != 0) std::fprintf(stderr, "%s", e.str().c_str());
  return code;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "pref_acceptance";
  fs::create_directories(dir);
  return dir;
}

// Constant-image fit through the command line: 500 steps, full batch.
std::vector<std::string> constant_fit_args(const fs::path& dir, const std::string& tag) {
  return {"--seed",   "11",    "--threads",     "1",      "--metrics",    (dir / (tag + ".jsonl")).string(),
          "fit-image", "--input", (dir / "constant.png").string(), "--out", (dir / (tag + ".ckpt")).string(),
          "--res",    "16",    "--reduced",     "3",      "--channels",   "8",
          "--batch",  "0",     "--iters",       "500",    "--lr",         "3e-3",
          "--lr-schedule", "250:0.1,375:0.01", "--log-every", "100"};
}

void write_constant_image(const fs::path& dir) {
  Image image(64, 64, 1);
  for (double& v : image.data) v = 94.0 / 255.0;
  write_image(dir / "constant.png", image);
}

Outcome criterion5() {
  const auto start = std::chrono::steady_clock::now();
  // Target synthesized from a known band-limited phasor volume.
  constexpr int kSize = 64;
  const auto layout = FrequencyLayout::uniform(2, 16, 3);
  Rng rng(3);
  const PhasorVolume source = verify::random_band_limited(layout, 1, 4, rng);
  std::vector<std::uint32_t> all(kSize * kSize);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  const Matrix f = eval_exact(source, pixel_coords(kSize, kSize, all));
  const double peak = f.cwiseAbs().maxCoeff();
  Image image(kSize, kSize, 1);
  for (std::size_t i = 0; i < all.size(); ++i) image.data[i] = 0.5 + 0.4 * f(static_cast<Eigen::Index>(i), 0) / peak;

  ImageFitConfig config;
  config.resolution = 16;
  config.reduced = 3;
  config.channels = 8;
  config.batch_size = 0;
  config.fit.loss = LossKind::L1;
  config.fit.iterations = 1000;
  config.fit.lr = 3e-3;
  config.fit.lr_schedule.multipliers = {{500, 0.1}, {750, 0.01}};
  config.fit.log_every = 1000;
  const ImageFitResult synthetic = image_fit(make_image_task(image, MaskKind::None), config);

  const fs::path dir = work_dir();
  write_constant_image(dir);
  if (run_cli(constant_fit_args(dir, "constant_a")) != 0) return {false, "constant-image fit failed"};
  const auto records = read_records(dir / "constant_a.jsonl");
  const double constant_psnr = records.empty() ? 0.0 : records.back().value("train_psnr", 0.0);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool ok = synthetic.train_psnr >= 50.0 && constant_psnr >= 60.0 && seconds < 180.0;
  return {ok, "synthetic " + fmt("%.2f dB", synthetic.train_psnr) + " (>= 50), constant " +
                  fmt("%.2f dB", constant_psnr) + " in 500 steps (>= 60); " + fmt("%.1f s", seconds) +
                  " (budget 180 s)"};
}

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path data(PREF_TEST_DATA);
  int not_worse = 0;
  int better = 0;
  std::string detail;
  for (const char* name : {"camera.png", "astronaut.png", "text.png"}) {
    const ImageTask task = make_image_task(read_image(data / name), MaskKind::Regular4);
    double psnr[2];
    for (int e = 0; e < 2; ++e) {
      ImageFitConfig config;
      config.encoder = e == 0 ? EncoderKind::Phasor : EncoderKind::DenseGrid;
      config.resolution = 32;
      config.reduced = 5;
      config.channels = 8;
      config.batch_size = 0;
      config.fit.iterations = 300;
      config.fit.lr = 1e-3;
      config.fit.lr_schedule.multipliers = {{150, 0.3}, {225, 0.1}};
      config.fit.log_every = 300;
      psnr[e] = image_fit(task, config).test_psnr;
    }
    not_worse += psnr[0] >= psnr[1] - 0.1;
    better += psnr[0] > psnr[1];
    detail += std::string(name) + " " + fmt("%.2f", psnr[0]) + " vs " + fmt("%.2f", psnr[1]) + "; ";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = not_worse == 3 && better >= 2 && seconds < 900.0;
  return {ok, detail + "held-out PSNR, PREF vs parameter-matched dense grid; " + fmt("%.1f s", seconds) +
                  " (budget 900 s)"};
}

Outcome criterion8() {
  const auto start = std::chrono::steady_clock::now();
  const SphereShape sphere(0.5);
  SdfFitConfig config;
  config.resolution = 16;
  config.reduced = 3;
  config.channels = 8;
  config.init_std = 0.01;
  config.batch_size = 8192;
  config.epoch_samples = 1 << 18;
  config.fit.loss = LossKind::L1;
  config.fit.iterations = 1200;
  config.fit.lr = 1e-4;
  config.fit.lr_schedule.multipliers = {{600, 0.1}};
  config.fit.log_every = 1200;
  const SdfFitResult fitted = sdf_fit(sphere, config);
  const FieldSampler field = checkpoint_sampler(fitted.checkpoint);
  const double fit_iou = iou(field, shape_sampler(sphere), 64);
  const Mesh surface = marching_cubes(field, 64);
  double radial = surface.empty() ? INFINITY : 0.0;
  for (const Vec3& v : surface.vertices) radial = std::max(radial, std::abs(v.norm() - 0.5));
  const double ratio = iou(shape_sampler(SphereShape(0.45)), shape_sampler(sphere), 128);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = fit_iou >= 0.99 && radial <= 2.0 / 64 && std::abs(ratio - 0.729) <= 0.01 && seconds < 600.0;
  return {ok, "fitted IoU@64 " + fmt("%.4f", fit_iou) + " (>= 0.99), max radial error " + fmt("%.4f", radial) +
                  " (<= 0.03125), shrunk-sphere IoU " + fmt("%.4f", ratio) + " (0.729 +- 0.01); " +
                  fmt("%.1f s", seconds) + " (budget 600 s)"};
}

Outcome criterion10() {
  const auto start = std::chrono::steady_clock::now();
  std::string first;
  std::string second;
  const bool selftest_ok = run_cli({"selftest"}, &first) == 0 && run_cli({"selftest"}, &second) == 0;
  const bool selftest_same = first == second;

  const fs::path dir = work_dir();
  if (!fs::exists(dir / "constant_a.ckpt")) {
    write_constant_image(dir);
    if (run_cli(constant_fit_args(dir, "constant_a")) != 0) return {false, "first fixed-seed fit failed"};
  }
  if (run_cli(constant_fit_args(dir, "constant_b")) != 0) return {false, "repeat fixed-seed fit failed"};
  const std::string a = read_file(dir / "constant_a.ckpt");
  const bool ckpt_same = !a.empty() && a == read_file(dir / "constant_b.ckpt");
  auto ra = read_records(dir / "constant_a.jsonl");
  auto rb = read_records(dir / "constant_b.jsonl");
  bool metrics_same = !ra.empty() && ra.size() == rb.size();
  for (std::size_t i = 0; metrics_same && i < ra.size(); ++i) {
    ra[i].erase("elapsed_seconds");
    rb[i].erase("elapsed_seconds");
    metrics_same = ra[i].dump() == rb[i].dump();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = selftest_ok && selftest_same && ckpt_same && metrics_same;
  return {ok, std::string("selftest output ") + (selftest_same ? "identical" : "DIFFERS") + ", checkpoint " +
                  (ckpt_same ? "byte-identical" : "DIFFERS") + " (" + std::to_string(a.size()) + " bytes), metrics " +
                  (metrics_same ? "identical" : "DIFFER") + " excluding elapsed_seconds; " + fmt("%.1f s", seconds)};
}

}  // namespace

int main(int argc, char** argv) {
  constexpr std::uint64_t kSeed = 7;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"transform oracle agreement", [] { return from_check(verify::check_transform_agreement(kSeed), 30); }},
      {"derivatives vs finite differences", [] { return from_check(verify::check_derivatives(kSeed), 10); }},
      {"spectral and spatial energy", [] { return from_check(verify::check_parseval(kSeed), 30); }},
      {"gradient integrity", [] { return from_check(verify::check_gradients(kSeed), 60); }},
      {"exact-representability fit", criterion5},
      {"encoder margin over dense grid", criterion6},
      {"derivative-quality contrast", [] { return from_check(verify::check_derivative_contrast(kSeed), 10); }},
      {"sdf pipeline", criterion8},
      {"filtering", [] { return from_check(verify::check_filtering(kSeed), 10); }},
      {"determinism", criterion10},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", outcome.passed ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.passed) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
