#include "pref/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string_view>
#include <thread>

#include "pref/checkpoint.hpp"
#include "pref/errors.hpp"
#include "pref/tasks/decode.hpp"
#include "pref/tasks/geometry.hpp"
#include "pref/tasks/image.hpp"
#include "pref/tasks/mesh.hpp"
#include "pref/tasks/sdf.hpp"
#include "pref/train.hpp"
#include "pref/verify/checks.hpp"

namespace pref::cli {

namespace {

using json = nlohmann::json;

constexpr std::string_view kSubcommands[] = {"fit-image", "fit-sdf", "extract", "filter", "eval", "selftest"};

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    tokens.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return tokens;
}

// Common options shared by every subcommand.
struct Globals {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::uint64_t seed = 0;
  std::string metrics;
};

class MetricsSink {
 public:
  explicit MetricsSink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw IoError("cannot write metrics file '" + path + "'");
  }

  void write(const json& record) {
    if (!file_) return;
    *file_ << record.dump() << '\n';
    if (!*file_) throw IoError("failed writing metrics record");
  }

  void write(const MetricRecord& r) {
    json record{{"step", r.step}, {"loss", r.loss}, {"elapsed_seconds", r.elapsed_seconds}};
    if (!r.metric_name.empty()) record[r.metric_name] = r.metric;
    write(record);
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string format(double value) {
  std::ostringstream s;
  s << std::setprecision(6) << value;
  return s.str();
}

tasks::MaskKind parse_mask(const std::string& name) {
  return name == "regular4" ? tasks::MaskKind::Regular4 : tasks::MaskKind::None;
}

tasks::EncoderKind parse_encoder(const std::string& baseline) {
  return baseline == "dense-grid" ? tasks::EncoderKind::DenseGrid : tasks::EncoderKind::Phasor;
}

LossKind parse_loss(const std::string& name) {
  if (name == "l2") return LossKind::L2;
  if (name == "mape") return LossKind::Mape;
  return LossKind::L1;
}

tasks::Mesh load_mesh(const std::string& path, bool normalize) {
  tasks::Mesh mesh = tasks::read_obj(path);
  return normalize ? tasks::normalize_mesh(mesh) : mesh;
}

struct ImageOptions {
  std::string input;
  std::string out;
  std::string render;
  int res = 128;
  int reduced = 7;
  int channels = 8;
  int grid_res = 0;
  int hidden = 256;
  int batch = 4096;
  std::uint64_t iters = 2000;
  double lr = 1e-4;
  std::string lr_schedule;
  std::string loss = "l1";
  std::string mask = "none";
  std::string baseline = "none";
  double lambda = 0.0;
  double init_std = 0.1;
  std::uint64_t log_every = 100;
};

struct SdfOptions {
  std::string mesh;
  bool normalize = true;
  double sphere = 0.0;
  std::string out;
  int res = 128;
  int reduced = 6;
  int channels = 16;
  int grid_res = 0;
  int hidden = 64;
  int batch = 1 << 14;
  int samples = 1 << 18;
  std::uint64_t iters = 320;
  double lr = 1e-4;
  std::string lr_schedule;
  std::string unlock;
  std::string loss = "mape";
  std::string baseline = "none";
  double lambda = 0.0;
  double init_std = 0.1;
  std::uint64_t log_every = 20;
};

struct EvalOptions {
  std::string ckpt;
  std::string image;
  std::string mask = "none";
  std::string mesh;
  bool normalize = true;
  int iou_res = 64;
  int mc_res = 128;
  int chamfer_samples = 10000;
};

int fit_image(const ImageOptions& o, const Globals& g, std::ostream& out) {
  const tasks::ImageTask task = tasks::make_image_task(tasks::read_image(o.input), parse_mask(o.mask));
  tasks::ImageFitConfig config;
  config.encoder = parse_encoder(o.baseline);
  config.resolution = o.res;
  config.reduced = o.reduced;
  config.channels = o.channels;
  config.grid_resolution = o.grid_res;
  config.hidden = o.hidden;
  config.batch_size = o.batch;
  config.init_std = o.init_std;
  config.threads = g.threads;
  config.fit.iterations = o.iters;
  config.fit.lr = o.lr;
  config.fit.lr_schedule = LrSchedule::parse(o.lr_schedule);
  config.fit.loss = parse_loss(o.loss);
  config.fit.lambda_parseval = o.lambda;
  config.fit.seed = g.seed;
  config.fit.log_every = std::max<std::uint64_t>(1, o.log_every);
  MetricsSink sink(g.metrics);
  config.fit.on_record = [&](const MetricRecord& r) { sink.write(r); };

  const tasks::ImageFitResult result = tasks::image_fit(task, config);
  save_checkpoint(o.out, result.checkpoint);
  if (!o.render.empty()) {
    tasks::write_image(o.render,
                       tasks::render(result.checkpoint, task.target.height, task.target.width, g.threads));
  }
  sink.write(json{{"event", "summary"}, {"train_psnr", result.train_psnr}, {"test_psnr", result.test_psnr}});
  out << "train_psnr " << format(result.train_psnr);
  if (task.mask != tasks::MaskKind::None) out << " test_psnr " << format(result.test_psnr);
  out << '\n';
  return kExitOk;
}

int fit_sdf(const SdfOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
  std::unique_ptr<tasks::SdfShape> shape;
  if (!o.mesh.empty()) {
    auto mesh_shape = std::make_unique<tasks::MeshShape>(load_mesh(o.mesh, o.normalize));
    if (!mesh_shape->watertight()) {
      err << "warning: mesh is not watertight; inside tests fall back to a ray-parity vote\n";
    }
    shape = std::move(mesh_shape);
  } else {
    if (!(o.sphere > 0.0 && o.sphere < 1.0)) throw UsageError("--sphere radius must lie in (0, 1)");
    shape = std::make_unique<tasks::SphereShape>(o.sphere);
  }

  tasks::SdfFitConfig config;
  config.encoder = parse_encoder(o.baseline);
  config.resolution = o.res;
  config.reduced = o.reduced;
  config.channels = o.channels;
  config.grid_resolution = o.grid_res;
  config.hidden = o.hidden;
  config.batch_size = o.batch;
  config.epoch_samples = o.samples;
  config.init_std = o.init_std;
  config.threads = g.threads;
  config.fit.iterations = o.iters;
  config.fit.lr = o.lr;
  // Default decay: x0.1 halfway through training.
  config.fit.lr_schedule = o.lr_schedule.empty() ? LrSchedule{{{o.iters / 2, 0.1}}} : LrSchedule::parse(o.lr_schedule);
  config.fit.unlock = UnlockSchedule::parse(o.unlock);
  config.fit.loss = parse_loss(o.loss);
  config.fit.lambda_parseval = o.lambda;
  config.fit.seed = g.seed;
  config.fit.log_every = std::max<std::uint64_t>(1, o.log_every);
  MetricsSink sink(g.metrics);
  config.fit.on_record = [&](const MetricRecord& r) { sink.write(r); };

  const tasks::SdfFitResult result = tasks::sdf_fit(*shape, config);
  save_checkpoint(o.out, result.checkpoint);
  const double final_metric = result.log.empty() ? 0.0 : result.log.back().metric;
  sink.write(json{{"event", "summary"}, {"sdf_mae", final_metric}});
  out << "sdf_mae " << format(final_metric) << '\n';
  return kExitOk;
}

void require_sdf(const Checkpoint& checkpoint) {
  const int dims = std::visit([](const auto& e) { return e.dims(); }, checkpoint.encoder);
  if (dims != 3 || checkpoint.mlp.output_width() != 1) throw UsageError("this command needs an SDF checkpoint");
}

int extract(const std::string& ckpt, int res, const std::string& path, const Globals& g, std::ostream& out,
            std::ostream& err) {
  const Checkpoint checkpoint = load_checkpoint(ckpt);
  require_sdf(checkpoint);
  const tasks::Mesh mesh = tasks::marching_cubes(tasks::checkpoint_sampler(checkpoint, g.threads), res);
  if (mesh.empty()) err << "warning: the field has no zero crossing; writing an empty mesh\n";
  tasks::write_obj(path, mesh);
  out << "vertices " << mesh.vertices.size() << " faces " << mesh.faces.size() << '\n';
  return kExitOk;
}

int filter(const std::string& ckpt, double sigma, const std::string& path, std::ostream& out) {
  const Checkpoint checkpoint = load_checkpoint(ckpt);
  if (!std::holds_alternative<PhasorVolume>(checkpoint.encoder)) {
    throw UsageError("filter needs a phasor-volume checkpoint");
  }
  Checkpoint filtered = tasks::sdf_smooth(checkpoint, sigma);
  save_checkpoint(path, filtered);
  out << "high_band_energy " << format(high_band_energy(std::get<PhasorVolume>(checkpoint.encoder), 0)) << " -> "
      << format(high_band_energy(std::get<PhasorVolume>(filtered.encoder), 0)) << '\n';
  return kExitOk;
}

int evaluate(const EvalOptions& o, const Globals& g, std::ostream& out) {
  const Checkpoint checkpoint = load_checkpoint(o.ckpt);
  MetricsSink sink(g.metrics);
  json record{{"event", "eval"}};
  if (!o.image.empty()) {
    const tasks::ImageTask task = tasks::make_image_task(tasks::read_image(o.image), parse_mask(o.mask));
    if (checkpoint.mlp.output_width() != task.target.channels) {
      throw DimensionError("checkpoint output width does not match the image channels");
    }
    const auto& pixels = task.mask == tasks::MaskKind::None ? task.train_pixels : task.test_pixels;
    const Matrix pred = tasks::predict_pixels(checkpoint, task.target.height, task.target.width, pixels, g.threads);
    const double value = tasks::psnr(pred, tasks::pixel_values(task.target, pixels));
    record["psnr"] = value;
    out << "psnr " << format(value) << '\n';
  } else {
    require_sdf(checkpoint);
    const tasks::MeshShape shape(load_mesh(o.mesh, o.normalize));
    const tasks::FieldSampler predicted = tasks::checkpoint_sampler(checkpoint, g.threads);
    const double iou = tasks::iou(predicted, tasks::shape_sampler(shape, g.threads), o.iou_res);
    record["iou"] = iou;
    out << "iou " << format(iou);
    const tasks::Mesh extracted = tasks::marching_cubes(predicted, o.mc_res);
    if (extracted.empty()) {
      throw DomainError("the checkpoint's field has no surface; chamfer distance is undefined");
    }
    Rng rng(g.seed);
    const double chamfer = tasks::chamfer_distance(extracted, shape.mesh(), o.chamfer_samples, rng, g.threads);
    record["chamfer"] = chamfer;
    out << " chamfer " << format(chamfer);
    out << '\n';
  }
  sink.write(record);
  return kExitOk;
}

int selftest(const Globals& g, std::ostream& out) {
  const auto results = verify::run_selftest(g.seed == 0 ? 7 : g.seed);
  int failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
    if (!r.passed) ++failed;
  }
  out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  return failed == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> plain;
  std::vector<std::string> config;
  std::optional<std::size_t> subcommand_end;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      const auto tokens = read_config(args[++i]);
      config.insert(config.end(), tokens.begin(), tokens.end());
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      const auto tokens = read_config(a.substr(9));
      config.insert(config.end(), tokens.begin(), tokens.end());
      continue;
    }
    plain.push_back(a);
    if (!subcommand_end && std::find(std::begin(kSubcommands), std::end(kSubcommands), a) != std::end(kSubcommands)) {
      subcommand_end = plain.size();
    }
  }
  const std::size_t at = subcommand_end.value_or(plain.size());
  plain.insert(plain.begin() + static_cast<std::ptrdiff_t>(at), config.begin(), config.end());
  return plain;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phasorial embedding fields: fit, extract, filter and evaluate neural fields."};
  app.name("pref");
  app.require_subcommand(1);
  app.fallthrough();
  // Later occurrences win, so flags override values read from --config.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("--metrics", g.metrics, "Write line-delimited JSON metric records to this file");
  app.add_option("--config", "Plain-text key=value file; explicit flags take precedence");

  ImageOptions io;
  auto* fi = app.add_subcommand("fit-image", "Fit an image (regression, or completion with --mask regular4)");
  fi->add_option("--input", io.input, "PNG or PGM image")->required();
  fi->add_option("--out", io.out, "Checkpoint to write")->required();
  fi->add_option("--res", io.res, "Full-axis frequency count N");
  fi->add_option("--reduced", io.reduced, "Reduced-axis frequency count D");
  fi->add_option("--channels", io.channels, "Feature channels k");
  fi->add_option("--grid-res", io.grid_res, "Dense-grid resolution (0: parameter matched)");
  fi->add_option("--hidden", io.hidden, "MLP hidden width");
  fi->add_option("--batch", io.batch, "Pixels per step (0: all training pixels)");
  fi->add_option("--iters", io.iters, "Training steps");
  fi->add_option("--lr", io.lr, "Adam learning rate");
  fi->add_option("--lr-schedule", io.lr_schedule, "Learning-rate multipliers \"step:mult,...\"");
  fi->add_option("--loss", io.loss, "Loss")->check(CLI::IsMember({"l1", "l2"}));
  fi->add_option("--mask", io.mask, "Observation mask")->check(CLI::IsMember({"none", "regular4"}));
  fi->add_option("--baseline", io.baseline, "Replace the phasor volume by a baseline encoder")
      ->check(CLI::IsMember({"none", "dense-grid"}));
  fi->add_option("--lambda-parseval", io.lambda, "Parseval regularizer weight")->check(CLI::NonNegativeNumber);
  fi->add_option("--init-std", io.init_std, "Standard deviation of the initial features")
      ->check(CLI::NonNegativeNumber);
  fi->add_option("--log-every", io.log_every, "Steps between metric records");
  fi->add_option("--render", io.render, "Also write the fitted image");

  SdfOptions so;
  auto* fs = app.add_subcommand("fit-sdf", "Fit the signed distance field of a mesh");
  auto* mesh_opt = fs->add_option("--mesh", so.mesh, "Watertight OBJ mesh (normalized to [-0.9, 0.9]^3)");
  auto* sphere_opt = fs->add_option("--sphere", so.sphere, "Use an analytic sphere of this radius instead");
  mesh_opt->excludes(sphere_opt);
  fs->add_flag("--normalize,!--no-normalize", so.normalize, "Fit the mesh into [-0.9, 0.9]^3 first (default on)");
  fs->add_option("--out", so.out, "Checkpoint to write")->required();
  fs->add_option("--res", so.res, "Full-axis frequency count N");
  fs->add_option("--reduced", so.reduced, "Reduced-axis frequency count D");
  fs->add_option("--channels", so.channels, "Feature channels k");
  fs->add_option("--grid-res", so.grid_res, "Dense-grid resolution (0: parameter matched)");
  fs->add_option("--hidden", so.hidden, "MLP hidden width");
  fs->add_option("--batch", so.batch, "Samples per step");
  fs->add_option("--samples", so.samples, "Fresh samples drawn per pass");
  fs->add_option("--iters", so.iters, "Training steps");
  fs->add_option("--lr", so.lr, "Adam learning rate");
  fs->add_option("--lr-schedule", so.lr_schedule, "Learning-rate multipliers \"step:mult,...\" (default: x0.1 at half)");
  fs->add_option("--unlock", so.unlock, "Coarse-to-fine unlock \"step:max_freq,...\"");
  fs->add_option("--loss", so.loss, "Loss")->check(CLI::IsMember({"mape", "l1", "l2"}));
  fs->add_option("--baseline", so.baseline, "Replace the phasor volume by a baseline encoder")
      ->check(CLI::IsMember({"none", "dense-grid"}));
  fs->add_option("--lambda-parseval", so.lambda, "Parseval regularizer weight")->check(CLI::NonNegativeNumber);
  fs->add_option("--init-std", so.init_std, "Standard deviation of the initial features")
      ->check(CLI::NonNegativeNumber);
  fs->add_option("--log-every", so.log_every, "Steps between metric records");

  std::string ex_ckpt;
  std::string ex_out;
  int ex_res = 128;
  auto* ex = app.add_subcommand("extract", "Extract the zero level set of an SDF checkpoint as OBJ");
  ex->add_option("--ckpt", ex_ckpt, "SDF checkpoint")->required();
  ex->add_option("--res", ex_res, "Marching-cubes lattice size")->check(CLI::Range(2, 1024));
  ex->add_option("--out", ex_out, "OBJ to write")->required();

  std::string fl_ckpt;
  std::string fl_out;
  double sigma = 0.0;
  auto* fl = app.add_subcommand("filter", "Gaussian-filter the phasor volume of a checkpoint");
  fl->add_option("--ckpt", fl_ckpt, "Phasor-volume checkpoint")->required();
  fl->add_option("--sigma", sigma, "Filter width")->required();
  fl->add_option("--out", fl_out, "Checkpoint to write")->required();

  EvalOptions eo;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint against an image or a mesh");
  ev->add_option("--ckpt", eo.ckpt, "Checkpoint")->required();
  auto* image_opt = ev->add_option("--image", eo.image, "Reference image");
  auto* eval_mesh_opt = ev->add_option("--mesh", eo.mesh, "Reference OBJ mesh");
  image_opt->excludes(eval_mesh_opt);
  ev->add_flag("--normalize,!--no-normalize", eo.normalize, "Normalize the mesh as fit-sdf does (default on)");
  ev->add_option("--mask", eo.mask, "Evaluate held-out pixels of this mask")
      ->check(CLI::IsMember({"none", "regular4"}));
  ev->add_option("--iou-res", eo.iou_res, "IoU lattice size")->check(CLI::Range(2, 1024));
  ev->add_option("--mc-res", eo.mc_res, "Marching-cubes lattice for Chamfer")->check(CLI::Range(2, 1024));
  ev->add_option("--chamfer-samples", eo.chamfer_samples, "Surface samples per mesh")->check(CLI::PositiveNumber);

  auto* st = app.add_subcommand("selftest", "Run the oracle and invariant checks");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (fi->parsed()) return fit_image(io, g, out);
    if (fs->parsed()) {
      if (so.mesh.empty() && so.sphere == 0.0) throw UsageError("fit-sdf needs --mesh or --sphere");
      return fit_sdf(so, g, out, err);
    }
    if (ex->parsed()) return extract(ex_ckpt, ex_res, ex_out, g, out, err);
    if (fl->parsed()) return filter(fl_ckpt, sigma, fl_out, out);
    if (ev->parsed()) {
      if (eo.image.empty() && eo.mesh.empty()) throw UsageError("eval needs --image or --mesh");
      return evaluate(eo, g, out);
    }
    if (st->parsed()) return selftest(g, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace pref::cli
