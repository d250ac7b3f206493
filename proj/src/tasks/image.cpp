#include "pref/tasks/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "pref/errors.hpp"
#include "pref/tasks/decode.hpp"
#include "pref/tasks/dense_grid.hpp"

namespace pref::tasks {

namespace {

Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw FormatError("cannot decode PNG '" + path.string() + "': " + png.message, 0);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  // Transparent pixels are composited onto black.
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&png, &background, buffer.data(), 0, nullptr)) {
    png_image_free(&png);
    throw FormatError("cannot decode PNG '" + path.string() + "': " + png.message, 0);
  }
  Image image(static_cast<int>(png.height), static_cast<int>(png.width), color ? 3 : 1);
  for (std::size_t i = 0; i < image.data.size(); ++i) image.data[i] = buffer[i] / 255.0;
  return image;
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string magic;
  in >> magic;
  const auto next_int = [&](const char* what) {
    // Skip whitespace and comment lines.
    while (true) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      break;
    }
    long v = -1;
    if (!(in >> v) || v < 0) {
      throw FormatError(std::string("malformed PGM ") + what + " in '" + path.string() + "'",
                        static_cast<std::size_t>(std::max<std::streamoff>(0, in.tellg())));
    }
    return v;
  };
  if (magic != "P2" && magic != "P5") throw FormatError("not a PGM file: '" + path.string() + "'", 0);
  const long width = next_int("width");
  const long height = next_int("height");
  const long maxval = next_int("maxval");
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    throw FormatError("PGM header out of range in '" + path.string() + "'", 0);
  }
  Image image(static_cast<int>(height), static_cast<int>(width), 1);
  if (magic == "P2") {
    for (double& v : image.data) v = static_cast<double>(next_int("pixel")) / maxval;
  } else {
    in.get();
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(image.data.size() * bytes);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
      throw FormatError("truncated PGM '" + path.string() + "'", static_cast<std::size_t>(in.gcount()));
    }
    for (std::size_t i = 0; i < image.data.size(); ++i) {
      const long v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
      image.data[i] = static_cast<double>(v) / maxval;
    }
  }
  for (double v : image.data) {
    if (v > 1.0) throw FormatError("PGM pixel exceeds maxval in '" + path.string() + "'", 0);
  }
  return image;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

class PixelBatches final : public BatchSource {
 public:
  PixelBatches(const Matrix& coords, const Matrix& values, int batch_size)
      : coords_(coords), values_(values), batch_(batch_size) {}

  void next(Rng& rng, Matrix& coords, Matrix& targets) override {
    const auto count = coords_.rows();
    if (batch_ <= 0 || batch_ >= count) {
      coords = coords_;
      targets = values_;
      return;
    }
    coords.resize(batch_, coords_.cols());
    targets.resize(batch_, values_.cols());
    for (int i = 0; i < batch_; ++i) {
      const auto row = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(count)));
      coords.row(i) = coords_.row(row);
      targets.row(i) = values_.row(row);
    }
  }

 private:
  const Matrix& coords_;
  const Matrix& values_;
  int batch_;
};

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  unsigned char signature[8] = {};
  in.read(reinterpret_cast<char*>(signature), 8);
  in.close();
  if (png_sig_cmp(signature, 0, 8) == 0) return read_png(path);
  if (signature[0] == 'P' && (signature[1] == '2' || signature[1] == '5')) return read_pgm(path);
  throw FormatError("unrecognized image format: '" + path.string() + "'", 0);
}

void write_image(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw DimensionError("images must have 1 or 3 channels");
  if (path.extension() == ".pgm") {
    if (image.channels != 1) throw DimensionError("PGM output needs a grayscale image");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P2\n" << image.width << ' ' << image.height << "\n255\n";
    for (int r = 0; r < image.height; ++r) {
      for (int c = 0; c < image.width; ++c) out << static_cast<int>(to_byte(image.at(r, c, 0))) << (c + 1 < image.width ? ' ' : '\n');
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    return;
  }
  std::vector<png_byte> buffer(image.data.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = to_byte(image.data[i]);
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + png.message);
  }
}

ImageTask make_image_task(Image target, MaskKind mask) {
  ImageTask task;
  task.mask = mask;
  for (int r = 0; r < target.height; ++r) {
    for (int c = 0; c < target.width; ++c) {
      const auto pixel = static_cast<std::uint32_t>(r * target.width + c);
      if (mask == MaskKind::None) {
        task.train_pixels.push_back(pixel);
        task.test_pixels.push_back(pixel);
      } else if (r % 2 == 0 && c % 2 == 0) {
        task.train_pixels.push_back(pixel);
      } else if (r % 2 == 1 && c % 2 == 1) {
        task.test_pixels.push_back(pixel);
      }
    }
  }
  task.target = std::move(target);
  return task;
}

Matrix pixel_coords(int height, int width, const std::vector<std::uint32_t>& pixels) {
  Matrix coords(static_cast<Eigen::Index>(pixels.size()), 2);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const auto row = static_cast<int>(pixels[i] / width);
    const auto col = static_cast<int>(pixels[i] % width);
    if (row >= height) throw DimensionError("pixel index outside the image");
    coords(static_cast<Eigen::Index>(i), 0) = (row + 0.5) / height;
    coords(static_cast<Eigen::Index>(i), 1) = (col + 0.5) / width;
  }
  return coords;
}

Matrix pixel_values(const Image& image, const std::vector<std::uint32_t>& pixels) {
  Matrix values(static_cast<Eigen::Index>(pixels.size()), image.channels);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i] >= image.pixels()) throw DimensionError("pixel index outside the image");
    for (int c = 0; c < image.channels; ++c) {
      values(static_cast<Eigen::Index>(i), c) = image.data[pixels[i] * image.channels + c];
    }
  }
  return values;
}

double psnr(const Matrix& predicted, const Matrix& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
    throw DimensionError("psnr: shape mismatch");
  }
  const Matrix diff = predicted.cwiseMax(0.0).cwiseMin(1.0) - target.cwiseMax(0.0).cwiseMin(1.0);
  const double mse = diff.squaredNorm() / static_cast<double>(diff.size());
  return -10.0 * std::log10(mse);
}

ImageFitResult image_fit(const ImageTask& task, const ImageFitConfig& config) {
  const Image& image = task.target;
  if (task.train_pixels.empty()) throw DimensionError("image task has no training pixels");
  const Matrix train_coords = pixel_coords(image.height, image.width, task.train_pixels);
  const Matrix train_values = pixel_values(image, task.train_pixels);
  const Matrix test_coords = pixel_coords(image.height, image.width, task.test_pixels);
  const Matrix test_values = pixel_values(image, task.test_pixels);

  const FrequencyLayout layout = FrequencyLayout::uniform(2, config.resolution, config.reduced);
  Rng init_rng(config.fit.seed ^ 0x5eedULL);
  std::vector<int> widths{config.channels};
  for (int i = 0; i < config.hidden_layers; ++i) widths.push_back(config.hidden);
  widths.push_back(image.channels);
  MlpParams mlp = MlpParams::create(widths, Activation::Relu, Activation::Identity, init_rng);
  if (config.fit.adam.float32_params) round_to_float(mlp);

  std::optional<PhasorVolume> volume;
  std::optional<DenseGrid> grid;
  std::unique_ptr<Encoder> encoder;
  if (config.encoder == EncoderKind::Phasor) {
    volume.emplace(new_volume(layout, config.channels, RandomInit{config.init_std, config.fit.seed}));
    encoder = std::make_unique<PhasorEncoder>(*volume, config.threads);
  } else {
    const int m = config.grid_resolution > 0 ? config.grid_resolution : matched_grid_resolution(layout, config.channels);
    grid.emplace(2, std::vector<int>{m, m}, config.channels);
    grid->randomize(config.init_std, config.fit.seed);
    encoder = std::make_unique<DenseGridEncoder>(*grid);
  }

  const Matrix& eval_coords = task.test_pixels.empty() ? train_coords : test_coords;
  const Matrix& eval_values = task.test_pixels.empty() ? train_values : test_values;
  FitConfig fit_config = config.fit;
  fit_config.metric = [&]() -> std::pair<std::string, double> {
    const Matrix pred = forward(mlp, encoder->encode(eval_coords)).first;
    return {task.mask == MaskKind::None ? "psnr" : "test_psnr", psnr(pred, eval_values)};
  };

  PixelBatches batches(train_coords, train_values, config.batch_size);
  FitResult fitted = fit(batches, *encoder, mlp, fit_config);

  CheckpointMetadata meta{TaskKind::Image, fitted.steps, fitted.loss_tail};
  EncoderState state = volume ? EncoderState(std::move(*volume)) : EncoderState(std::move(*grid));
  ImageFitResult result{Checkpoint{std::move(state), std::move(mlp), std::move(meta)}, std::move(fitted.log), 0.0, 0.0};
  result.train_psnr = psnr(decode(result.checkpoint, train_coords, config.threads), train_values);
  result.test_psnr = task.test_pixels.empty()
                         ? result.train_psnr
                         : psnr(decode(result.checkpoint, test_coords, config.threads), test_values);
  return result;
}

Matrix predict_pixels(const Checkpoint& checkpoint, int height, int width, const std::vector<std::uint32_t>& pixels,
                      int threads) {
  return decode(checkpoint, pixel_coords(height, width, pixels), threads);
}

Image render(const Checkpoint& checkpoint, int height, int width, int threads) {
  std::vector<std::uint32_t> all(static_cast<std::size_t>(height) * width);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  const Matrix values = predict_pixels(checkpoint, height, width, all, threads);
  Image image(height, width, static_cast<int>(values.cols()));
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (int c = 0; c < image.channels; ++c) {
      image.data[i * image.channels + c] = std::clamp(values(static_cast<Eigen::Index>(i), c), 0.0, 1.0);
    }
  }
  return image;
}

}  // namespace pref::tasks
