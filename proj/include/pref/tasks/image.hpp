#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pref/checkpoint.hpp"
#include "pref/mlp.hpp"
#include "pref/train.hpp"

namespace pref::tasks {

// Row-major image with interleaved channels, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c) : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, 0.0) {}

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  double& at(int row, int col, int ch) { return data[(static_cast<std::size_t>(row) * width + col) * channels + ch]; }
  double at(int row, int col, int ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
};

// 8-bit grayscale/RGB PNG (alpha is dropped) or PGM (ASCII P2 or binary P5),
// chosen by file signature. Throws IoError / FormatError.
Image read_image(const std::filesystem::path& path);
// PNG unless the extension is .pgm (ASCII P2, grayscale only).
void write_image(const std::filesystem::path& path, const Image& image);

enum class MaskKind { None, Regular4 };

// Pixel split. Without a mask every pixel is both trained on and evaluated.
// Regular4 observes pixels with even row and even column (25%) and holds out
// the odd/odd lattice for evaluation; the two sets never overlap.
struct ImageTask {
  Image target;
  MaskKind mask = MaskKind::None;
  std::vector<std::uint32_t> train_pixels;
  std::vector<std::uint32_t> test_pixels;
};

ImageTask make_image_task(Image target, MaskKind mask);

// Pixel-center coordinates ((row + 0.5) / H, (col + 0.5) / W) of the listed pixels.
Matrix pixel_coords(int height, int width, const std::vector<std::uint32_t>& pixels);
Matrix pixel_values(const Image& image, const std::vector<std::uint32_t>& pixels);

// 10 log10(1 / MSE) over the listed pixels after clamping prediction and
// target to [0, 1]. Infinite for a perfect match.
double psnr(const Matrix& predicted, const Matrix& target);

enum class EncoderKind { Phasor, DenseGrid };

struct ImageFitConfig {
  EncoderKind encoder = EncoderKind::Phasor;
  int resolution = 128;
  int reduced = 7;
  int channels = 8;
  // Dense-grid resolution; 0 picks the parameter-matched value.
  int grid_resolution = 0;
  // Standard deviation of the initial encoder features.
  double init_std = 0.1;
  int hidden = 256;
  int hidden_layers = 2;
  int batch_size = 4096;
  int threads = 1;
  FitConfig fit;

  ImageFitConfig() {
    fit.iterations = 2000;
    fit.lr = 1e-4;
    fit.loss = LossKind::L1;
  }
};

struct ImageFitResult {
  Checkpoint checkpoint;
  std::vector<MetricRecord> log;
  double train_psnr = 0.0;
  double test_psnr = 0.0;
};

// Trains encoder + MLP on the task's training pixels. The metric logged at
// each interval is the held-out PSNR (train PSNR when unmasked).
ImageFitResult image_fit(const ImageTask& task, const ImageFitConfig& config);

// Decoder output at the listed pixels of an image of the given size.
Matrix predict_pixels(const Checkpoint& checkpoint, int height, int width, const std::vector<std::uint32_t>& pixels,
                      int threads = 1);
Image render(const Checkpoint& checkpoint, int height, int width, int threads = 1);

}  // namespace pref::tasks
