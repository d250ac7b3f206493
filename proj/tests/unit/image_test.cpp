#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "pref/errors.hpp"
#include "pref/tasks/image.hpp"

using namespace pref;
using namespace pref::tasks;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pref_image_test_" + name);
}

Image gradient_image(int h, int w, int c) {
  Image image(h, w, c);
  for (int r = 0; r < h; ++r) {
    for (int col = 0; col < w; ++col) {
      for (int ch = 0; ch < c; ++ch) image.at(r, col, ch) = ((r * 7 + col * 3 + ch * 50) % 256) / 255.0;
    }
  }
  return image;
}

}  // namespace

TEST(ImageIo, PngRoundTripIsExactForEightBitValues) {
  for (int channels : {1, 3}) {
    const Image image = gradient_image(9, 13, channels);
    const auto path = temp_path("rt" + std::to_string(channels) + ".png");
    write_image(path, image);
    const Image back = read_image(path);
    EXPECT_EQ(back.height, 9);
    EXPECT_EQ(back.width, 13);
    EXPECT_EQ(back.channels, channels);
    EXPECT_EQ(back.data, image.data);
    std::filesystem::remove(path);
  }
}

TEST(ImageIo, PgmRoundTripAndBinaryVariant) {
  const Image image = gradient_image(4, 5, 1);
  const auto path = temp_path("rt.pgm");
  write_image(path, image);
  EXPECT_EQ(read_image(path).data, image.data);

  const auto binary = temp_path("p5.pgm");
  {
    std::ofstream out(binary, std::ios::binary);
    out << "P5\n# comment\n2 1\n255\n";
    out.put(static_cast<char>(0)).put(static_cast<char>(255));
  }
  const Image p5 = read_image(binary);
  ASSERT_EQ(p5.width, 2);
  EXPECT_EQ(p5.data[0], 0.0);
  EXPECT_EQ(p5.data[1], 1.0);
  std::filesystem::remove(path);
  std::filesystem::remove(binary);
}

TEST(ImageIo, BundledImagesLoad) {
  const Image camera = read_image(std::filesystem::path(PREF_TEST_DATA) / "camera.png");
  EXPECT_EQ(camera.height, 128);
  EXPECT_EQ(camera.width, 128);
  EXPECT_EQ(camera.channels, 1);
  const Image astronaut = read_image(std::filesystem::path(PREF_TEST_DATA) / "astronaut.png");
  EXPECT_EQ(astronaut.channels, 3);
}

TEST(ImageIo, ErrorsAreTyped) {
  EXPECT_THROW(read_image(temp_path("missing.png")), IoError);
  const auto junk = temp_path("junk.png");
  {
    std::ofstream out(junk, std::ios::binary);
    out << "not an image at all";
  }
  EXPECT_THROW(read_image(junk), FormatError);
  const auto truncated = temp_path("trunc.pgm");
  {
    std::ofstream out(truncated, std::ios::binary);
    out << "P5\n4 4\n255\nab";
  }
  EXPECT_THROW(read_image(truncated), FormatError);
  std::filesystem::remove(junk);
  std::filesystem::remove(truncated);
}

TEST(ImageTask, Regular4SplitsQuarterAndHoldsOutOddLattice) {
  const ImageTask task = make_image_task(gradient_image(10, 12, 1), MaskKind::Regular4);
  EXPECT_EQ(task.train_pixels.size(), 10u * 12 / 4);
  EXPECT_EQ(task.test_pixels.size(), 10u * 12 / 4);
  const std::set<std::uint32_t> train(task.train_pixels.begin(), task.train_pixels.end());
  for (std::uint32_t p : task.test_pixels) EXPECT_EQ(train.count(p), 0u);
  for (std::uint32_t p : task.train_pixels) {
    EXPECT_EQ((p / 12) % 2, 0u);
    EXPECT_EQ((p % 12) % 2, 0u);
  }
  for (std::uint32_t p : task.test_pixels) {
    EXPECT_EQ((p / 12) % 2, 1u);
    EXPECT_EQ((p % 12) % 2, 1u);
  }
}

TEST(ImageTask, NoMaskUsesEveryPixelForBoth) {
  const ImageTask task = make_image_task(gradient_image(3, 4, 1), MaskKind::None);
  EXPECT_EQ(task.train_pixels.size(), 12u);
  EXPECT_EQ(task.train_pixels, task.test_pixels);
}

TEST(ImageTask, PixelCoordsAreCenters) {
  const Matrix c = pixel_coords(4, 8, {0, 8 * 3 + 7});
  EXPECT_DOUBLE_EQ(c(0, 0), 0.125);
  EXPECT_DOUBLE_EQ(c(0, 1), 0.0625);
  EXPECT_DOUBLE_EQ(c(1, 0), 0.875);
  EXPECT_DOUBLE_EQ(c(1, 1), 0.9375);
}

TEST(Psnr, KnownValues) {
  const Matrix t = Matrix::Constant(4, 3, 0.5);
  EXPECT_TRUE(std::isinf(psnr(t, t)));
  EXPECT_NEAR(psnr((t.array() + 0.1).matrix(), t), 20.0, 1e-9);
  // Predictions are clamped to [0, 1] first.
  EXPECT_NEAR(psnr(Matrix::Constant(4, 3, 7.0), Matrix::Constant(4, 3, 0.9)), 20.0, 1e-9);
  EXPECT_THROW(psnr(t, Matrix::Zero(2, 3)), DimensionError);
}

TEST(ImageFit, ShortFitImprovesAndRenders) {
  const ImageTask task = make_image_task(gradient_image(16, 16, 1), MaskKind::None);
  ImageFitConfig config;
  config.resolution = 16;
  config.reduced = 3;
  config.hidden = 32;
  config.batch_size = 0;
  config.fit.iterations = 60;
  config.fit.lr = 3e-3;
  config.fit.log_every = 20;
  const ImageFitResult r = image_fit(task, config);
  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_EQ(r.log.front().metric_name, "psnr");
  EXPECT_GT(r.log.back().metric, r.log.front().metric);
  EXPECT_NEAR(r.train_psnr, r.log.back().metric, 1e-9);
  const Image out = render(r.checkpoint, 16, 16);
  EXPECT_EQ(out.height, 16);
  EXPECT_EQ(out.channels, 1);
  EXPECT_EQ(r.checkpoint.metadata.task, TaskKind::Image);
  EXPECT_EQ(r.checkpoint.metadata.step, 60u);
}
