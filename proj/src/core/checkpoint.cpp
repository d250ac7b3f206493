#include "pref/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "pref/errors.hpp"

namespace pref {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'E', 'F', 'C', 'K', 'P', 'T'};
constexpr std::uint8_t kEncoderPhasor = 0;
constexpr std::uint8_t kEncoderDenseGrid = 1;
constexpr std::uint32_t kMaxExtent = 1u << 16;

bool float_exact(double v) { return round_to_float(v) == v || std::isnan(v); }

class Writer {
 public:
  explicit Writer(int scalar_bytes) : scalar_bytes_(scalar_bytes) {}

  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + size);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void scalar(double v) {
    if (scalar_bytes_ == 4) {
      u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      f64(v);
    }
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  int scalar_bytes_;
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return data_.size() - offset_; }

  void need(std::size_t count, const char* what) const {
    if (remaining() < count) {
      throw FormatError(std::string("checkpoint truncated while reading ") + what, offset_);
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return data_[offset_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[offset_ + i]) << (8 * i);
    offset_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[offset_ + i]) << (8 * i);
    offset_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  double scalar(int bytes, const char* what) {
    if (bytes == 4) return static_cast<double>(std::bit_cast<float>(u32(what)));
    return f64(what);
  }
  std::span<const std::uint8_t> raw(std::size_t count, const char* what) {
    need(count, what);
    auto out = data_.subspan(offset_, count);
    offset_ += count;
    return out;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t offset_ = 0;
};

template <class Fn>
void for_each_value(const Checkpoint& ckpt, Fn&& fn) {
  if (const auto* volume = std::get_if<PhasorVolume>(&ckpt.encoder)) {
    for (const Complex& c : volume->coefficients()) {
      fn(c.real());
      fn(c.imag());
    }
  } else {
    for (double v : std::get<tasks::DenseGrid>(ckpt.encoder).values()) fn(v);
  }
  for (const Layer& layer : ckpt.mlp.layers()) {
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) fn(layer.weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) fn(layer.bias.data()[i]);
  }
}

std::uint32_t read_extent(Reader& in, const char* what) {
  const std::size_t at = in.offset();
  const std::uint32_t v = in.u32(what);
  if (v == 0 || v > kMaxExtent) {
    throw FormatError(std::string("checkpoint ") + what + " out of range: " + std::to_string(v), at);
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
  bool exact = true;
  for_each_value(ckpt, [&](double v) { exact = exact && float_exact(v); });
  const int scalar_bytes = exact ? 4 : 8;

  Writer out(scalar_bytes);
  out.bytes(kMagic, sizeof(kMagic));
  out.u32(kCheckpointVersion);
  const bool phasor = std::holds_alternative<PhasorVolume>(ckpt.encoder);
  out.u8(phasor ? kEncoderPhasor : kEncoderDenseGrid);
  out.u8(static_cast<std::uint8_t>(ckpt.metadata.task));
  out.u8(static_cast<std::uint8_t>(scalar_bytes));
  out.u8(0);

  if (phasor) {
    const PhasorVolume& volume = std::get<PhasorVolume>(ckpt.encoder);
    const FrequencyLayout& layout = volume.layout();
    out.u32(static_cast<std::uint32_t>(layout.dims()));
    for (int r : layout.resolutions()) out.u32(static_cast<std::uint32_t>(r));
    out.u32(static_cast<std::uint32_t>(layout.reduced_size()));
    out.u32(static_cast<std::uint32_t>(volume.channels()));
    for (const Complex& c : volume.coefficients()) {
      out.scalar(c.real());
      out.scalar(c.imag());
    }
  } else {
    const tasks::DenseGrid& grid = std::get<tasks::DenseGrid>(ckpt.encoder);
    out.u32(static_cast<std::uint32_t>(grid.dims()));
    for (int r : grid.resolution()) out.u32(static_cast<std::uint32_t>(r));
    out.u32(static_cast<std::uint32_t>(grid.channels()));
    for (double v : grid.values()) out.scalar(v);
  }

  out.u32(static_cast<std::uint32_t>(ckpt.mlp.depth()));
  for (const Layer& layer : ckpt.mlp.layers()) {
    out.u32(static_cast<std::uint32_t>(layer.weight.rows()));
    out.u32(static_cast<std::uint32_t>(layer.weight.cols()));
    out.u8(static_cast<std::uint8_t>(layer.activation));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) out.scalar(layer.weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) out.scalar(layer.bias.data()[i]);
  }

  out.u64(ckpt.metadata.step);
  out.u32(static_cast<std::uint32_t>(ckpt.metadata.loss_tail.size()));
  for (double v : ckpt.metadata.loss_tail) out.f64(v);
  return out.take();
}

Checkpoint deserialize(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.raw(sizeof(kMagic), "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a PREF checkpoint (bad magic)", 0);
  }
  std::size_t at = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")",
                      at);
  }
  at = in.offset();
  const std::uint8_t encoder_kind = in.u8("encoder kind");
  if (encoder_kind != kEncoderPhasor && encoder_kind != kEncoderDenseGrid) {
    throw FormatError("unknown encoder kind " + std::to_string(encoder_kind), at);
  }
  at = in.offset();
  const std::uint8_t task = in.u8("task kind");
  if (task > static_cast<std::uint8_t>(TaskKind::Sdf)) {
    throw FormatError("unknown task kind " + std::to_string(task), at);
  }
  at = in.offset();
  const std::uint8_t scalar_bytes = in.u8("scalar width");
  if (scalar_bytes != 4 && scalar_bytes != 8) {
    throw FormatError("scalar width must be 4 or 8, got " + std::to_string(scalar_bytes), at);
  }
  in.u8("reserved byte");

  at = in.offset();
  const std::uint32_t dims = in.u32("dimension count");
  if (dims < 2 || dims > 3) throw FormatError("dimension count must be 2 or 3", at);
  std::vector<int> resolution;
  for (std::uint32_t a = 0; a < dims; ++a) resolution.push_back(static_cast<int>(read_extent(in, "resolution")));

  std::optional<EncoderState> encoder;
  if (encoder_kind == kEncoderPhasor) {
    const std::size_t layout_at = in.offset();
    const int reduced = static_cast<int>(read_extent(in, "reduced size"));
    const int channels = static_cast<int>(read_extent(in, "channel count"));
    std::optional<FrequencyLayout> layout;
    try {
      layout.emplace(static_cast<int>(dims), resolution, reduced);
    } catch (const LayoutError& e) {
      throw FormatError(std::string("inconsistent layout: ") + e.what(), layout_at);
    }
    PhasorVolume volume(*layout, channels);
    in.need(volume.coefficients().size() * 2 * scalar_bytes, "coefficients");
    auto coefs = volume.mutable_coefficients();
    for (Complex& c : coefs) {
      const double re = in.scalar(scalar_bytes, "coefficients");
      const double im = in.scalar(scalar_bytes, "coefficients");
      c = Complex(re, im);
    }
    encoder.emplace(std::move(volume));
  } else {
    const int channels = static_cast<int>(read_extent(in, "channel count"));
    tasks::DenseGrid grid(static_cast<int>(dims), resolution, channels);
    in.need(grid.parameter_count() * scalar_bytes, "grid values");
    for (double& v : grid.mutable_values()) v = in.scalar(scalar_bytes, "grid values");
    encoder.emplace(std::move(grid));
  }

  at = in.offset();
  const std::uint32_t depth = in.u32("layer count");
  if (depth == 0 || depth > 64) throw FormatError("layer count out of range", at);
  std::vector<Layer> layers;
  for (std::uint32_t l = 0; l < depth; ++l) {
    const std::size_t layer_at = in.offset();
    const std::uint32_t rows = read_extent(in, "layer output width");
    const std::uint32_t cols = read_extent(in, "layer input width");
    const std::size_t act_at = in.offset();
    const std::uint8_t act = in.u8("activation");
    if (act > static_cast<std::uint8_t>(Activation::Softplus)) {
      throw FormatError("unknown activation " + std::to_string(act), act_at);
    }
    if (!layers.empty() && layers.back().weight.rows() != cols) {
      throw FormatError("layer shapes do not chain", layer_at);
    }
    in.need((static_cast<std::size_t>(rows) * cols + rows) * scalar_bytes, "layer parameters");
    Layer layer;
    layer.weight.resize(rows, cols);
    layer.bias.resize(rows);
    layer.activation = static_cast<Activation>(act);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = in.scalar(scalar_bytes, "weights");
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias.data()[i] = in.scalar(scalar_bytes, "bias");
    layers.push_back(std::move(layer));
  }

  const int encoder_channels = std::visit([](const auto& e) { return e.channels(); }, *encoder);
  if (layers.front().weight.cols() != encoder_channels) {
    throw FormatError("MLP input width does not match the encoder channel count", in.offset());
  }

  CheckpointMetadata meta;
  meta.task = static_cast<TaskKind>(task);
  meta.step = in.u64("step");
  const std::uint32_t tail = in.u32("loss history length");
  in.need(static_cast<std::size_t>(tail) * 8, "loss history");
  for (std::uint32_t i = 0; i < tail; ++i) meta.loss_tail.push_back(in.f64("loss history"));
  if (in.remaining() != 0) throw FormatError("trailing bytes after checkpoint", in.offset());

  return Checkpoint{std::move(*encoder), MlpParams(std::move(layers)), std::move(meta)};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::vector<std::uint8_t> bytes = serialize(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return deserialize(bytes);
}

void save(const PhasorVolume& volume, const MlpParams& mlp, const std::filesystem::path& path) {
  save_checkpoint(path, Checkpoint{volume, mlp, {}});
}

std::pair<PhasorVolume, MlpParams> load(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  auto* volume = std::get_if<PhasorVolume>(&ckpt.encoder);
  if (volume == nullptr) throw FormatError("checkpoint holds a dense grid, not a phasor volume", 12);
  return {std::move(*volume), std::move(ckpt.mlp)};
}

}  // namespace pref
