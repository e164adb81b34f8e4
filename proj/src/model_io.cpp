#include "aqnn/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <zlib.h>

#include "aqnn/errors.hpp"

namespace aqnn {

namespace {

void put_u16(std::vector<std::uint8_t>& buf, std::uint16_t v) {
  buf.push_back(static_cast<std::uint8_t>(v & 0xff));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(static_cast<std::uint8_t>(v & 0xff));
  buf.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  buf.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  buf.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& buf, float v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] |
                                                       (static_cast<std::uint16_t>(bytes_[pos_ + 1])
                                                        << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                            (static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  void need(std::size_t n) {
    if (remaining() < n) throw corruption_error("truncated model file");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> encode_descriptor(const Architecture& arch) {
  std::vector<std::uint8_t> desc;
  for (const LayerDesc& d : arch.layers) {
    desc.push_back(static_cast<std::uint8_t>(d.kind));
    switch (d.kind) {
      case LayerKind::conv1d:
        put_u32(desc, d.filters);
        put_u32(desc, d.kernel_size);
        put_u32(desc, d.in_channels);
        break;
      case LayerKind::dense:
        put_u32(desc, d.in_dim);
        put_u32(desc, d.out_dim);
        break;
      default:
        break;
    }
  }
  return desc;
}

std::vector<LayerDesc> decode_descriptor(std::span<const std::uint8_t> bytes) {
  std::vector<LayerDesc> layers;
  Reader r(bytes);
  while (r.remaining() > 0) {
    const std::uint8_t kind = r.u8();
    switch (kind) {
      case static_cast<std::uint8_t>(LayerKind::conv1d): {
        const std::uint32_t filters = r.u32();
        const std::uint32_t kernel = r.u32();
        const std::uint32_t in_ch = r.u32();
        layers.push_back(LayerDesc::conv1d(filters, kernel, in_ch));
        break;
      }
      case static_cast<std::uint8_t>(LayerKind::dense): {
        const std::uint32_t in_dim = r.u32();
        const std::uint32_t out_dim = r.u32();
        layers.push_back(LayerDesc::dense(in_dim, out_dim));
        break;
      }
      case static_cast<std::uint8_t>(LayerKind::relu):
        layers.push_back(LayerDesc::relu());
        break;
      case static_cast<std::uint8_t>(LayerKind::flatten):
        layers.push_back(LayerDesc::flatten());
        break;
      case static_cast<std::uint8_t>(LayerKind::softmax):
        layers.push_back(LayerDesc::softmax());
        break;
      default:
        throw format_error("unknown layer kind " + std::to_string(kind) + " in descriptor");
    }
  }
  return layers;
}

void check_norm_stats(const NormStats& norm) {
  for (int c = 0; c < kNumSensors; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    if (!std::isfinite(norm.mean[ci]) || !std::isfinite(norm.std[ci]) || norm.std[ci] <= 0.0f)
      throw std::invalid_argument("normalization stats invalid for sensor column " +
                                  std::to_string(c));
  }
}

constexpr std::size_t kHeaderSize = 4 + 2 + 4;  // magic, version, descriptor length

}  // namespace

std::uint32_t crc32_bytes(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::size_t save_model(const Network& net, const NormStats& norm,
                       const std::filesystem::path& path) {
  if (net.layers.empty()) throw std::invalid_argument("cannot save a network with no layers");
  check_norm_stats(norm);
  const Architecture arch = describe(net);
  validate_architecture(arch);

  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kModelMagic.begin(), kModelMagic.end());
  put_u16(buf, kModelFormatVersion);
  const std::vector<std::uint8_t> desc = encode_descriptor(arch);
  put_u32(buf, static_cast<std::uint32_t>(desc.size()));
  buf.insert(buf.end(), desc.begin(), desc.end());
  for (float m : norm.mean) put_f32(buf, m);
  for (float s : norm.std) put_f32(buf, s);
  const std::vector<float> params = get_params(net);
  put_u32(buf, static_cast<std::uint32_t>(params.size()));
  for (float p : params) put_f32(buf, p);

  // CRC-32 over everything after the descriptor-length field.
  const std::uint32_t crc =
      crc32_bytes(std::span<const std::uint8_t>(buf.data() + kHeaderSize, buf.size() - kHeaderSize));
  put_u32(buf, crc);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw io_error("write failed for " + path.string());
  return buf.size();
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());

  if (buf.size() < kModelMagic.size()) throw corruption_error("truncated model file");
  if (!std::equal(kModelMagic.begin(), kModelMagic.end(), buf.begin()))
    throw format_error("bad magic; not an aqnn model file");

  Reader header(std::span<const std::uint8_t>(buf.data() + 4, buf.size() - 4));
  const std::uint16_t version = header.u16();
  if (version > kModelFormatVersion)
    throw version_error("model format version " + std::to_string(version) +
                        " is newer than supported version " +
                        std::to_string(kModelFormatVersion));
  if (version == 0) throw format_error("unsupported model format version 0");
  const std::uint32_t desc_len = header.u32();

  // Fixed-size tail after the descriptor: stats, parameter count, CRC.
  const std::size_t stats_bytes = 2 * kNumSensors * 4;
  if (buf.size() < kHeaderSize + desc_len + stats_bytes + 4 + 4)
    throw corruption_error("truncated model file");

  const std::size_t count_pos = kHeaderSize + desc_len + stats_bytes;
  Reader count_reader(std::span<const std::uint8_t>(buf.data() + count_pos, 4));
  const std::uint32_t param_count = count_reader.u32();
  const std::size_t expected =
      kHeaderSize + desc_len + stats_bytes + 4 + static_cast<std::size_t>(param_count) * 4 + 4;
  if (buf.size() < expected) throw corruption_error("truncated model file");
  if (buf.size() > expected) throw corruption_error("model file has trailing bytes");

  // Integrity check before any weight or descriptor byte is interpreted.
  Reader crc_reader(std::span<const std::uint8_t>(buf.data() + buf.size() - 4, 4));
  const std::uint32_t stored_crc = crc_reader.u32();
  const std::uint32_t actual_crc = crc32_bytes(
      std::span<const std::uint8_t>(buf.data() + kHeaderSize, buf.size() - kHeaderSize - 4));
  if (stored_crc != actual_crc) throw corruption_error("model checksum mismatch");

  std::vector<LayerDesc> records =
      decode_descriptor(std::span<const std::uint8_t>(buf.data() + kHeaderSize, desc_len));
  if (records.empty()) throw format_error("empty layer descriptor");

  LoadedModel loaded;
  try {
    const Architecture arch = resolve_input_shape(std::move(records));
    loaded.net = build_network(arch);
  } catch (const std::invalid_argument& e) {
    throw format_error(std::string("invalid architecture descriptor: ") + e.what());
  }

  if (static_cast<long>(param_count) != count_params(loaded.net))
    throw format_error("parameter count mismatch: file has " + std::to_string(param_count) +
                       ", architecture implies " + std::to_string(count_params(loaded.net)));

  Reader body(std::span<const std::uint8_t>(buf.data() + kHeaderSize + desc_len,
                                            buf.size() - kHeaderSize - desc_len - 4));
  for (int c = 0; c < kNumSensors; ++c) loaded.norm.mean[static_cast<std::size_t>(c)] = body.f32();
  for (int c = 0; c < kNumSensors; ++c) loaded.norm.std[static_cast<std::size_t>(c)] = body.f32();
  try {
    check_norm_stats(loaded.norm);
  } catch (const std::invalid_argument& e) {
    throw format_error(e.what());
  }
  body.u32();  // parameter count, already validated
  std::vector<float> params(param_count);
  for (std::uint32_t i = 0; i < param_count; ++i) params[i] = body.f32();
  set_params(loaded.net, params);
  return loaded;
}

}  // namespace aqnn
