#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "aqnn/dataset.hpp"
#include "aqnn/network.hpp"

namespace aqnn {

// Model file layout, little-endian throughout:
//   magic "AQNN"                         4 bytes
//   format version                       u16
//   architecture descriptor length      u32
//   descriptor: per layer, kind u8 then shape fields u32
//     conv1d:  filters, kernel_size, in_channels
//     dense:   in_dim, out_dim
//     relu / flatten / softmax: no fields
//   normalization stats                  6 x f32 mean, 6 x f32 std
//   parameter count                      u32
//   parameters                           f32 each, canonical ordering
//   CRC-32                               u32, over everything after the
//                                        descriptor-length field
inline constexpr std::array<std::uint8_t, 4> kModelMagic = {'A', 'Q', 'N', 'N'};
inline constexpr std::uint16_t kModelFormatVersion = 1;

// Serializes architecture, normalization stats, and weights. Returns the
// file size in bytes.
std::size_t save_model(const Network& net, const NormStats& norm,
                       const std::filesystem::path& path);

struct LoadedModel {
  Network net;
  NormStats norm;
};

// Verifies magic, version, and checksum (before touching any weight), then
// rebuilds and shape-validates the network.
LoadedModel load_model(const std::filesystem::path& path);

// IEEE CRC-32 (zlib).
std::uint32_t crc32_bytes(std::span<const std::uint8_t> bytes);

}  // namespace aqnn
