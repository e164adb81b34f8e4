#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "aqnn/baselines.hpp"
#include "aqnn/dataset.hpp"
#include "aqnn/errors.hpp"
#include "aqnn/model_io.hpp"
#include "aqnn/network.hpp"
#include "aqnn/rng.hpp"

using namespace aqnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_model(const std::string& name) {
  return fs::temp_directory_path() / ("aqnn_model_test_" + name);
}

NormStats sample_norm() {
  NormStats norm;
  for (int c = 0; c < kNumSensors; ++c) {
    norm.mean[static_cast<std::size_t>(c)] = 100.0f + static_cast<float>(c);
    norm.std[static_cast<std::size_t>(c)] = 5.0f + static_cast<float>(c);
  }
  return norm;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("save/load round-trips the reference CNN bit for bit") {
  const Network net = init_network(reference_cnn_arch(), 21);
  const NormStats norm = sample_norm();
  const fs::path path = temp_model("roundtrip.aqnn");

  const std::size_t bytes = save_model(net, norm, path);
  CHECK(bytes == fs::file_size(path));
  CHECK(bytes <= 114688);  // the published footprint is an upper bound
  CHECK(bytes < 23000);    // 4 bytes/param + a small header

  const LoadedModel loaded = load_model(path);
  CHECK(get_params(loaded.net) == get_params(net));
  CHECK(describe(loaded.net) == describe(net));
  CHECK(loaded.norm.mean == norm.mean);
  CHECK(loaded.norm.std == norm.std);
  fs::remove(path);
}

TEST_CASE("the dense-only baseline round-trips too") {
  const Network net = build_mlp(4);
  const fs::path path = temp_model("mlp.aqnn");
  save_model(net, sample_norm(), path);
  const LoadedModel loaded = load_model(path);
  CHECK(count_params(loaded.net) == 9412);
  CHECK(get_params(loaded.net) == get_params(net));
  CHECK(describe(loaded.net) == reference_mlp_arch());
  fs::remove(path);
}

TEST_CASE("round-trip inference is bitwise identical on 100 random samples") {
  const Network net = init_network(reference_cnn_arch(), 55);
  const NormStats norm = sample_norm();
  const fs::path path = temp_model("inference.aqnn");
  save_model(net, norm, path);
  const LoadedModel loaded = load_model(path);

  Rng rng(91);
  for (int trial = 0; trial < 100; ++trial) {
    FeatureMap sample(6, 1);
    for (float& v : sample.values) v = rng.uniform(-3, 3);
    CHECK(infer(net, sample) == infer(loaded.net, sample));
  }
  fs::remove(path);
}

TEST_CASE("the byte layout is stable") {
  const Network net = init_network(reference_cnn_arch(), 1);
  const fs::path path = temp_model("layout.aqnn");
  const std::size_t size = save_model(net, sample_norm(), path);
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  REQUIRE(bytes.size() == size);

  // magic "AQNN"
  CHECK(bytes[0] == 'A');
  CHECK(bytes[1] == 'Q');
  CHECK(bytes[2] == 'N');
  CHECK(bytes[3] == 'N');
  // version 1, little endian
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  // descriptor: 2 conv records (13 bytes), 2 dense (9), 3 relu + flatten + softmax (1)
  const std::uint32_t desc_len = static_cast<std::uint32_t>(bytes[6]) | (bytes[7] << 8) |
                                 (bytes[8] << 16) | (static_cast<std::uint32_t>(bytes[9]) << 24);
  CHECK(desc_len == 2 * 13 + 2 * 9 + 5 * 1);
  CHECK(bytes[10] == 0);  // first record: conv1d
  // header + descriptor + 12 stat floats + count + 5416 param floats + crc
  CHECK(size == 10 + desc_len + 48 + 4 + 5416 * 4 + 4);

  const std::size_t count_pos = 10 + desc_len + 48;
  const std::uint32_t count = static_cast<std::uint32_t>(bytes[count_pos]) |
                              (bytes[count_pos + 1] << 8) | (bytes[count_pos + 2] << 16) |
                              (static_cast<std::uint32_t>(bytes[count_pos + 3]) << 24);
  CHECK(count == 5416);
  fs::remove(path);
}

TEST_CASE("corruption and format errors") {
  const Network net = init_network(reference_cnn_arch(), 33);
  const fs::path path = temp_model("corrupt.aqnn");
  save_model(net, sample_norm(), path);
  const std::vector<std::uint8_t> original = read_bytes(path);

  SUBCASE("a flipped payload byte is a corruption error") {
    std::vector<std::uint8_t> tampered = original;
    tampered[tampered.size() / 2] ^= 0x40;  // somewhere in the weights
    write_bytes(path, tampered);
    CHECK_THROWS_AS(load_model(path), corruption_error);
  }

  SUBCASE("a flipped descriptor byte is caught before parsing") {
    std::vector<std::uint8_t> tampered = original;
    tampered[12] ^= 0x01;
    write_bytes(path, tampered);
    CHECK_THROWS_AS(load_model(path), corruption_error);
  }

  SUBCASE("bad magic is a format error") {
    std::vector<std::uint8_t> tampered = original;
    tampered[0] = 'X';
    tampered[1] = 'X';
    tampered[2] = 'X';
    tampered[3] = 'X';
    write_bytes(path, tampered);
    CHECK_THROWS_AS(load_model(path), format_error);
  }

  SUBCASE("a future format version is a version error") {
    std::vector<std::uint8_t> tampered = original;
    tampered[4] = 0x02;
    write_bytes(path, tampered);
    CHECK_THROWS_AS(load_model(path), version_error);
  }

  SUBCASE("truncation is a corruption error") {
    for (std::size_t keep : {std::size_t{2}, std::size_t{9}, std::size_t{100},
                             original.size() - 5, original.size() - 1}) {
      std::vector<std::uint8_t> tampered(original.begin(),
                                         original.begin() + static_cast<std::ptrdiff_t>(keep));
      write_bytes(path, tampered);
      CHECK_THROWS_AS(load_model(path), corruption_error);
    }
  }

  SUBCASE("trailing garbage is a corruption error") {
    std::vector<std::uint8_t> tampered = original;
    tampered.push_back(0xAB);
    write_bytes(path, tampered);
    CHECK_THROWS_AS(load_model(path), corruption_error);
  }

  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_model(temp_model("missing.aqnn")), io_error);
  }

  fs::remove(path);
}

TEST_CASE("saving rejects bad inputs") {
  const fs::path path = temp_model("reject.aqnn");
  CHECK_THROWS_AS(save_model(Network{}, sample_norm(), path), std::invalid_argument);

  const Network net = init_network(reference_cnn_arch(), 2);
  NormStats bad = sample_norm();
  bad.std[2] = 0.0f;
  CHECK_THROWS_AS(save_model(net, bad, path), std::invalid_argument);
}
