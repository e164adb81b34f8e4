#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aqnn {

namespace detail {
inline std::size_t checked_extent(int length, int channels) {
  if (length <= 0 || channels <= 0)
    throw std::invalid_argument("FeatureMap: length and channels must be positive, got " +
                                std::to_string(length) + "x" + std::to_string(channels));
  return static_cast<std::size_t>(length) * static_cast<std::size_t>(channels);
}
}  // namespace detail

// A length x channels activation map stored row-major (position outer,
// channel inner). A plain vector is the channels == 1 case.
struct FeatureMap {
  int length = 0;
  int channels = 0;
  std::vector<float> values;

  FeatureMap() = default;

  FeatureMap(int length_, int channels_, float fill = 0.0f)
      : length(length_), channels(channels_), values(detail::checked_extent(length_, channels_), fill) {}

  FeatureMap(int length_, int channels_, std::vector<float> v)
      : length(length_), channels(channels_), values(std::move(v)) {
    if (values.size() != detail::checked_extent(length_, channels_))
      throw std::invalid_argument("FeatureMap: value count " + std::to_string(values.size()) +
                                  " does not match shape " + std::to_string(length_) + "x" +
                                  std::to_string(channels_));
  }

  // N x 1 column from a flat vector.
  static FeatureMap column(std::vector<float> v) {
    const int n = static_cast<int>(v.size());
    return FeatureMap(n, 1, std::move(v));
  }

  int size() const { return length * channels; }

  float at(int i, int c) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(channels) +
                  static_cast<std::size_t>(c)];
  }
  float& at(int i, int c) {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(channels) +
                  static_cast<std::size_t>(c)];
  }

  bool same_shape(const FeatureMap& other) const {
    return length == other.length && channels == other.channels;
  }
};

inline bool all_finite(std::span<const float> v) {
  for (float x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const FeatureMap& m) { return all_finite(std::span<const float>(m.values)); }

}  // namespace aqnn
