#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cubefuzz {

inline constexpr double kPixelMin = 0.0;
inline constexpr double kPixelMax = 255.0;

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  bool operator==(const Shape&) const = default;

  // channel-last, row-major
  std::size_t flat_index(std::size_t row, std::size_t col, std::size_t channel) const {
    return (row * width + col) * channels + channel;
  }
};

/// A flat image on the 0--255 scale with spatial shape metadata.
struct Image {
  std::vector<double> data;
  Shape shape;

  Image() = default;
  Image(std::vector<double> values, Shape s) : data(std::move(values)), shape(s) {}

  std::size_t size() const { return data.size(); }

  void validate() const {
    if (shape.size() == 0 || shape.size() != data.size())
      throw std::invalid_argument("image shape does not match coordinate count");
    for (double v : data) {
      if (!(v >= kPixelMin && v <= kPixelMax))
        throw std::invalid_argument("pixel value outside [0, 255]");
    }
  }

  bool operator==(const Image&) const = default;
};

struct Label {
  std::size_t index = 0;
  bool operator==(const Label&) const = default;
};

using ScoreVector = std::vector<double>;

/// Argmax with ties broken toward the lowest class index.
inline Label argmax_label(const ScoreVector& scores) {
  if (scores.size() < 2) throw std::invalid_argument("score vector needs at least two classes");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return Label{best};
}

inline double linf_distance(const Image& a, const Image& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch in linf_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

inline double l2_distance(const Image& a, const Image& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch in l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double linf_norm(const Image& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::abs(v));
  return m;
}

inline double l2_norm(const Image& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace cubefuzz
