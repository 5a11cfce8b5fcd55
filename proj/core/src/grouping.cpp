#include "cubefuzz/grouping.hpp"

#include <algorithm>
#include <stdexcept>

namespace cubefuzz {

Grouping initial_grouping(const Shape& shape, std::size_t k) {
  if (k == 0) throw std::invalid_argument("group side must be >= 1");
  if (shape.size() == 0) throw std::invalid_argument("empty shape");
  Grouping g;
  g.shape = shape;
  g.block_side = k;
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t r = 0; r < shape.height; r += k) {
      for (std::size_t col = 0; col < shape.width; col += k) {
        Block b;
        b.channel = c;
        b.row = r;
        b.col = col;
        b.rows = std::min(k, shape.height - r);
        b.cols = std::min(k, shape.width - col);
        g.blocks.push_back(b);
      }
    }
  }
  return g;
}

Grouping divide_grouping(const Grouping& g, std::size_t m) {
  if (m < 2) throw std::invalid_argument("split factor must be >= 2");
  Grouping out;
  out.shape = g.shape;
  out.block_side = std::max<std::size_t>(1, g.block_side / m);
  std::size_t side = out.block_side;
  for (const Block& b : g.blocks) {
    for (std::size_t r = b.row; r < b.row + b.rows; r += side) {
      for (std::size_t c = b.col; c < b.col + b.cols; c += side) {
        Block sub;
        sub.channel = b.channel;
        sub.row = r;
        sub.col = c;
        sub.rows = std::min(side, b.row + b.rows - r);
        sub.cols = std::min(side, b.col + b.cols - c);
        out.blocks.push_back(sub);
      }
    }
  }
  return out;
}

}  // namespace cubefuzz
