#pragma once

#include <cstddef>
#include <vector>

#include "cubefuzz/types.hpp"

namespace cubefuzz {

/// One spatial block within one channel.
struct Block {
  std::size_t channel = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// A partition of coordinate indices into spatial blocks, one block per group.
/// Blocks never span channels; edge blocks are smaller when the side does not
/// divide the image.
struct Grouping {
  std::vector<Block> blocks;
  std::size_t block_side = 1;  // nominal side k of the current level
  Shape shape;

  std::size_t group_count() const { return blocks.size(); }

  std::vector<std::size_t> indices(std::size_t group) const {
    const Block& b = blocks[group];
    std::vector<std::size_t> out;
    out.reserve(b.rows * b.cols);
    for (std::size_t r = b.row; r < b.row + b.rows; ++r)
      for (std::size_t c = b.col; c < b.col + b.cols; ++c)
        out.push_back(shape.flat_index(r, c, b.channel));
    return out;
  }
};

Grouping initial_grouping(const Shape& shape, std::size_t k);
Grouping divide_grouping(const Grouping& g, std::size_t m);

}  // namespace cubefuzz
