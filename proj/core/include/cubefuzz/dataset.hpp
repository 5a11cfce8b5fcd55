#pragma once

#include <string>
#include <vector>

#include "cubefuzz/types.hpp"

namespace cubefuzz {

/// Ordered list of labeled images sharing one shape.
struct Dataset {
  std::vector<Image> images;
  std::vector<Label> labels;
  Shape shape;

  std::size_t size() const { return images.size(); }
  void validate() const;
};

/// Binary "dsimg" format: magic DSIM, u32 version=1, count, height, width,
/// channels (little-endian), then per image a u32 label followed by h*w*c
/// little-endian f32 pixels, row-major, channel-last.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

}  // namespace cubefuzz
