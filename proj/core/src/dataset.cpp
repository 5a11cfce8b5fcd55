#include "cubefuzz/dataset.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cubefuzz {

void Dataset::validate() const {
  if (images.empty()) throw std::invalid_argument("dataset is empty");
  if (images.size() != labels.size())
    throw std::invalid_argument("dataset image/label count mismatch");
  if (shape.size() == 0) throw std::invalid_argument("dataset has an empty shape");
  for (const Image& img : images) {
    if (img.shape != shape) throw std::invalid_argument("dataset image with mismatched shape");
    img.validate();
  }
}

namespace {

constexpr char kMagic[4] = {'D', 'S', 'I', 'M'};

std::uint32_t read_u32(std::istream& in, const std::string& path, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(path + ": truncated file reading " + what + " at offset " +
                             std::to_string(static_cast<long long>(in.tellg())));
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

float read_f32(std::istream& in, const std::string& path, std::size_t image, std::size_t pixel) {
  std::uint32_t bits = 0;
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(path + ": truncated pixel data at image " + std::to_string(image) +
                             ", pixel " + std::to_string(pixel));
  bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

void write_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  write_u32(out, bits);
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a dsimg file (bad magic)");
  std::uint32_t version = read_u32(in, path, "version");
  if (version != 1)
    throw std::runtime_error(path + ": unsupported dsimg version " + std::to_string(version));
  std::uint32_t count = read_u32(in, path, "count");
  std::uint32_t height = read_u32(in, path, "height");
  std::uint32_t width = read_u32(in, path, "width");
  std::uint32_t channels = read_u32(in, path, "channels");

  Dataset ds;
  ds.shape = Shape{height, width, channels};
  std::size_t n = ds.shape.size();
  if (count == 0) throw std::runtime_error(path + ": dataset has zero images");
  if (n == 0) throw std::runtime_error(path + ": dataset has an empty shape");

  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t label = read_u32(in, path, "label");
    Image img;
    img.shape = ds.shape;
    img.data.reserve(n);
    for (std::size_t p = 0; p < n; ++p) {
      double v = static_cast<double>(read_f32(in, path, i, p));
      if (!(v >= kPixelMin && v <= kPixelMax))
        throw std::runtime_error(path + ": pixel outside [0,255] at image " + std::to_string(i) +
                                 ", pixel " + std::to_string(p));
      img.data.push_back(v);
    }
    ds.images.push_back(std::move(img));
    ds.labels.push_back(Label{label});
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out.write(kMagic, 4);
  write_u32(out, 1);
  write_u32(out, static_cast<std::uint32_t>(ds.size()));
  write_u32(out, static_cast<std::uint32_t>(ds.shape.height));
  write_u32(out, static_cast<std::uint32_t>(ds.shape.width));
  write_u32(out, static_cast<std::uint32_t>(ds.shape.channels));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    write_u32(out, static_cast<std::uint32_t>(ds.labels[i].index));
    for (double v : ds.images[i].data) write_f32(out, static_cast<float>(v));
  }
  if (!out) throw std::runtime_error("write failed for dataset file: " + path);
}

}  // namespace cubefuzz
