#include "cubefuzz/fixtures.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "cubefuzz/rng.hpp"

namespace cubefuzz {

FeedForwardModel generate_fixture_model(const FixtureSpec& spec) {
  std::size_t n = spec.shape.size();
  if (n == 0 || spec.hidden == 0 || spec.classes < 2)
    throw std::invalid_argument("fixture spec needs n > 0, hidden > 0, classes >= 2");
  Lcg64 rng(spec.seed);

  FeedForwardModel model;
  model.input_dim = n;
  model.output_dim = spec.classes;
  model.post = PostProcess::LogSoftmax;

  Layer l1;
  l1.rows = spec.hidden;
  l1.cols = n;
  l1.activation = Activation::Relu;
  double ws = spec.hidden_weight_scale;
  for (std::size_t i = 0; i < l1.rows * l1.cols; ++i)
    l1.weights.push_back(rng.uniform(-ws, ws));
  for (std::size_t i = 0; i < l1.rows; ++i) l1.bias.push_back(rng.uniform(-1.0, 1.0));
  model.layers.push_back(std::move(l1));

  Layer l2;
  l2.rows = spec.classes;
  l2.cols = spec.hidden;
  l2.activation = Activation::Identity;
  double os = spec.output_weight_scale;
  for (std::size_t i = 0; i < l2.rows * l2.cols; ++i)
    l2.weights.push_back(rng.uniform(-os, os));
  for (std::size_t i = 0; i < l2.rows; ++i) l2.bias.push_back(rng.uniform(-0.5, 0.5));
  model.layers.push_back(std::move(l2));

  model.validate();
  return model;
}

Dataset generate_fixture_dataset(const FeedForwardModel& model, const FixtureSpec& spec) {
  if (spec.count == 0) throw std::invalid_argument("fixture spec needs count > 0");
  if (model.input_dim != spec.shape.size())
    throw std::invalid_argument("fixture model does not match fixture shape");
  // dataset stream is offset so it never replays the model's random numbers
  Lcg64 rng(spec.seed ^ 0x64617461ULL);

  Dataset ds;
  ds.shape = spec.shape;
  for (std::size_t i = 0; i < spec.count; ++i) {
    Image img;
    img.shape = spec.shape;
    img.data.reserve(spec.shape.size());
    for (std::size_t p = 0; p < spec.shape.size(); ++p) {
      // round through f32 so the in-memory image equals the dsimg round-trip
      float v = static_cast<float>(rng.uniform(0.0, 255.0));
      img.data.push_back(static_cast<double>(v));
    }
    ds.labels.push_back(argmax_label(model.evaluate(img)));
    ds.images.push_back(std::move(img));
  }
  ds.validate();
  return ds;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for checksum: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes.data(), bytes.size());
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string write_fixtures(const std::string& dir, const FixtureSpec& spec) {
  FeedForwardModel model = generate_fixture_model(spec);
  Dataset ds = generate_fixture_dataset(model, spec);

  std::string model_path = dir + "/model.dsmodel";
  std::string data_path = dir + "/dataset.dsimg";
  save_model(model, model_path);
  save_dataset(ds, data_path);

  nlohmann::json manifest;
  manifest["seed"] = spec.seed;
  manifest["shape"] = {spec.shape.height, spec.shape.width, spec.shape.channels};
  manifest["hidden"] = spec.hidden;
  manifest["classes"] = spec.classes;
  manifest["count"] = spec.count;
  manifest["files"] = {{"model.dsmodel", hex64(file_checksum(model_path))},
                       {"dataset.dsimg", hex64(file_checksum(data_path))}};
  std::string text = manifest.dump(2) + "\n";

  std::ofstream out(dir + "/manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << text;
  return text;
}

}  // namespace cubefuzz
