#pragma once

#include <cstdint>
#include <string>

#include "cubefuzz/dataset.hpp"
#include "cubefuzz/model.hpp"

namespace cubefuzz {

/// Deterministic desk-scale attack targets, regenerable bit-identically from
/// the seed via the documented linear congruential generator.
struct FixtureSpec {
  std::uint64_t seed = 13;
  Shape shape{8, 8, 1};
  std::size_t hidden = 24;
  std::size_t classes = 10;
  std::size_t count = 16;
  double hidden_weight_scale = 0.01;
  double output_weight_scale = 1.0;
};

FeedForwardModel generate_fixture_model(const FixtureSpec& spec);

/// Images with float-exact pixels; every label is the model's own argmax, so
/// all entries are correctly classified by construction.
Dataset generate_fixture_dataset(const FeedForwardModel& model, const FixtureSpec& spec);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t file_checksum(const std::string& path);

/// Writes model.dsmodel, dataset.dsimg, and manifest.json into dir; returns
/// the manifest JSON text (seed plus per-file fnv1a64 checksums).
std::string write_fixtures(const std::string& dir, const FixtureSpec& spec);

}  // namespace cubefuzz
