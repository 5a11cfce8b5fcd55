#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cubefuzz/oracle.hpp"
#include "cubefuzz/types.hpp"

namespace cubefuzz {

enum class Activation { Relu, Identity };
enum class PostProcess { Logits, LogSoftmax };

struct Layer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;  // row-major, rows x cols
  std::vector<double> bias;     // rows
  Activation activation = Activation::Identity;
};

/// Small dense network; the concrete non-linear classifier behind ScoreOracle.
struct FeedForwardModel {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  PostProcess post = PostProcess::LogSoftmax;
  std::vector<Layer> layers;

  void validate() const;
  ScoreVector evaluate_flat(const std::vector<double>& x) const;
  ScoreVector evaluate(const Image& x) const { return evaluate_flat(x.data); }
  std::vector<ScoreVector> evaluate_batch(const std::vector<Image>& xs) const;
};

/// W^T x + b with W an m x n row-major matrix.
struct LinearModel {
  std::size_t classes = 0;
  std::size_t dims = 0;
  std::vector<double> weights;  // row-major, classes x dims
  std::vector<double> bias;     // classes

  FeedForwardModel to_feedforward(PostProcess post = PostProcess::Logits) const;
};

FeedForwardModel load_model(const std::string& path);
void save_model(const FeedForwardModel& model, const std::string& path);

/// In-process backend; the model is shared and immutable.
ScoreOracle::Backend model_backend(std::shared_ptr<const FeedForwardModel> model);

}  // namespace cubefuzz
