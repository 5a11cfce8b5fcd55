#include "cubefuzz/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cubefuzz {

void FeedForwardModel::validate() const {
  // scalar-output models are legal (sign-rule binary classifiers); argmax-based
  // attacks require m >= 2 and reject short score vectors at use sites
  if (input_dim == 0 || output_dim == 0) throw std::invalid_argument("model needs n >= 1 and m >= 1");
  if (layers.empty()) throw std::invalid_argument("model has no layers");
  std::size_t prev = input_dim;
  for (const Layer& l : layers) {
    if (l.cols != prev)
      throw std::invalid_argument("layer dimensions do not chain");
    if (l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows)
      throw std::invalid_argument("layer weight/bias sizes inconsistent");
    for (double w : l.weights)
      if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
    for (double b : l.bias)
      if (!std::isfinite(b)) throw std::invalid_argument("non-finite bias");
    prev = l.rows;
  }
  if (prev != output_dim) throw std::invalid_argument("last layer rows != output dim");
}

ScoreVector FeedForwardModel::evaluate_flat(const std::vector<double>& x) const {
  if (x.size() != input_dim) throw std::invalid_argument("input dimension mismatch");
  std::vector<double> cur = x;
  std::vector<double> next;
  for (const Layer& l : layers) {
    next.assign(l.rows, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      double acc = l.bias[r];
      const double* row = l.weights.data() + r * l.cols;
      for (std::size_t c = 0; c < l.cols; ++c) acc += row[c] * cur[c];
      if (l.activation == Activation::Relu && acc < 0.0) acc = 0.0;
      next[r] = acc;
    }
    cur.swap(next);
  }
  if (post == PostProcess::LogSoftmax) {
    double mx = *std::max_element(cur.begin(), cur.end());
    double sum = 0.0;
    for (double v : cur) sum += std::exp(v - mx);
    double lse = mx + std::log(sum);
    for (double& v : cur) v -= lse;
  }
  for (double v : cur)
    if (!std::isfinite(v)) throw std::runtime_error("numeric overflow in model evaluation");
  return cur;
}

std::vector<ScoreVector> FeedForwardModel::evaluate_batch(const std::vector<Image>& xs) const {
  std::vector<ScoreVector> out;
  out.reserve(xs.size());
  for (const Image& x : xs) out.push_back(evaluate(x));
  return out;
}

FeedForwardModel LinearModel::to_feedforward(PostProcess post) const {
  FeedForwardModel m;
  m.input_dim = dims;
  m.output_dim = classes;
  m.post = post;
  m.layers.push_back(Layer{classes, dims, weights, bias, Activation::Identity});
  m.validate();
  return m;
}

namespace {

std::string next_meaningful_line(std::istream& in, std::size_t& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw std::runtime_error("unexpected end of model file at line " + std::to_string(lineno));
}

std::vector<double> parse_doubles(const std::string& line, std::size_t count, std::size_t lineno) {
  std::istringstream ss(line);
  std::vector<double> vals;
  double v;
  while (ss >> v) vals.push_back(v);
  if (vals.size() != count)
    throw std::runtime_error("expected " + std::to_string(count) + " values at line " +
                             std::to_string(lineno));
  return vals;
}

}  // namespace

FeedForwardModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::size_t lineno = 0;

  std::string header = next_meaningful_line(in, lineno);
  if (header != "DSMODEL 1") throw std::runtime_error("bad model header in " + path);

  std::string meta = next_meaningful_line(in, lineno);
  std::istringstream ms(meta);
  std::string kw_input, kw_output, kw_post, post_name;
  std::size_t n = 0, m = 0;
  if (!(ms >> kw_input >> n >> kw_output >> m >> kw_post >> post_name) || kw_input != "input" ||
      kw_output != "output" || kw_post != "post")
    throw std::runtime_error("bad model metadata line in " + path);

  FeedForwardModel model;
  model.input_dim = n;
  model.output_dim = m;
  if (post_name == "logits")
    model.post = PostProcess::Logits;
  else if (post_name == "logsoftmax")
    model.post = PostProcess::LogSoftmax;
  else
    throw std::runtime_error("unknown post-processing: " + post_name);

  std::string line;
  while (true) {
    if (!std::getline(in, line)) break;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string kw, act_name;
    std::size_t rows = 0, cols = 0;
    if (!(ls >> kw >> rows >> cols >> act_name) || kw != "layer")
      throw std::runtime_error("expected layer header at line " + std::to_string(lineno));

    Layer layer;
    layer.rows = rows;
    layer.cols = cols;
    if (act_name == "relu")
      layer.activation = Activation::Relu;
    else if (act_name == "identity")
      layer.activation = Activation::Identity;
    else
      throw std::runtime_error("unknown activation: " + act_name);

    layer.weights.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = parse_doubles(next_meaningful_line(in, lineno), cols, lineno);
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
    layer.bias = parse_doubles(next_meaningful_line(in, lineno), rows, lineno);
    model.layers.push_back(std::move(layer));
  }

  model.validate();
  return model;
}

void save_model(const FeedForwardModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  char buf[64];
  out << "DSMODEL 1\n";
  out << "input " << model.input_dim << " output " << model.output_dim << " post "
      << (model.post == PostProcess::Logits ? "logits" : "logsoftmax") << "\n";
  for (const Layer& l : model.layers) {
    out << "layer " << l.rows << " " << l.cols << " "
        << (l.activation == Activation::Relu ? "relu" : "identity") << "\n";
    for (std::size_t r = 0; r < l.rows; ++r) {
      for (std::size_t c = 0; c < l.cols; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", l.weights[r * l.cols + c]);
        out << (c ? " " : "") << buf;
      }
      out << "\n";
    }
    for (std::size_t r = 0; r < l.rows; ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", l.bias[r]);
      out << (r ? " " : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failure: " + path);
}

ScoreOracle::Backend model_backend(std::shared_ptr<const FeedForwardModel> model) {
  return [model](const std::vector<Image>& xs) { return model->evaluate_batch(xs); };
}

}  // namespace cubefuzz
