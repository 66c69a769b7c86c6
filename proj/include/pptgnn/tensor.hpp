#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pptgnn {

/// Dense row-major matrix of doubles. Vectors are 1 x n or n x 1 tensors.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool all_finite(const Tensor& t);

/// Seeded generator. The engine is std::mt19937_64, whose output sequence the
/// standard fixes; the distributions below are written out by hand because
/// the std:: ones are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }
  uint64_t next_u64() { return engine_(); }
  double uniform();                     // [0, 1), 53 random bits
  double uniform(double lo, double hi);
  uint64_t below(uint64_t n);           // uniform in [0, n), rejection sampled
  double normal();                      // Box-Muller
  Rng split();                          // independent child stream

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

// Glorot-uniform matrix (rows = fan_in, cols = fan_out).
Tensor glorot_uniform(size_t fan_in, size_t fan_out, Rng& rng);

inline constexpr double kLeakySlope = 0.01;

Tensor leaky_relu(const Tensor& x, double slope = kLeakySlope);
Tensor leaky_relu_grad(const Tensor& x, double slope = kLeakySlope);

struct LossAndGrad {
  double loss = 0.0;
  Tensor grad;  // d loss / d logits
};

/// Mean over rows of w[target] * -log softmax(logits)[target].
LossAndGrad cross_entropy(const Tensor& logits, std::span<const int32_t> targets,
                          std::span<const double> class_weights = {});

/// Mean over rows of the sigmoid cross-entropy of an n x 1 logit column.
LossAndGrad binary_cross_entropy(const Tensor& logits, std::span<const int32_t> targets);

// Class weights N / (C * count_c) from training labels; absent classes get 1.
std::vector<double> inverse_frequency_weights(std::span<const int32_t> labels, size_t num_classes);

/// Named tensors. std::map keeps iteration (and so checkpoint layout and
/// optimizer order) deterministic.
using ParameterSet = std::map<std::string, Tensor>;

size_t parameter_count(const ParameterSet& params);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  uint64_t step = 0;
  ParameterSet first_moment;
  ParameterSet second_moment;

  explicit AdamState(AdamConfig c = {}) : config(c) {}
};

/// One bias-corrected Adam update. Parameters without a gradient entry are
/// left untouched. Throws std::invalid_argument on shape mismatch.
void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state);

struct Evaluation {
  double loss = 0.0;
  ParameterSet grads;
  // Hash of every data-dependent branch (activation signs, max-aggregation
  // winners). Equal signatures mean both points sit on the same smooth piece.
  uint64_t branch_signature = 0;
};

using Objective = std::function<Evaluation(const ParameterSet& params, bool want_grads)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  size_t worst_index = 0;
  size_t checked = 0;
  size_t skipped_at_kinks = 0;
};

/// Central finite differences against the analytic gradient, over every
/// coordinate of every parameter. Relative error is |a - n| / max(|a|, |n|, floor);
/// coordinates whose +/- probes cross a non-differentiable point are skipped.
GradCheckReport check_gradients(const Objective& f, const ParameterSet& params, double eps = 1e-5,
                                double floor = 1e-6);

}  // namespace pptgnn
