#include "pptgnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pptgnn {

bool all_finite(const Tensor& t) { return t.allFinite(); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below(0)");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split() { return Rng(engine_() ^ 0x9e3779b97f4a7c15ULL); }

Tensor glorot_uniform(size_t fan_in, size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-a, a);
  return t;
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Tensor leaky_relu_grad(const Tensor& x, double slope) {
  return x.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

LossAndGrad cross_entropy(const Tensor& logits, std::span<const int32_t> targets,
                          std::span<const double> class_weights) {
  const auto n = logits.rows();
  const auto c = logits.cols();
  if (c < 2) throw std::invalid_argument("cross_entropy: need at least 2 classes");
  if (static_cast<size_t>(n) != targets.size()) throw std::invalid_argument("cross_entropy: target count mismatch");
  if (!class_weights.empty() && class_weights.size() != static_cast<size_t>(c)) {
    throw std::invalid_argument("cross_entropy: class weight count mismatch");
  }
  LossAndGrad out;
  out.grad = Tensor::Zero(n, c);
  if (n == 0) return out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int32_t t = targets[static_cast<size_t>(i)];
    if (t < 0 || t >= c) {
      throw std::invalid_argument("cross_entropy: target " + std::to_string(t) + " outside [0, " +
                                  std::to_string(c) + ")");
    }
    const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<size_t>(t)];
    const double m = logits.row(i).maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < c; ++j) z += std::exp(logits(i, j) - m);
    const double log_z = m + std::log(z);
    out.loss += w * (log_z - logits(i, t));
    for (Eigen::Index j = 0; j < c; ++j) out.grad(i, j) = w * std::exp(logits(i, j) - log_z);
    out.grad(i, t) -= w;
  }
  out.loss /= static_cast<double>(n);
  out.grad /= static_cast<double>(n);
  return out;
}

LossAndGrad binary_cross_entropy(const Tensor& logits, std::span<const int32_t> targets) {
  if (logits.cols() != 1) throw std::invalid_argument("binary_cross_entropy: logits must be n x 1");
  const auto n = logits.rows();
  if (static_cast<size_t>(n) != targets.size()) throw std::invalid_argument("binary_cross_entropy: target count mismatch");
  LossAndGrad out;
  out.grad = Tensor::Zero(n, 1);
  if (n == 0) return out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int32_t y = targets[static_cast<size_t>(i)];
    if (y != 0 && y != 1) throw std::invalid_argument("binary_cross_entropy: targets must be 0 or 1");
    const double x = logits(i, 0);
    // log(1 + e^x) - y x, with the softplus evaluated without overflow.
    const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    out.loss += softplus - y * x;
    const double sigmoid = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    out.grad(i, 0) = sigmoid - y;
  }
  out.loss /= static_cast<double>(n);
  out.grad /= static_cast<double>(n);
  return out;
}

std::vector<double> inverse_frequency_weights(std::span<const int32_t> labels, size_t num_classes) {
  std::vector<double> counts(num_classes, 0.0);
  size_t n = 0;
  for (int32_t y : labels) {
    if (y < 0) continue;
    if (static_cast<size_t>(y) >= num_classes) throw std::invalid_argument("label outside class range");
    counts[static_cast<size_t>(y)] += 1.0;
    ++n;
  }
  std::vector<double> weights(num_classes, 1.0);
  for (size_t c = 0; c < num_classes; ++c) {
    if (counts[c] > 0) weights[c] = static_cast<double>(n) / (static_cast<double>(num_classes) * counts[c]);
  }
  return weights;
}

size_t parameter_count(const ParameterSet& params) {
  size_t n = 0;
  for (const auto& [name, t] : params) n += static_cast<size_t>(t.size());
  return n;
}

void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("adam_step: gradient for unknown parameter " + name);
    if (it->second.rows() != g.rows() || it->second.cols() != g.cols()) {
      throw std::invalid_argument("adam_step: shape mismatch for " + name);
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (const auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    auto [m_it, m_new] = state.first_moment.try_emplace(name, Tensor::Zero(p.rows(), p.cols()));
    auto [v_it, v_new] = state.second_moment.try_emplace(name, Tensor::Zero(p.rows(), p.cols()));
    Tensor& m = m_it->second;
    Tensor& v = v_it->second;
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= c.learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

GradCheckReport check_gradients(const Objective& f, const ParameterSet& params, double eps, double floor) {
  GradCheckReport report;
  const Evaluation base = f(params, true);
  ParameterSet probe = params;
  for (const auto& [name, value] : params) {
    auto grad_it = base.grads.find(name);
    Tensor& p = probe.at(name);
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double original = p.data()[i];
      p.data()[i] = original + eps;
      const Evaluation plus = f(probe, false);
      p.data()[i] = original - eps;
      const Evaluation minus = f(probe, false);
      p.data()[i] = original;
      if (plus.branch_signature != base.branch_signature || minus.branch_signature != base.branch_signature) {
        ++report.skipped_at_kinks;
        continue;
      }
      const double numeric = (plus.loss - minus.loss) / (2.0 * eps);
      const double analytic = grad_it == base.grads.end() ? 0.0 : grad_it->second.data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = name;
        report.worst_index = static_cast<size_t>(i);
      }
    }
  }
  return report;
}

}  // namespace pptgnn
