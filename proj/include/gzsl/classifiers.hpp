#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/rng.hpp"

namespace gzsl {

struct TrainHyper {
  std::size_t batch_size = 60;
  std::size_t epochs = 50;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  double adam_eps = 1e-8;
  double weight_decay = 1e-4;  // L2 on softmax weights
  double reg_lambda = 1e-2;    // hinge regularizer for the selector
  std::uint64_t seed = 42;

  void validate() const {
    require(batch_size >= 1 && epochs >= 1, Errc::invalid_argument,
            "batch_size and epochs must be >= 1");
    require(learning_rate > 0 && adam_beta1 > 0 && adam_beta1 < 1 &&
                adam_beta2 > 0 && adam_beta2 < 1 && adam_eps > 0,
            Errc::invalid_argument, "bad Adam hyperparameters");
    require(weight_decay >= 0 && reg_lambda > 0, Errc::invalid_argument,
            "bad regularization constants");
  }
};

// Linear classifier over an explicit class subset. Scores are reported in
// class_ids order and class_ids never changes after construction.
struct LinearModel {
  std::vector<ClassId> class_ids;
  Matrix weights;            // d x |class_ids|
  std::vector<double> bias;  // |class_ids|

  std::size_t dim() const { return weights.rows(); }
  std::size_t num_classes() const { return class_ids.size(); }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// scores[k] = weights[:,k] . x + bias[k]
inline std::vector<double> score_linear(const LinearModel& model,
                                        std::span<const double> x) {
  require(x.size() == model.dim(), Errc::dimension_mismatch,
          "score_linear: input dim " + std::to_string(x.size()) + " vs model dim " +
              std::to_string(model.dim()));
  std::vector<double> scores(model.num_classes());
  for (std::size_t k = 0; k < scores.size(); ++k)
    scores[k] = dot(model.weights.col(k), x) + model.bias[k];
  return scores;
}

struct SoftmaxLossGrad {
  double loss = 0.0;
  Matrix grad_weights;
  std::vector<double> grad_bias;
};

// Mean cross-entropy of the softmax over the batch plus
// (weight_decay / 2) * ||W||_F^2, with exact analytic gradients.
// Softmax uses max-subtraction.
inline SoftmaxLossGrad softmax_ce_loss_grad(const LinearModel& model,
                                            const Matrix& features,
                                            const std::vector<ClassId>& labels,
                                            double weight_decay) {
  require(!labels.empty(), Errc::empty_data, "empty batch");
  require(features.cols() == labels.size(), Errc::dimension_mismatch,
          "batch feature/label count mismatch");
  require(features.rows() == model.dim(), Errc::dimension_mismatch,
          "batch feature dim mismatch");

  std::unordered_map<ClassId, std::size_t> class_index;
  for (std::size_t k = 0; k < model.class_ids.size(); ++k)
    class_index.emplace(model.class_ids[k], k);

  const std::size_t d = model.dim();
  const std::size_t k_classes = model.num_classes();
  const std::size_t n = labels.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  SoftmaxLossGrad out;
  out.grad_weights = Matrix(d, k_classes);
  out.grad_bias.assign(k_classes, 0.0);

  std::vector<double> probs(k_classes);
  double nll = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    auto it = class_index.find(labels[j]);
    require(it != class_index.end(), Errc::label_out_of_range,
            "label " + std::to_string(labels[j]) + " outside model classes");
    const std::size_t target = it->second;

    auto x = features.col(j);
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_classes; ++k) {
      probs[k] = dot(model.weights.col(k), x) + model.bias[k];
      max_score = std::max(max_score, probs[k]);
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < k_classes; ++k) {
      probs[k] = std::exp(probs[k] - max_score);
      denom += probs[k];
    }
    for (std::size_t k = 0; k < k_classes; ++k) probs[k] /= denom;
    nll -= std::log(probs[target]);

    // dL/dscore = softmax - onehot, averaged over the batch
    for (std::size_t k = 0; k < k_classes; ++k) {
      const double delta = (probs[k] - (k == target ? 1.0 : 0.0)) * inv_n;
      out.grad_bias[k] += delta;
      auto gw = out.grad_weights.col(k);
      for (std::size_t r = 0; r < d; ++r) gw[r] += delta * x[r];
    }
  }

  double frob = 0.0;
  for (double w : model.weights.storage()) frob += w * w;
  out.loss = nll * inv_n + 0.5 * weight_decay * frob;
  if (weight_decay != 0.0) {
    for (std::size_t i = 0; i < out.grad_weights.storage().size(); ++i)
      out.grad_weights.storage()[i] += weight_decay * model.weights.storage()[i];
  }
  return out;
}

// Adam accumulators for one parameter tensor, flat layout. Zero until the
// first step.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;
};

// Standard Adam with bias correction:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
inline void adam_step(AdamState& state, std::span<double> params,
                      std::span<const double> grads, const TrainHyper& hyper) {
  require(params.size() == grads.size(), Errc::dimension_mismatch,
          "adam_step: param/grad size mismatch");
  if (state.t == 0) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  require(state.m.size() == params.size(), Errc::dimension_mismatch,
          "adam_step: state shaped for a different tensor");
  state.t += 1;
  const double corr1 = 1.0 - std::pow(hyper.adam_beta1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(hyper.adam_beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = hyper.adam_beta1 * state.m[i] + (1.0 - hyper.adam_beta1) * g;
    state.v[i] = hyper.adam_beta2 * state.v[i] + (1.0 - hyper.adam_beta2) * g * g;
    const double m_hat = state.m[i] / corr1;
    const double v_hat = state.v[i] / corr2;
    params[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.adam_eps);
  }
}

// Trains a SoftmaxLog classifier with Adam over seeded shuffled mini-batches.
// Weights start Uniform(-0.01, 0.01) from hyper.seed, bias at zero; the last
// batch of an epoch may be short. If epoch_loss is given it receives the mean
// per-sample training loss of each epoch.
inline LinearModel train_softmax(const Matrix& features,
                                 const std::vector<ClassId>& labels,
                                 std::vector<ClassId> class_ids,
                                 const TrainHyper& hyper,
                                 std::vector<double>* epoch_loss = nullptr) {
  hyper.validate();
  require(!labels.empty(), Errc::empty_data, "empty training split");
  require(features.cols() == labels.size(), Errc::dimension_mismatch,
          "feature/label count mismatch");
  require(!class_ids.empty(), Errc::invalid_argument, "empty class set");
  {
    std::unordered_set<ClassId> allowed(class_ids.begin(), class_ids.end());
    for (ClassId label : labels)
      require(allowed.count(label) != 0, Errc::label_out_of_range,
              "training label " + std::to_string(label) + " outside class_ids");
  }

  const std::size_t d = features.rows();
  const std::size_t n = labels.size();

  LinearModel model;
  model.class_ids = std::move(class_ids);
  model.weights = Matrix(d, model.class_ids.size());
  model.bias.assign(model.class_ids.size(), 0.0);

  std::mt19937_64 rng(hyper.seed);
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  for (double& w : model.weights.storage()) w = init(rng);

  AdamState state_w, state_b;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  if (epoch_loss) epoch_loss->clear();
  Matrix batch_x;
  std::vector<ClassId> batch_y;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += hyper.batch_size) {
      const std::size_t count = std::min(hyper.batch_size, n - start);
      batch_x = Matrix(d, count);
      batch_y.resize(count);
      for (std::size_t j = 0; j < count; ++j) {
        auto src = features.col(order[start + j]);
        auto dst = batch_x.col(j);
        for (std::size_t r = 0; r < d; ++r) dst[r] = src[r];
        batch_y[j] = labels[order[start + j]];
      }
      auto lg = softmax_ce_loss_grad(model, batch_x, batch_y, hyper.weight_decay);
      adam_step(state_w, model.weights.storage(), lg.grad_weights.storage(), hyper);
      adam_step(state_b, model.bias, lg.grad_bias, hyper);
      loss_sum += lg.loss * static_cast<double>(count);
    }
    if (epoch_loss) epoch_loss->push_back(loss_sum / static_cast<double>(n));
  }
  return model;
}

// Binary linear SVM routing original vs auxiliary datapoints. Inputs are
// standardized with stats fit on the concatenation of both sides; those
// stats travel with the model and are re-applied at scoring time.
struct SelectorModel {
  std::vector<double> weight;
  double bias = 0.0;
  StandardizationStats stats;

  std::size_t dim() const { return weight.size(); }

  friend bool operator==(const SelectorModel&, const SelectorModel&) = default;
};

inline double selector_score(const SelectorModel& model,
                             std::span<const double> x) {
  require(x.size() == model.dim(), Errc::dimension_mismatch,
          "selector_score: input dim mismatch");
  double s = model.bias;
  for (std::size_t r = 0; r < x.size(); ++r)
    s += model.weight[r] * (x[r] - model.stats.mean[r]) / model.stats.std_dev[r];
  return s;
}

inline constexpr std::size_t kSelectorIterations = 2000;

namespace detail {

// Balanced hinge objective: (lambda/2)||w||^2 + mean_i c_i max(0, 1 - y_i f_i)
// with c_i = N / (2 N_side) so each side contributes equally.
inline double hinge_objective_std(std::span<const double> w, double b,
                                  const Matrix& pos, const Matrix& neg,
                                  double lambda) {
  const double n = static_cast<double>(pos.cols() + neg.cols());
  const double c_pos = n / (2.0 * static_cast<double>(pos.cols()));
  const double c_neg = n / (2.0 * static_cast<double>(neg.cols()));
  double acc = 0.0;
  for (std::size_t j = 0; j < pos.cols(); ++j)
    acc += c_pos * std::max(0.0, 1.0 - (dot(w, pos.col(j)) + b));
  for (std::size_t j = 0; j < neg.cols(); ++j)
    acc += c_neg * std::max(0.0, 1.0 + (dot(w, neg.col(j)) + b));
  double norm = 0.0;
  for (double v : w) norm += v * v;
  return 0.5 * lambda * norm + acc / n;
}

}  // namespace detail

// Labels originals +1 and auxiliaries -1, then minimizes the balanced
// L2-regularized hinge loss by full-batch subgradient descent with step
// 1/(lambda * t). Deterministic: zero init, no sampling.
inline SelectorModel train_selector(const Matrix& originals,
                                    const Matrix& auxiliaries,
                                    const TrainHyper& hyper,
                                    std::size_t iterations = kSelectorIterations) {
  require(originals.cols() >= 1 && auxiliaries.cols() >= 1, Errc::empty_data,
          "both sides must be non-empty");
  require(originals.rows() == auxiliaries.rows(), Errc::dimension_mismatch,
          "original/auxiliary feature dims differ");
  require(iterations >= 1, Errc::invalid_argument, "iterations must be >= 1");
  const double lambda = hyper.reg_lambda;
  require(lambda > 0, Errc::invalid_argument, "reg_lambda must be positive");

  SelectorModel model;
  model.stats = fit_standardizer(hcat(originals, auxiliaries));
  const Matrix pos = apply_standardizer(originals, model.stats);
  const Matrix neg = apply_standardizer(auxiliaries, model.stats);

  const std::size_t d = pos.rows();
  const double n = static_cast<double>(pos.cols() + neg.cols());
  const double c_pos = n / (2.0 * static_cast<double>(pos.cols()));
  const double c_neg = n / (2.0 * static_cast<double>(neg.cols()));

  model.weight.assign(d, 0.0);
  model.bias = 0.0;
  std::vector<double> grad_w(d);
  for (std::size_t t = 1; t <= iterations; ++t) {
    for (std::size_t r = 0; r < d; ++r) grad_w[r] = lambda * model.weight[r];
    double grad_b = 0.0;
    for (std::size_t j = 0; j < pos.cols(); ++j) {
      auto x = pos.col(j);
      if (1.0 - (dot(model.weight, x) + model.bias) > 0.0) {
        const double scale = c_pos / n;
        for (std::size_t r = 0; r < d; ++r) grad_w[r] -= scale * x[r];
        grad_b -= scale;
      }
    }
    for (std::size_t j = 0; j < neg.cols(); ++j) {
      auto x = neg.col(j);
      if (1.0 + (dot(model.weight, x) + model.bias) > 0.0) {
        const double scale = c_neg / n;
        for (std::size_t r = 0; r < d; ++r) grad_w[r] += scale * x[r];
        grad_b += scale;
      }
    }
    const double step = 1.0 / (lambda * static_cast<double>(t));
    for (std::size_t r = 0; r < d; ++r) model.weight[r] -= step * grad_w[r];
    model.bias -= step * grad_b;
  }
  return model;
}

// Objective value of a trained selector on raw (unstandardized) inputs.
inline double selector_objective(const SelectorModel& model,
                                 const Matrix& originals,
                                 const Matrix& auxiliaries, double lambda) {
  const Matrix pos = apply_standardizer(originals, model.stats);
  const Matrix neg = apply_standardizer(auxiliaries, model.stats);
  return detail::hinge_objective_std(model.weight, model.bias, pos, neg, lambda);
}

}  // namespace gzsl
