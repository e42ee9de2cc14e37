#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mixner/crf.hpp"
#include "mixner/eval.hpp"
#include "mixner/rng.hpp"

namespace mixner {

namespace {

constexpr double kAdaGradEpsilon = 1e-8;

void check_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (cfg.patience < 0) throw std::invalid_argument("patience must be >= 0");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(cfg.l2 >= 0.0)) throw std::invalid_argument("l2 must be non-negative");
}

}  // namespace

TrainResult train(std::span<const EncodedSentence> train_set, const Dataset& dev,
                  const TrainConfig& cfg, const FeatureIndex& index, const TemplateConfig& tmpl) {
  check_config(cfg);
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  for (std::size_t s = 0; s < dev.size(); ++s) {
    for (std::size_t i = 0; i < dev.sentences[s].size(); ++i) {
      const auto& tag = dev.sentences[s].tokens[i].tag;
      if (!index.tags().contains(tag)) {
        throw std::invalid_argument("dev sentence " + std::to_string(s) + ", position " +
                                    std::to_string(i) + ": tag '" + tag +
                                    "' does not occur in training data");
      }
    }
  }

  CrfModel model = CrfModel::zeros(index, tmpl);
  CrfWeights best_weights = model.weights;
  std::vector<double> sum_sq(model.weights.values().size(), 0.0);

  std::vector<EncodedSentence> dev_encoded;
  dev_encoded.reserve(dev.size());
  for (const auto& s : dev.sentences) dev_encoded.push_back(encode_sentence(s, index, tmpl));

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  std::vector<EncodedSentence> batch;

  TrainResult result;
  double best_f1 = -1.0;
  int stale = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double epoch_nll = 0.0;

    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = b; i < e; ++i) batch.push_back(train_set[order[i]]);

      const auto lg = nll_and_gradient(model.weights, batch, cfg.l2);
      epoch_nll += lg.loss;
      auto w = model.weights.values();
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double g = lg.gradient[i];
        if (g == 0.0) continue;
        sum_sq[i] += g * g;
        w[i] -= cfg.learning_rate * g / (std::sqrt(sum_sq[i]) + kAdaGradEpsilon);
      }
    }

    Dataset predicted = dev;
    for (std::size_t s = 0; s < dev.size(); ++s) {
      const auto decoded = viterbi(model.weights, dev_encoded[s]);
      for (std::size_t i = 0; i < decoded.tags.size(); ++i) {
        predicted.sentences[s].tokens[i].tag = index.tags()[decoded.tags[i]];
      }
    }
    const double f1 = dev.size() == 0 ? 0.0 : score_entities(dev, predicted).weighted_f1;

    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    result.history.epochs.push_back({epoch, epoch_nll, f1, elapsed.count()});

    // Patience counts epochs without an improvement larger than min_delta;
    // the kept weights are always the arg-max epoch.
    const bool improved = f1 > best_f1 + cfg.min_delta;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_weights = model.weights;
      result.history.best_epoch = epoch;
    }
    stale = improved ? 0 : stale + 1;
    if (stale > cfg.patience) break;
  }

  model.weights = std::move(best_weights);
  result.model = std::move(model);
  return result;
}

}  // namespace mixner
