#ifndef MIXNER_CRF_HPP
#define MIXNER_CRF_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixner/corpus.hpp"
#include "mixner/features.hpp"

namespace mixner {

/// All trainable parameters of a first-order linear-chain CRF, stored in one
/// flat vector so optimizers and gradient checks can treat them uniformly.
///
/// Layout: emissions (attribute-major, num_attributes x num_tags), then
/// transitions (from-tag-major, num_tags x num_tags), then start, then end.
class CrfWeights {
public:
  CrfWeights() = default;
  CrfWeights(std::size_t num_attributes, std::size_t num_tags)
      : num_attributes_(num_attributes),
        num_tags_(num_tags),
        values_(num_attributes * num_tags + num_tags * num_tags + 2 * num_tags, 0.0) {}

  std::size_t num_attributes() const noexcept { return num_attributes_; }
  std::size_t num_tags() const noexcept { return num_tags_; }

  double& emission(std::size_t attr, std::size_t tag) { return values_[attr * num_tags_ + tag]; }
  double emission(std::size_t attr, std::size_t tag) const { return values_[attr * num_tags_ + tag]; }
  double& transition(std::size_t from, std::size_t to) { return values_[transition_offset() + from * num_tags_ + to]; }
  double transition(std::size_t from, std::size_t to) const { return values_[transition_offset() + from * num_tags_ + to]; }
  double& start(std::size_t tag) { return values_[start_offset() + tag]; }
  double start(std::size_t tag) const { return values_[start_offset() + tag]; }
  double& end(std::size_t tag) { return values_[end_offset() + tag]; }
  double end(std::size_t tag) const { return values_[end_offset() + tag]; }

  std::size_t transition_offset() const noexcept { return num_attributes_ * num_tags_; }
  std::size_t start_offset() const noexcept { return transition_offset() + num_tags_ * num_tags_; }
  std::size_t end_offset() const noexcept { return start_offset() + num_tags_; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const CrfWeights&) const = default;

private:
  std::size_t num_attributes_ = 0;
  std::size_t num_tags_ = 0;
  std::vector<double> values_;
};

struct CrfModel {
  FeatureIndex index;
  TemplateConfig tmpl;
  CrfWeights weights;

  /// Zero weights sized to the index.
  static CrfModel zeros(FeatureIndex index, TemplateConfig tmpl);
  const TagSet& tags() const noexcept { return index.tags(); }
};

/// Unnormalized log-score of tag sequence y. Throws std::invalid_argument on
/// a length mismatch or an empty sentence.
double sequence_score(const CrfWeights& w, const EncodedSentence& e, std::span<const TagId> y);

/// log of the sum of exp(sequence_score) over all tag sequences.
double log_partition(const CrfWeights& w, const EncodedSentence& e);

struct Marginals {
  std::size_t length = 0;
  std::size_t num_tags = 0;
  /// node[t * K + k] = P(y_t = k)
  std::vector<double> node;
  /// edge[((t - 1) * K + j) * K + k] = P(y_{t-1} = j, y_t = k), for t >= 1
  std::vector<double> edge;
  double log_z = 0.0;

  double node_at(std::size_t t, std::size_t k) const { return node[t * num_tags + k]; }
  double edge_at(std::size_t t, std::size_t j, std::size_t k) const {
    return edge[((t - 1) * num_tags + j) * num_tags + k];
  }
};

Marginals marginals(const CrfWeights& w, const EncodedSentence& e);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as CrfWeights::values()
};

/// Summed negative log-likelihood of the gold tags plus (l2 / 2) * |w|^2,
/// and its gradient.
LossAndGradient nll_and_gradient(const CrfWeights& w, std::span<const EncodedSentence> batch,
                                 double l2);

struct Decoded {
  std::vector<TagId> tags;
  double score = 0.0;
};

/// Highest-scoring tag sequence. Ties go to the lower tag id at every
/// backtracking step.
Decoded viterbi(const CrfWeights& w, const EncodedSentence& e);

/// Predicted tag strings for a sentence.
std::vector<std::string> tag_sentence(const CrfModel& m, const Sentence& s);

/// Copy of ds with every token's tag replaced by the model's prediction.
Dataset tag_dataset(const CrfModel& m, const Dataset& ds);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  int patience = 4;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 42;
  double min_delta = 1e-4;
};

struct EpochRecord {
  int epoch = 0;
  double train_nll = 0.0;
  double dev_weighted_f1 = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
};

struct TrainResult {
  CrfModel model;
  TrainHistory history;
};

/// Mini-batch AdaGrad from zero weights with early stopping on dev weighted
/// entity F1. Returns the weights of the best epoch.
///
/// Throws std::invalid_argument for an empty training set, an invalid
/// config, or dev tags outside the index's tag set.
TrainResult train(std::span<const EncodedSentence> train_set, const Dataset& dev,
                  const TrainConfig& cfg, const FeatureIndex& index, const TemplateConfig& tmpl);

/// Writes the versioned text model format.
std::string serialize_model(const CrfModel& m);
CrfModel deserialize_model(std::string_view text);
void save_model(const CrfModel& m, const std::string& path);
CrfModel load_model(const std::string& path);

}  // namespace mixner

#endif  // MIXNER_CRF_HPP
