#include "mixner/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixner {

namespace {

void check_sentence(const CrfWeights& w, const EncodedSentence& e) {
  if (e.length() == 0) throw std::invalid_argument("empty sentence");
  if (w.num_tags() == 0) throw std::invalid_argument("model has no tags");
  for (const auto& attrs : e.attributes) {
    for (const auto a : attrs) {
      if (a >= w.num_attributes()) throw std::out_of_range("attribute id outside the model");
    }
  }
}

// Sum of emission weights for (position, tag), accumulated in attribute
// order starting from 0.0. Scoring and Viterbi both use it so that their
// sums are bitwise identical.
double emission_score(const CrfWeights& w, std::span<const AttributeId> attrs, std::size_t tag) {
  double s = 0.0;
  for (const auto a : attrs) s += w.emission(a, tag);
  return s;
}

// emit[t * K + k]
std::vector<double> emission_table(const CrfWeights& w, const EncodedSentence& e) {
  const std::size_t T = e.length();
  const std::size_t K = w.num_tags();
  std::vector<double> emit(T * K);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) emit[t * K + k] = emission_score(w, e.attributes[t], k);
  }
  return emit;
}

double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (const double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

struct Lattice {
  std::size_t T = 0;
  std::size_t K = 0;
  std::vector<double> emit;
  std::vector<double> alpha;  // alpha[t*K+k]: log-sum of prefixes ending in k at t (emission included)
  std::vector<double> beta;   // beta[t*K+k]: log-sum of suffixes after t given k at t (end included)
  double log_z = 0.0;
};

Lattice forward(const CrfWeights& w, const EncodedSentence& e) {
  Lattice L;
  L.T = e.length();
  L.K = w.num_tags();
  const std::size_t T = L.T;
  const std::size_t K = L.K;
  L.emit = emission_table(w, e);
  L.alpha.assign(T * K, 0.0);
  std::vector<double> scratch(K);

  for (std::size_t k = 0; k < K; ++k) L.alpha[k] = w.start(k) + L.emit[k];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t j = 0; j < K; ++j) scratch[j] = L.alpha[(t - 1) * K + j] + w.transition(j, k);
      L.alpha[t * K + k] = log_sum_exp(scratch) + L.emit[t * K + k];
    }
  }
  for (std::size_t k = 0; k < K; ++k) scratch[k] = L.alpha[(T - 1) * K + k] + w.end(k);
  L.log_z = log_sum_exp(scratch);
  return L;
}

void backward(const CrfWeights& w, Lattice& L) {
  const std::size_t T = L.T;
  const std::size_t K = L.K;
  L.beta.assign(T * K, 0.0);
  std::vector<double> scratch(K);
  for (std::size_t k = 0; k < K; ++k) L.beta[(T - 1) * K + k] = w.end(k);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        scratch[k] = w.transition(j, k) + L.emit[(t + 1) * K + k] + L.beta[(t + 1) * K + k];
      }
      L.beta[t * K + j] = log_sum_exp(scratch);
    }
  }
}

}  // namespace

CrfModel CrfModel::zeros(FeatureIndex index, TemplateConfig tmpl) {
  CrfWeights weights(index.num_attributes(), index.num_tags());
  return CrfModel{std::move(index), tmpl, std::move(weights)};
}

double sequence_score(const CrfWeights& w, const EncodedSentence& e, std::span<const TagId> y) {
  check_sentence(w, e);
  if (y.size() != e.length()) {
    throw std::invalid_argument("tag sequence length " + std::to_string(y.size()) +
                                " does not match sentence length " + std::to_string(e.length()));
  }
  for (const auto k : y) {
    if (k >= w.num_tags()) throw std::out_of_range("tag id outside the model");
  }
  // Same association order as viterbi(): ((start + emit) + trans) + emit ... + end.
  double s = w.start(y[0]) + emission_score(w, e.attributes[0], y[0]);
  for (std::size_t t = 1; t < y.size(); ++t) {
    s = s + w.transition(y[t - 1], y[t]);
    s = s + emission_score(w, e.attributes[t], y[t]);
  }
  return s + w.end(y.back());
}

double log_partition(const CrfWeights& w, const EncodedSentence& e) {
  check_sentence(w, e);
  return forward(w, e).log_z;
}

Marginals marginals(const CrfWeights& w, const EncodedSentence& e) {
  check_sentence(w, e);
  Lattice L = forward(w, e);
  backward(w, L);
  const std::size_t T = L.T;
  const std::size_t K = L.K;

  Marginals m;
  m.length = T;
  m.num_tags = K;
  m.log_z = L.log_z;
  m.node.resize(T * K);
  for (std::size_t i = 0; i < T * K; ++i) m.node[i] = std::exp(L.alpha[i] + L.beta[i] - L.log_z);
  m.edge.resize((T > 0 ? T - 1 : 0) * K * K);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        m.edge[((t - 1) * K + j) * K + k] =
            std::exp(L.alpha[(t - 1) * K + j] + w.transition(j, k) + L.emit[t * K + k] +
                     L.beta[t * K + k] - L.log_z);
      }
    }
  }
  return m;
}

LossAndGradient nll_and_gradient(const CrfWeights& w, std::span<const EncodedSentence> batch,
                                 double l2) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const std::size_t K = w.num_tags();
  LossAndGradient out;
  out.gradient.assign(w.values().size(), 0.0);
  auto& g = out.gradient;
  const std::size_t trans = w.transition_offset();
  const std::size_t start = w.start_offset();
  const std::size_t end = w.end_offset();

  for (const auto& e : batch) {
    if (e.tags.size() != e.length()) throw std::invalid_argument("sentence has no gold tags");
    const Marginals m = marginals(w, e);
    out.loss += m.log_z - sequence_score(w, e, e.tags);

    const std::size_t T = e.length();
    for (std::size_t t = 0; t < T; ++t) {
      for (const auto a : e.attributes[t]) {
        double* row = &g[a * K];
        for (std::size_t k = 0; k < K; ++k) row[k] += m.node_at(t, k);
        row[e.tags[t]] -= 1.0;
      }
    }
    for (std::size_t t = 1; t < T; ++t) {
      for (std::size_t j = 0; j < K; ++j) {
        for (std::size_t k = 0; k < K; ++k) g[trans + j * K + k] += m.edge_at(t, j, k);
      }
      g[trans + e.tags[t - 1] * K + e.tags[t]] -= 1.0;
    }
    for (std::size_t k = 0; k < K; ++k) {
      g[start + k] += m.node_at(0, k);
      g[end + k] += m.node_at(T - 1, k);
    }
    g[start + e.tags[0]] -= 1.0;
    g[end + e.tags[T - 1]] -= 1.0;
  }

  if (l2 != 0.0) {
    const auto v = w.values();
    double sq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      sq += v[i] * v[i];
      g[i] += l2 * v[i];
    }
    out.loss += 0.5 * l2 * sq;
  }
  return out;
}

Decoded viterbi(const CrfWeights& w, const EncodedSentence& e) {
  check_sentence(w, e);
  const std::size_t T = e.length();
  const std::size_t K = w.num_tags();
  const auto emit = emission_table(w, e);
  std::vector<double> delta(T * K);
  std::vector<TagId> back(T * K, 0);

  for (std::size_t k = 0; k < K; ++k) delta[k] = w.start(k) + emit[k];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      double best = delta[(t - 1) * K] + w.transition(0, k);
      TagId arg = 0;
      for (std::size_t j = 1; j < K; ++j) {
        const double cand = delta[(t - 1) * K + j] + w.transition(j, k);
        if (cand > best) {
          best = cand;
          arg = static_cast<TagId>(j);
        }
      }
      delta[t * K + k] = best + emit[t * K + k];
      back[t * K + k] = arg;
    }
  }

  Decoded out;
  out.tags.resize(T);
  double best = delta[(T - 1) * K] + w.end(0);
  TagId arg = 0;
  for (std::size_t k = 1; k < K; ++k) {
    const double cand = delta[(T - 1) * K + k] + w.end(k);
    if (cand > best) {
      best = cand;
      arg = static_cast<TagId>(k);
    }
  }
  out.score = best;
  out.tags[T - 1] = arg;
  for (std::size_t t = T - 1; t > 0; --t) out.tags[t - 1] = back[t * K + out.tags[t]];
  return out;
}

std::vector<std::string> tag_sentence(const CrfModel& m, const Sentence& s) {
  const auto enc = encode_sentence(s, m.index, m.tmpl);
  const auto decoded = viterbi(m.weights, enc);
  std::vector<std::string> out;
  out.reserve(decoded.tags.size());
  for (const auto k : decoded.tags) out.push_back(m.tags()[k]);
  return out;
}

Dataset tag_dataset(const CrfModel& m, const Dataset& ds) {
  Dataset out = ds;
  for (auto& s : out.sentences) {
    const auto tags = tag_sentence(m, s);
    for (std::size_t i = 0; i < tags.size(); ++i) s.tokens[i].tag = tags[i];
  }
  return out;
}

}  // namespace mixner
