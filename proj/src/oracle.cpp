#include "mixner/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixner/rng.hpp"

namespace mixner::oracle {

namespace {

std::size_t sequence_count(std::size_t K, std::size_t T) {
  std::size_t n = 1;
  for (std::size_t t = 0; t < T; ++t) {
    if (n > kMaxSequences / std::max<std::size_t>(K, 1)) {
      throw std::invalid_argument("instance too large to enumerate");
    }
    n *= K;
  }
  if (n > kMaxSequences) throw std::invalid_argument("instance too large to enumerate");
  return n;
}

// Sequence n in base K with position 0 as the least significant digit, so
// numeric order of n compares the last position first.
void decode_sequence(std::size_t n, std::size_t K, std::vector<TagId>& y) {
  for (auto& tag : y) {
    tag = static_cast<TagId>(n % K);
    n /= K;
  }
}

double direct_score(const CrfWeights& w, const EncodedSentence& e, const std::vector<TagId>& y) {
  double s = w.start(y.front()) + w.end(y.back());
  for (std::size_t t = 0; t < y.size(); ++t) {
    for (const auto a : e.attributes[t]) s += w.emission(a, y[t]);
    if (t > 0) s += w.transition(y[t - 1], y[t]);
  }
  return s;
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

std::vector<double> all_scores(const TinyInstance& t) {
  const std::size_t K = t.weights.num_tags();
  const std::size_t T = t.sentence.length();
  if (T == 0 || K == 0) throw std::invalid_argument("empty instance");
  const std::size_t n = sequence_count(K, T);
  std::vector<double> scores(n);
  std::vector<TagId> y(T);
  for (std::size_t i = 0; i < n; ++i) {
    decode_sequence(i, K, y);
    scores[i] = direct_score(t.weights, t.sentence, y);
  }
  return scores;
}

EncodedSentence random_sentence(Rng& rng, std::size_t length, std::size_t vocab, std::size_t tags,
                                bool with_gold) {
  EncodedSentence e;
  e.attributes.resize(length);
  for (auto& attrs : e.attributes) {
    const std::size_t n = vocab == 0 ? 0 : rng.below(std::min<std::size_t>(vocab, 3) + 1);
    while (attrs.size() < n) {
      const auto a = static_cast<AttributeId>(rng.below(vocab));
      if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
    }
    std::sort(attrs.begin(), attrs.end());
  }
  if (with_gold) {
    for (std::size_t t = 0; t < length; ++t) e.tags.push_back(static_cast<TagId>(rng.below(tags)));
  }
  return e;
}

void randomize(Rng& rng, CrfWeights& w, double range) {
  for (auto& x : w.values()) x = rng.uniform(-range, range);
}

void append_double(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

CrfWeights corrupt(CrfWeights w, Fault fault) {
  if (fault == Fault::kTransitionSign) {
    for (std::size_t j = 0; j < w.num_tags(); ++j) {
      for (std::size_t k = 0; k < w.num_tags(); ++k) w.transition(j, k) = -w.transition(j, k);
    }
  }
  return w;
}

void record(CheckResult& r, double error, bool ok, const TinyInstance& t) {
  ++r.trials;
  r.worst = std::max(r.worst, error);
  if (!ok) {
    if (r.failures == 0) r.first_failure = describe(t);
    ++r.failures;
  }
}

}  // namespace

double enumerate_logZ(const TinyInstance& t) {
  double acc = -std::numeric_limits<double>::infinity();
  for (const double s : all_scores(t)) acc = log_add(acc, s);
  return acc;
}

BestSequence enumerate_best(const TinyInstance& t) {
  const auto scores = all_scores(t);
  std::size_t arg = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[arg]) arg = i;
  }
  BestSequence best;
  best.tags.resize(t.sentence.length());
  decode_sequence(arg, t.weights.num_tags(), best.tags);
  best.score = scores[arg];
  return best;
}

EnumeratedMarginals enumerate_marginals(const TinyInstance& t) {
  const std::size_t K = t.weights.num_tags();
  const std::size_t T = t.sentence.length();
  const auto scores = all_scores(t);
  const double log_z = enumerate_logZ(t);

  EnumeratedMarginals m;
  m.node.assign(T * K, 0.0);
  m.edge.assign((T - 1) * K * K, 0.0);
  std::vector<TagId> y(T);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    decode_sequence(i, K, y);
    const double p = std::exp(scores[i] - log_z);
    for (std::size_t pos = 0; pos < T; ++pos) {
      m.node[pos * K + y[pos]] += p;
      if (pos > 0) m.edge[((pos - 1) * K + y[pos - 1]) * K + y[pos]] += p;
    }
  }
  return m;
}

double enumerate_nll(const CrfWeights& w, std::span<const EncodedSentence> batch, double l2) {
  double loss = 0.0;
  for (const auto& e : batch) {
    const TinyInstance t{w, e};
    loss += enumerate_logZ(t) - direct_score(w, e, e.tags);
  }
  double sq = 0.0;
  for (const double x : w.values()) sq += x * x;
  return loss + 0.5 * l2 * sq;
}

std::vector<double> fd_gradient(const CrfWeights& w, std::span<const EncodedSentence> batch,
                                double l2, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  CrfWeights probe = w;
  auto v = probe.values();
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double orig = v[i];
    v[i] = orig + h;
    const double plus = enumerate_nll(probe, batch, l2);
    v[i] = orig - h;
    const double minus = enumerate_nll(probe, batch, l2);
    v[i] = orig;
    g[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

TinyInstance random_instance(std::uint64_t seed, const InstanceShape& shape, bool with_gold) {
  if (shape.max_tags < 2 || shape.max_length < 1 || shape.vocab < 1) {
    throw std::invalid_argument("instance shape needs at least two tags, one position and one attribute");
  }
  Rng rng(seed);
  // One tag makes every sequence identical and the data gradient zero.
  const std::size_t K = 2 + rng.below(shape.max_tags - 1);
  const std::size_t T = 1 + rng.below(shape.max_length);
  TinyInstance t;
  t.weights = CrfWeights(shape.vocab, K);
  randomize(rng, t.weights, shape.weight_range);
  t.sentence = random_sentence(rng, T, shape.vocab, K, with_gold);
  return t;
}

std::string describe(const TinyInstance& t) {
  std::string out = "K=" + std::to_string(t.weights.num_tags()) +
                    " A=" + std::to_string(t.weights.num_attributes()) +
                    " T=" + std::to_string(t.sentence.length()) + " attrs=[";
  for (std::size_t i = 0; i < t.sentence.attributes.size(); ++i) {
    if (i) out += ',';
    out += '[';
    for (std::size_t k = 0; k < t.sentence.attributes[i].size(); ++k) {
      if (k) out += ',';
      out += std::to_string(t.sentence.attributes[i][k]);
    }
    out += ']';
  }
  out += "] gold=[";
  for (std::size_t i = 0; i < t.sentence.tags.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(t.sentence.tags[i]);
  }
  out += "] weights=[";
  const auto v = t.weights.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    append_double(out, v[i]);
  }
  out += ']';
  return out;
}

std::vector<CheckResult> run_verification(std::size_t trials, std::uint64_t seed, Fault fault) {
  constexpr double kValueTol = 1e-9;
  constexpr double kGradTol = 1e-4;
  constexpr double kStep = 1e-5;

  CheckResult logz{"log_partition", 0, 0, 0.0, kValueTol, {}};
  CheckResult best{"viterbi", 0, 0, 0.0, kValueTol, {}};
  CheckResult marg{"marginals", 0, 0, 0.0, kValueTol, {}};
  CheckResult grad{"gradient", 0, 0, 0.0, kGradTol, {}};

  Rng seeds(seed);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto t = random_instance(seeds.next());
    const CrfWeights fast = corrupt(t.weights, fault);

    {
      const double err = std::abs(log_partition(fast, t.sentence) - enumerate_logZ(t));
      record(logz, err, err <= kValueTol, t);
    }
    {
      const auto v = viterbi(fast, t.sentence);
      const auto ref = enumerate_best(t);
      const double err = std::abs(v.score - ref.score);
      const bool self_consistent = sequence_score(fast, t.sentence, v.tags) == v.score;
      record(best, err, err <= kValueTol && v.tags == ref.tags && self_consistent, t);
    }
    {
      const auto m = marginals(fast, t.sentence);
      const auto ref = enumerate_marginals(t);
      double err = 0.0;
      for (std::size_t i = 0; i < ref.node.size(); ++i) err = std::max(err, std::abs(m.node[i] - ref.node[i]));
      for (std::size_t i = 0; i < ref.edge.size(); ++i) err = std::max(err, std::abs(m.edge[i] - ref.edge[i]));
      record(marg, err, err <= kValueTol, t);
    }
    {
      // Batches of one to three sentences over the same weights; every
      // other trial also exercises the l2 term.
      Rng local(seeds.next());
      std::vector<EncodedSentence> batch{t.sentence};
      const std::size_t extra = local.below(3);
      for (std::size_t i = 0; i < extra; ++i) {
        const std::size_t T = 1 + local.below(InstanceShape{}.max_length);
        batch.push_back(random_sentence(local, T, t.weights.num_attributes(), t.weights.num_tags(), true));
      }
      const double l2 = trial % 2 == 0 ? 0.0 : local.uniform(0.01, 1.0);
      const auto analytic = nll_and_gradient(fast, batch, l2);
      const auto numeric = fd_gradient(t.weights, batch, l2, kStep);
      const double err = relative_error(analytic.gradient, numeric);
      const double loss_err = std::abs(analytic.loss - enumerate_nll(t.weights, batch, l2));
      record(grad, err, err <= kGradTol && loss_err <= 1e-8 * std::max(1.0, std::abs(analytic.loss)), t);
    }
  }
  return {logz, best, marg, grad};
}

}  // namespace mixner::oracle
