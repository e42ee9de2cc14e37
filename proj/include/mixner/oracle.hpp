#ifndef MIXNER_ORACLE_HPP
#define MIXNER_ORACLE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixner/crf.hpp"

// Brute-force references for the CRF. Nothing here calls into crf.cpp: every
// score is recomputed from the raw weights so the two paths stay independent.
namespace mixner::oracle {

inline constexpr std::size_t kMaxSequences = 4096;

struct TinyInstance {
  CrfWeights weights;
  EncodedSentence sentence;
};

/// Throws std::invalid_argument when K^T exceeds kMaxSequences.
double enumerate_logZ(const TinyInstance& t);

struct BestSequence {
  std::vector<TagId> tags;
  double score = 0.0;
};

/// Exact argmax over all K^T sequences. Among equal scores the winner is the
/// one viterbi() would return: smallest last tag, then smallest tag before
/// it, and so on backwards.
BestSequence enumerate_best(const TinyInstance& t);

struct EnumeratedMarginals {
  std::vector<double> node;  // [t * K + k]
  std::vector<double> edge;  // [((t - 1) * K + j) * K + k]
};

EnumeratedMarginals enumerate_marginals(const TinyInstance& t);

/// Regularized negative log-likelihood of the batch computed by enumeration.
double enumerate_nll(const CrfWeights& w, std::span<const EncodedSentence> batch, double l2);

/// Central differences of enumerate_nll, one coordinate at a time.
std::vector<double> fd_gradient(const CrfWeights& w, std::span<const EncodedSentence> batch,
                                double l2, double h);

/// |a - b|_2 / max(|a|_2, |b|_2), or 0 when both are zero.
double relative_error(std::span<const double> a, std::span<const double> b);

struct InstanceShape {
  std::size_t max_length = 6;
  std::size_t max_tags = 4;
  std::size_t vocab = 5;
  double weight_range = 2.0;
};

/// Random weights in [-range, range] and a random sentence over 2..max_tags
/// tags; with_gold fills in a random gold tag sequence too.
TinyInstance random_instance(std::uint64_t seed, const InstanceShape& shape = {},
                             bool with_gold = true);

/// One-line description of an instance, enough to rebuild it by hand.
std::string describe(const TinyInstance& t);

enum class Fault { kNone, kTransitionSign };

struct CheckResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double worst = 0.0;       // largest observed error
  double tolerance = 0.0;
  std::string first_failure;  // describe() of the first failing instance
};

/// Runs the oracle comparisons (logZ, Viterbi, marginals, gradient) on
/// `trials` random instances. With a fault, the fast path sees corrupted
/// weights while the oracle sees the originals.
std::vector<CheckResult> run_verification(std::size_t trials, std::uint64_t seed,
                                          Fault fault = Fault::kNone);

}  // namespace mixner::oracle

#endif  // MIXNER_ORACLE_HPP
