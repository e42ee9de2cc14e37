#ifndef MIXNER_SYNTHETIC_HPP
#define MIXNER_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mixner/corpus.hpp"

namespace mixner {

/// Generator settings for a corpus whose entity classes draw their words
/// from disjoint lexicons. Entities never touch each other, so the gold
/// tags are a function of the words and the window around them.
struct SyntheticSpec {
  std::vector<std::string> classes{"CW", "LOC", "PROD"};
  std::size_t words_per_class = 40;
  std::size_t filler_words = 120;
  std::size_t min_length = 4;
  std::size_t max_length = 14;
  std::size_t max_entity_length = 3;
  double entity_rate = 0.25;  // chance of opening an entity at each free slot
};

/// Deterministic for a given (spec, sentences, seed). Sentence ids are
/// "<label>-<n>".
Dataset generate_separable_corpus(const SyntheticSpec& spec, std::size_t sentences,
                                  std::uint64_t seed, const std::string& label);

}  // namespace mixner

#endif  // MIXNER_SYNTHETIC_HPP
