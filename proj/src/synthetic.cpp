#include "mixner/synthetic.hpp"

#include <stdexcept>

#include "mixner/rng.hpp"

namespace mixner {

namespace {

std::string lexicon_word(const std::string& prefix, std::size_t i) {
  return prefix + std::to_string(i);
}

}  // namespace

Dataset generate_separable_corpus(const SyntheticSpec& spec, std::size_t sentences,
                                  std::uint64_t seed, const std::string& label) {
  if (spec.min_length == 0 || spec.max_length < spec.min_length || spec.max_entity_length == 0 ||
      spec.words_per_class == 0 || spec.filler_words == 0) {
    throw std::invalid_argument("degenerate synthetic corpus spec");
  }
  Rng rng(seed);
  Dataset ds;
  ds.source_label = label;
  for (std::size_t n = 0; n < sentences; ++n) {
    Sentence s;
    s.id = label + "-" + std::to_string(n);
    s.source = label;
    const std::size_t length = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
    while (s.tokens.size() < length) {
      const std::size_t room = length - s.tokens.size();
      const bool after_entity = !s.tokens.empty() && s.tokens.back().tag != "O";
      if (!after_entity && !spec.classes.empty() && rng.uniform(0.0, 1.0) < spec.entity_rate) {
        const auto& cls = spec.classes[rng.below(spec.classes.size())];
        const std::size_t span = 1 + rng.below(std::min(room, spec.max_entity_length));
        const std::string prefix = "x" + cls + "_";
        for (std::size_t i = 0; i < span; ++i) {
          s.tokens.push_back({lexicon_word(prefix, rng.below(spec.words_per_class)),
                              (i == 0 ? "B-" : "I-") + cls, std::nullopt});
        }
      } else {
        s.tokens.push_back({lexicon_word("w", rng.below(spec.filler_words)), "O", std::nullopt});
      }
    }
    ds.sentences.push_back(std::move(s));
  }
  return ds;
}

}  // namespace mixner
