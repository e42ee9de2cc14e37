#ifndef MIXNER_FEATURES_HPP
#define MIXNER_FEATURES_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mixner/corpus.hpp"

namespace mixner {

/// Window template over the previous, current and next word. Neighbor tags
/// are not attributes; the CRF transition weights carry that dependence.
struct TemplateConfig {
  /// Adds ASCII-lowercased copies of the three window words ("l0=", "l-1=", "l+1=").
  bool lowercase = false;
  /// Adds code-point prefixes/suffixes of the current word up to this length (0..3).
  int affix_length = 0;

  bool operator==(const TemplateConfig&) const = default;
};

inline constexpr std::string_view kBos = "<BOS>";
inline constexpr std::string_view kEos = "<EOS>";

/// Attribute strings for position i, "b" first. Throws std::out_of_range
/// when i is not a position of s.
std::vector<std::string> extract_attributes(const Sentence& s, std::size_t i,
                                            const TemplateConfig& tmpl = {});

using AttributeId = std::uint32_t;
using TagId = std::uint32_t;

/// Dense ids for attribute strings and tags. Attribute ids are assigned in
/// first-occurrence order; tag ids follow TagSet order.
class FeatureIndex {
public:
  FeatureIndex() = default;
  explicit FeatureIndex(TagSet tags) : tags_(std::move(tags)) {}

  /// Allocates the next id for a new attribute. Throws once frozen.
  AttributeId add(std::string_view attribute);
  std::optional<AttributeId> find(std::string_view attribute) const;
  const std::string& attribute(AttributeId id) const { return attributes_.at(id); }
  std::size_t num_attributes() const noexcept { return attributes_.size(); }
  const std::vector<std::string>& attributes() const noexcept { return attributes_; }

  const TagSet& tags() const noexcept { return tags_; }
  std::size_t num_tags() const noexcept { return tags_.size(); }
  std::optional<TagId> find_tag(std::string_view tag) const { return tags_.find(tag); }

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }

  bool operator==(const FeatureIndex& other) const {
    return tags_ == other.tags_ && attributes_ == other.attributes_;
  }

private:
  TagSet tags_;
  std::vector<std::string> attributes_;
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, AttributeId, StringHash, std::equal_to<>> ids_;
  bool frozen_ = false;
};

struct EncodedSentence {
  std::vector<std::vector<AttributeId>> attributes;
  /// Gold tag ids; empty when the sentence was encoded for decoding only.
  std::vector<TagId> tags;

  std::size_t length() const noexcept { return attributes.size(); }

  bool operator==(const EncodedSentence&) const = default;
};

/// Indexes every attribute seen at least min_count times in train, then
/// freezes. Throws std::invalid_argument on an empty training set.
FeatureIndex build_index(const Dataset& train, const TagSet& tagset,
                         const TemplateConfig& tmpl = {}, std::size_t min_count = 1);

/// Attributes only. Unknown attributes are dropped.
EncodedSentence encode_sentence(const Sentence& s, const FeatureIndex& index,
                                const TemplateConfig& tmpl);

/// Attributes and gold tags. Throws std::invalid_argument naming the
/// sentence and position of a gold tag the index does not know.
std::vector<EncodedSentence> encode_dataset(const Dataset& ds, const FeatureIndex& index,
                                            const TemplateConfig& tmpl);

}  // namespace mixner

#endif  // MIXNER_FEATURES_HPP
