#include "mixner/features.hpp"

#include <stdexcept>

namespace mixner {

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Byte offsets of each code point start, plus the end offset.
std::vector<std::size_t> codepoint_bounds(std::string_view s) {
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) bounds.push_back(i);
  }
  bounds.push_back(s.size());
  return bounds;
}

}  // namespace

std::vector<std::string> extract_attributes(const Sentence& s, std::size_t i,
                                            const TemplateConfig& tmpl) {
  if (i >= s.size()) {
    throw std::out_of_range("position " + std::to_string(i) + " outside sentence of length " +
                            std::to_string(s.size()));
  }
  const std::string_view cur = s.tokens[i].surface;
  const std::string_view prev = i == 0 ? kBos : std::string_view(s.tokens[i - 1].surface);
  const std::string_view next = i + 1 == s.size() ? kEos : std::string_view(s.tokens[i + 1].surface);

  std::vector<std::string> out;
  out.reserve(4 + (tmpl.lowercase ? 3 : 0) + 2 * static_cast<std::size_t>(tmpl.affix_length));
  out.emplace_back("b");
  out.push_back("w0=" + std::string(cur));
  out.push_back("w-1=" + std::string(prev));
  out.push_back("w+1=" + std::string(next));

  if (tmpl.lowercase) {
    // Boundary markers are not words; keep them as-is.
    out.push_back("l0=" + ascii_lower(cur));
    out.push_back("l-1=" + (i == 0 ? std::string(kBos) : ascii_lower(prev)));
    out.push_back("l+1=" + (i + 1 == s.size() ? std::string(kEos) : ascii_lower(next)));
  }

  if (tmpl.affix_length > 0) {
    const auto bounds = codepoint_bounds(cur);
    const std::size_t chars = bounds.size() - 1;
    const std::size_t max_len = std::min<std::size_t>(chars, static_cast<std::size_t>(tmpl.affix_length));
    for (std::size_t n = 1; n <= max_len; ++n) {
      out.push_back("p" + std::to_string(n) + "=" + std::string(cur.substr(0, bounds[n])));
      out.push_back("s" + std::to_string(n) + "=" + std::string(cur.substr(bounds[chars - n])));
    }
  }
  return out;
}

AttributeId FeatureIndex::add(std::string_view attribute) {
  if (auto id = find(attribute)) return *id;
  if (frozen_) throw std::logic_error("feature index is frozen");
  const auto id = static_cast<AttributeId>(attributes_.size());
  attributes_.emplace_back(attribute);
  ids_.emplace(attributes_.back(), id);
  return id;
}

std::optional<AttributeId> FeatureIndex::find(std::string_view attribute) const {
  const auto it = ids_.find(attribute);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

FeatureIndex build_index(const Dataset& train, const TagSet& tagset, const TemplateConfig& tmpl,
                         std::size_t min_count) {
  if (train.sentences.empty()) throw std::invalid_argument("empty training set");
  if (tmpl.affix_length < 0 || tmpl.affix_length > 3) {
    throw std::invalid_argument("affix length must be in [0, 3]");
  }

  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& s : train.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (auto& a : extract_attributes(s, i, tmpl)) {
        auto [it, inserted] = counts.try_emplace(a, 0);
        if (inserted) order.push_back(a);
        ++it->second;
      }
    }
  }

  FeatureIndex index(tagset);
  for (const auto& a : order) {
    if (counts[a] >= min_count) index.add(a);
  }
  index.freeze();
  return index;
}

EncodedSentence encode_sentence(const Sentence& s, const FeatureIndex& index,
                                const TemplateConfig& tmpl) {
  EncodedSentence out;
  out.attributes.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const auto& a : extract_attributes(s, i, tmpl)) {
      if (auto id = index.find(a)) out.attributes[i].push_back(*id);
    }
  }
  return out;
}

std::vector<EncodedSentence> encode_dataset(const Dataset& ds, const FeatureIndex& index,
                                            const TemplateConfig& tmpl) {
  std::vector<EncodedSentence> out;
  out.reserve(ds.size());
  for (std::size_t si = 0; si < ds.size(); ++si) {
    const auto& s = ds.sentences[si];
    auto enc = encode_sentence(s, index, tmpl);
    enc.tags.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto tag = index.find_tag(s.tokens[i].tag);
      if (!tag) {
        throw std::invalid_argument("sentence " + std::to_string(si) + ", position " +
                                    std::to_string(i) + ": tag '" + s.tokens[i].tag +
                                    "' is not in the tag set");
      }
      enc.tags.push_back(*tag);
    }
    out.push_back(std::move(enc));
  }
  return out;
}

}  // namespace mixner
