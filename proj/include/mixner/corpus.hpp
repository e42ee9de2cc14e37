#ifndef MIXNER_CORPUS_HPP
#define MIXNER_CORPUS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mixner {

/// Raised when a CoNLL document cannot be read. Carries the 1-based line.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& detail, const std::string& path = {})
      : std::runtime_error((path.empty() ? "" : path + ":") + "line " + std::to_string(line) +
                           ": " + detail),
        line_(line),
        detail_(detail) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::size_t line_;
  std::string detail_;
};

/// True for "O" and for "B-X" / "I-X" with a non-empty class X.
bool is_valid_tag(std::string_view tag);

/// Class name of a B-/I- tag, empty for "O".
std::string_view tag_class(std::string_view tag);

struct Token {
  std::string surface;
  std::string tag;
  /// Language-id column, kept only when ColumnSpec::lang_column is set.
  std::optional<std::string> lang;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::optional<std::string> id;
  std::vector<Token> tokens;
  /// source_label of the dataset this sentence came from. Provenance only:
  /// it is not serialized and does not take part in equality.
  std::string source;

  std::size_t size() const noexcept { return tokens.size(); }
  std::vector<std::string> tags() const;

  bool operator==(const Sentence& other) const {
    return id == other.id && tokens == other.tokens;
  }
};

struct Dataset {
  std::vector<Sentence> sentences;
  std::string source_label;

  std::size_t size() const noexcept { return sentences.size(); }
  std::size_t token_count() const noexcept;

  bool operator==(const Dataset& other) const { return sentences == other.sentences; }
};

enum class Separator { kTab, kWhitespace };

/// Which columns of a CoNLL line hold what. The tag column defaults to the
/// last column of each line, so "token _ _ TAG" files load unchanged.
struct ColumnSpec {
  std::size_t token_column = 0;
  std::optional<std::size_t> tag_column;  // nullopt = last column
  std::optional<std::size_t> lang_column;
  Separator separator = Separator::kWhitespace;
  /// When false, single-column lines are accepted and tagged "O".
  bool tags_required = true;
};

Dataset parse_conll(std::string_view text, const ColumnSpec& columns = {},
                    std::string source_label = {});

/// Canonical "token<TAB>tag" output with "# id = ..." lines.
std::string write_conll(const Dataset& ds);

Dataset read_conll_file(const std::string& path, const ColumnSpec& columns = {},
                        std::string source_label = {});
void write_conll_file(const std::string& path, const Dataset& ds);

struct IobViolation {
  std::size_t sentence;
  std::size_t position;
  std::string reason;

  bool operator==(const IobViolation&) const = default;
};

/// Strict IOB2 check. An empty result means the dataset is valid.
std::vector<IobViolation> find_iob_violations(const Dataset& ds);
std::vector<IobViolation> find_iob_violations(std::span<const std::string> tags,
                                              std::size_t sentence_index = 0);

/// Rewrites every I-X that does not continue a B-X/I-X span into B-X.
Dataset repair_iob(Dataset ds);
std::vector<std::string> repair_iob(std::vector<std::string> tags);

/// Closed inventory of IOB tags, "O" first and the rest in byte order.
class TagSet {
public:
  TagSet() : tags_{"O"} {}
  explicit TagSet(std::vector<std::string> tags);

  const std::vector<std::string>& tags() const noexcept { return tags_; }
  std::size_t size() const noexcept { return tags_.size(); }
  const std::string& operator[](std::size_t id) const { return tags_.at(id); }
  std::optional<std::uint32_t> find(std::string_view tag) const;
  bool contains(std::string_view tag) const { return find(tag).has_value(); }
  /// Entity class names, sorted.
  std::vector<std::string> classes() const;

  bool operator==(const TagSet&) const = default;

private:
  std::vector<std::string> tags_;
};

TagSet induce_tagset(std::span<const Dataset> datasets);
TagSet induce_tagset(const Dataset& ds);

/// Concatenates primary then auxiliaries, optionally shuffled by seed. Every
/// sentence keeps the source_label of the dataset it came from.
Dataset mix_datasets(const Dataset& primary, std::span<const Dataset> auxiliaries,
                     std::uint64_t seed, bool shuffle);

}  // namespace mixner

#endif  // MIXNER_CORPUS_HPP
