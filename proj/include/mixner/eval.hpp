#ifndef MIXNER_EVAL_HPP
#define MIXNER_EVAL_HPP

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mixner/corpus.hpp"

namespace mixner {

struct EntitySpan {
  std::string cls;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  bool operator==(const EntitySpan&) const = default;
  auto operator<=>(const EntitySpan&) const = default;
};

/// Maximal B-X I-X* runs, ordered by start. Throws std::invalid_argument on
/// a sequence that is not strict IOB2 (repair it first).
std::vector<EntitySpan> extract_entities(std::span<const std::string> tags);

/// Inverse of extract_entities for a sentence of the given length.
std::vector<std::string> spans_to_tags(std::span<const EntitySpan> spans, std::size_t length);

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold entities

  bool operator==(const ClassScore&) const = default;
};

/// Token-level confusion over B-/I- collapsed labels. Rows are gold,
/// columns predicted; labels are "O" followed by the sorted classes.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const noexcept;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalReport {
  std::map<std::string, ClassScore> per_class;
  double weighted_f1 = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;

  bool operator==(const EvalReport&) const = default;
};

/// Thrown when gold and predicted corpora differ in shape.
class ShapeMismatch : public std::runtime_error {
public:
  ShapeMismatch(std::size_t sentence, const std::string& what)
      : std::runtime_error(what), sentence_(sentence) {}
  std::size_t sentence() const noexcept { return sentence_; }

private:
  std::size_t sentence_;
};

/// Exact-match entity scores plus the token confusion matrix. Both sides
/// are IOB-repaired before spans are extracted, so a stray I-X in a
/// prediction counts as the start of an X entity.
EvalReport score_entities(const Dataset& gold, const Dataset& pred);

ConfusionMatrix token_confusion(const Dataset& gold, const Dataset& pred);

enum class ReportFormat { kText, kJson };

std::string render_report(const EvalReport& r, ReportFormat format);

/// Reads back the JSON produced by render_report.
EvalReport report_from_json(std::string_view json);

}  // namespace mixner

#endif  // MIXNER_EVAL_HPP
