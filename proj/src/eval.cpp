#include "mixner/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"

namespace mixner {

namespace {

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

void check_shapes(const Dataset& gold, const Dataset& pred) {
  const std::size_t n = std::min(gold.size(), pred.size());
  for (std::size_t s = 0; s < n; ++s) {
    if (gold.sentences[s].size() != pred.sentences[s].size()) {
      throw ShapeMismatch(s, "sentence " + std::to_string(s) + ": gold has " +
                                 std::to_string(gold.sentences[s].size()) + " tokens, prediction has " +
                                 std::to_string(pred.sentences[s].size()));
    }
  }
  if (gold.size() != pred.size()) {
    throw ShapeMismatch(n, "gold has " + std::to_string(gold.size()) +
                               " sentences, prediction has " + std::to_string(pred.size()) +
                               " (first unmatched sentence " + std::to_string(n) + ")");
  }
}

std::string collapse(std::string_view tag) {
  return tag == "O" ? std::string("O") : std::string(tag_class(tag));
}

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::vector<EntitySpan> extract_entities(std::span<const std::string> tags) {
  if (const auto v = find_iob_violations(tags); !v.empty()) {
    throw std::invalid_argument("position " + std::to_string(v.front().position) + ": " +
                                v.front().reason);
  }
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i][0] == 'B') {
      spans.push_back({std::string(tag_class(tags[i])), i, i});
    } else if (tags[i][0] == 'I') {
      spans.back().end = i;
    }
  }
  return spans;
}

std::vector<std::string> spans_to_tags(std::span<const EntitySpan> spans, std::size_t length) {
  std::vector<std::string> tags(length, "O");
  for (const auto& sp : spans) {
    if (sp.start > sp.end || sp.end >= length) throw std::out_of_range("span outside sentence");
    tags[sp.start] = "B-" + sp.cls;
    for (std::size_t i = sp.start + 1; i <= sp.end; ++i) tags[i] = "I-" + sp.cls;
  }
  return tags;
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (const auto c : row) n += c;
  }
  return n;
}

ConfusionMatrix token_confusion(const Dataset& gold, const Dataset& pred) {
  check_shapes(gold, pred);
  std::set<std::string> classes;
  for (const Dataset* ds : {&gold, &pred}) {
    for (const auto& s : ds->sentences) {
      for (const auto& t : s.tokens) {
        if (t.tag != "O") classes.insert(collapse(t.tag));
      }
    }
  }
  ConfusionMatrix cm;
  cm.labels.push_back("O");
  cm.labels.insert(cm.labels.end(), classes.begin(), classes.end());
  auto label_id = [&cm](const std::string& label) {
    if (label == "O") return std::size_t{0};
    return static_cast<std::size_t>(std::lower_bound(cm.labels.begin() + 1, cm.labels.end(), label) -
                                    cm.labels.begin());
  };
  cm.counts.assign(cm.labels.size(), std::vector<std::size_t>(cm.labels.size(), 0));
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold.sentences[s].tokens;
    const auto& p = pred.sentences[s].tokens;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ++cm.counts[label_id(collapse(g[i].tag))][label_id(collapse(p[i].tag))];
    }
  }
  return cm;
}

EvalReport score_entities(const Dataset& gold, const Dataset& pred) {
  check_shapes(gold, pred);
  std::map<std::string, Counts> counts;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto g = extract_entities(repair_iob(gold.sentences[s].tags()));
    const auto p = extract_entities(repair_iob(pred.sentences[s].tags()));
    const std::set<EntitySpan> gold_set(g.begin(), g.end());
    const std::set<EntitySpan> pred_set(p.begin(), p.end());
    for (const auto& sp : gold_set) {
      if (pred_set.contains(sp)) {
        ++counts[sp.cls].tp;
      } else {
        ++counts[sp.cls].fn;
      }
    }
    for (const auto& sp : pred_set) {
      if (!gold_set.contains(sp)) ++counts[sp.cls].fp;
    }
  }

  EvalReport r;
  Counts pooled;
  double weighted_sum = 0.0;
  double macro_sum = 0.0;
  std::size_t support_sum = 0;
  std::size_t supported_classes = 0;
  for (const auto& [cls, c] : counts) {
    ClassScore cs;
    cs.precision = ratio(c.tp, c.tp + c.fp);
    cs.recall = ratio(c.tp, c.tp + c.fn);
    cs.f1 = harmonic(cs.precision, cs.recall);
    cs.support = c.tp + c.fn;
    r.per_class.emplace(cls, cs);
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    if (cs.support > 0) {
      weighted_sum += static_cast<double>(cs.support) * cs.f1;
      macro_sum += cs.f1;
      support_sum += cs.support;
      ++supported_classes;
    }
  }

  if (pooled.tp + pooled.fp + pooled.fn == 0) {
    // Nothing to find and nothing predicted: a perfect (vacuous) result.
    r.weighted_f1 = r.micro_f1 = r.macro_f1 = 1.0;
  } else {
    r.micro_f1 = harmonic(ratio(pooled.tp, pooled.tp + pooled.fp), ratio(pooled.tp, pooled.tp + pooled.fn));
    r.weighted_f1 = support_sum == 0 ? 0.0 : weighted_sum / static_cast<double>(support_sum);
    r.macro_f1 = supported_classes == 0 ? 0.0 : macro_sum / static_cast<double>(supported_classes);
  }
  r.confusion = token_confusion(gold, pred);
  return r;
}

std::string render_report(const EvalReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::json j;
    j["per_class"] = nlohmann::json::object();
    for (const auto& [cls, cs] : r.per_class) {
      j["per_class"][cls] = {{"p", cs.precision}, {"r", cs.recall}, {"f1", cs.f1}, {"support", cs.support}};
    }
    j["weighted_f1"] = r.weighted_f1;
    j["micro_f1"] = r.micro_f1;
    j["macro_f1"] = r.macro_f1;
    j["confusion"] = {{"labels", r.confusion.labels}, {"counts", r.confusion.counts}};
    return j.dump(2) + "\n";
  }

  std::size_t name_width = 5;
  for (const auto& [cls, cs] : r.per_class) name_width = std::max(name_width, cls.size());
  name_width += 2;

  std::string out = pad_right("class", name_width) + pad_left("precision", 10) +
                    pad_left("recall", 10) + pad_left("f1", 10) + pad_left("support", 10) + "\n";
  for (const auto& [cls, cs] : r.per_class) {
    out += pad_right(cls, name_width) + pad_left(fixed4(cs.precision), 10) +
           pad_left(fixed4(cs.recall), 10) + pad_left(fixed4(cs.f1), 10) +
           pad_left(std::to_string(cs.support), 10) + "\n";
  }
  out += "\n";
  out += "weighted_f1 " + fixed4(r.weighted_f1) + "\n";
  out += "micro_f1 " + fixed4(r.micro_f1) + "\n";
  out += "macro_f1 " + fixed4(r.macro_f1) + "\n";

  const auto& cm = r.confusion;
  std::size_t cell = 9;  // "gold\pred"
  for (const auto& l : cm.labels) cell = std::max(cell, l.size());
  for (const auto& row : cm.counts) {
    for (const auto c : row) cell = std::max(cell, std::to_string(c).size());
  }
  cell += 2;
  out += "\nconfusion (rows = gold, columns = predicted)\n";
  out += pad_right("gold\\pred", cell);
  for (const auto& l : cm.labels) out += pad_left(l, cell);
  out += "\n";
  for (std::size_t g = 0; g < cm.labels.size(); ++g) {
    out += pad_right(cm.labels[g], cell);
    for (const auto c : cm.counts[g]) out += pad_left(std::to_string(c), cell);
    out += "\n";
  }
  return out;
}

EvalReport report_from_json(std::string_view json) {
  const auto j = nlohmann::json::parse(json);
  EvalReport r;
  for (const auto& [cls, v] : j.at("per_class").items()) {
    ClassScore cs;
    cs.precision = v.at("p").get<double>();
    cs.recall = v.at("r").get<double>();
    cs.f1 = v.at("f1").get<double>();
    cs.support = v.at("support").get<std::size_t>();
    r.per_class.emplace(cls, cs);
  }
  r.weighted_f1 = j.at("weighted_f1").get<double>();
  r.micro_f1 = j.at("micro_f1").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.confusion.labels = j.at("confusion").at("labels").get<std::vector<std::string>>();
  r.confusion.counts = j.at("confusion").at("counts").get<std::vector<std::vector<std::size_t>>>();
  return r;
}

}  // namespace mixner
