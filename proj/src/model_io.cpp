// Text model format:
//
//   MIXNER-CRF v1
//   [template]
//   lowercase <0|1>
//   affix <0..3>
//   [tags] <K>
//   <one tag per line>
//   [attributes] <A>
//   <one attribute per line>
//   [start]
//   <K values, tab separated>
//   [end]
//   <K values>
//   [transitions]
//   <K rows of K values, row = from-tag>
//   [emissions]
//   <A rows of K values, row = attribute>
//
// Values use the shortest decimal form that reads back to the same double.

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "mixner/crf.hpp"

namespace mixner {

namespace {

constexpr std::string_view kHeader = "MIXNER-CRF v1";
constexpr std::string_view kMagic = "MIXNER-CRF ";

void append_double(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

void append_row(std::string& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += '\t';
    append_double(out, row[i]);
  }
  out += '\n';
}

class Reader {
public:
  explicit Reader(std::string_view text) : text_(text) {}

  // Next line of the given section; throws naming the section when the
  // file ends early.
  std::string_view line(std::string_view section) {
    if (pos_ >= text_.size()) throw std::runtime_error("truncated model file in section " + std::string(section));
    const auto nl = text_.find('\n', pos_);
    std::string_view l = text_.substr(pos_, nl == std::string_view::npos ? nl : nl - pos_);
    pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    return l;
  }

  // Section header "[name]" or "[name] <count>"; returns the count or 0.
  std::size_t section(std::string_view name, bool counted) {
    const std::string open = "[" + std::string(name) + "]";
    const auto l = line(name);
    if (l.substr(0, open.size()) != open) {
      throw std::runtime_error("expected section " + open + ", found '" + std::string(l) + "'");
    }
    if (!counted) return 0;
    const auto rest = l.substr(open.size());
    if (rest.empty() || rest[0] != ' ') throw std::runtime_error("section " + open + " is missing its count");
    return parse_size(rest.substr(1), name);
  }

  std::vector<double> row(std::string_view section, std::size_t width) {
    const auto l = line(section);
    std::vector<double> out;
    out.reserve(width);
    const char* p = l.data();
    const char* end = l.data() + l.size();
    while (p < end) {
      double x = 0.0;
      const auto res = std::from_chars(p, end, x);
      if (res.ec != std::errc{}) throw std::runtime_error("malformed number in section " + std::string(section));
      out.push_back(x);
      p = res.ptr;
      if (p < end) {
        if (*p != '\t') throw std::runtime_error("malformed row in section " + std::string(section));
        ++p;
      }
    }
    if (out.size() != width) {
      throw std::runtime_error("section " + std::string(section) + ": expected " + std::to_string(width) +
                               " values, found " + std::to_string(out.size()));
    }
    return out;
  }

  static std::size_t parse_size(std::string_view s, std::string_view section) {
    std::size_t n = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw std::runtime_error("malformed count in section " + std::string(section));
    }
    return n;
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const CrfModel& m) {
  const auto& w = m.weights;
  const std::size_t K = w.num_tags();
  const std::size_t A = w.num_attributes();
  if (K != m.index.num_tags() || A != m.index.num_attributes()) {
    throw std::logic_error("weights do not match the feature index");
  }

  std::string out;
  out += kHeader;
  out += '\n';
  out += "[template]\n";
  out += "lowercase " + std::to_string(m.tmpl.lowercase ? 1 : 0) + "\n";
  out += "affix " + std::to_string(m.tmpl.affix_length) + "\n";
  out += "[tags] " + std::to_string(K) + "\n";
  for (const auto& t : m.tags().tags()) out += t + "\n";
  out += "[attributes] " + std::to_string(A) + "\n";
  for (const auto& a : m.index.attributes()) out += a + "\n";

  const auto v = w.values();
  out += "[start]\n";
  append_row(out, v.subspan(w.start_offset(), K));
  out += "[end]\n";
  append_row(out, v.subspan(w.end_offset(), K));
  out += "[transitions]\n";
  for (std::size_t j = 0; j < K; ++j) append_row(out, v.subspan(w.transition_offset() + j * K, K));
  out += "[emissions]\n";
  for (std::size_t a = 0; a < A; ++a) append_row(out, v.subspan(a * K, K));
  return out;
}

CrfModel deserialize_model(std::string_view text) {
  Reader in(text);
  const auto header = in.line("header");
  if (header.substr(0, kMagic.size()) != kMagic) throw std::runtime_error("not a MIXNER-CRF model file");
  if (header != kHeader) throw std::runtime_error("unsupported version '" + std::string(header.substr(kMagic.size())) + "'");

  TemplateConfig tmpl;
  in.section("template", false);
  const auto lower = in.line("template");
  if (lower == "lowercase 1") {
    tmpl.lowercase = true;
  } else if (lower != "lowercase 0") {
    throw std::runtime_error("malformed lowercase flag in section template");
  }
  const auto affix = in.line("template");
  if (affix.substr(0, 6) != "affix ") throw std::runtime_error("malformed affix length in section template");
  tmpl.affix_length = static_cast<int>(Reader::parse_size(affix.substr(6), "template"));
  if (tmpl.affix_length > 3) throw std::runtime_error("affix length out of range in section template");

  const std::size_t K = in.section("tags", true);
  std::vector<std::string> tags;
  for (std::size_t k = 0; k < K; ++k) tags.emplace_back(in.line("tags"));
  TagSet tagset(tags);
  if (tagset.tags() != tags) throw std::runtime_error("tags section is not a canonical tag set");

  const std::size_t A = in.section("attributes", true);
  FeatureIndex index(std::move(tagset));
  for (std::size_t a = 0; a < A; ++a) {
    const auto attr = in.line("attributes");
    if (index.find(attr)) throw std::runtime_error("duplicate attribute in section attributes");
    index.add(attr);
  }
  index.freeze();

  CrfModel m = CrfModel::zeros(std::move(index), tmpl);
  auto& w = m.weights;
  auto v = w.values();
  auto copy_row = [&v](std::size_t offset, const std::vector<double>& row) {
    std::copy(row.begin(), row.end(), v.begin() + static_cast<std::ptrdiff_t>(offset));
  };
  in.section("start", false);
  copy_row(w.start_offset(), in.row("start", K));
  in.section("end", false);
  copy_row(w.end_offset(), in.row("end", K));
  in.section("transitions", false);
  for (std::size_t j = 0; j < K; ++j) copy_row(w.transition_offset() + j * K, in.row("transitions", K));
  in.section("emissions", false);
  for (std::size_t a = 0; a < A; ++a) copy_row(a * K, in.row("emissions", K));

  for (const double x : v) {
    if (!std::isfinite(x)) throw std::runtime_error("non-finite weight in model file");
  }
  return m;
}

void save_model(const CrfModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_model(m);
  if (!out) throw std::runtime_error("write failed: " + path);
}

CrfModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace mixner
