#include "mixner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mixner/rng.hpp"

namespace mixner {

namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, Separator sep) {
  std::vector<std::string_view> fields;
  if (sep == Separator::kTab) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find('\t', start);
      fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

// Returns the byte offset of the first malformed sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::string_view::npos;
}

// A "#" line is metadata only before the first token of a sentence, and only
// when the hash is alone or followed by a space ("#\tO" is the token "#").
bool is_metadata(std::string_view line) {
  return !line.empty() && line[0] == '#' && (line.size() == 1 || line[1] == ' ');
}

std::optional<std::string> metadata_id(std::string_view line) {
  std::string_view body = trim(line.substr(1));
  if (body.substr(0, 2) != "id") return std::nullopt;
  body = body.substr(2);
  if (!body.empty() && body[0] != ' ' && body[0] != '\t' && body[0] != '=') return std::nullopt;
  body = trim(body);
  if (!body.empty() && body[0] == '=') body = trim(body.substr(1));
  return std::string(body);
}

}  // namespace

bool is_valid_tag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

std::string_view tag_class(std::string_view tag) {
  return tag == "O" ? std::string_view{} : tag.substr(2);
}

std::vector<std::string> Sentence::tags() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.tag);
  return out;
}

std::size_t Dataset::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

Dataset parse_conll(std::string_view text, const ColumnSpec& columns, std::string source_label) {
  if (columns.tag_column && *columns.tag_column == columns.token_column) {
    throw std::invalid_argument("token and tag columns must differ");
  }
  if (const auto bad = find_invalid_utf8(text); bad != std::string_view::npos) {
    const auto line = 1 + std::count(text.begin(), text.begin() + bad, '\n');
    throw ParseError(static_cast<std::size_t>(line), "invalid UTF-8");
  }

  std::size_t required = columns.token_column + 1;
  if (columns.tags_required) {
    required = std::max(required, columns.tag_column ? *columns.tag_column + 1
                                                     : columns.token_column + 2);
  }
  if (columns.lang_column) required = std::max(required, *columns.lang_column + 1);

  Dataset ds;
  ds.source_label = std::move(source_label);
  Sentence current;
  current.source = ds.source_label;
  auto flush = [&] {
    if (!current.tokens.empty()) ds.sentences.push_back(std::move(current));
    current = Sentence{};
    current.source = ds.source_label;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (is_blank(line)) {
      flush();
      continue;
    }
    if (current.tokens.empty() && is_metadata(line)) {
      if (auto id = metadata_id(line)) current.id = std::move(*id);
      continue;
    }

    const auto fields = split_fields(line, columns.separator);
    if (fields.size() < required) {
      throw ParseError(line_no, "expected at least " + std::to_string(required) +
                                    " columns, found " + std::to_string(fields.size()));
    }
    Token token;
    token.surface = std::string(fields[columns.token_column]);
    if (token.surface.empty()) throw ParseError(line_no, "empty token");

    std::optional<std::size_t> tag_col = columns.tag_column;
    if (!tag_col && fields.size() > columns.token_column + 1) tag_col = fields.size() - 1;
    if (tag_col && *tag_col < fields.size() && *tag_col != columns.token_column) {
      token.tag = std::string(fields[*tag_col]);
      if (!is_valid_tag(token.tag)) {
        throw ParseError(line_no, "malformed IOB tag '" + token.tag + "'");
      }
    } else {
      token.tag = "O";
    }
    if (columns.lang_column) token.lang = std::string(fields[*columns.lang_column]);
    current.tokens.push_back(std::move(token));
  }
  flush();
  return ds;
}

std::string write_conll(const Dataset& ds) {
  std::string out;
  bool first = true;
  for (const auto& s : ds.sentences) {
    if (!first) out += '\n';
    first = false;
    if (s.id) {
      out += "# id = ";
      out += *s.id;
      out += '\n';
    }
    for (const auto& t : s.tokens) {
      out += t.surface;
      out += '\t';
      out += t.tag;
      out += '\n';
    }
  }
  return out;
}

Dataset read_conll_file(const std::string& path, const ColumnSpec& columns,
                        std::string source_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_conll(buf.str(), columns, std::move(source_label));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  }
}

void write_conll_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_conll(ds);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<IobViolation> find_iob_violations(std::span<const std::string> tags,
                                              std::size_t sentence_index) {
  std::vector<IobViolation> out;
  std::string_view prev = "O";
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string_view tag = tags[i];
    if (!is_valid_tag(tag)) {
      out.push_back({sentence_index, i, "malformed tag '" + std::string(tag) + "'"});
    } else if (tag[0] == 'I') {
      if (prev == "O") {
        out.push_back({sentence_index, i, std::string(tag) + " does not continue a span"});
      } else if (tag_class(prev) != tag_class(tag)) {
        out.push_back({sentence_index, i,
                       std::string(tag) + " follows " + std::string(prev) + " of another class"});
      }
    }
    prev = is_valid_tag(tag) ? tag : std::string_view("O");
  }
  return out;
}

std::vector<IobViolation> find_iob_violations(const Dataset& ds) {
  std::vector<IobViolation> out;
  for (std::size_t s = 0; s < ds.sentences.size(); ++s) {
    const auto tags = ds.sentences[s].tags();
    auto v = find_iob_violations(tags, s);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::vector<std::string> repair_iob(std::vector<std::string> tags) {
  std::string prev = "O";
  for (auto& tag : tags) {
    if (tag.size() > 2 && tag[0] == 'I' && tag[1] == '-' &&
        (prev == "O" || tag_class(prev) != tag_class(tag))) {
      tag[0] = 'B';
    }
    prev = tag;
  }
  return tags;
}

Dataset repair_iob(Dataset ds) {
  for (auto& s : ds.sentences) {
    auto tags = repair_iob(s.tags());
    for (std::size_t i = 0; i < tags.size(); ++i) s.tokens[i].tag = std::move(tags[i]);
  }
  return ds;
}

TagSet::TagSet(std::vector<std::string> tags) {
  std::set<std::string> entity;
  for (auto& t : tags) {
    if (!is_valid_tag(t)) throw std::invalid_argument("malformed IOB tag '" + t + "'");
    if (t == "O") continue;
    entity.insert("B-" + std::string(tag_class(t)));
    entity.insert(std::move(t));
  }
  tags_.assign(1, "O");
  tags_.insert(tags_.end(), entity.begin(), entity.end());
}

std::optional<std::uint32_t> TagSet::find(std::string_view tag) const {
  if (tag == "O") return 0;
  const auto it = std::lower_bound(tags_.begin() + 1, tags_.end(), tag);
  if (it == tags_.end() || *it != tag) return std::nullopt;
  return static_cast<std::uint32_t>(it - tags_.begin());
}

std::vector<std::string> TagSet::classes() const {
  std::set<std::string> out;
  for (std::size_t i = 1; i < tags_.size(); ++i) out.insert(std::string(tag_class(tags_[i])));
  return {out.begin(), out.end()};
}

TagSet induce_tagset(std::span<const Dataset> datasets) {
  std::set<std::string> seen;
  for (const auto& ds : datasets) {
    for (const auto& s : ds.sentences) {
      for (const auto& t : s.tokens) seen.insert(t.tag);
    }
  }
  return TagSet({seen.begin(), seen.end()});
}

TagSet induce_tagset(const Dataset& ds) { return induce_tagset(std::span(&ds, 1)); }

Dataset mix_datasets(const Dataset& primary, std::span<const Dataset> auxiliaries,
                     std::uint64_t seed, bool shuffle) {
  Dataset out;
  out.source_label = primary.source_label;
  for (const auto& aux : auxiliaries) out.source_label += "+" + aux.source_label;

  auto append = [&out](const Dataset& ds) {
    for (const auto& s : ds.sentences) {
      out.sentences.push_back(s);
      if (s.source.empty()) out.sentences.back().source = ds.source_label;
    }
  };
  append(primary);
  for (const auto& aux : auxiliaries) append(aux);

  if (shuffle) Rng(seed).shuffle(out.sentences);
  return out;
}

}  // namespace mixner
