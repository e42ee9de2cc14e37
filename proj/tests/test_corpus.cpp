#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "generators.hpp"
#include "mixner/corpus.hpp"

using namespace mixner;

namespace {

Dataset with_tags(const std::vector<std::vector<std::string>>& tag_rows) {
  Dataset ds;
  for (const auto& row : tag_rows) {
    Sentence s;
    for (std::size_t i = 0; i < row.size(); ++i) s.tokens.push_back({"t" + std::to_string(i), row[i], std::nullopt});
    ds.sentences.push_back(s);
  }
  return ds;
}

}  // namespace

TEST_CASE("parse_conll reads the code-mixed example sentence") {
  const auto ds = parse_conll(fixtures::kTable1);
  REQUIRE(ds.size() == 1);
  const auto& s = ds.sentences[0];
  CHECK(s.tags() == std::vector<std::string>{"O", "B-CW", "I-CW", "I-CW"});
  CHECK(s.tokens[0].surface == "hameM");
  CHECK_FALSE(s.id.has_value());
}

TEST_CASE("parse_conll keeps file order and splits on blank lines") {
  const auto ds = parse_conll(fixtures::kTable2);
  REQUIRE(ds.size() == 3);
  CHECK(ds.sentences[0].size() == 10);
  CHECK(ds.sentences[1].size() == 7);
  CHECK(ds.sentences[1].tags() ==
        std::vector<std::string>{"O", "O", "O", "B-CW", "I-CW", "I-CW", "O"});
  CHECK(ds.sentences[2].tokens[0].surface == "AmAra");
}

TEST_CASE("parse_conll edge cases") {
  SUBCASE("empty document") { CHECK(parse_conll("").size() == 0); }
  SUBCASE("only blank lines") { CHECK(parse_conll("\n\n  \n").size() == 0); }
  SUBCASE("consecutive blank lines collapse") {
    CHECK(parse_conll("a\tO\n\n\n\nb\tO\n").size() == 2);
  }
  SUBCASE("no trailing newline") { CHECK(parse_conll("a\tO\nb\tB-X").sentences[0].size() == 2); }
  SUBCASE("CRLF line endings") {
    const auto ds = parse_conll("a\tO\r\nb\tB-X\r\n\r\nc\tO\r\n");
    REQUIRE(ds.size() == 2);
    CHECK(ds.sentences[0].tokens[1].tag == "B-X");
  }
  SUBCASE("id metadata in both spellings") {
    const auto ds = parse_conll("# id = first\na\tO\n\n# id second\nb\tO\n\n# comment\nc\tO\n");
    REQUIRE(ds.size() == 3);
    CHECK(ds.sentences[0].id == "first");
    CHECK(ds.sentences[1].id == "second");
    CHECK_FALSE(ds.sentences[2].id.has_value());
  }
  SUBCASE("a hash followed by a tab is a token") {
    const auto ds = parse_conll("#\tO\n#tag\tO\n");
    REQUIRE(ds.size() == 1);
    CHECK(ds.sentences[0].tokens[0].surface == "#");
    CHECK(ds.sentences[0].tokens[1].surface == "#tag");
  }
  SUBCASE("tag column defaults to the last column") {
    const auto ds = parse_conll(fixtures::kFourColumn);
    REQUIRE(ds.size() == 2);
    CHECK(ds.sentences[0].id == "5d3c1a2e-0b7f-4c55-9a77-1f2b3c4d5e6f\tdomain=mix");
    CHECK(ds.sentences[0].tags() == std::vector<std::string>{"O", "B-CW", "I-CW", "I-CW"});
  }
  SUBCASE("explicit columns and language id") {
    ColumnSpec cols;
    cols.token_column = 1;
    cols.tag_column = 2;
    cols.lang_column = 0;
    cols.separator = Separator::kTab;
    const auto ds = parse_conll("Hi\thameM\tO\nEn\tthis\tB-CW\n", cols);
    REQUIRE(ds.size() == 1);
    CHECK(ds.sentences[0].tokens[0].surface == "hameM");
    CHECK(ds.sentences[0].tokens[0].lang == "Hi");
    CHECK(ds.sentences[0].tokens[1].tag == "B-CW");
  }
  SUBCASE("optional tags") {
    ColumnSpec cols;
    cols.tags_required = false;
    const auto ds = parse_conll("hameM\nthis\n", cols);
    REQUIRE(ds.size() == 1);
    CHECK(ds.sentences[0].tags() == std::vector<std::string>{"O", "O"});
  }
}

TEST_CASE("parse_conll errors carry the line number") {
  SUBCASE("too few columns") {
    try {
      parse_conll("a\tO\nb\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("malformed tag, including the digit zero") {
    CHECK_THROWS_AS(parse_conll("a\tB-\n"), ParseError);
    try {
      parse_conll("x\tO\n\nwhat\tO\ncity\t0\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("invalid UTF-8") { CHECK_THROWS_AS(parse_conll("a\tO\n\xff\tO\n"), ParseError); }
  SUBCASE("tab separator does not split on spaces") {
    ColumnSpec cols;
    cols.separator = Separator::kTab;
    CHECK_THROWS_AS(parse_conll("a O\n", cols), ParseError);
  }
}

TEST_CASE("write_conll canonical form") {
  CHECK(write_conll(Dataset{}).empty());

  const auto ds = parse_conll(fixtures::kTable1);
  CHECK(write_conll(ds) == fixtures::kTable1.substr(0, fixtures::kTable1.size() - 1));

  auto two = parse_conll(fixtures::kTable2);
  two.sentences.resize(2);
  two.sentences[0].id = "row-1";
  const auto text = write_conll(two);
  CHECK(text.starts_with("# id = row-1\nsIriyala\tO\n"));
  const auto blank_lines = std::count(text.begin(), text.end(), '\n') - static_cast<long>(two.token_count()) - 1;
  CHECK(blank_lines == 1);
  CHECK(text.find("\n\n") != std::string::npos);
}

TEST_CASE("round trip: parse(write(ds)) == ds for generated datasets") {
  Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const auto ds = gen::dataset(rng, 6);
    const auto back = parse_conll(write_conll(ds));
    REQUIRE(back == ds);
    CHECK(write_conll(back) == write_conll(ds));
  }
  for (const auto text : {fixtures::kTable1, fixtures::kTable2, fixtures::kFourColumn}) {
    const auto ds = parse_conll(text);
    CHECK(parse_conll(write_conll(ds)) == ds);
  }
}

TEST_CASE("validate_iob strict mode") {
  CHECK(find_iob_violations(parse_conll(fixtures::kTable1)).empty());
  CHECK(find_iob_violations(parse_conll(fixtures::kTable2)).empty());

  const auto v = find_iob_violations(with_tags({{"O", "B-CW"}, {"O", "I-CW", "B-LOC", "I-CW"}}));
  REQUIRE(v.size() == 2);
  CHECK(v[0].sentence == 1);
  CHECK(v[0].position == 1);
  CHECK(v[1].position == 3);
}

TEST_CASE("validate_iob repair mode") {
  using Tags = std::vector<std::string>;
  CHECK(repair_iob(Tags{"O", "I-CW"}) == Tags{"O", "B-CW"});
  CHECK(repair_iob(Tags{"I-PROD", "I-CW"}) == Tags{"B-PROD", "B-CW"});
  CHECK(repair_iob(Tags{"B-CW", "I-CW", "I-CW"}) == Tags{"B-CW", "I-CW", "I-CW"});
  CHECK(repair_iob(Tags{"I-CW", "I-CW", "O", "I-CW"}) == Tags{"B-CW", "I-CW", "O", "B-CW"});
}

TEST_CASE("repair is idempotent and strict-valid on arbitrary tags") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto ds = gen::dataset(rng, 5, /*valid=*/false);
    const auto once = repair_iob(ds);
    CHECK(find_iob_violations(once).empty());
    CHECK(repair_iob(once) == once);
  }
}

TEST_CASE("induce_tagset") {
  CHECK(induce_tagset(parse_conll(fixtures::kTable1)).tags() == std::vector<std::string>{"O", "B-CW", "I-CW"});
  CHECK(induce_tagset(with_tags({{"O", "O"}})).tags() == std::vector<std::string>{"O"});
  CHECK(induce_tagset(with_tags({{"O", "I-PROD"}})).tags() ==
        std::vector<std::string>{"O", "B-PROD", "I-PROD"});
  CHECK(induce_tagset(Dataset{}).tags() == std::vector<std::string>{"O"});

  const auto tagset = induce_tagset(parse_conll(fixtures::kTable2));
  CHECK(tagset.tags() == std::vector<std::string>{"O", "B-CW", "B-PROD", "I-CW", "I-PROD"});
  CHECK(tagset.classes() == std::vector<std::string>{"CW", "PROD"});
  CHECK(tagset.find("O") == 0u);
  CHECK(tagset.find("I-PROD") == 4u);
  CHECK_FALSE(tagset.find("B-ZZZ").has_value());
}

TEST_CASE("induce_tagset is insensitive to sentence order") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto ds = gen::dataset(rng, 8);
    const auto before = induce_tagset(ds);
    rng.shuffle(ds.sentences);
    CHECK(induce_tagset(ds) == before);
  }
}

TEST_CASE("mix_datasets") {
  Rng rng(5);
  auto primary = gen::dataset(rng, 10);
  primary.source_label = "cm-train";
  auto ml_train = gen::dataset(rng, 10);
  ml_train.source_label = "ml-train";
  auto ml_dev = gen::dataset(rng, 10);
  ml_dev.source_label = "ml-dev";
  const std::vector<Dataset> aux{ml_train, ml_dev};

  SUBCASE("concatenation order without shuffle") {
    const auto mixed = mix_datasets(primary, aux, 1, false);
    REQUIRE(mixed.size() == primary.size() + ml_train.size() + ml_dev.size());
    std::size_t k = 0;
    for (const auto* ds : {&primary, &ml_train, &ml_dev}) {
      for (const auto& s : ds->sentences) {
        CHECK(mixed.sentences[k] == s);
        CHECK(mixed.sentences[k].source == ds->source_label);
        ++k;
      }
    }
  }
  SUBCASE("no auxiliaries is the identity") {
    const auto mixed = mix_datasets(primary, {}, 3, false);
    CHECK(mixed == primary);
    CHECK(write_conll(mixed) == write_conll(primary));
  }
  SUBCASE("shuffle is a seeded permutation") {
    const auto a = mix_datasets(primary, aux, 13, true);
    const auto b = mix_datasets(primary, aux, 13, true);
    CHECK(write_conll(a) == write_conll(b));
    const auto plain = mix_datasets(primary, aux, 13, false);
    auto key = [](const Sentence& s) { return s.source + "\n" + write_conll(Dataset{{s}, ""}); };
    std::vector<std::string> ka, kp;
    for (const auto& s : a.sentences) ka.push_back(key(s));
    for (const auto& s : plain.sentences) kp.push_back(key(s));
    std::sort(ka.begin(), ka.end());
    std::sort(kp.begin(), kp.end());
    CHECK(ka == kp);
  }
  SUBCASE("size additivity at shared-task scale") {
    Dataset cm, ml, mdev;
    Sentence s;
    s.tokens.push_back({"x", "O", std::nullopt});
    cm.sentences.assign(1500, s);
    ml.sentences.assign(10000, s);
    mdev.sentences.assign(500, s);
    const std::vector<Dataset> both{ml, mdev};
    CHECK(mix_datasets(cm, both, 42, true).size() == 12000);
  }
}
