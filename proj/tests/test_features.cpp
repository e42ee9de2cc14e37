#include "doctest.h"
#include "fixtures.hpp"
#include "generators.hpp"
#include "mixner/features.hpp"

using namespace mixner;
using Strings = std::vector<std::string>;

TEST_CASE("extract_attributes default template") {
  const auto s = parse_conll(fixtures::kTable1).sentences[0];
  CHECK(extract_attributes(s, 1) == Strings{"b", "w0=this", "w-1=hameM", "w+1=magic"});
  CHECK(extract_attributes(s, 0) == Strings{"b", "w0=hameM", "w-1=<BOS>", "w+1=this"});
  CHECK(extract_attributes(s, 3) == Strings{"b", "w0=moment", "w-1=magic", "w+1=<EOS>"});

  const auto row2 = parse_conll(fixtures::kTable2).sentences[1];
  CHECK(extract_attributes(row2, 3) == Strings{"b", "w0=dig", "w-1=is", "w+1=me"});

  const auto single = parse_conll("kawa?\tO\n").sentences[0];
  CHECK(extract_attributes(single, 0) == Strings{"b", "w0=kawa?", "w-1=<BOS>", "w+1=<EOS>"});

  CHECK_THROWS_AS(extract_attributes(s, 4), std::out_of_range);
}

TEST_CASE("default template emits exactly four attributes per position") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    for (const auto& s : gen::dataset(rng, 4).sentences) {
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(extract_attributes(s, i).size() == 4);
    }
  }
}

TEST_CASE("optional template attributes") {
  const auto s = parse_conll("The\tO\nकिताब\tB-CW\nOK\tO\n").sentences[0];
  TemplateConfig tmpl;
  tmpl.lowercase = true;
  CHECK(extract_attributes(s, 0, tmpl) ==
        Strings{"b", "w0=The", "w-1=<BOS>", "w+1=किताब", "l0=the", "l-1=<BOS>", "l+1=किताब"});

  tmpl = {};
  tmpl.affix_length = 3;
  // Affixes count code points, not bytes.
  const auto attrs = extract_attributes(s, 1, tmpl);
  CHECK(attrs == Strings{"b", "w0=किताब", "w-1=The", "w+1=OK", "p1=क", "s1=ब", "p2=कि", "s2=ाब",
                         "p3=कित", "s3=ताब"});
  // Short words stop at their own length.
  CHECK(extract_attributes(s, 2, tmpl).size() == 4 + 4);
}

TEST_CASE("build_index on the example sentence") {
  const auto ds = parse_conll(fixtures::kTable1);
  const auto tags = induce_tagset(ds);
  const auto index = build_index(ds, tags);
  // 1 bias + 4 current + 4 previous (incl. <BOS>) + 4 next (incl. <EOS>).
  CHECK(index.num_attributes() == 13);
  CHECK(index.frozen());
  CHECK(index.find("b") == 0u);
  CHECK(index.find("w-1=<BOS>").has_value());
  CHECK(index.find("w+1=<EOS>").has_value());
  CHECK(index.find_tag("O") == 0u);
  CHECK(index.find_tag("B-CW") == 1u);
  CHECK(index.find_tag("I-CW") == 2u);
  CHECK_THROWS_AS(FeatureIndex(index).add("new"), std::logic_error);
  CHECK_FALSE(index.find("w0=unknown").has_value());
}

TEST_CASE("build_index min_count pruning") {
  // Every token unique across three sentences: only the bias and the
  // boundary markers recur.
  const auto ds = parse_conll("a\tO\nb\tO\n\nc\tO\nd\tO\n\ne\tO\nf\tO\n");
  const auto index = build_index(ds, induce_tagset(ds), {}, 2);
  CHECK(index.attributes() == Strings{"b", "w-1=<BOS>", "w+1=<EOS>"});
  CHECK_THROWS_AS(build_index(Dataset{}, TagSet{}), std::invalid_argument);
}

TEST_CASE("encode_dataset") {
  const auto train = parse_conll(fixtures::kTable1);
  const auto index = build_index(train, induce_tagset(train));

  SUBCASE("self-encoding keeps every attribute") {
    const auto enc = encode_dataset(train, index, {});
    REQUIRE(enc.size() == 1);
    CHECK(enc[0].length() == 4);
    CHECK(enc[0].tags == std::vector<TagId>{0, 1, 2, 2});
    for (const auto& attrs : enc[0].attributes) CHECK(attrs.size() == 4);
  }
  SUBCASE("out-of-vocabulary token keeps bias and known context") {
    const auto oov = parse_conll("hameM\tO\nzzz\tO\nmagic\tO\n");
    const auto enc = encode_dataset(oov, index, {});
    const auto& mid = enc[0].attributes[1];
    // "b" survives; "w-1=hameM" and "w+1=magic" are known, "w0=zzz" is not.
    CHECK(mid == std::vector<AttributeId>{*index.find("b"), *index.find("w-1=hameM"), *index.find("w+1=magic")});
  }
  SUBCASE("unknown gold tag is an error naming the position") {
    const auto bad = parse_conll("hameM\tO\n\nthis\tO\nmagic\tB-ZZZ\n");
    try {
      encode_dataset(bad, index, {});
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("sentence 1, position 1") != std::string::npos);
    }
  }
  SUBCASE("encoding is deterministic") {
    CHECK(encode_dataset(train, index, {}) == encode_dataset(train, index, {}));
  }
}
