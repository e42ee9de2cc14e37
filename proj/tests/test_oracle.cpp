#include <cmath>

#include "doctest.h"
#include "mixner/oracle.hpp"

using namespace mixner;
using namespace mixner::oracle;

namespace {

TinyInstance zero_instance(std::size_t K, std::size_t T) {
  TinyInstance t;
  t.weights = CrfWeights(1, K);
  t.sentence.attributes.assign(T, {0});
  return t;
}

}  // namespace

TEST_CASE("enumerate_logZ") {
  CHECK(enumerate_logZ(zero_instance(4, 3)) == doctest::Approx(3.0 * std::log(4.0)).epsilon(1e-14));

  // One tag: one sequence, so logZ is its score.
  TinyInstance single = zero_instance(1, 4);
  single.weights.emission(0, 0) = 0.7;
  single.weights.transition(0, 0) = -0.2;
  single.weights.start(0) = 0.1;
  single.weights.end(0) = 0.3;
  CHECK(enumerate_logZ(single) == doctest::Approx(4 * 0.7 - 3 * 0.2 + 0.1 + 0.3).epsilon(1e-14));
  CHECK(enumerate_logZ(single) == doctest::Approx(sequence_score(single.weights, single.sentence,
                                                                 std::vector<TagId>{0, 0, 0, 0}))
                                      .epsilon(1e-14));

  CHECK_THROWS_AS(enumerate_logZ(zero_instance(4, 7)), std::invalid_argument);
  CHECK_NOTHROW(enumerate_logZ(zero_instance(4, 6)));
}

TEST_CASE("enumerate_best") {
  CHECK(enumerate_best(zero_instance(3, 4)).tags == std::vector<TagId>{0, 0, 0, 0});

  // Tags {O, B-CW}; "dig" -> B-CW weight 2, "me" has no weight.
  TinyInstance dig;
  dig.weights = CrfWeights(2, 2);
  dig.weights.emission(0, 1) = 2.0;
  dig.sentence.attributes = {{0}, {1}};
  const auto best = enumerate_best(dig);
  CHECK(best.tags == std::vector<TagId>{1, 0});
  CHECK(best.score == 2.0);
}

TEST_CASE("oracle agrees with the fast path on 200 random instances") {
  for (std::uint64_t seed = 1000; seed < 1200; ++seed) {
    const auto t = random_instance(seed);
    CHECK(std::abs(log_partition(t.weights, t.sentence) - enumerate_logZ(t)) <= 1e-9);
    const auto v = viterbi(t.weights, t.sentence);
    const auto b = enumerate_best(t);
    CHECK(v.tags == b.tags);
    CHECK(std::abs(v.score - b.score) <= 1e-9);
    const auto m = marginals(t.weights, t.sentence);
    const auto em = enumerate_marginals(t);
    for (std::size_t i = 0; i < em.node.size(); ++i) CHECK(std::abs(m.node[i] - em.node[i]) <= 1e-9);
    for (std::size_t i = 0; i < em.edge.size(); ++i) CHECK(std::abs(m.edge[i] - em.edge[i]) <= 1e-9);
  }
}

TEST_CASE("tie-break agrees on fully tied instances") {
  // Integer weights make exact ties common.
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto t = random_instance(seed);
    for (auto& x : t.weights.values()) x = std::round(x);
    CHECK(viterbi(t.weights, t.sentence).tags == enumerate_best(t).tags);
  }
}

TEST_CASE("fd_gradient") {
  SUBCASE("l2 only") {
    // No attributes, zero chain weights: the emission block is pure l2 * w.
    CrfWeights w(2, 3);
    w.emission(0, 0) = 1.5;
    w.emission(1, 2) = -0.75;
    EncodedSentence e;
    e.attributes = {{}, {}};
    e.tags = {0, 2};
    const std::vector<EncodedSentence> batch{e};
    const auto g = fd_gradient(w, batch, 0.4, 1e-5);
    CHECK(g[0] == doctest::Approx(0.4 * 1.5).epsilon(1e-7));
    CHECK(g[1 * 3 + 2] == doctest::Approx(0.4 * -0.75).epsilon(1e-7));
  }
  SUBCASE("error shrinks quadratically with the step") {
    const auto t = random_instance(31337);
    const std::vector<EncodedSentence> batch{t.sentence};
    const auto exact = nll_and_gradient(t.weights, batch, 0.1).gradient;
    const double coarse = relative_error(exact, fd_gradient(t.weights, batch, 0.1, 2e-2));
    const double fine = relative_error(exact, fd_gradient(t.weights, batch, 0.1, 1e-2));
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.15));
  }
  CHECK_THROWS_AS(fd_gradient(CrfWeights(1, 1), {}, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("relative_error") {
  const std::vector<double> a{3.0, 4.0};
  const std::vector<double> b{3.0, 4.0 + 5e-5};
  CHECK(relative_error(a, a) == 0.0);
  CHECK(relative_error(a, b) == doctest::Approx(1e-5).epsilon(1e-6));
  CHECK(relative_error(std::vector<double>{0.0}, std::vector<double>{0.0}) == 0.0);
}

TEST_CASE("run_verification") {
  const auto ok = run_verification(20, 7);
  REQUIRE(ok.size() == 4);
  for (const auto& r : ok) {
    CHECK(r.trials == 20);
    CHECK(r.failures == 0);
  }
  const auto bad = run_verification(20, 7, Fault::kTransitionSign);
  std::size_t failures = 0;
  for (const auto& r : bad) failures += r.failures;
  CHECK(failures > 0);
  CHECK(bad[0].first_failure.find("weights=[") != std::string::npos);
}
