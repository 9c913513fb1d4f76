#include <gtest/gtest.h>

#include <cmath>

#include "gid/distributions.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace gid {
namespace {

using testing::uniform3;
using testing::xor_gate;

JointTable hand_built() {
  return JointTable::from_entries({"X1", "X2"}, {2, 2},
                                  {{{0, 0}, 0.5}, {{0, 1}, 0.25}, {{1, 1}, 0.25}});
}

JointTable deterministic3() {
  return JointTable::from_entries({"A", "B", "C"}, {2, 2, 2}, {{{1, 0, 1}, 1.0}});
}

TEST(JointTable, RejectsNegativeAndUnnormalized) {
  EXPECT_THROW(JointTable({"A"}, {2}, {1.5, -0.5}), Error);
  EXPECT_THROW(JointTable({"A"}, {2}, {0.5, 0.4}), Error);
  EXPECT_THROW(JointTable({"A", "B"}, {2}, {0.5, 0.5}), Error);
  EXPECT_THROW(JointTable({"A", "A"}, {2, 2}, {0.25, 0.25, 0.25, 0.25}), Error);
  EXPECT_THROW(JointTable({"A"}, {0}, {}), Error);
}

TEST(JointTable, RenormalizesWithinLoadTolerance) {
  const JointTable t({"A"}, {2}, {0.5, 0.5000005});
  EXPECT_NEAR(t.probability(0) + t.probability(1), 1.0, 1e-15);
  EXPECT_LT(t.probability(0), 0.5);
}

TEST(JointTable, SparseEntries) {
  EXPECT_THROW(JointTable::from_entries({"A"}, {2}, {{{0}, 0.5}, {{0}, 0.5}}), Error);
  EXPECT_THROW(JointTable::from_entries({"A"}, {2}, {{{2}, 1.0}}), Error);
  EXPECT_THROW(JointTable::from_entries({"A"}, {2}, {{{0, 0}, 1.0}}), Error);
  const JointTable t = hand_built();
  EXPECT_EQ(t.probability(State{1, 0}), 0.0);
  EXPECT_EQ(t.support().size(), 3u);
}

TEST(JointTable, EncodeDecodeIsLexicographic) {
  const JointTable t({"A", "B"}, {2, 3}, std::vector<double>(6, 1.0 / 6));
  for (std::size_t i = 0; i < t.num_states(); ++i) EXPECT_EQ(t.encode(t.decode(i)), i);
  EXPECT_EQ(t.decode(4), (State{1, 1}));
}

TEST(Marginalize, Examples) {
  const JointTable x1 = marginalize(xor_gate(), Source::of({0}));
  ASSERT_EQ(x1.num_variables(), 1u);
  EXPECT_EQ(x1.names()[0], "X1");
  EXPECT_DOUBLE_EQ(x1.probability(0), 0.5);
  EXPECT_DOUBLE_EQ(x1.probability(1), 0.5);

  const JointTable all = marginalize(xor_gate(), Source::all(3));
  EXPECT_EQ(all.probabilities(), xor_gate().probabilities());

  const JointTable m = marginalize(hand_built(), Source::of({0}));
  EXPECT_DOUBLE_EQ(m.probability(0), 0.75);
  EXPECT_DOUBLE_EQ(m.probability(1), 0.25);
}

TEST(Marginalize, Errors) {
  EXPECT_THROW(marginalize(xor_gate(), Source()), Error);
  EXPECT_THROW(marginalize(xor_gate(), Source::of({3})), Error);
}

TEST(Marginalize, NestedEqualsIntersection) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const JointTable p = testing::random_dist(4, seed);
    // {0,1,3} then its first two coordinates {0,1}
    const JointTable twice = marginalize(marginalize(p, Source::of({0, 1, 3})),
                                         Source::of({0, 1}));
    const JointTable once = marginalize(p, Source::of({0, 1}));
    ASSERT_EQ(twice.num_states(), once.num_states());
    for (std::size_t i = 0; i < once.num_states(); ++i) {
      EXPECT_NEAR(twice.probability(i), once.probability(i), 1e-12);
    }
  }
}

TEST(ProductOfMarginals, Examples) {
  const JointTable prod = product_of_marginals(xor_gate());
  for (double p : prod.probabilities()) EXPECT_DOUBLE_EQ(p, 0.125);

  const JointTable copy = JointTable::from_entries({"A", "B"}, {2, 2},
                                                   {{{0, 0}, 0.5}, {{1, 1}, 0.5}});
  const JointTable independent = product_of_marginals(copy);
  for (double p : independent.probabilities()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(ProductOfMarginals, IdempotentAndEntropyIncreasing) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const JointTable p = testing::random_dist(3, seed);
    const JointTable once = product_of_marginals(p);
    const JointTable twice = product_of_marginals(once);
    for (std::size_t i = 0; i < once.num_states(); ++i) {
      EXPECT_NEAR(once.probability(i), twice.probability(i), 1e-14);
    }
    EXPECT_GE(entropy(once), entropy(p) - 1e-12);
  }
}

TEST(Condition, Examples) {
  const std::uint32_t t0[] = {0};
  const JointTable c = condition(xor_gate(), Source::of({2}), t0);
  ASSERT_EQ(c.names(), (std::vector<std::string>{"X1", "X2"}));
  EXPECT_DOUBLE_EQ(c.probability(State{0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(c.probability(State{1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(c.probability(State{0, 1}), 0.0);

  const JointTable same = condition(xor_gate(), Source(), {});
  EXPECT_EQ(same.probabilities(), xor_gate().probabilities());

  const std::uint32_t impossible[] = {0, 0, 1};
  try {
    condition(xor_gate(), Source::all(3), impossible);
    FAIL() << "expected a zero-probability error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_probability);
  }
}

TEST(LocalSurprisal, Examples) {
  EXPECT_DOUBLE_EQ(local_surprisal(xor_gate(), Source::of({0}), {0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(local_surprisal(xor_gate(), Source::of({0, 1}), {0, 0, 0}), 2.0);
  for (std::uint32_t m = 1; m < 8; ++m) {
    EXPECT_DOUBLE_EQ(local_surprisal(deterministic3(), Source(m), {1, 0, 1}), 0.0);
  }
  EXPECT_THROW(local_surprisal(deterministic3(), Source::of({0}), {0, 0, 1}), Error);
}

TEST(SupportCheck, Examples) {
  EXPECT_TRUE(support_check(xor_gate(), uniform3()).empty());
  EXPECT_TRUE(support_check(xor_gate(), xor_gate()).empty());
  const auto bad = support_check(uniform3(), xor_gate());
  ASSERT_EQ(bad.size(), 4u);
  for (const auto& s : bad) EXPECT_EQ((s[0] ^ s[1] ^ s[2]), 1u);
  EXPECT_THROW(support_check(xor_gate(), hand_built()), Error);
}

TEST(SupportPolicy, CompatiblePairsUnchanged) {
  for (auto policy : {SupportPolicy::error(), SupportPolicy::jitter(), SupportPolicy::restrict()}) {
    auto [p, q] = apply_support_policy(xor_gate(), uniform3(), policy);
    EXPECT_EQ(p.probabilities(), xor_gate().probabilities());
    EXPECT_EQ(q.probabilities(), uniform3().probabilities());
  }
}

TEST(SupportPolicy, ErrorListsStates) {
  try {
    apply_support_policy(uniform3(), xor_gate(), SupportPolicy::error());
    FAIL() << "expected a support violation";
  } catch (const SupportViolation& e) {
    EXPECT_EQ(e.states().size(), 4u);
    EXPECT_EQ(e.kind(), ErrorKind::support_violation);
  }
}

TEST(SupportPolicy, JitterArithmetic) {
  const double eps = 1e-6;
  auto [p, q] = apply_support_policy(uniform3(), xor_gate(), SupportPolicy::jitter(eps));
  EXPECT_TRUE(support_check(p, q).empty());
  for (std::size_t x = 0; x < 8; ++x) {
    EXPECT_GT(q.probability(x), 0.0);
    EXPECT_NEAR(q.probability(x), (xor_gate().probability(x) + eps) / (1.0 + 8.0 * eps), 1e-16);
  }
}

TEST(SupportPolicy, RestrictDropsPosteriorStates) {
  auto [p, q] = apply_support_policy(uniform3(), xor_gate(), SupportPolicy::restrict());
  EXPECT_TRUE(support_check(p, q).empty());
  for (std::size_t x = 0; x < 8; ++x) {
    EXPECT_NEAR(p.probability(x), xor_gate().probability(x), 1e-15);
  }
  const JointTable only_odd = JointTable::from_entries(
      {"X1", "X2", "T"}, {2, 2, 2}, {{{0, 0, 1}, 0.5}, {{1, 1, 1}, 0.5}});
  EXPECT_THROW(apply_support_policy(only_odd, xor_gate(), SupportPolicy::restrict()), Error);
}

TEST(SupportPolicy, ParseNames) {
  EXPECT_EQ(parse_support_policy("jitter", 1e-3).epsilon, 1e-3);
  EXPECT_EQ(parse_support_policy("restrict").kind, SupportPolicy::Kind::restrict);
  EXPECT_THROW(parse_support_policy("ignore"), Error);
  EXPECT_THROW(parse_support_policy("jitter", 0.0), Error);
}

TEST(Entropy, MatchesDirectSum) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const JointTable p = testing::random_dist(3, seed);
    EXPECT_NEAR(entropy(p), oracle::entropy(p), 1e-12);
  }
  EXPECT_DOUBLE_EQ(entropy(xor_gate()), 2.0);
  EXPECT_DOUBLE_EQ(mutual_information(xor_gate(), Source::of({0, 1}), Source::of({2})), 1.0);
}

}  // namespace
}  // namespace gid
