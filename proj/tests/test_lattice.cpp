#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <set>

#include "gid/lattice.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace gid {
namespace {

using testing::key_of;

std::vector<std::string> names3() { return {"X1", "X2", "T"}; }

TEST(Lattice, CountsMatchPowerSetOracle) {
  const std::size_t expected[] = {1, 4, 18, 166};
  for (int n = 1; n <= 4; ++n) {
    const auto oracle_atoms = oracle::antichains_by_power_set(n);
    const auto lattice = build_lattice(static_cast<std::size_t>(n));
    EXPECT_EQ(oracle_atoms.size(), expected[n - 1]);
    ASSERT_EQ(lattice->size(), oracle_atoms.size()) << "n = " << n;

    std::set<std::vector<std::uint32_t>> want;
    for (const auto& a : oracle_atoms) want.insert(oracle::key(a));
    std::set<std::vector<std::uint32_t>> got;
    for (const auto& a : lattice->atoms()) got.insert(key_of(a));
    EXPECT_EQ(got, want);
  }
}

TEST(Lattice, DedekindOracleAgreesWithPowerSet) {
  for (int n = 1; n <= 4; ++n) {
    EXPECT_EQ(oracle::dedekind(n) - 2, oracle::antichains_by_power_set(n).size());
  }
}

#ifdef GID_SLOW_TESTS
TEST(Lattice, FiveVariableCount) {
  EXPECT_EQ(oracle::dedekind(5) - 2, 7579u);
  EXPECT_EQ(build_lattice(5)->size(), 7579u);
}
#endif

TEST(Lattice, CapIsEnforced) {
  try {
    build_lattice(6);
    FAIL() << "expected the cap to trip";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::lattice_cap_exceeded);
    EXPECT_NE(std::string(e.what()).find("cap of 5"), std::string::npos);
  }
  EXPECT_THROW(build_lattice(0), Error);
  EXPECT_THROW(RedundancyLattice(4, 3), Error);
}

TEST(Lattice, CapCanBeLoweredFromEnvironment) {
  ::setenv("GID_LATTICE_CAP", "2", 1);
  EXPECT_EQ(lattice_cap(), 2u);
  EXPECT_THROW(build_lattice(3), Error);
  ::setenv("GID_LATTICE_CAP", "99", 1);
  EXPECT_EQ(lattice_cap(), kHardLatticeCap);
  ::unsetenv("GID_LATTICE_CAP");
  EXPECT_EQ(lattice_cap(), kDefaultLatticeCap);
}

TEST(Lattice, DisplayOrderFollowsTheEighteenAtomTable) {
  const auto lattice = build_lattice(3);
  const std::vector<std::string> rows = {
      "{X1}{X2}{T}", "{X1}{X2}", "{X1}{T}", "{X2}{T}", "{X1}{X2,T}", "{X2}{X1,T}",
      "{T}{X1,X2}", "{X1}", "{X2}", "{T}", "{X1,X2}{X1,T}{X2,T}", "{X1,X2}{X1,T}",
      "{X1,X2}{X2,T}", "{X1,T}{X2,T}", "{X1,X2}", "{X1,T}", "{X2,T}", "{X1,X2,T}"};
  const auto names = names3();
  ASSERT_EQ(lattice->size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(format_atom(lattice->atom(i), names), rows[i]);
  }
}

TEST(Lattice, BottomAndTop) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto lattice = build_lattice(n);
    for (std::size_t i = 0; i < lattice->size(); ++i) {
      EXPECT_TRUE(lattice->leq(lattice->bottom(), i));
      EXPECT_TRUE(lattice->leq(i, lattice->top()));
    }
    EXPECT_EQ(lattice->atom(lattice->bottom()).size(), n);
    EXPECT_EQ(lattice->atom(lattice->top()).size(), 1u);
    EXPECT_EQ(lattice->down_set_size(lattice->top()), lattice->size() - 1);
    EXPECT_EQ(lattice->down_set_size(lattice->bottom()), 0u);
  }
}

TEST(Leq, Examples) {
  const Antichain pair({{0}, {1}});
  const Antichain single({{0}});
  EXPECT_TRUE(leq(pair, single));
  EXPECT_FALSE(leq(single, pair));
  const auto lattice = build_lattice(3);
  const Antichain bottom({{0}, {1}, {2}});
  const Antichain top({{0, 1, 2}});
  for (const auto& alpha : lattice->atoms()) {
    EXPECT_TRUE(lattice->leq(bottom, alpha));
    EXPECT_TRUE(lattice->leq(alpha, top));
  }
  EXPECT_THROW(build_lattice(2)->leq(Antichain({{0}, {2}}), Antichain({{0}})), Error);
}

TEST(Leq, AgreesWithOracleForAllPairs) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto lattice = build_lattice(n);
    const auto oracle_atoms = oracle::antichains_by_power_set(static_cast<int>(n));
    std::map<std::vector<std::uint32_t>, const oracle::AntichainSets*> by_key;
    for (const auto& a : oracle_atoms) by_key[oracle::key(a)] = &a;
    for (std::size_t i = 0; i < lattice->size(); ++i) {
      const auto& ai = *by_key.at(key_of(lattice->atom(i)));
      for (std::size_t j = 0; j < lattice->size(); ++j) {
        const auto& aj = *by_key.at(key_of(lattice->atom(j)));
        const bool want = oracle::below(ai, aj);
        ASSERT_EQ(lattice->leq(i, j), want) << i << " " << j;
        ASSERT_EQ(leq(lattice->atom(i), lattice->atom(j)), want);
        ASSERT_EQ(lattice->strictly_below(i, j), want && i != j);
      }
    }
  }
}

TEST(Leq, IsAPartialOrderExhaustivelyUpToThree) {
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto lat = build_lattice(n);
    const std::size_t k = lat->size();
    for (std::size_t a = 0; a < k; ++a) {
      EXPECT_TRUE(lat->leq(a, a));
      for (std::size_t b = 0; b < k; ++b) {
        if (a != b) {
          EXPECT_FALSE(lat->leq(a, b) && lat->leq(b, a));
        }
        for (std::size_t c = 0; c < k; ++c) {
          if (lat->leq(a, b) && lat->leq(b, c)) {
            EXPECT_TRUE(lat->leq(a, c));
          }
        }
      }
    }
  }
}

TEST(Leq, IsAPartialOrderSampledAtFour) {
  const auto lat = build_lattice(4);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, lat->size() - 1);
  for (int trial = 0; trial < 200000; ++trial) {
    const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    ASSERT_TRUE(lat->leq(a, a));
    if (a != b) {
      ASSERT_FALSE(lat->leq(a, b) && lat->leq(b, a));
    }
    if (lat->leq(a, b) && lat->leq(b, c)) {
      ASSERT_TRUE(lat->leq(a, c));
    }
  }
}

TEST(Lattice, TopologicalOrderIsALinearExtension) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto lat = build_lattice(n);
    std::vector<std::size_t> position(lat->size());
    const auto order = lat->topological_order();
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k;
    for (std::size_t a = 0; a < lat->size(); ++a) {
      for (std::size_t b : lat->down_set(a)) EXPECT_LT(position[b], position[a]);
    }
  }
}

TEST(AtomSyntax, RoundTripsEveryAtom) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto lat = build_lattice(n);
    const auto names = default_names(n);
    for (const auto& alpha : lat->atoms()) {
      const std::string text = format_atom(alpha, names);
      EXPECT_EQ(parse_atom(text, names), alpha) << text;
    }
  }
}

TEST(AtomSyntax, ParsesLooseInputToCanonicalForm) {
  const auto names = names3();
  const Antichain a = parse_atom(" {X2, T} {X1} ", names);
  EXPECT_EQ(format_atom(a, names), "{X1}{X2,T}");
  EXPECT_EQ(format_atom(parse_atom("{T,X1}", names), names), "{X1,T}");
}

TEST(AtomSyntax, RejectsMalformedAtoms) {
  const auto names = names3();
  for (const char* bad : {"", "{}", "{X1", "X1", "{X4}", "{X1,X1}", "{X1}{X1,X2}",
                          "{X1}{X1}", "{X1}x"}) {
    EXPECT_THROW(parse_atom(bad, names), Error) << bad;
  }
}

TEST(Antichain, RejectsComparableSources) {
  EXPECT_THROW(Antichain({{0}, {0, 1}}), Error);
  EXPECT_THROW(Antichain(std::vector<Source>{}), Error);
}

TEST(Moebius, ConstantCumulativeLandsOnBottom) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto lat = build_lattice(n);
    const AtomTable cum(lat, {}, std::vector<double>(lat->size(), 2.5));
    const AtomTable partial = moebius_inversion(cum);
    for (std::size_t i = 0; i < lat->size(); ++i) {
      EXPECT_NEAR(partial.values[i], i == lat->bottom() ? 2.5 : 0.0, 1e-12);
    }
  }
}

TEST(Moebius, RandomRoundTripAndReconstitution) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (std::size_t n = 2; n <= 4; ++n) {
    const auto lat = build_lattice(n);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> v(lat->size());
      for (double& x : v) x = u(rng);
      const AtomTable cum(lat, {}, v);
      const AtomTable partial = moebius_inversion(cum);
      const AtomTable back = accumulate(partial);
      for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back.values[i], v[i], 1e-9);
      EXPECT_NEAR(partial.sum(), top_value(cum), 1e-9);
    }
  }
}

TEST(Moebius, MatchesRecursiveOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  const auto lat = build_lattice(3);
  const auto oracle_atoms = oracle::antichains_by_power_set(3);
  std::vector<double> cum_oracle;
  std::vector<double> cum(lat->size());
  for (const auto& a : oracle_atoms) {
    cum_oracle.push_back(u(rng));
    cum[lat->index_of(Antichain([&] {
      std::vector<Source> s;
      for (auto m : oracle::key(a)) s.emplace_back(m);
      return s;
    }()))] = cum_oracle.back();
  }
  const auto want = oracle::invert(oracle_atoms, cum_oracle);
  const AtomTable got = moebius_inversion(AtomTable(lat, {}, cum));
  for (std::size_t i = 0; i < lat->size(); ++i) {
    EXPECT_NEAR(got.values[i], want.at(key_of(lat->atom(i))), 1e-12);
  }
}

TEST(AtomTable, RequiresEveryAtom) {
  const auto lat = build_lattice(2);
  EXPECT_THROW(AtomTable(lat, {}, {1.0, 2.0}), Error);
  std::vector<double> three(3);
  EXPECT_THROW(lat->invert(three), Error);
  const AtomTable t(lat, {"A", "B"}, {1, 2, 3, 4});
  EXPECT_EQ(t.at("{A}{B}"), 1.0);
  EXPECT_EQ(t.at("{A,B}"), 4.0);
  EXPECT_EQ(top_value(t), 4.0);
}

}  // namespace
}  // namespace gid
