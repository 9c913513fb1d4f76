#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gid/distributions.hpp"
#include "gid/error.hpp"

namespace gid {

/// A named generator for one of the canonical test distributions.
struct GateSpec {
  enum class Kind { xor_gate, and_gate, or_gate, copy, parity, uniform, random };

  Kind kind = Kind::xor_gate;
  /// Variable count for copy/uniform/random, input count for parity.
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

inline GateSpec parse_gate(std::string name, std::size_t n = 0, std::uint64_t seed = 0) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  GateSpec spec;
  spec.seed = seed;
  if (name == "xor") {
    spec.kind = GateSpec::Kind::xor_gate;
  } else if (name == "and") {
    spec.kind = GateSpec::Kind::and_gate;
  } else if (name == "or") {
    spec.kind = GateSpec::Kind::or_gate;
  } else if (name == "copy") {
    spec.kind = GateSpec::Kind::copy;
    spec.n = n ? n : 2;
  } else if (name == "parity") {
    spec.kind = GateSpec::Kind::parity;
    spec.n = n ? n : 2;
  } else if (name == "uniform") {
    spec.kind = GateSpec::Kind::uniform;
    spec.n = n ? n : 3;
  } else if (name == "random") {
    spec.kind = GateSpec::Kind::random;
    spec.n = n ? n : 3;
  } else {
    throw Error(ErrorKind::invalid_argument,
                "unknown corpus distribution '" + name +
                    "' (xor|and|or|copy|parity|uniform|random)");
  }
  return spec;
}

namespace detail {

inline std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("X" + std::to_string(i + 1));
  return names;
}

template <class Output>
JointTable two_input_gate(Output output) {
  std::vector<std::pair<State, double>> entries;
  for (std::uint32_t a = 0; a < 2; ++a) {
    for (std::uint32_t b = 0; b < 2; ++b) {
      entries.push_back({{a, b, output(a, b)}, 0.25});
    }
  }
  return JointTable::from_entries({"X1", "X2", "T"}, {2, 2, 2}, entries);
}

/// Uniform double in (0, 1) from the top 53 bits of one engine draw.
inline double open_unit(std::mt19937_64& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Strictly positive random table (normalized exponential draws, i.e. a flat
/// Dirichlet sample). With `zero_fraction` > 0, roughly that share of states is
/// zeroed, always leaving at least one state. Bit-reproducible for a seed.
inline JointTable random_table(std::vector<std::uint32_t> cardinalities,
                               std::uint64_t seed, double zero_fraction = 0.0) {
  std::mt19937_64 engine(seed);
  const std::size_t states = JointTable::state_count(cardinalities);
  std::vector<double> probs(states);
  for (double& p : probs) p = -std::log(detail::open_unit(engine));
  if (zero_fraction > 0.0) {
    for (double& p : probs) {
      if (detail::open_unit(engine) < zero_fraction) p = 0.0;
    }
    if (std::all_of(probs.begin(), probs.end(), [](double p) { return p == 0.0; })) {
      probs[engine() % states] = 1.0;
    }
  }
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  auto names = detail::numbered(cardinalities.size());
  return JointTable(std::move(names), std::move(cardinalities), std::move(probs));
}

inline JointTable make_gate(const GateSpec& spec) {
  using Kind = GateSpec::Kind;
  switch (spec.kind) {
    case Kind::xor_gate:
      return detail::two_input_gate([](std::uint32_t a, std::uint32_t b) { return a ^ b; });
    case Kind::and_gate:
      return detail::two_input_gate([](std::uint32_t a, std::uint32_t b) { return a & b; });
    case Kind::or_gate:
      return detail::two_input_gate([](std::uint32_t a, std::uint32_t b) { return a | b; });
    case Kind::copy: {
      if (spec.n < 1) throw Error(ErrorKind::invalid_argument, "copy needs n >= 1");
      std::vector<std::pair<State, double>> entries = {
          {State(spec.n, 0), 0.5}, {State(spec.n, 1), 0.5}};
      return JointTable::from_entries(detail::numbered(spec.n),
                                      std::vector<std::uint32_t>(spec.n, 2), entries);
    }
    case Kind::parity: {
      if (spec.n < 1) throw Error(ErrorKind::invalid_argument, "parity needs n >= 1");
      const std::size_t inputs = spec.n;
      if (inputs + 1 > 24) throw Error(ErrorKind::invalid_argument, "parity is limited to 23 inputs");
      auto names = detail::numbered(inputs);
      names.push_back("T");
      std::vector<std::pair<State, double>> entries;
      const double p = std::ldexp(1.0, -static_cast<int>(inputs));
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << inputs); ++bits) {
        State s(inputs + 1);
        std::uint32_t parity = 0;
        for (std::size_t i = 0; i < inputs; ++i) {
          s[i] = static_cast<std::uint32_t>((bits >> (inputs - 1 - i)) & 1u);
          parity ^= s[i];
        }
        s[inputs] = parity;
        entries.push_back({std::move(s), p});
      }
      return JointTable::from_entries(std::move(names),
                                      std::vector<std::uint32_t>(inputs + 1, 2), entries);
    }
    case Kind::uniform: {
      if (spec.n < 1) throw Error(ErrorKind::invalid_argument, "uniform needs n >= 1");
      const std::vector<std::uint32_t> cards(spec.n, 2);
      const std::size_t states = JointTable::state_count(cards);
      return JointTable(detail::numbered(spec.n), cards,
                        std::vector<double>(states, 1.0 / static_cast<double>(states)));
    }
    case Kind::random:
      if (spec.n < 1) throw Error(ErrorKind::invalid_argument, "random needs n >= 1");
      return random_table(std::vector<std::uint32_t>(spec.n, 2), spec.seed);
  }
  throw Error(ErrorKind::invalid_argument, "invalid gate");
}

}  // namespace gid
