#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gid/error.hpp"

namespace gid {

/// Full tuple of variable values, one coordinate per variable.
using State = std::vector<std::uint32_t>;

inline constexpr double kNormalizationTolerance = 1e-9;
inline constexpr double kLoadTolerance = 1e-6;
inline constexpr std::size_t kMaxVariables = 32;
inline constexpr std::size_t kMaxStates = std::size_t{1} << 26;

/// A nonempty set of variable indices, stored as a bitmask so subset tests are
/// a single AND.
class Source {
 public:
  constexpr Source() = default;
  constexpr explicit Source(std::uint32_t mask) : mask_(mask) {}

  static Source of(std::span<const std::size_t> indices) {
    std::uint32_t mask = 0;
    for (std::size_t i : indices) {
      if (i >= kMaxVariables) {
        throw Error(ErrorKind::invalid_argument,
                    "variable index " + std::to_string(i) + " out of range");
      }
      mask |= std::uint32_t{1} << i;
    }
    return Source(mask);
  }
  static Source of(std::initializer_list<std::size_t> indices) {
    return of(std::span<const std::size_t>(indices.begin(), indices.size()));
  }
  /// Every variable of an n-variable system.
  static Source all(std::size_t n) {
    return Source(n >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1);
  }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(mask_));
  }
  constexpr bool contains(std::size_t i) const { return (mask_ >> i) & 1u; }
  constexpr bool subset_of(Source other) const {
    return (mask_ & ~other.mask_) == 0;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::uint32_t m = mask_; m != 0; m &= m - 1) {
      out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    }
    return out;
  }

  friend constexpr bool operator==(Source, Source) = default;

 private:
  std::uint32_t mask_ = 0;
};

/// Immutable discrete joint distribution over named finite variables.
///
/// Probabilities are held densely in mixed-radix order with the first variable
/// most significant, so index order is lexicographic order of state tuples.
class JointTable {
 public:
  JointTable() = default;

  /// Validates and renormalizes. Tables whose mass is off by more than
  /// `tolerance` are rejected.
  JointTable(std::vector<std::string> names,
             std::vector<std::uint32_t> cardinalities,
             std::vector<double> probabilities,
             double tolerance = kLoadTolerance)
      : names_(std::move(names)),
        cardinalities_(std::move(cardinalities)),
        probabilities_(std::move(probabilities)) {
    validate_shape();
    if (probabilities_.size() != state_count(cardinalities_)) {
      throw Error(ErrorKind::invalid_distribution,
                  "probability vector has " +
                      std::to_string(probabilities_.size()) +
                      " entries, expected " +
                      std::to_string(state_count(cardinalities_)));
    }
    double total = 0.0;
    for (double p : probabilities_) {
      if (!std::isfinite(p) || p < 0.0) {
        throw Error(ErrorKind::invalid_distribution,
                    "probabilities must be finite and non-negative");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > tolerance) {
      throw Error(ErrorKind::invalid_distribution,
                  "probabilities sum to " + std::to_string(total) +
                      ", not 1");
    }
    for (double& p : probabilities_) p /= total;
  }

  /// Builds a table from sparse (state, probability) pairs. Omitted states
  /// have probability zero; repeated states are rejected.
  static JointTable from_entries(
      std::vector<std::string> names, std::vector<std::uint32_t> cardinalities,
      const std::vector<std::pair<State, double>>& entries,
      double tolerance = kLoadTolerance) {
    JointTable shape;
    shape.names_ = names;
    shape.cardinalities_ = cardinalities;
    shape.validate_shape();
    std::vector<double> dense(state_count(cardinalities), 0.0);
    std::vector<bool> seen(dense.size(), false);
    for (const auto& [state, p] : entries) {
      const std::size_t index = shape.encode(state);
      if (seen[index]) {
        throw Error(ErrorKind::invalid_distribution,
                    "duplicated state " + shape.format_state(state));
      }
      seen[index] = true;
      dense[index] = p;
    }
    return JointTable(std::move(names), std::move(cardinalities),
                      std::move(dense), tolerance);
  }

  std::size_t num_variables() const { return cardinalities_.size(); }
  std::size_t num_states() const { return probabilities_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::uint32_t>& cardinalities() const {
    return cardinalities_;
  }
  const std::vector<double>& probabilities() const { return probabilities_; }

  double probability(std::size_t index) const { return probabilities_[index]; }
  double probability(const State& state) const {
    return probabilities_[encode(state)];
  }

  std::size_t encode(const State& state) const {
    if (state.size() != num_variables()) {
      throw Error(ErrorKind::invalid_argument,
                  "state has " + std::to_string(state.size()) +
                      " coordinates, expected " +
                      std::to_string(num_variables()));
    }
    std::size_t index = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (state[i] >= cardinalities_[i]) {
        throw Error(ErrorKind::invalid_argument,
                    "state " + format_state(state) + " out of range");
      }
      index = index * cardinalities_[i] + state[i];
    }
    return index;
  }

  State decode(std::size_t index) const {
    State state(num_variables());
    for (std::size_t i = num_variables(); i-- > 0;) {
      state[i] = static_cast<std::uint32_t>(index % cardinalities_[i]);
      index /= cardinalities_[i];
    }
    return state;
  }

  /// Indices of states with strictly positive probability, ascending.
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < probabilities_.size(); ++i) {
      if (probabilities_[i] > 0.0) out.push_back(i);
    }
    return out;
  }

  void check_source(Source source) const {
    if (source.empty()) {
      throw Error(ErrorKind::invalid_argument, "source must be nonempty");
    }
    if (!source.subset_of(Source::all(num_variables()))) {
      throw Error(ErrorKind::invalid_argument,
                  "source refers to a variable index >= " +
                      std::to_string(num_variables()));
    }
  }

  bool same_shape(const JointTable& other) const {
    return cardinalities_ == other.cardinalities_;
  }

  std::string format_state(const State& state) const {
    std::string out = "(";
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(state[i]);
    }
    return out + ")";
  }

  static std::size_t state_count(std::span<const std::uint32_t> cards) {
    std::size_t count = 1;
    for (std::uint32_t c : cards) {
      if (c == 0 || count > kMaxStates / c) {
        throw Error(ErrorKind::invalid_distribution,
                    "state space is empty or exceeds " +
                        std::to_string(kMaxStates) + " states");
      }
      count *= c;
    }
    return count;
  }

 private:
  void validate_shape() const {
    if (names_.size() != cardinalities_.size()) {
      throw Error(ErrorKind::invalid_distribution,
                  "variable name count does not match cardinality count");
    }
    if (cardinalities_.size() > kMaxVariables) {
      throw Error(ErrorKind::invalid_distribution,
                  "at most " + std::to_string(kMaxVariables) +
                      " variables are supported");
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty()) {
        throw Error(ErrorKind::invalid_distribution, "empty variable name");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (names_[i] == names_[j]) {
          throw Error(ErrorKind::invalid_distribution,
                      "duplicated variable name " + names_[i]);
        }
      }
    }
    (void)state_count(cardinalities_);
  }

  std::vector<std::string> names_;
  std::vector<std::uint32_t> cardinalities_;
  std::vector<double> probabilities_{1.0};
};

namespace detail {

/// Projection of full-table indices onto the coordinates of `keep`.
inline std::vector<std::size_t> projection_map(const JointTable& dist,
                                               Source keep) {
  const auto& cards = dist.cardinalities();
  std::vector<std::size_t> map(dist.num_states());
  State state(cards.size(), 0);
  for (std::size_t index = 0; index < map.size(); ++index) {
    std::size_t sub = 0;
    for (std::size_t i = 0; i < cards.size(); ++i) {
      if (keep.contains(i)) sub = sub * cards[i] + state[i];
    }
    map[index] = sub;
    for (std::size_t i = cards.size(); i-- > 0;) {
      if (++state[i] < cards[i]) break;
      state[i] = 0;
    }
  }
  return map;
}

inline double xlog2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace detail

/// Marginal distribution over the variables in `keep`, in index order.
inline JointTable marginalize(const JointTable& dist, Source keep) {
  dist.check_source(keep);
  std::vector<std::string> names;
  std::vector<std::uint32_t> cards;
  for (std::size_t i : keep.indices()) {
    names.push_back(dist.names()[i]);
    cards.push_back(dist.cardinalities()[i]);
  }
  std::vector<double> probs(JointTable::state_count(cards), 0.0);
  const auto map = detail::projection_map(dist, keep);
  for (std::size_t index = 0; index < map.size(); ++index) {
    probs[map[index]] += dist.probability(index);
  }
  return JointTable(std::move(names), std::move(cards), std::move(probs),
                    kNormalizationTolerance);
}

/// Product of the marginals of the given disjoint blocks, laid out over the
/// original variables. Blocks must partition the variable set.
inline JointTable product_of_blocks(const JointTable& dist,
                                    std::span<const Source> blocks) {
  std::uint32_t covered = 0;
  for (Source block : blocks) {
    dist.check_source(block);
    if (block.mask() & covered) {
      throw Error(ErrorKind::invalid_argument, "blocks overlap");
    }
    covered |= block.mask();
  }
  if (covered != Source::all(dist.num_variables()).mask()) {
    throw Error(ErrorKind::invalid_argument,
                "blocks do not cover every variable");
  }
  std::vector<double> probs(dist.num_states(), 1.0);
  for (Source block : blocks) {
    const JointTable marginal = marginalize(dist, block);
    const auto map = detail::projection_map(dist, block);
    for (std::size_t index = 0; index < probs.size(); ++index) {
      probs[index] *= marginal.probability(map[index]);
    }
  }
  return JointTable(dist.names(), dist.cardinalities(), std::move(probs),
                    kLoadTolerance);
}

/// The maximum-entropy table sharing `dist`'s single-variable marginals.
inline JointTable product_of_marginals(const JointTable& dist) {
  std::vector<Source> blocks;
  for (std::size_t i = 0; i < dist.num_variables(); ++i) {
    blocks.push_back(Source::of({i}));
  }
  return product_of_blocks(dist, blocks);
}

/// Uniform table over the full Cartesian state space of `dist`.
inline JointTable uniform_like(const JointTable& dist) {
  std::vector<double> probs(dist.num_states(),
                            1.0 / static_cast<double>(dist.num_states()));
  return JointTable(dist.names(), dist.cardinalities(), std::move(probs));
}

/// Conditional table over the variables outside `on`, given that the
/// variables in `on` (ascending index order) take `values`. An empty `on`
/// returns the table unchanged.
inline JointTable condition(const JointTable& dist, Source on,
                            std::span<const std::uint32_t> values) {
  if (on.empty()) {
    if (!values.empty()) {
      throw Error(ErrorKind::invalid_argument,
                  "values given for an empty conditioning set");
    }
    return dist;
  }
  dist.check_source(on);
  const auto on_indices = on.indices();
  if (values.size() != on_indices.size()) {
    throw Error(ErrorKind::invalid_argument,
                "conditioning values do not match the conditioning set");
  }
  for (std::size_t k = 0; k < on_indices.size(); ++k) {
    if (values[k] >= dist.cardinalities()[on_indices[k]]) {
      throw Error(ErrorKind::invalid_argument, "conditioning value out of range");
    }
  }
  std::vector<std::string> names;
  std::vector<std::uint32_t> cards;
  std::uint32_t rest = 0;
  for (std::size_t i = 0; i < dist.num_variables(); ++i) {
    if (!on.contains(i)) {
      names.push_back(dist.names()[i]);
      cards.push_back(dist.cardinalities()[i]);
      rest |= std::uint32_t{1} << i;
    }
  }
  std::vector<double> probs(JointTable::state_count(cards), 0.0);
  double event = 0.0;
  for (std::size_t index = 0; index < dist.num_states(); ++index) {
    const double p = dist.probability(index);
    if (p == 0.0) continue;
    const State state = dist.decode(index);
    bool match = true;
    for (std::size_t k = 0; k < on_indices.size() && match; ++k) {
      match = state[on_indices[k]] == values[k];
    }
    if (!match) continue;
    std::size_t sub = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
      if ((rest >> i) & 1u) sub = sub * dist.cardinalities()[i] + state[i];
    }
    probs[sub] += p;
    event += p;
  }
  if (event <= 0.0) {
    throw Error(ErrorKind::zero_probability,
                "conditioning event has probability zero");
  }
  for (double& p : probs) p /= event;
  return JointTable(std::move(names), std::move(cards), std::move(probs),
                    kNormalizationTolerance);
}

/// Marginal probability of the source's coordinates of `state`.
inline double source_probability(const JointTable& dist, Source source,
                                 const State& state) {
  dist.check_source(source);
  (void)dist.encode(state);
  double total = 0.0;
  for (std::size_t index = 0; index < dist.num_states(); ++index) {
    const double p = dist.probability(index);
    if (p == 0.0) continue;
    const State other = dist.decode(index);
    bool match = true;
    for (std::size_t i : source.indices()) {
      if (other[i] != state[i]) {
        match = false;
        break;
      }
    }
    if (match) total += p;
  }
  return total;
}

/// Local surprisal -log2 P(x_a) of the source's coordinates of `state`.
inline double local_surprisal(const JointTable& dist, Source source,
                              const State& state) {
  const double p = source_probability(dist, source, state);
  if (p <= 0.0) {
    throw Error(ErrorKind::zero_probability,
                "source marginal of " + dist.format_state(state) +
                    " has probability zero");
  }
  return -std::log2(p);
}

/// Shannon entropy in bits.
inline double entropy(const JointTable& dist) {
  double h = 0.0;
  for (double p : dist.probabilities()) h -= detail::xlog2(p);
  return h;
}

inline double entropy(const JointTable& dist, Source source) {
  return entropy(marginalize(dist, source));
}

/// I(a; b) = H(a) + H(b) - H(a, b) for disjoint sources.
inline double mutual_information(const JointTable& dist, Source a, Source b) {
  if (a.mask() & b.mask()) {
    throw Error(ErrorKind::invalid_argument,
                "mutual information needs disjoint sources");
  }
  return entropy(dist, a) + entropy(dist, b) -
         entropy(dist, Source(a.mask() | b.mask()));
}

/// States with posterior mass that the prior excludes. Empty means compatible.
inline std::vector<State> support_check(const JointTable& posterior,
                                        const JointTable& prior) {
  if (!posterior.same_shape(prior)) {
    throw Error(ErrorKind::shape_mismatch,
                "posterior and prior have different variables or cardinalities");
  }
  std::vector<State> violations;
  for (std::size_t index = 0; index < posterior.num_states(); ++index) {
    if (posterior.probability(index) > 0.0 && prior.probability(index) == 0.0) {
      violations.push_back(posterior.decode(index));
    }
  }
  return violations;
}

struct SupportPolicy {
  enum class Kind { error, jitter, restrict };

  Kind kind = Kind::error;
  double epsilon = 1e-6;

  static SupportPolicy error() { return {}; }
  static SupportPolicy jitter(double epsilon = 1e-6) {
    return {Kind::jitter, epsilon};
  }
  static SupportPolicy restrict() { return {Kind::restrict, 0.0}; }

  std::string name() const {
    switch (kind) {
      case Kind::error: return "error";
      case Kind::jitter: return "jitter";
      case Kind::restrict: return "restrict";
    }
    return "error";
  }
};

inline SupportPolicy parse_support_policy(const std::string& name,
                                          double epsilon = 1e-6) {
  if (name == "error") return SupportPolicy::error();
  if (name == "jitter") {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw Error(ErrorKind::invalid_argument, "jitter epsilon must be > 0");
    }
    return SupportPolicy::jitter(epsilon);
  }
  if (name == "restrict") return SupportPolicy::restrict();
  throw Error(ErrorKind::invalid_argument, "unknown support policy '" + name +
                                               "' (error|jitter|restrict)");
}

/// Makes a (posterior, prior) pair support-compatible according to `policy`.
/// Compatible pairs are returned unchanged under every policy.
inline std::pair<JointTable, JointTable> apply_support_policy(
    const JointTable& posterior, const JointTable& prior,
    const SupportPolicy& policy) {
  auto violations = support_check(posterior, prior);
  if (violations.empty()) return {posterior, prior};
  switch (policy.kind) {
    case SupportPolicy::Kind::error: {
      std::string message = "posterior has mass on " +
                            std::to_string(violations.size()) +
                            " state(s) with zero prior probability:";
      for (const auto& s : violations) message += " " + posterior.format_state(s);
      throw SupportViolation(message, std::move(violations));
    }
    case SupportPolicy::Kind::jitter: {
      const double eps = policy.epsilon;
      const double total = 1.0 + eps * static_cast<double>(prior.num_states());
      std::vector<double> probs(prior.probabilities());
      for (double& p : probs) p = (p + eps) / total;
      return {posterior, JointTable(prior.names(), prior.cardinalities(),
                                    std::move(probs))};
    }
    case SupportPolicy::Kind::restrict: {
      std::vector<double> probs(posterior.probabilities());
      double kept = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (prior.probability(i) == 0.0) probs[i] = 0.0;
        kept += probs[i];
      }
      if (kept <= 0.0) {
        throw Error(ErrorKind::support_violation,
                    "restricting the posterior to the prior support leaves "
                    "no mass");
      }
      for (double& p : probs) p /= kept;
      return {JointTable(posterior.names(), posterior.cardinalities(),
                         std::move(probs)),
              prior};
    }
  }
  return {posterior, prior};
}

}  // namespace gid
