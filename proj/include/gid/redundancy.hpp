#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gid/distributions.hpp"
#include "gid/error.hpp"
#include "gid/lattice.hpp"

namespace gid {

/// Local surprisal of every source marginal, tabulated once per distribution
/// so a state only needs one lookup per source.
class SourceMarginals {
 public:
  explicit SourceMarginals(const JointTable& dist) : dist_(dist) {
    const std::size_t n = dist.num_variables();
    if (n == 0 || n > kHardLatticeCap) {
      throw Error(ErrorKind::lattice_cap_exceeded,
                  "source marginals need 1.." + std::to_string(kHardLatticeCap) +
                      " variables, got " + std::to_string(n));
    }
    const std::size_t masks = std::size_t{1} << n;
    projection_.resize(masks);
    surprisal_.resize(masks);
    for (std::uint32_t m = 1; m < masks; ++m) {
      projection_[m] = detail::projection_map(dist, Source(m));
      std::size_t sub_states = 1;
      for (std::size_t i : Source(m).indices()) sub_states *= dist.cardinalities()[i];
      std::vector<double> mass(sub_states, 0.0);
      for (std::size_t x = 0; x < dist.num_states(); ++x) {
        mass[projection_[m][x]] += dist.probability(x);
      }
      auto& s = surprisal_[m];
      s.resize(sub_states);
      for (std::size_t k = 0; k < sub_states; ++k) {
        s[k] = mass[k] > 0.0 ? -std::log2(mass[k])
                             : std::numeric_limits<double>::infinity();
      }
    }
  }

  const JointTable& table() const { return dist_; }
  std::size_t num_variables() const { return dist_.num_variables(); }

  /// -log2 P(x_a); +inf when the projection has no mass.
  double surprisal(Source source, std::size_t state_index) const {
    const std::uint32_t m = source.mask();
    return surprisal_[m][projection_[m][state_index]];
  }

 private:
  JointTable dist_;
  std::vector<std::vector<std::size_t>> projection_;
  std::vector<std::vector<double>> surprisal_;
};

/// A localizable redundant-entropy function: assigns each antichain a value in
/// bits at every individual state.
class RedundancyFunction {
 public:
  virtual ~RedundancyFunction() = default;

  virtual std::string name() const = 0;

  virtual double evaluate(const JointTable& dist, const Antichain& alpha,
                          const State& state) const = 0;

  /// Cumulative value of every atom at one state. Implementations may
  /// override this with something faster than per-atom evaluation.
  virtual void evaluate_lattice(const SourceMarginals& marginals,
                                const RedundancyLattice& lattice,
                                std::size_t state_index,
                                std::span<double> out) const {
    const State state = marginals.table().decode(state_index);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      out[i] = evaluate(marginals.table(), lattice.atom(i), state);
    }
  }
};

/// h_min: the smallest local surprisal among the antichain's sources.
class MinSurprisal final : public RedundancyFunction {
 public:
  std::string name() const override { return "hmin"; }

  double evaluate(const JointTable& dist, const Antichain& alpha,
                  const State& state) const override {
    double best = std::numeric_limits<double>::infinity();
    for (Source a : alpha.sources()) {
      best = std::min(best, local_surprisal(dist, a, state));
    }
    return best;
  }

  void evaluate_lattice(const SourceMarginals& marginals,
                        const RedundancyLattice& lattice,
                        std::size_t state_index,
                        std::span<double> out) const override {
    double by_source[32];
    const std::uint32_t full = Source::all(lattice.n()).mask();
    for (std::uint32_t m = 1; m <= full; ++m) {
      by_source[m] = marginals.surprisal(Source(m), state_index);
    }
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Source a : lattice.atom(i).sources()) {
        best = std::min(best, by_source[a.mask()]);
      }
      out[i] = best;
    }
  }
};

inline const RedundancyFunction& h_min() {
  static const MinSurprisal instance;
  return instance;
}

/// Looks up a shipped redundancy function by name.
inline const RedundancyFunction& redundancy_function(const std::string& name) {
  if (name == "hmin" || name == "h_min") return h_min();
  throw Error(ErrorKind::invalid_argument,
              "unknown redundancy function '" + name + "' (available: hmin)");
}

struct ComputeOptions {
  /// Worker threads for the per-state loop; 0 or 1 runs inline.
  std::size_t threads = 1;
};

namespace detail {

inline void require_finite(std::span<const double> values, const JointTable& dist,
                           std::size_t state_index) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::zero_probability,
                  "a source marginal of state " +
                      dist.format_state(dist.decode(state_index)) +
                      " has probability zero");
    }
  }
}

/// sum_x weight(x) * f(x) over the given states. States are cut into
/// fixed-size chunks whose sums are combined in chunk order, so the result
/// does not depend on the thread count.
template <class PerState>
std::vector<double> weighted_sum(const std::vector<std::size_t>& states,
                                 const JointTable& weights, std::size_t width,
                                 const ComputeOptions& options,
                                 PerState&& per_state) {
  constexpr std::size_t kChunk = 16;
  const std::size_t chunks = (states.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(width, 0.0));

  auto run_chunk = [&](std::size_t c) {
    std::vector<double> local(width);
    auto& acc = partial[c];
    const std::size_t end = std::min(states.size(), (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      const std::size_t x = states[k];
      per_state(x, std::span<double>(local));
      const double w = weights.probability(x);
      for (std::size_t i = 0; i < width; ++i) acc[i] += w * local[i];
    }
  };

  const std::size_t threads = std::min(std::max<std::size_t>(options.threads, 1), chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
          try {
            run_chunk(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> total(width, 0.0);
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < width; ++i) total[i] += acc[i];
  }
  return total;
}

}  // namespace detail

/// Cumulative (un-inverted) redundancy values of every atom at one state.
inline AtomTable local_cumulative(const JointTable& dist, const State& state,
                                  const RedundancyFunction& f = h_min()) {
  const auto lattice = build_lattice(dist.num_variables());
  const std::size_t x = dist.encode(state);
  if (dist.probability(x) <= 0.0) {
    throw Error(ErrorKind::zero_probability,
                "state " + dist.format_state(state) + " is outside the support");
  }
  const SourceMarginals marginals(dist);
  std::vector<double> values(lattice->size());
  f.evaluate_lattice(marginals, *lattice, x, values);
  detail::require_finite(values, dist, x);
  return AtomTable(lattice, dist.names(), std::move(values));
}

/// Local partial entropy decomposition of one support state. The atoms sum to
/// -log2 P(state).
inline AtomTable local_ped(const JointTable& dist, const State& state,
                           const RedundancyFunction& f = h_min()) {
  return moebius_inversion(local_cumulative(dist, state, f));
}

/// Expected partial entropy decomposition; the atoms sum to H(dist).
/// Inversion is linear, so the expectation is taken over cumulative values
/// and inverted once.
inline AtomTable expected_ped(const JointTable& dist,
                              const RedundancyFunction& f = h_min(),
                              const ComputeOptions& options = {}) {
  const auto lattice = build_lattice(dist.num_variables());
  const SourceMarginals marginals(dist);
  auto values = detail::weighted_sum(
      dist.support(), dist, lattice->size(), options,
      [&](std::size_t x, std::span<double> out) {
        f.evaluate_lattice(marginals, *lattice, x, out);
        detail::require_finite(out, dist, x);
      });
  lattice->invert(values);
  return AtomTable(lattice, dist.names(), std::move(values));
}

}  // namespace gid
