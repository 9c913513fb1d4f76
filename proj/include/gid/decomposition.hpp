#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gid/distributions.hpp"
#include "gid/error.hpp"
#include "gid/lattice.hpp"
#include "gid/redundancy.hpp"

namespace gid {

/// D(P || Q) in bits. Requires Q(x) > 0 wherever P(x) > 0.
inline double kl_divergence(const JointTable& posterior, const JointTable& prior) {
  auto violations = support_check(posterior, prior);
  if (!violations.empty()) {
    throw SupportViolation("prior assigns zero probability to " +
                               std::to_string(violations.size()) +
                               " posterior state(s)",
                           std::move(violations));
  }
  double total = 0.0;
  for (std::size_t x = 0; x < posterior.num_states(); ++x) {
    const double p = posterior.probability(x);
    if (p > 0.0) total += p * std::log2(p / prior.probability(x));
  }
  return total;
}

/// Partial Kullback-Leibler atoms of one prior-to-posterior update.
/// Individual atoms may be negative; their sum is the divergence.
struct GidResult {
  std::string posterior_id;
  std::string prior_id;
  SupportPolicy policy;
  AtomTable atoms;
  /// Sum of the atoms.
  double total = 0.0;
  /// D(P || Q) evaluated directly on the (policy-adjusted) tables.
  double direct_kl = 0.0;
};

namespace detail {

/// sum_x P(x) [cum_Q(x) - cum_P(x)] inverted over the lattice, with both
/// tables already support-compatible.
inline std::vector<double> partial_kl_values(const JointTable& posterior,
                                             const JointTable& prior,
                                             const RedundancyLattice& lattice,
                                             const RedundancyFunction& f,
                                             const ComputeOptions& options) {
  const SourceMarginals under_posterior(posterior);
  const SourceMarginals under_prior(prior);
  const std::size_t width = lattice.size();
  auto values = weighted_sum(
      posterior.support(), posterior, width, options,
      [&](std::size_t x, std::span<double> out) {
        std::vector<double> cum_p(width);
        f.evaluate_lattice(under_prior, lattice, x, out);
        require_finite(out, prior, x);
        f.evaluate_lattice(under_posterior, lattice, x, cum_p);
        require_finite(cum_p, posterior, x);
        for (std::size_t i = 0; i < width; ++i) out[i] -= cum_p[i];
      });
  lattice.invert(values);
  return values;
}

}  // namespace detail

/// Generalized information decomposition of updating from `prior` to
/// `posterior`: for each atom, the posterior expectation of the prior's local
/// partial entropy minus the posterior's.
inline GidResult partial_kl(const JointTable& posterior, const JointTable& prior,
                            const RedundancyFunction& f = h_min(),
                            const SupportPolicy& policy = {},
                            const ComputeOptions& options = {}) {
  if (!posterior.same_shape(prior)) {
    throw Error(ErrorKind::shape_mismatch,
                "posterior and prior have different variables or cardinalities");
  }
  const auto lattice = build_lattice(posterior.num_variables());
  auto [p, q] = apply_support_policy(posterior, prior, policy);

  GidResult result;
  result.policy = policy;
  result.atoms = AtomTable(lattice, posterior.names(),
                           detail::partial_kl_values(p, q, *lattice, f, options));
  result.total = result.atoms.sum();
  result.direct_kl = kl_divergence(p, q);
  return result;
}

}  // namespace gid
