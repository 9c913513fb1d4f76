#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gid/decomposition.hpp"
#include "gid/distributions.hpp"
#include "gid/error.hpp"
#include "gid/lattice.hpp"
#include "gid/redundancy.hpp"

namespace gid {

/// Exact coefficient p/q with q > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  friend constexpr Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend constexpr Rational operator*(Rational a, Rational b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend constexpr bool operator==(Rational a, Rational b) {
    return a.num == b.num && a.den == b.den;
  }
  friend constexpr bool operator<(Rational a, Rational b) {
    return a.num * b.den < b.num * a.den;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    return den == 1 ? std::to_string(num)
                    : std::to_string(num) + "/" + std::to_string(den);
  }
};

/// One row of a coefficient-weighted atom expansion.
struct WeightedAtom {
  std::string atom;
  Rational coefficient;
  double value = 0.0;
};

/// A derived measure: its value from the atom route, the same quantity from
/// an independent direct formula, and the atoms behind it.
struct MeasureReport {
  std::string measure;
  double scalar = 0.0;
  double crosscheck = 0.0;
  std::optional<AtomTable> atoms;
  /// Filled for measures that are linear combinations of atoms.
  std::vector<WeightedAtom> terms;
};

// ---------------------------------------------------------------------------
// Direct (atom-free) formulas.

/// Total correlation of the variables in `subset`; 0 for a single variable.
inline double total_correlation(const JointTable& dist, Source subset) {
  dist.check_source(subset);
  if (subset.size() == 1) return 0.0;
  double sum = 0.0;
  for (std::size_t i : subset.indices()) sum += entropy(dist, Source::of({i}));
  return sum - entropy(dist, subset);
}

/// D(P || prod_i P(X_i)).
inline double total_correlation(const JointTable& dist) {
  return kl_divergence(dist, product_of_marginals(dist));
}

/// E_P[-log2 Q(x)].
inline double cross_entropy(const JointTable& posterior, const JointTable& prior) {
  auto violations = support_check(posterior, prior);
  if (!violations.empty()) {
    throw SupportViolation("cross entropy is infinite: prior excludes posterior states",
                           std::move(violations));
  }
  double total = 0.0;
  for (std::size_t x = 0; x < posterior.num_states(); ++x) {
    const double p = posterior.probability(x);
    if (p > 0.0) total -= p * std::log2(prior.probability(x));
  }
  return total;
}

/// O-information as (2 - N) TC(X) + sum_i TC(X without i).
inline double o_information(const JointTable& dist) {
  const std::size_t n = dist.num_variables();
  if (n < 3) {
    throw Error(ErrorKind::invalid_argument,
                "O-information needs at least 3 variables, got " + std::to_string(n));
  }
  const Source whole = Source::all(n);
  double omega = (2.0 - static_cast<double>(n)) * total_correlation(dist, whole);
  for (std::size_t i = 0; i < n; ++i) {
    omega += total_correlation(dist, Source(whole.mask() & ~(std::uint32_t{1} << i)));
  }
  return omega;
}

/// TSE complexity: sum over subset sizes i of (i/N) TC(X) minus the mean TC of
/// the size-i subsets.
inline double tse(const JointTable& dist) {
  const std::size_t n = dist.num_variables();
  if (n < 2) {
    throw Error(ErrorKind::invalid_argument,
                "TSE complexity needs at least 2 variables, got " + std::to_string(n));
  }
  if (n > 20) {
    throw Error(ErrorKind::invalid_argument, "TSE complexity is limited to 20 variables");
  }
  const double whole = total_correlation(dist, Source::all(n));
  std::vector<double> sum_by_size(n + 1, 0.0);
  std::vector<double> count_by_size(n + 1, 0.0);
  for (std::uint32_t m = 1; m < (std::uint32_t{1} << n); ++m) {
    const Source s(m);
    sum_by_size[s.size()] += total_correlation(dist, s);
    count_by_size[s.size()] += 1.0;
  }
  double total = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    total += static_cast<double>(i) / static_cast<double>(n) * whole -
             sum_by_size[i] / count_by_size[i];
  }
  return total;
}

namespace detail {

/// O-information as TC minus dual total correlation, where
/// DTC = sum_i H(X without i) - (N - 1) H(X).
inline double o_information_from_dtc(const JointTable& dist) {
  const std::size_t n = dist.num_variables();
  const Source whole = Source::all(n);
  const double joint = entropy(dist);
  double dtc = -(static_cast<double>(n) - 1.0) * joint;
  for (std::size_t i = 0; i < n; ++i) {
    dtc += entropy(dist, Source(whole.mask() & ~(std::uint32_t{1} << i)));
  }
  return total_correlation(dist, whole) - dtc;
}

/// TSE complexity in its entropy form: sum_i <H(X^gamma_i)> - (i/N) H(X).
inline double tse_from_entropies(const JointTable& dist) {
  const std::size_t n = dist.num_variables();
  const double joint = entropy(dist);
  std::vector<double> sum_by_size(n + 1, 0.0);
  std::vector<double> count_by_size(n + 1, 0.0);
  for (std::uint32_t m = 1; m < (std::uint32_t{1} << n); ++m) {
    const Source s(m);
    sum_by_size[s.size()] += entropy(dist, s);
    count_by_size[s.size()] += 1.0;
  }
  double total = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    total += sum_by_size[i] / count_by_size[i] -
             static_cast<double>(i) / static_cast<double>(n) * joint;
  }
  return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Atom decompositions.

inline MeasureReport tc_decomposition(const JointTable& dist,
                                      const RedundancyFunction& f = h_min(),
                                      const ComputeOptions& options = {}) {
  // Every posterior state is a combination of individually possible values,
  // so the product prior always covers the posterior support.
  GidResult gid = partial_kl(dist, product_of_marginals(dist), f,
                             SupportPolicy::error(), options);
  MeasureReport report;
  report.measure = "tc";
  report.scalar = gid.total;
  report.crosscheck = total_correlation(dist);
  report.atoms = std::move(gid.atoms);
  return report;
}

/// Atoms of E_P[h_Q], i.e. the prior's local partial entropies averaged under
/// the posterior.
inline MeasureReport cross_entropy_decomposition(
    const JointTable& posterior, const JointTable& prior,
    const RedundancyFunction& f = h_min(), const SupportPolicy& policy = {},
    const ComputeOptions& options = {}) {
  if (!posterior.same_shape(prior)) {
    throw Error(ErrorKind::shape_mismatch,
                "posterior and prior have different variables or cardinalities");
  }
  const auto lattice = build_lattice(posterior.num_variables());
  auto [p, q] = apply_support_policy(posterior, prior, policy);
  const SourceMarginals under_prior(q);
  auto values = detail::weighted_sum(
      p.support(), p, lattice->size(), options,
      [&](std::size_t x, std::span<double> out) {
        f.evaluate_lattice(under_prior, *lattice, x, out);
        detail::require_finite(out, q, x);
      });
  lattice->invert(values);
  MeasureReport report;
  report.measure = "xent";
  report.atoms = AtomTable(lattice, posterior.names(), std::move(values));
  report.scalar = report.atoms->sum();
  report.crosscheck = cross_entropy(p, q);
  return report;
}

/// Partial divergence from the uniform distribution over the full state space.
inline MeasureReport negentropy_decomposition(const JointTable& dist,
                                              const RedundancyFunction& f = h_min(),
                                              const ComputeOptions& options = {}) {
  GidResult gid = partial_kl(dist, uniform_like(dist), f, SupportPolicy::error(), options);
  double max_entropy = 0.0;
  for (std::uint32_t c : dist.cardinalities()) max_entropy += std::log2(static_cast<double>(c));
  MeasureReport report;
  report.measure = "negent";
  report.scalar = gid.total;
  report.crosscheck = max_entropy - entropy(dist);
  report.atoms = std::move(gid.atoms);
  return report;
}

/// Coefficient of one three-variable atom, written over X1, X2, X3.
struct AtomCoefficient {
  const char* atom;
  Rational coefficient;
};

/// O-information of three variables as a combination of partial total
/// correlation atoms. Pair atoms {Xi,Xj} carry coefficient 0.
inline const std::vector<AtomCoefficient>& o_information_coefficients() {
  static const std::vector<AtomCoefficient> table = {
      {"{X1}{X2}{X3}", 2},
      {"{X1}{X2}", 2},
      {"{X1}{X3}", 2},
      {"{X2}{X3}", 2},
      {"{X1}{X2,X3}", 2},
      {"{X2}{X1,X3}", 2},
      {"{X3}{X1,X2}", 2},
      {"{X1}", 1},
      {"{X2}", 1},
      {"{X3}", 1},
      {"{X1,X2}{X1,X3}{X2,X3}", 2},
      {"{X1,X2}{X1,X3}", 1},
      {"{X1,X2}{X2,X3}", 1},
      {"{X1,X3}{X2,X3}", 1},
      {"{X1,X2}", 0},
      {"{X1,X3}", 0},
      {"{X2,X3}", 0},
      {"{X1,X2,X3}", -1},
  };
  return table;
}

/// TSE complexity of three variables as a combination of partial total
/// correlation atoms. Atoms in the middle of the lattice ({Xi} and the
/// three-pair antichain) carry coefficient 0.
inline const std::vector<AtomCoefficient>& tse_coefficients() {
  static const std::vector<AtomCoefficient> table = {
      {"{X1}{X2}{X3}", -1},
      {"{X1}{X2}", {-2, 3}},
      {"{X1}{X3}", {-2, 3}},
      {"{X2}{X3}", {-2, 3}},
      {"{X1}{X2,X3}", {-1, 3}},
      {"{X2}{X1,X3}", {-1, 3}},
      {"{X3}{X1,X2}", {-1, 3}},
      {"{X1}", 0},
      {"{X2}", 0},
      {"{X3}", 0},
      {"{X1,X2}{X1,X3}{X2,X3}", 0},
      {"{X1,X2}{X1,X3}", {1, 3}},
      {"{X1,X2}{X2,X3}", {1, 3}},
      {"{X1,X3}{X2,X3}", {1, 3}},
      {"{X1,X2}", {2, 3}},
      {"{X1,X3}", {2, 3}},
      {"{X2,X3}", {2, 3}},
      {"{X1,X2,X3}", 1},
  };
  return table;
}

namespace detail {

/// Applies a three-variable coefficient table to TC atoms. Atoms sharing a
/// coefficient are summed first so each rational multiplies once.
inline MeasureReport weighted_tc_report(const JointTable& dist,
                                        const RedundancyFunction& f,
                                        const ComputeOptions& options,
                                        std::span<const AtomCoefficient> table,
                                        std::string measure, double direct) {
  if (dist.num_variables() != 3) {
    throw Error(ErrorKind::invalid_argument,
                "the atom form of " + measure + " is defined for exactly 3 variables");
  }
  MeasureReport tc = tc_decomposition(dist, f, options);
  const AtomTable& atoms = *tc.atoms;
  const std::vector<std::string> generic = default_names(3);

  MeasureReport report;
  report.measure = std::move(measure);
  std::map<std::pair<std::int64_t, std::int64_t>, double> by_coefficient;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Antichain& alpha = atoms.lattice->atom(i);
    const std::string generic_label = format_atom(alpha, generic);
    Rational c;
    bool found = false;
    for (const auto& entry : table) {
      if (generic_label == entry.atom) {
        c = entry.coefficient;
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(ErrorKind::invalid_argument,
                  "coefficient table is missing atom " + generic_label);
    }
    report.terms.push_back({atoms.label(i), c, atoms.values[i]});
    by_coefficient[{c.num, c.den}] += atoms.values[i];
  }
  double scalar = 0.0;
  for (const auto& [c, sum] : by_coefficient) {
    scalar += static_cast<double>(c.first) * sum / static_cast<double>(c.second);
  }
  report.scalar = scalar;
  report.crosscheck = direct;
  report.atoms = atoms;
  return report;
}

}  // namespace detail

inline MeasureReport o_information_atoms(const JointTable& dist,
                                         const RedundancyFunction& f = h_min(),
                                         const ComputeOptions& options = {}) {
  if (dist.num_variables() != 3) {
    throw Error(ErrorKind::invalid_argument,
                "the atom form of oinfo is defined for exactly 3 variables");
  }
  return detail::weighted_tc_report(dist, f, options, o_information_coefficients(),
                                    "oinfo", o_information(dist));
}

inline MeasureReport tse_atoms(const JointTable& dist,
                               const RedundancyFunction& f = h_min(),
                               const ComputeOptions& options = {}) {
  if (dist.num_variables() != 3) {
    throw Error(ErrorKind::invalid_argument,
                "the atom form of tse is defined for exactly 3 variables");
  }
  return detail::weighted_tc_report(dist, f, options, tse_coefficients(), "tse",
                                    tse(dist));
}

namespace detail {

inline std::pair<Source, Source> pid_roles(const JointTable& dist, std::size_t target) {
  if (dist.num_variables() != 3) {
    throw Error(ErrorKind::invalid_argument,
                "single-target PID needs exactly 3 variables (two sources and a target)");
  }
  if (target >= 3) {
    throw Error(ErrorKind::invalid_argument, "target index out of range");
  }
  const Source t = Source::of({target});
  return {Source(Source::all(3).mask() & ~t.mask()), t};
}

}  // namespace detail

/// Resolves a target variable by name.
inline std::size_t variable_index(const JointTable& dist, const std::string& name) {
  const auto& names = dist.names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(ErrorKind::invalid_argument, "no variable named '" + name + "'");
}

/// Four-atom PID: for each target value, the partial divergence from the
/// sources' joint marginal to their conditional given the target, averaged
/// under P(T). Atoms live on the two-source lattice.
inline MeasureReport pid_conditional(const JointTable& dist, std::size_t target,
                                     const RedundancyFunction& f = h_min(),
                                     const ComputeOptions& options = {}) {
  const auto [sources, t] = detail::pid_roles(dist, target);
  const JointTable prior = marginalize(dist, sources);
  const JointTable target_marginal = marginalize(dist, t);
  const auto lattice = build_lattice(2);
  std::vector<double> values(lattice->size(), 0.0);
  for (std::uint32_t tv = 0; tv < dist.cardinalities()[target]; ++tv) {
    const double pt = target_marginal.probability(tv);
    if (pt <= 0.0) continue;
    const std::uint32_t value[] = {tv};
    const JointTable posterior = condition(dist, t, value);
    // P(x1,x2 | t) > 0 implies P(x1,x2) > 0.
    if (!support_check(posterior, prior).empty()) {
      throw Error(ErrorKind::support_violation,
                  "conditional mass outside the marginal support");
    }
    const GidResult gid =
        partial_kl(posterior, prior, f, SupportPolicy::error(), options);
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] += pt * gid.atoms.values[i];
    }
  }
  MeasureReport report;
  report.measure = "pid-conditional";
  report.atoms = AtomTable(lattice, prior.names(), std::move(values));
  report.scalar = report.atoms->sum();
  report.crosscheck = mutual_information(dist, sources, t);
  return report;
}

/// Eighteen-atom PID: partial divergence from P(X1,X2) x P(T) to the joint.
inline MeasureReport pid_joint(const JointTable& dist, std::size_t target,
                               const RedundancyFunction& f = h_min(),
                               const SupportPolicy& policy = {},
                               const ComputeOptions& options = {}) {
  const auto [sources, t] = detail::pid_roles(dist, target);
  const Source blocks[] = {sources, t};
  GidResult gid = partial_kl(dist, product_of_blocks(dist, blocks), f, policy, options);
  MeasureReport report;
  report.measure = "pid-joint";
  report.scalar = gid.total;
  report.crosscheck = mutual_information(dist, sources, t);
  report.atoms = std::move(gid.atoms);
  return report;
}

/// O-information without atoms, for any N >= 3, cross-checked against the
/// TC - DTC route.
inline MeasureReport o_information_report(const JointTable& dist) {
  MeasureReport report;
  report.measure = "oinfo";
  report.scalar = o_information(dist);
  report.crosscheck = detail::o_information_from_dtc(dist);
  return report;
}

inline MeasureReport tse_report(const JointTable& dist) {
  MeasureReport report;
  report.measure = "tse";
  report.scalar = tse(dist);
  report.crosscheck = detail::tse_from_entropies(dist);
  return report;
}

/// Expected partial entropy decomposition packaged as a report whose
/// cross-check is the Shannon entropy.
inline MeasureReport ped_report(const JointTable& dist,
                                const RedundancyFunction& f = h_min(),
                                const ComputeOptions& options = {}) {
  MeasureReport report;
  report.measure = "ped";
  report.atoms = expected_ped(dist, f, options);
  report.scalar = report.atoms->sum();
  report.crosscheck = entropy(dist);
  return report;
}

}  // namespace gid
