#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gid/distributions.hpp"
#include "gid/error.hpp"

namespace gid {

/// Canonical source order: smaller sources first, ties broken by comparing the
/// ascending index lists lexicographically.
inline bool source_less(Source a, Source b) {
  if (a.size() != b.size()) return a.size() < b.size();
  std::uint32_t x = a.mask();
  std::uint32_t y = b.mask();
  while (x != 0 && y != 0) {
    const int i = std::countr_zero(x);
    const int j = std::countr_zero(y);
    if (i != j) return i < j;
    x &= x - 1;
    y &= y - 1;
  }
  return false;
}

/// A nonempty set of pairwise incomparable sources: one node of the
/// redundancy lattice. Sources are kept sorted by `source_less`, which makes
/// the source list itself the identity of the antichain.
class Antichain {
 public:
  Antichain() = default;

  explicit Antichain(std::vector<Source> sources) : sources_(std::move(sources)) {
    if (sources_.empty()) {
      throw Error(ErrorKind::invalid_argument, "antichain must be nonempty");
    }
    std::sort(sources_.begin(), sources_.end(), source_less);
    for (std::size_t i = 0; i < sources_.size(); ++i) {
      if (sources_[i].empty()) {
        throw Error(ErrorKind::invalid_argument, "antichain holds an empty source");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (sources_[i].subset_of(sources_[j]) ||
            sources_[j].subset_of(sources_[i])) {
          throw Error(ErrorKind::invalid_argument,
                      "antichain sources must be pairwise incomparable");
        }
      }
    }
  }

  Antichain(std::initializer_list<std::initializer_list<std::size_t>> sources)
      : Antichain(make_sources(sources)) {}

  std::span<const Source> sources() const { return sources_; }
  std::size_t size() const { return sources_.size(); }

  /// Union of every source's variables.
  std::uint32_t variables() const {
    std::uint32_t m = 0;
    for (Source s : sources_) m |= s.mask();
    return m;
  }

  friend bool operator==(const Antichain& a, const Antichain& b) {
    return a.sources_ == b.sources_;
  }

 private:
  static std::vector<Source> make_sources(
      std::initializer_list<std::initializer_list<std::size_t>> sources) {
    std::vector<Source> out;
    for (auto s : sources) out.push_back(Source::of(s));
    return out;
  }

  std::vector<Source> sources_;
};

/// alpha precedes beta iff every source of beta contains some source of alpha.
inline bool leq(const Antichain& alpha, const Antichain& beta) {
  for (Source b : beta.sources()) {
    bool found = false;
    for (Source a : alpha.sources()) {
      if (a.subset_of(b)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

inline constexpr std::size_t kDefaultLatticeCap = 5;
/// The order relation is stored as a dense reachability bitset, which is
/// affordable up to n = 5 (7579 atoms) and not beyond.
inline constexpr std::size_t kHardLatticeCap = 5;

/// Lattice size cap; `GID_LATTICE_CAP` may lower it.
inline std::size_t lattice_cap() {
  if (const char* env = std::getenv("GID_LATTICE_CAP")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value >= 1) {
      return std::min<std::size_t>(static_cast<std::size_t>(value),
                                   kHardLatticeCap);
    }
  }
  return kDefaultLatticeCap;
}

/// All antichains of nonempty subsets of n variables, ordered for display
/// and with the strict down-set of every atom precomputed.
class RedundancyLattice {
 public:
  explicit RedundancyLattice(std::size_t n, std::size_t cap = lattice_cap())
      : n_(n) {
    if (n == 0) {
      throw Error(ErrorKind::invalid_argument,
                  "lattice needs at least one variable");
    }
    if (n > cap) {
      throw Error(ErrorKind::lattice_cap_exceeded,
                  "redundancy lattice for n = " + std::to_string(n) +
                      " exceeds the cap of " + std::to_string(cap) +
                      " variables (antichain counts grow like the Dedekind "
                      "numbers)");
    }
    enumerate();
    build_order();
  }

  std::size_t n() const { return n_; }
  std::size_t size() const { return atoms_.size(); }
  std::span<const Antichain> atoms() const { return atoms_; }
  const Antichain& atom(std::size_t i) const { return atoms_[i]; }

  std::optional<std::size_t> find(const Antichain& alpha) const {
    auto it = index_.find(key_of(alpha));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const Antichain& alpha) const {
    if (auto i = find(alpha)) return *i;
    throw Error(ErrorKind::invalid_argument,
                "antichain is not an atom of the n = " + std::to_string(n_) +
                    " lattice");
  }

  bool leq(std::size_t a, std::size_t b) const {
    return (source_sets_[b] & ~upsets_[a]) == 0;
  }

  /// Order test restricted to atoms of this lattice.
  bool leq(const Antichain& alpha, const Antichain& beta) const {
    return leq(index_of(alpha), index_of(beta));
  }

  /// The all-singletons antichain.
  std::size_t bottom() const { return bottom_; }
  /// The antichain holding the single source of all variables.
  std::size_t top() const { return top_; }

  bool strictly_below(std::size_t a, std::size_t b) const {
    return (below_[b * words_ + a / 64] >> (a % 64)) & 1u;
  }

  /// Atoms strictly below `i`, ascending.
  std::vector<std::size_t> down_set(std::size_t i) const {
    std::vector<std::size_t> out;
    for_each_below(i, [&](std::size_t j) { out.push_back(j); });
    return out;
  }

  std::size_t down_set_size(std::size_t i) const { return down_counts_[i]; }

  template <class F>
  void for_each_below(std::size_t i, F&& f) const {
    const std::uint64_t* row = &below_[i * words_];
    for (std::size_t w = 0; w < words_; ++w) {
      for (std::uint64_t bits = row[w]; bits != 0; bits &= bits - 1) {
        f(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      }
    }
  }

  /// A linear extension of the order: every atom appears after all atoms
  /// below it.
  std::span<const std::size_t> topological_order() const { return topo_; }

  /// Replaces cumulative values with partial values in place.
  void invert(std::span<double> values) const {
    check_size(values.size());
    for (std::size_t i : topo_) {
      double below = 0.0;
      for_each_below(i, [&](std::size_t j) { below += values[j]; });
      values[i] -= below;
    }
  }

  /// Replaces partial values with cumulative values in place.
  void accumulate(std::span<double> values) const {
    check_size(values.size());
    const std::vector<double> partial(values.begin(), values.end());
    for (std::size_t i = 0; i < size(); ++i) {
      double total = partial[i];
      for_each_below(i, [&](std::size_t j) { total += partial[j]; });
      values[i] = total;
    }
  }

 private:
  using Key = std::vector<std::uint32_t>;

  static Key key_of(const Antichain& alpha) {
    Key key;
    for (Source s : alpha.sources()) key.push_back(s.mask());
    return key;
  }

  struct KeyHash {
    std::size_t operator()(const Key& key) const {
      std::size_t h = 1469598103934665603ull;
      for (std::uint32_t m : key) h = (h ^ m) * 1099511628211ull;
      return h;
    }
  };

  void check_size(std::size_t count) const {
    if (count != size()) {
      throw Error(ErrorKind::invalid_argument,
                  "atom value vector has " + std::to_string(count) +
                      " entries, lattice has " + std::to_string(size()));
    }
  }

  // Display order: compare the ascending source-size sequences element-wise,
  // with a longer sequence first when one is a prefix of the other, then the
  // source lists themselves. For n = 3 this is the row order of the usual
  // eighteen-atom table.
  static bool display_less(const Antichain& a, const Antichain& b) {
    const auto sa = a.sources();
    const auto sb = b.sources();
    const std::size_t common = std::min(sa.size(), sb.size());
    for (std::size_t k = 0; k < common; ++k) {
      if (sa[k].size() != sb[k].size()) return sa[k].size() < sb[k].size();
    }
    if (sa.size() != sb.size()) return sa.size() > sb.size();
    for (std::size_t k = 0; k < sa.size(); ++k) {
      if (sa[k] != sb[k]) return source_less(sa[k], sb[k]);
    }
    return false;
  }

  void enumerate() {
    std::vector<Source> sources;
    for (std::uint32_t m = 1; m < (std::uint32_t{1} << n_); ++m) {
      sources.emplace_back(m);
    }
    std::sort(sources.begin(), sources.end(), source_less);

    // Depth-first extension: only sources later in canonical order that are
    // incomparable with everything chosen so far.
    std::vector<Source> chosen;
    auto extend = [&](auto&& self, std::size_t from) -> void {
      for (std::size_t k = from; k < sources.size(); ++k) {
        const Source s = sources[k];
        bool ok = true;
        for (Source c : chosen) {
          if (s.subset_of(c) || c.subset_of(s)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        chosen.push_back(s);
        atoms_.emplace_back(chosen);
        self(self, k + 1);
        chosen.pop_back();
      }
    };
    extend(extend, 0);

    std::sort(atoms_.begin(), atoms_.end(), display_less);
    index_.reserve(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      index_.emplace(key_of(atoms_[i]), i);
    }
    std::vector<Source> singletons;
    for (std::size_t i = 0; i < n_; ++i) singletons.push_back(Source::of({i}));
    bottom_ = index_of(Antichain(singletons));
    top_ = index_of(Antichain({Source::all(n_)}));
  }

  void build_order() {
    const std::size_t count = atoms_.size();
    source_sets_.resize(count);
    upsets_.resize(count);
    const std::uint32_t full = Source::all(n_).mask();
    for (std::size_t i = 0; i < count; ++i) {
      for (Source s : atoms_[i].sources()) {
        source_sets_[i] |= std::uint64_t{1} << s.mask();
      }
      for (std::uint32_t m = 1; m <= full; ++m) {
        for (Source a : atoms_[i].sources()) {
          if (a.subset_of(Source(m))) {
            upsets_[i] |= std::uint64_t{1} << m;
            break;
          }
        }
      }
    }

    words_ = (count + 63) / 64;
    below_.assign(count * words_, 0);
    down_counts_.assign(count, 0);
    for (std::size_t b = 0; b < count; ++b) {
      std::uint64_t* row = &below_[b * words_];
      for (std::size_t a = 0; a < count; ++a) {
        if (a != b && leq(a, b)) {
          row[a / 64] |= std::uint64_t{1} << (a % 64);
          ++down_counts_[b];
        }
      }
    }

    // A strictly larger atom has a strictly larger down-set.
    topo_.resize(count);
    for (std::size_t i = 0; i < count; ++i) topo_[i] = i;
    std::stable_sort(topo_.begin(), topo_.end(), [&](std::size_t a, std::size_t b) {
      return down_counts_[a] < down_counts_[b];
    });
  }

  std::size_t n_;
  std::vector<Antichain> atoms_;
  std::unordered_map<Key, std::size_t, KeyHash> index_;
  std::size_t bottom_ = 0;
  std::size_t top_ = 0;
  // Bit s set when source mask s is in the antichain / contains one of its
  // sources. Source masks are < 32 for n <= 5.
  std::vector<std::uint64_t> source_sets_;
  std::vector<std::uint64_t> upsets_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> below_;
  std::vector<std::size_t> down_counts_;
  std::vector<std::size_t> topo_;
};

/// Shared, lazily built lattice for n variables. Lattices are immutable, so
/// one instance per n serves every caller.
inline std::shared_ptr<const RedundancyLattice> build_lattice(std::size_t n) {
  const std::size_t cap = lattice_cap();
  if (n == 0 || n > cap) {
    RedundancyLattice check(n, cap);  // throws with the appropriate message
  }
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const RedundancyLattice>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const RedundancyLattice>(n, cap);
  return slot;
}

/// Default variable names X1..Xn.
inline std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("X" + std::to_string(i + 1));
  return names;
}

/// Prints an antichain as `{X1,X2}{T}`: sources in canonical order, variables
/// in index order.
inline std::string format_atom(const Antichain& alpha,
                               std::span<const std::string> names) {
  std::string out;
  for (Source s : alpha.sources()) {
    out += '{';
    bool first = true;
    for (std::size_t i : s.indices()) {
      if (i >= names.size()) {
        throw Error(ErrorKind::invalid_argument, "atom refers to an unnamed variable");
      }
      if (!first) out += ',';
      out += names[i];
      first = false;
    }
    out += '}';
  }
  return out;
}

/// Parses the `{X1,X2}{T}` syntax. Whitespace between tokens is ignored.
inline Antichain parse_atom(std::string_view text,
                            std::span<const std::string> names) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorKind::parse_error,
                 "cannot parse atom '" + std::string(text) + "': " + why);
  };
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  };
  std::vector<Source> sources;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  };
  skip();
  while (pos < text.size()) {
    if (text[pos] != '{') throw fail("expected '{'");
    ++pos;
    std::uint32_t mask = 0;
    while (true) {
      skip();
      const std::size_t start = pos;
      while (pos < text.size() && text[pos] != ',' && text[pos] != '}' &&
             !is_space(text[pos])) {
        ++pos;
      }
      const std::string_view token = text.substr(start, pos - start);
      if (token.empty()) throw fail("empty variable name");
      auto it = std::find(names.begin(), names.end(), token);
      if (it == names.end()) {
        throw fail("unknown variable '" + std::string(token) + "'");
      }
      const auto bit = std::uint32_t{1} << (it - names.begin());
      if (mask & bit) throw fail("variable repeated within a source");
      mask |= bit;
      skip();
      if (pos >= text.size()) throw fail("unterminated source");
      if (text[pos] == '}') {
        ++pos;
        break;
      }
      ++pos;  // ','
    }
    sources.emplace_back(mask);
    skip();
  }
  if (sources.empty()) throw fail("no sources");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (sources[i] == sources[j]) throw fail("source repeated");
    }
  }
  try {
    return Antichain(std::move(sources));
  } catch (const Error& e) {
    throw fail(e.what());
  }
}

/// One value per lattice atom, in the lattice's display order.
struct AtomTable {
  std::shared_ptr<const RedundancyLattice> lattice;
  std::vector<std::string> variables;
  std::vector<double> values;

  AtomTable() = default;
  AtomTable(std::shared_ptr<const RedundancyLattice> lat,
            std::vector<std::string> names, std::vector<double> vals)
      : lattice(std::move(lat)),
        variables(std::move(names)),
        values(std::move(vals)) {
    if (!lattice) throw Error(ErrorKind::invalid_argument, "atom table without lattice");
    if (variables.empty()) variables = default_names(lattice->n());
    if (variables.size() != lattice->n()) {
      throw Error(ErrorKind::invalid_argument,
                  "atom table names do not match the lattice size");
    }
    if (values.size() != lattice->size()) {
      throw Error(ErrorKind::invalid_argument,
                  "atom table is missing values: has " +
                      std::to_string(values.size()) + ", lattice has " +
                      std::to_string(lattice->size()));
    }
  }

  static AtomTable zeros(std::shared_ptr<const RedundancyLattice> lat,
                         std::vector<std::string> names = {}) {
    std::vector<double> vals(lat->size(), 0.0);
    return AtomTable(std::move(lat), std::move(names), std::move(vals));
  }

  std::size_t size() const { return values.size(); }

  double operator[](const Antichain& alpha) const {
    return values[lattice->index_of(alpha)];
  }
  double at(std::string_view atom) const {
    return (*this)[parse_atom(atom, variables)];
  }
  std::string label(std::size_t i) const {
    return format_atom(lattice->atom(i), variables);
  }

  double sum() const {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
};

/// Partial values from cumulative values: each atom keeps what is not
/// already accounted for by the atoms strictly below it.
inline AtomTable moebius_inversion(const AtomTable& cumulative) {
  AtomTable out = cumulative;
  out.lattice->invert(out.values);
  return out;
}

/// Inverse of `moebius_inversion`: sums partial values over down-sets.
inline AtomTable accumulate(const AtomTable& partial) {
  AtomTable out = partial;
  out.lattice->accumulate(out.values);
  return out;
}

/// Cumulative value at the top atom, which is the whole-system quantity.
inline double top_value(const AtomTable& cumulative) {
  return cumulative.values[cumulative.lattice->top()];
}

}  // namespace gid
