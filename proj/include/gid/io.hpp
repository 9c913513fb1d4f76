#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gid/decomposition.hpp"
#include "gid/distributions.hpp"
#include "gid/error.hpp"
#include "gid/lattice.hpp"
#include "gid/measures.hpp"

namespace gid {

// ---------------------------------------------------------------------------
// Distribution files:
//   {"variables": ["X1","X2","T"], "cardinalities": [2,2,2],
//    "states": [{"s": [0,0,0], "p": 0.25}, ...]}

inline JointTable distribution_from_json(const nlohmann::json& doc) {
  auto fail = [](const std::string& why) {
    return Error(ErrorKind::parse_error, "distribution: " + why);
  };
  if (!doc.is_object()) throw fail("top level must be an object");
  for (const char* key : {"variables", "cardinalities", "states"}) {
    if (!doc.contains(key)) throw fail(std::string("missing \"") + key + "\"");
  }
  std::vector<std::string> names;
  std::vector<std::uint32_t> cards;
  std::vector<std::pair<State, double>> entries;
  try {
    names = doc.at("variables").get<std::vector<std::string>>();
    for (const auto& c : doc.at("cardinalities")) {
      if (!c.is_number_integer() || c.get<long long>() < 1) {
        throw fail("cardinalities must be positive integers");
      }
      cards.push_back(c.get<std::uint32_t>());
    }
    const auto& states = doc.at("states");
    if (!states.is_array()) throw fail("\"states\" must be an array");
    for (const auto& row : states) {
      if (!row.is_object() || !row.contains("s") || !row.contains("p")) {
        throw fail("every state needs \"s\" and \"p\"");
      }
      State s;
      for (const auto& v : row.at("s")) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
          throw fail("state coordinates must be non-negative integers");
        }
        s.push_back(v.get<std::uint32_t>());
      }
      if (!row.at("p").is_number()) throw fail("\"p\" must be a number");
      entries.emplace_back(std::move(s), row.at("p").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  return JointTable::from_entries(std::move(names), std::move(cards), entries);
}

inline JointTable parse_distribution(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse_error, std::string("distribution: ") + e.what());
  }
  return distribution_from_json(doc);
}

inline JointTable load_distribution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_distribution(buffer.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

/// Support states only, in lexicographic state order.
inline nlohmann::ordered_json distribution_to_json(const JointTable& dist) {
  nlohmann::ordered_json states = nlohmann::ordered_json::array();
  for (std::size_t x : dist.support()) {
    states.push_back({{"s", dist.decode(x)}, {"p", dist.probability(x)}});
  }
  return {{"variables", dist.names()},
          {"cardinalities", dist.cardinalities()},
          {"states", std::move(states)}};
}

// ---------------------------------------------------------------------------
// Report output.

/// Values are printed with 12 significant digits; magnitudes below 1e-12 print
/// as 0 so round-off residue does not leak into golden files.
inline std::string format_value(double v) {
  if (std::abs(v) < 1e-12) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// The double that `format_value` prints, so JSON and TSV agree exactly.
inline double printed_value(double v) { return std::stod(format_value(v)); }

struct OutputOptions {
  double log_base = 2.0;

  /// Converts bits to the configured unit.
  double scale(double bits) const {
    return log_base == 2.0 ? bits : bits / std::log2(log_base);
  }
  std::string value_column() const { return log_base == 2.0 ? "value_bits" : "value"; }
  std::string scalar_key() const { return log_base == 2.0 ? "scalar_bits" : "scalar"; }
  std::string crosscheck_key() const {
    return log_base == 2.0 ? "crosscheck_bits" : "crosscheck";
  }
};

/// `atom<TAB>value_bits` rows in lattice order.
inline std::string atom_table_tsv(const AtomTable& atoms, const OutputOptions& out = {}) {
  std::string text = "atom\t" + out.value_column() + "\n";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    text += atoms.label(i) + "\t" + format_value(out.scale(atoms.values[i])) + "\n";
  }
  return text;
}

/// Reads `atom_table_tsv` output back against a lattice and variable names.
inline AtomTable parse_atom_table_tsv(const std::string& text,
                                      std::shared_ptr<const RedundancyLattice> lattice,
                                      std::vector<std::string> names) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> values(lattice->size(), 0.0);
  std::vector<bool> seen(lattice->size(), false);
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::parse_error, "atom table row without a tab: " + line);
    }
    const std::size_t i = lattice->index_of(parse_atom(line.substr(0, tab), names));
    if (seen[i]) throw Error(ErrorKind::parse_error, "atom listed twice: " + line);
    seen[i] = true;
    values[i] = std::stod(line.substr(tab + 1));
  }
  for (bool s : seen) {
    if (!s) throw Error(ErrorKind::parse_error, "atom table does not cover every atom");
  }
  return AtomTable(std::move(lattice), std::move(names), std::move(values));
}

inline nlohmann::ordered_json atoms_json(const AtomTable& atoms, const OutputOptions& out) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    rows.push_back({{"atom", atoms.label(i)},
                    {out.value_column(), printed_value(out.scale(atoms.values[i]))}});
  }
  return rows;
}

inline nlohmann::ordered_json report_json(const MeasureReport& report, const OutputOptions& out = {}) {
  nlohmann::ordered_json doc;
  doc["measure"] = report.measure;
  doc[out.scalar_key()] = printed_value(out.scale(report.scalar));
  doc[out.crosscheck_key()] = printed_value(out.scale(report.crosscheck));
  if (!report.terms.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& term : report.terms) {
      rows.push_back({{"atom", term.atom},
                      {"coefficient", term.coefficient.str()},
                      {out.value_column(), printed_value(out.scale(term.value))}});
    }
    doc["atoms"] = std::move(rows);
  } else if (report.atoms) {
    doc["atoms"] = atoms_json(*report.atoms, out);
  } else {
    doc["atoms"] = nlohmann::ordered_json::array();
  }
  return doc;
}

inline std::string report_tsv(const MeasureReport& report, const OutputOptions& out = {}) {
  std::string text = "# measure\t" + report.measure + "\n";
  text += "# " + out.scalar_key() + "\t" + format_value(out.scale(report.scalar)) + "\n";
  text += "# " + out.crosscheck_key() + "\t" + format_value(out.scale(report.crosscheck)) + "\n";
  if (!report.terms.empty()) {
    text += "atom\tcoefficient\t" + out.value_column() + "\n";
    for (const auto& term : report.terms) {
      text += term.atom + "\t" + term.coefficient.str() + "\t" +
              format_value(out.scale(term.value)) + "\n";
    }
  } else if (report.atoms) {
    text += atom_table_tsv(*report.atoms, out);
  }
  return text;
}

inline nlohmann::ordered_json gid_json(const GidResult& result, const OutputOptions& out = {}) {
  nlohmann::ordered_json doc;
  doc["measure"] = "kl";
  doc["posterior"] = result.posterior_id;
  doc["prior"] = result.prior_id;
  doc["policy"] = result.policy.name();
  if (result.policy.kind == SupportPolicy::Kind::jitter) {
    doc["epsilon"] = result.policy.epsilon;
  }
  doc[out.scalar_key()] = printed_value(out.scale(result.total));
  doc[out.crosscheck_key()] = printed_value(out.scale(result.direct_kl));
  doc["atoms"] = atoms_json(result.atoms, out);
  return doc;
}

inline std::string gid_tsv(const GidResult& result, const OutputOptions& out = {}) {
  std::string text = "# measure\tkl\n";
  text += "# posterior\t" + result.posterior_id + "\n";
  text += "# prior\t" + result.prior_id + "\n";
  text += "# policy\t" + result.policy.name() + "\n";
  if (result.policy.kind == SupportPolicy::Kind::jitter) {
    text += "# epsilon\t" + format_value(result.policy.epsilon) + "\n";
  }
  text += "# " + out.scalar_key() + "\t" + format_value(out.scale(result.total)) + "\n";
  text += "# " + out.crosscheck_key() + "\t" + format_value(out.scale(result.direct_kl)) + "\n";
  return text + atom_table_tsv(result.atoms, out);
}

}  // namespace gid
