#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gid/corpus.hpp"
#include "gid/decomposition.hpp"
#include "gid/distributions.hpp"
#include "gid/error.hpp"
#include "gid/io.hpp"
#include "gid/lattice.hpp"
#include "gid/measures.hpp"
#include "gid/redundancy.hpp"

namespace gid::cli {

enum class Format { tsv, json };

/// Everything one invocation needs, independent of argv parsing.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string redundancy = "hmin";
  double log_base = 2.0;
  std::string policy = "error";
  double epsilon = 1e-6;
  Format format = Format::tsv;
  std::size_t threads = 1;

  std::string state;          // ped: optional local state "0,1,1"
  std::string target;         // pid
  std::string form = "conditional";
  std::string corpus_name;    // corpus
  std::size_t n = 0;          // corpus, lattice
  std::uint64_t seed = 0;
};

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kSupportViolation = 3,
  kCapExceeded = 4,
};

namespace detail {

inline State parse_state(const std::string& text) {
  State state;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long value = std::stol(item, &used);
      if (used != item.size() || value < 0) throw std::invalid_argument(item);
      state.push_back(static_cast<std::uint32_t>(value));
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse_error, "invalid state '" + text + "'");
    }
  }
  if (state.empty()) throw Error(ErrorKind::parse_error, "empty state");
  return state;
}

inline void require_inputs(const RunConfig& config, std::size_t count) {
  if (config.inputs.size() != count) {
    throw Error(ErrorKind::invalid_argument,
                config.subcommand + " expects " + std::to_string(count) +
                    " distribution file(s)");
  }
}

inline void emit(std::ostream& out, const MeasureReport& report, const RunConfig& config,
                 const OutputOptions& output) {
  if (config.format == Format::json) {
    out << report_json(report, output).dump(2) << "\n";
  } else {
    out << report_tsv(report, output);
  }
}

inline int error_exit(std::ostream& err, const Error& e) {
  nlohmann::json doc = {{"error", to_string(e.kind())}, {"message", e.what()}};
  if (const auto* violation = dynamic_cast<const SupportViolation*>(&e)) {
    doc["states"] = violation->states();
  }
  err << doc.dump() << "\n";
  switch (e.kind()) {
    case ErrorKind::support_violation: return kSupportViolation;
    case ErrorKind::lattice_cap_exceeded: return kCapExceeded;
    case ErrorKind::parse_error:
    case ErrorKind::invalid_argument: return kUsage;
    default: return kFailure;
  }
}

}  // namespace detail

/// Executes one subcommand, writing the report to `out`. Errors propagate as
/// `gid::Error`.
inline void execute(const RunConfig& config, std::ostream& out) {
  if (!(config.log_base > 0.0) || config.log_base == 1.0 || !std::isfinite(config.log_base)) {
    throw Error(ErrorKind::invalid_argument, "log base must be positive and not 1");
  }
  const RedundancyFunction& f = redundancy_function(config.redundancy);
  const SupportPolicy policy = parse_support_policy(config.policy, config.epsilon);
  const ComputeOptions options{config.threads};
  const OutputOptions output{config.log_base};
  const std::string& cmd = config.subcommand;

  if (cmd == "ped") {
    detail::require_inputs(config, 1);
    const JointTable dist = load_distribution(config.inputs[0]);
    MeasureReport report;
    if (config.state.empty()) {
      report = ped_report(dist, f, options);
    } else {
      const State state = detail::parse_state(config.state);
      report.measure = "local-ped";
      report.atoms = local_ped(dist, state, f);
      report.scalar = report.atoms->sum();
      report.crosscheck = -std::log2(dist.probability(state));
    }
    if (config.format == Format::json) {
      detail::emit(out, report, config, output);
    } else {
      out << atom_table_tsv(*report.atoms, output);
    }
  } else if (cmd == "kl") {
    detail::require_inputs(config, 2);
    GidResult result = partial_kl(load_distribution(config.inputs[0]),
                                  load_distribution(config.inputs[1]), f, policy, options);
    result.posterior_id = config.inputs[0];
    result.prior_id = config.inputs[1];
    if (config.format == Format::json) {
      out << gid_json(result, output).dump(2) << "\n";
    } else {
      out << gid_tsv(result, output);
    }
  } else if (cmd == "tc") {
    detail::require_inputs(config, 1);
    detail::emit(out, tc_decomposition(load_distribution(config.inputs[0]), f, options),
                 config, output);
  } else if (cmd == "xent") {
    detail::require_inputs(config, 2);
    detail::emit(out,
                 cross_entropy_decomposition(load_distribution(config.inputs[0]),
                                             load_distribution(config.inputs[1]), f,
                                             policy, options),
                 config, output);
  } else if (cmd == "negent") {
    detail::require_inputs(config, 1);
    detail::emit(out, negentropy_decomposition(load_distribution(config.inputs[0]), f, options),
                 config, output);
  } else if (cmd == "oinfo") {
    detail::require_inputs(config, 1);
    const JointTable dist = load_distribution(config.inputs[0]);
    detail::emit(out,
                 dist.num_variables() == 3 ? o_information_atoms(dist, f, options)
                                           : o_information_report(dist),
                 config, output);
  } else if (cmd == "tse") {
    detail::require_inputs(config, 1);
    const JointTable dist = load_distribution(config.inputs[0]);
    detail::emit(out,
                 dist.num_variables() == 3 ? tse_atoms(dist, f, options) : tse_report(dist),
                 config, output);
  } else if (cmd == "pid") {
    detail::require_inputs(config, 1);
    const JointTable dist = load_distribution(config.inputs[0]);
    if (config.target.empty()) {
      throw Error(ErrorKind::invalid_argument, "pid needs --target");
    }
    const std::size_t target = variable_index(dist, config.target);
    if (config.form == "conditional") {
      detail::emit(out, pid_conditional(dist, target, f, options), config, output);
    } else if (config.form == "joint") {
      detail::emit(out, pid_joint(dist, target, f, policy, options), config, output);
    } else {
      throw Error(ErrorKind::invalid_argument,
                  "unknown pid form '" + config.form + "' (conditional|joint)");
    }
  } else if (cmd == "corpus") {
    const JointTable dist = make_gate(parse_gate(config.corpus_name, config.n, config.seed));
    out << distribution_to_json(dist).dump(2) << "\n";
  } else if (cmd == "lattice") {
    const auto lattice = build_lattice(config.n);
    const auto names = default_names(config.n);
    if (config.format == Format::json) {
      nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
      for (const auto& alpha : lattice->atoms()) atoms.push_back(format_atom(alpha, names));
      out << nlohmann::ordered_json{{"n", config.n}, {"count", lattice->size()}, {"atoms", atoms}}
                 .dump(2)
          << "\n";
    } else {
      out << "# n\t" << config.n << "\n# count\t" << lattice->size() << "\n";
      for (const auto& alpha : lattice->atoms()) out << format_atom(alpha, names) << "\n";
    }
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown subcommand '" + cmd + "'");
  }
}

/// Runs a config, mapping failures to a JSON error line on `err` and a
/// nonzero exit code.
inline int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    // Buffer so a failure never leaves a partial report on `out`.
    std::ostringstream buffer;
    execute(config, buffer);
    out << buffer.str();
    return kOk;
  } catch (const Error& e) {
    return detail::error_exit(err, e);
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return kFailure;
  }
}

/// argv front end.
inline int main(int argc, char** argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
  CLI::App app{"Generalized information decomposition of discrete distributions"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  std::string format = "tsv";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"tsv", "json"}));
  app.add_option("--redundancy", config.redundancy, "Redundancy function (hmin)");
  app.add_option("--log-base", config.log_base, "Logarithm base of reported values");
  app.add_option("--threads", config.threads, "Worker threads for the state loop");
  app.add_option("--policy", config.policy, "Support policy: error|jitter|restrict")
      ->check(CLI::IsMember({"error", "jitter", "restrict"}));
  app.add_option("--epsilon", config.epsilon, "Jitter added to every prior state");

  auto* ped = app.add_subcommand("ped", "Partial entropy decomposition");
  ped->add_option("dist", config.inputs, "Distribution file")->required();
  ped->add_option("--state", config.state, "Local decomposition at a state, e.g. 0,1,1");

  auto* kl = app.add_subcommand("kl", "Partial KL divergence of posterior from prior");
  kl->add_option("files", config.inputs, "Posterior then prior")->required()->expected(2);

  auto* tc = app.add_subcommand("tc", "Partial total correlation");
  tc->add_option("dist", config.inputs, "Distribution file")->required();

  auto* xent = app.add_subcommand("xent", "Partial cross entropy");
  xent->add_option("files", config.inputs, "Posterior then prior")->required()->expected(2);

  auto* negent = app.add_subcommand("negent", "Partial negentropy");
  negent->add_option("dist", config.inputs, "Distribution file")->required();

  auto* oinfo = app.add_subcommand("oinfo", "O-information (atom form for 3 variables)");
  oinfo->add_option("dist", config.inputs, "Distribution file")->required();

  auto* tse_cmd = app.add_subcommand("tse", "TSE complexity (atom form for 3 variables)");
  tse_cmd->add_option("dist", config.inputs, "Distribution file")->required();

  auto* pid = app.add_subcommand("pid", "Single-target PID");
  pid->add_option("dist", config.inputs, "Distribution file")->required();
  pid->add_option("--target", config.target, "Target variable name")->required();
  pid->add_option("--form", config.form, "conditional|joint")
      ->check(CLI::IsMember({"conditional", "joint"}));

  auto* corpus = app.add_subcommand("corpus", "Write a canonical distribution as JSON");
  corpus->add_option("name", config.corpus_name,
                     "xor|and|or|copy|parity|uniform|random")
      ->required();
  corpus->add_option("--n", config.n, "Variable count (input count for parity)");
  corpus->add_option("--seed", config.seed, "Seed for random");

  auto* lattice = app.add_subcommand("lattice", "List the redundancy lattice");
  lattice->add_option("--n", config.n, "Variable count")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  config.subcommand = app.get_subcommands().front()->get_name();
  config.format = format == "json" ? Format::json : Format::tsv;
  return run(config, out, err);
}

}  // namespace gid::cli
