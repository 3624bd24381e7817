#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tspbmc/error.hpp"
#include "tspbmc/library.hpp"
#include "tspbmc/oracle.hpp"
#include "tspbmc/protocol.hpp"
#include "tspbmc/solver.hpp"
#include "tspbmc/tiis.hpp"
#include "tspbmc/witness.hpp"

namespace tspbmc::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Raised for unusable inputs; maps to exit code 2.
struct InputError : Error {
  using Error::Error;
};

struct Inputs {
  std::string protocol;
  std::string scenario;
  std::optional<int> sessions;
  std::string eavesdrop;  // "", on, off
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Loaded {
  ProtocolSpec spec;
  Scenario scenario;
  int sessions = 1;
};

Loaded load(const Inputs& in) {
  const LibraryEntry* entry = find_library_entry(in.protocol);
  std::string protocol_text = entry ? entry->protocol_text : read_file(in.protocol);

  std::string scenario_text;
  if (entry && entry->scenarios.count(in.scenario)) {
    scenario_text = entry->scenarios.at(in.scenario);
  } else if (fs::is_regular_file(in.scenario)) {
    scenario_text = read_file(in.scenario);
  } else if (in.scenario == "fair") {
    scenario_text = R"({"name": "fair", "overrides": []})";
  } else {
    throw InputError("unknown scenario '" + in.scenario + "'");
  }

  Loaded l;
  l.spec = parse_protocol(protocol_text);
  l.scenario = parse_scenario(scenario_text);
  if (in.eavesdrop == "on") l.scenario.eavesdrop = true;
  if (in.eavesdrop == "off") l.scenario.eavesdrop = false;
  l.sessions = in.sessions.value_or(l.scenario.sessions.value_or(1));
  if (l.sessions < 1) throw InputError("--sessions must be >= 1");
  return l;
}

TiisModel load_model(const Inputs& in) {
  Loaded l = load(in);
  return build_model(l.spec, l.scenario, l.sessions);
}

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("protocol", in.protocol, "Library protocol name or protocol file")->required();
  cmd->add_option("scenario", in.scenario, "Scenario name from the library or scenario JSON file")->required();
  cmd->add_option("--sessions,-k", in.sessions, "Number of sessions (default: scenario value, else 1)");
  cmd->add_option("--eavesdrop", in.eavesdrop, "Override whether the intruder sees all traffic")
      ->check(CLI::IsMember({"on", "off"}));
}

struct Output {
  std::string format = "text";
  std::string path;
};

void add_output(CLI::App* cmd, Output& o) {
  cmd->add_option("--format", o.format, "Witness format")->check(CLI::IsMember({"text", "json", "html"}));
  cmd->add_option("--out,-o", o.path, "Write the witness to this file");
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw InputError("cannot write '" + path + "'");
}

std::string render(const Trace& t, const std::string& format) {
  if (format == "json") return render_json(t);
  if (format == "html") return render_html(t);
  return render_text(t);
}

// Shared tail of check and oracle once a verdict class is known.
int report(const std::optional<Trace>& trace, int bound, const TiisModel& model, const Output& o,
           std::ostream& out, std::ostream& err) {
  if (!trace) {
    if (o.format == "json")
      emit(json{{"protocol", model.protocol_name}, {"scenario", model.scenario_name}, {"sessions", model.sessions},
                {"attack", false}, {"bound", bound}}
                   .dump(2) + "\n",
           o.path, out);
    else
      out << "no attack up to bound " << bound << "\n";
    return kNoAttack;
  }
  ReplayReport rep = replay(*trace, model);
  if (!rep) {
    err << "error: witness fails replay at position " << rep.position << " (" << to_string(rep.kind)
        << "): " << rep.detail << "\n";
    return kInconclusive;
  }
  if (o.format != "json" || !o.path.empty())
    out << "attack found at bound " << trace->bound << " (witness replays valid)\n";
  emit(render(*trace, o.format), o.path, out);
  if (!o.path.empty()) out << "witness written to " << o.path << "\n";
  return kAttack;
}

json model_to_json(const TiisModel& m) {
  json universe = json::array();
  for (TermId id = 0; id < m.universe.size(); ++id) universe.push_back({{"id", id}, {"term", m.universe.at(id).text()}});
  json rules = json::array();
  for (const DerivationRule& r : m.rules)
    rules.push_back({{"kind", std::string(to_string(r.kind))}, {"premises", r.premises}, {"conclusion", r.conclusion}});
  json steps = json::array();
  for (const ExecStep& e : m.exec_steps) {
    json checks = json::array();
    for (const LifetimeCheck& c : e.lifetime_checks)
      checks.push_back({{"fresh", c.fresh.text()}, {"bound", rational_to_string(c.bound)}});
    steps.push_back({{"sid", e.sid},
                     {"step", e.index},
                     {"sender", e.sender},
                     {"receiver", e.receiver},
                     {"message", e.message.text()},
                     {"min_delay", rational_to_string(e.min_delay)},
                     {"gated", e.gated},
                     {"lifetime_checks", std::move(checks)}});
  }
  json initial = json::object();
  for (const auto& [agent, ids] : m.initial_knowledge) initial[agent] = ids;
  json generation = json::array();
  for (const auto& [id, ref] : m.generation)
    generation.push_back({{"term", m.universe.at(id).text()}, {"sid", ref.sid}, {"step", ref.index}});
  std::vector<std::string> secrets;
  for (TermId id : m.secret_ids()) secrets.push_back(m.universe.at(id).text());
  return {{"protocol", m.protocol_name},
          {"scenario", m.scenario_name},
          {"sessions", m.sessions},
          {"agents", m.agents},
          {"depth", m.depth},
          {"strata", {{"decompose", m.strata.decompose}, {"compose", m.strata.compose}}},
          {"eavesdrop", m.eavesdrop},
          {"universe", std::move(universe)},
          {"rules", std::move(rules)},
          {"exec_steps", std::move(steps)},
          {"initial_knowledge", std::move(initial)},
          {"generation", std::move(generation)},
          {"goal", {{"secrets", secrets}, {"require_complete", m.require_complete}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounded model checker for timed security protocols"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tspbmc 0.1.0");

  Inputs in;
  Output o;
  SolverConfig solver;
  solver.command = default_solver_command();
  std::optional<int> max_bound;
  int bound = 0;
  std::optional<int> depth;
  std::string export_dir;

  auto* check = app.add_subcommand("check", "Search for an attack by bounded model checking");
  add_inputs(check, in);
  add_output(check, o);
  check->add_option("--max-bound", max_bound, "Largest bound tried (default: twice the step count)");
  check->add_option("--solver", solver.command, "Solver command line (env TSPBMC_SOLVER)");
  check->add_option("--timeout", solver.timeout_seconds, "Solver timeout per bound, seconds");

  auto* encode_cmd = app.add_subcommand("encode", "Write the SMT-LIB2 script for one bound");
  add_inputs(encode_cmd, in);
  encode_cmd->add_option("--bound,-n", bound, "Bound n")->required();
  encode_cmd->add_option("--out,-o", o.path, "Output file");

  auto* oracle_cmd = app.add_subcommand("oracle", "Search for an attack by explicit-state exploration");
  add_inputs(oracle_cmd, in);
  add_output(oracle_cmd, o);
  oracle_cmd->add_option("--depth", depth, "Search depth (default: twice the step count)");

  auto* list_cmd = app.add_subcommand("list", "List the embedded protocol library");
  list_cmd->add_option("--export", export_dir, "Write library files into this directory");

  auto* dump_cmd = app.add_subcommand("dump-model", "Print the verification model as JSON");
  add_inputs(dump_cmd, in);
  dump_cmd->add_option("--out,-o", o.path, "Output file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (list_cmd->parsed()) {
      if (!export_dir.empty()) {
        for (const fs::path& p : export_library(export_dir)) out << p.string() << "\n";
        return 0;
      }
      for (const LibraryEntry& e : library()) {
        out << e.name << "\n  scenarios:";
        for (const auto& s : e.scenarios) {
          bool attack = std::find(e.attack_scenarios.begin(), e.attack_scenarios.end(), s.first) !=
                        e.attack_scenarios.end();
          out << " " << s.first << (attack ? " (attack)" : "");
        }
        out << "\n  " << e.notes << "\n";
      }
      return 0;
    }

    if (encode_cmd->parsed()) {
      if (bound < 1) throw InputError("--bound must be >= 1");
      TiisModel m = load_model(in);
      emit(encode({m, bound}).text, o.path, out);
      return 0;
    }

    if (dump_cmd->parsed()) {
      TiisModel m = load_model(in);
      emit(model_to_json(m).dump(2) + "\n", o.path, out);
      return 0;
    }

    if (oracle_cmd->parsed()) {
      if (depth && *depth < 1) throw InputError("--depth must be >= 1");
      TiisModel m = load_model(in);
      int d = depth.value_or(std::max(1, static_cast<int>(2 * m.exec_steps.size())));
      OracleResult r = explicit_reach(m, d);
      return report(r.trace, r.depth, m, o, out, err);
    }

    if (check->parsed()) {
      solver.max_bound = max_bound;
      if (max_bound && *max_bound < 1) throw InputError("--max-bound must be >= 1");
      if (!(solver.timeout_seconds > 0)) throw InputError("--timeout must be positive");
      TiisModel m = load_model(in);
      for (const std::string& w : honest_decryptability_warnings(m)) err << "warning: " << w << "\n";
      Verdict v = iterate_bounds(m, solver);
      if (v.outcome == Verdict::Outcome::inconclusive) {
        err << "inconclusive: " << v.reason << "\n";
        return kInconclusive;
      }
      std::optional<Trace> trace;
      if (v.outcome == Verdict::Outcome::attack_found) trace = decode(*v.result, *v.script, m);
      return report(trace, v.bound, m, o, out, err);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kInconclusive;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace tspbmc::cli
