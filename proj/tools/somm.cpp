// Command-line front door. `check` answers whether a litmus test's final
// state is reachable under a chosen memory model, `emit` writes the solver
// instance to disk, `bench` times the store-buffer family, and `validate`
// reports which event-structure laws a file breaks. The hidden solve-qcir
// and solve-qdimacs commands read an emitted file and answer through the
// exit code (10 = true, 20 = false), which makes the tool usable as its own
// external solver.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "somm/error.hpp"
#include "somm/es/event_structure.hpp"
#include "somm/es/io.hpp"
#include "somm/litmus/frontend.hpp"
#include "somm/litmus/litmus.hpp"
#include "somm/mm/models.hpp"
#include "somm/oracle/oracle.hpp"
#include "somm/qbf/circuit.hpp"
#include "somm/qbf/external.hpp"
#include "somm/qbf/qcir.hpp"
#include "somm/qbf/qdimacs.hpp"
#include "somm/qbf/solve.hpp"
#include "somm/qbf/translate.hpp"

namespace {

using nlohmann::ordered_json;
using namespace somm;

// Bad invocations and filesystem failures get their own kinds so scripts can
// tell them from the library's parse/timeout/cap errors.
struct UsageError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct BudgetError : Error {
  using Error::Error;
};

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const BudgetError*>(&e)) return "budget";
  if (dynamic_cast<const litmus::EventCapError*>(&e)) return "event-cap";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const FormatError*>(&e)) return "parse";
  if (dynamic_cast<const qbf::TimeoutError*>(&e)) return "timeout";
  if (dynamic_cast<const qbf::MemCapError*>(&e)) return "mem-cap";
  if (dynamic_cast<const qbf::ExternalError*>(&e)) return "solver";
  return "error";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

mm::ModelId model_id(const std::string& name) {
  if (name == "sc") return mm::ModelId::Sc;
  if (name == "ra") return mm::ModelId::Ra;
  if (name == "c11") return mm::ModelId::Cpp;
  if (name == "jr") return mm::ModelId::Jr;
  throw UsageError("unknown model '" + name + "'");
}

std::optional<std::set<int>> parse_values(const std::string& csv) {
  if (csv.empty()) return std::nullopt;
  std::set<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.insert(v);
    } catch (const std::exception&) {
      throw UsageError("--values expects integers, got '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--values is empty");
  return out;
}

// Options common to every command that runs the pipeline.
struct RunConfig {
  std::string file;
  std::string model = "sc";
  std::string backend = "embedded";
  double timeout = 1800.0;
  std::uint64_t mem_cap_mb = 4096;
  int jr_n = -1;  // < 0 means the model's own default
  std::string values;
  int event_cap = 10000;
  std::uint64_t oracle_budget = 20'000'000;
  bool machine = false;

  qbf::Limits limits() const {
    if (timeout <= 0) throw UsageError("--timeout must be positive");
    if (mem_cap_mb == 0) throw UsageError("--mem-cap must be positive");
    qbf::Limits lim;
    lim.timeout_seconds = timeout;
    lim.mem_cap_bytes = mem_cap_mb << 20;
    return lim;
  }
};

es::EventStructure build_structure(const std::string& text,
                                   const RunConfig& cfg) {
  litmus::BuildOptions opts;
  opts.values = parse_values(cfg.values);
  if (cfg.event_cap <= 0) throw UsageError("--event-cap must be positive");
  opts.event_cap = cfg.event_cap;
  return litmus::build_event_structure(litmus::parse(text), opts);
}

mm::ModelSentence make_sentence(const so::RelStructure& rs,
                                const RunConfig& cfg) {
  const mm::ModelId id = model_id(cfg.model);
  if (cfg.jr_n >= 0) {
    if (id != mm::ModelId::Jr)
      throw UsageError("--jr-n only applies to the jr model");
    mm::JrOptions j;
    j.n = cfg.jr_n;
    return mm::gen_jr(rs, j);
  }
  return mm::generate(id, rs);
}

std::string ev_name(const es::EventStructure& es, int i) {
  const std::string& l = es.event(i).label;
  return l.empty() ? "e" + std::to_string(i) : l;
}

// Group the true-assigned variables of a satisfying assignment by the
// second-order variable they instantiate. Fresh helper predicates (names
// starting with '_') stay internal.
std::map<std::string, std::vector<std::vector<int>>> witness_groups(
    const qbf::Qbf& q, const std::vector<std::pair<qbf::VarId, bool>>& w) {
  std::map<std::string, std::vector<std::vector<int>>> groups;
  for (const auto& [v, val] : w) {
    if (!val) continue;
    const auto& info = q.circuit->vars()[static_cast<size_t>(v)];
    if (info.name.empty() || info.name[0] == '_') continue;
    groups[info.name].push_back(info.tuple);
  }
  for (auto& [name, tuples] : groups) std::sort(tuples.begin(), tuples.end());
  return groups;
}

void print_witness(std::ostream& os, const es::EventStructure& es,
                   const std::map<std::string, std::vector<std::vector<int>>>&
                       groups) {
  for (const auto& [name, tuples] : groups) {
    os << "  " << name << " = {";
    bool first = true;
    for (const auto& t : tuples) {
      os << (first ? "" : ", ");
      first = false;
      if (t.size() == 1) {
        os << es::describe(es.event(t[0]), t[0]);
      } else {
        for (size_t i = 0; i < t.size(); ++i)
          os << (i ? " -> " : "") << ev_name(es, t[i]);
      }
    }
    os << "}\n";
  }
}

ordered_json witness_json(
    const std::map<std::string, std::vector<std::vector<int>>>& groups) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, tuples] : groups) {
    ordered_json arr = ordered_json::array();
    for (const auto& t : tuples) {
      if (t.size() == 1)
        arr.push_back(t[0]);
      else
        arr.push_back(t);
    }
    j[name] = std::move(arr);
  }
  return j;
}

std::uint64_t ms_since(std::chrono::steady_clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count());
}

int cmd_check(const RunConfig& cfg) {
  const es::EventStructure es = build_structure(slurp(cfg.file), cfg);
  const so::RelStructure rs = es.to_rel_structure();

  const auto start = std::chrono::steady_clock::now();
  const mm::ModelSentence ms = make_sentence(rs, cfg);

  bool allowed = false;
  ordered_json variables;  // null when the backend never translates
  ordered_json witness;
  if (cfg.backend == "embedded") {
    const qbf::Qbf q = qbf::translate(rs, ms.sentence);
    variables = q.circuit->var_count();
    const qbf::SolveResult res = qbf::solve(q, cfg.limits());
    allowed = res.value;
    if (allowed) {
      const auto groups = witness_groups(q, res.witness);
      if (!groups.empty()) {
        witness = witness_json(groups);
        if (!cfg.machine) {
          // printed after the verdict line below
        }
      }
      if (!cfg.machine) {
        const std::uint64_t millis = ms_since(start);
        std::cout << cfg.file << ": Allowed under " << cfg.model << " ("
                  << cfg.backend << ", " << es.size() << " events, "
                  << q.circuit->var_count() << " variables, " << millis
                  << " ms)\n";
        print_witness(std::cout, es, groups);
        return 0;
      }
    }
  } else if (cfg.backend == "oracle") {
    oracle::Budget budget;
    budget.max_evals = cfg.oracle_budget;
    const oracle::Result r = oracle::check(rs, ms.sentence, budget);
    if (r.infeasible())
      throw BudgetError("oracle budget of " + std::to_string(cfg.oracle_budget) +
                        " evaluations exhausted");
    allowed = r.is_true();
  } else if (cfg.backend == "external") {
    const char* cmd = std::getenv("SOMM_EXTERNAL_SOLVER");
    if (!cmd || !*cmd)
      throw UsageError(
          "backend 'external' needs SOMM_EXTERNAL_SOLVER to name a solver "
          "command");
    const qbf::Qbf q = qbf::translate(rs, ms.sentence);
    variables = q.circuit->var_count();
    allowed = qbf::solve_with_external(cmd, qbf::write_qdimacs(q));
  } else {
    throw UsageError("backend '" + cfg.backend +
                     "' does not produce a verdict; use `somm emit`");
  }
  const std::uint64_t millis = ms_since(start);

  if (cfg.machine) {
    ordered_json j;
    j["command"] = "check";
    j["file"] = cfg.file;
    j["model"] = cfg.model;
    j["backend"] = cfg.backend;
    j["events"] = es.size();
    j["variables"] = variables;
    j["verdict"] = allowed ? "allowed" : "forbidden";
    j["millis"] = millis;
    if (!witness.is_null()) j["witness"] = witness;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << cfg.file << ": " << (allowed ? "Allowed" : "Forbidden")
              << " under " << cfg.model << " (" << cfg.backend << ", "
              << es.size() << " events";
    if (!variables.is_null()) std::cout << ", " << variables << " variables";
    std::cout << ", " << millis << " ms)\n";
  }
  return allowed ? 0 : 1;
}

int cmd_emit(const RunConfig& cfg, std::string out_path) {
  const bool qcir = cfg.backend == "emit-qcir";
  if (!qcir && cfg.backend != "emit-qdimacs")
    throw UsageError("emit expects --backend emit-qcir or emit-qdimacs");

  const es::EventStructure es = build_structure(slurp(cfg.file), cfg);
  const so::RelStructure rs = es.to_rel_structure();
  const mm::ModelSentence ms = make_sentence(rs, cfg);
  const qbf::Qbf q = qbf::translate(rs, ms.sentence);

  if (out_path.empty()) {
    std::string stem = cfg.file;
    if (const size_t slash = stem.find_last_of('/');
        slash != std::string::npos)
      stem = stem.substr(slash + 1);
    if (const size_t dot = stem.find_last_of('.'); dot != std::string::npos)
      stem = stem.substr(0, dot);
    out_path = stem + (qcir ? ".qcir" : ".qdimacs");
  }

  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + out_path + "'");
    out << (qcir ? qbf::write_qcir(q) : qbf::write_qdimacs(q));
    if (!out) throw IoError("short write on '" + out_path + "'");
  }
  ordered_json meta;
  meta["model"] = cfg.model;
  meta["events"] = es.size();
  meta["variables"] = q.circuit->var_count();
  {
    std::ofstream out(out_path + ".json", std::ios::binary);
    if (!out) throw IoError("cannot write '" + out_path + ".json'");
    out << meta.dump(2) << "\n";
  }

  if (cfg.machine) {
    ordered_json j;
    j["command"] = "emit";
    j["file"] = cfg.file;
    j["model"] = cfg.model;
    j["backend"] = cfg.backend;
    j["out"] = out_path;
    j["events"] = es.size();
    j["variables"] = q.circuit->var_count();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "wrote " << out_path << " (" << es.size() << " events, "
              << q.circuit->var_count() << " variables)\n";
  }
  return 0;
}

struct BenchRow {
  int n = 0;
  int events = 0;
  int variables = 0;
  std::string verdict;
  std::uint64_t millis = 0;
};

BenchRow bench_one(int n, const RunConfig& cfg) {
  BenchRow row;
  row.n = n;
  const auto start = std::chrono::steady_clock::now();
  try {
    const litmus::LitmusTest t = litmus::gen_store_buffer(n);
    litmus::BuildOptions opts;
    opts.values = parse_values(cfg.values);
    opts.event_cap = cfg.event_cap;
    const es::EventStructure es = litmus::build_event_structure(t, opts);
    row.events = es.size();
    const so::RelStructure rs = es.to_rel_structure();
    const mm::ModelSentence ms = make_sentence(rs, cfg);
    bool allowed = false;
    if (cfg.backend == "oracle") {
      oracle::Budget budget;
      budget.max_evals = cfg.oracle_budget;
      const oracle::Result r = oracle::check(rs, ms.sentence, budget);
      if (r.infeasible()) throw BudgetError("oracle budget exhausted");
      allowed = r.is_true();
    } else {
      const qbf::Qbf q = qbf::translate(rs, ms.sentence);
      row.variables = static_cast<int>(q.circuit->var_count());
      allowed = qbf::solve(q, cfg.limits()).value;
    }
    row.verdict = allowed ? "allowed" : "forbidden";
  } catch (const std::exception& e) {
    // A row that blows a limit is still a row; the sweep carries on.
    row.verdict = error_kind(e);
  }
  row.millis = ms_since(start);
  return row;
}

int cmd_bench(int from, int to, int workers, const RunConfig& cfg) {
  if (from < 2) throw UsageError("--from must be at least 2");
  if (to < from) throw UsageError("--to must be at least --from");
  if (workers < 1) throw UsageError("--workers must be positive");
  if (cfg.backend != "embedded" && cfg.backend != "oracle")
    throw UsageError("bench expects --backend embedded or oracle");
  cfg.limits();  // surface bad limits before any work

  std::vector<BenchRow> rows(static_cast<size_t>(to - from + 1));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      rows[i] = bench_one(from + static_cast<int>(i), cfg);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::cout << "n,events,variables,verdict,millis\n";
  for (const BenchRow& r : rows)
    std::cout << r.n << "," << r.events << "," << r.variables << ","
              << r.verdict << "," << r.millis << "\n";
  return 0;
}

int cmd_validate(const RunConfig& cfg) {
  const std::string text = slurp(cfg.file);
  const size_t first = text.find_first_not_of(" \t\r\n");
  es::EventStructure es =
      first != std::string::npos && text[first] == '{'
          ? es::parse_json_raw(text)
          : build_structure(text, cfg);
  const std::vector<es::Violation> bad = es.validate();

  if (cfg.machine) {
    ordered_json j;
    j["command"] = "validate";
    j["file"] = cfg.file;
    j["events"] = es.size();
    j["ok"] = bad.empty();
    j["violations"] = ordered_json::array();
    for (const es::Violation& v : bad) {
      ordered_json jv;
      jv["law"] = v.law;
      jv["witness"] = v.witness;
      j["violations"].push_back(std::move(jv));
    }
    std::cout << j.dump(2) << "\n";
  } else if (bad.empty()) {
    std::cout << cfg.file << ": OK (" << es.size() << " events)\n";
  } else {
    for (const es::Violation& v : bad) {
      std::cout << cfg.file << ": violates " << v.law << " at (";
      for (size_t i = 0; i < v.witness.size(); ++i)
        std::cout << (i ? "," : "") << v.witness[i];
      std::cout << ")\n";
    }
  }
  return bad.empty() ? 0 : 1;
}

// Exit-code protocol shared with external solvers: 10 true, 20 false.
int cmd_solve_file(const RunConfig& cfg, bool qcir) {
  const std::string text = slurp(cfg.file);
  const qbf::Qbf q = qcir ? qbf::read_qcir(text) : qbf::read_qdimacs(text);
  const bool value = qbf::solve(q, cfg.limits()).value;
  std::cout << (value ? "s TRUE\n" : "s FALSE\n");
  return value ? 10 : 20;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Decides litmus-test behaviours under SC, Release-Acquire, a C++-style "
      "model, and stepwise justification, by reduction to quantified boolean "
      "circuits"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out_path;
  int from = 2, to = 5, workers = 1;

  const auto add_common = [&cfg](CLI::App* sub, bool with_backend) {
    sub->add_option("file", cfg.file, "litmus test source")->required();
    sub->add_option("--model", cfg.model, "memory model")
        ->check(CLI::IsMember({"sc", "ra", "c11", "jr"}))
        ->capture_default_str();
    if (with_backend)
      sub->add_option("--timeout", cfg.timeout, "solver timeout in seconds")
          ->capture_default_str();
    sub->add_option("--mem-cap", cfg.mem_cap_mb, "solver memory cap in MB")
        ->capture_default_str();
    sub->add_option("--jr-n", cfg.jr_n,
                    "step bound for the jr model (default: universe size)");
    sub->add_option("--values", cfg.values,
                    "comma-separated read-value domain override");
    sub->add_option("--event-cap", cfg.event_cap,
                    "abort if the structure grows past this many events")
        ->capture_default_str();
    sub->add_flag("--machine", cfg.machine, "machine-readable output");
  };

  CLI::App* check = app.add_subcommand(
      "check", "decide whether the final state is reachable");
  add_common(check, true);
  check->add_option("--backend", cfg.backend, "how to decide")
      ->check(CLI::IsMember({"embedded", "oracle", "external"}))
      ->capture_default_str();
  check->add_option("--oracle-budget", cfg.oracle_budget,
                    "clause-evaluation budget for the oracle backend")
      ->capture_default_str();

  CLI::App* emit =
      app.add_subcommand("emit", "write the solver instance to disk");
  add_common(emit, false);
  emit->add_option("--backend", cfg.backend, "output format")
      ->check(CLI::IsMember({"emit-qcir", "emit-qdimacs"}))
      ->required();
  emit->add_option("-o,--out", out_path,
                   "output path (default: test name + format suffix)");

  CLI::App* bench = app.add_subcommand(
      "bench", "time the store-buffer family, one CSV row per size");
  bench->add_option("--from", from, "smallest store-buffer size")
      ->capture_default_str();
  bench->add_option("--to", to, "largest store-buffer size")
      ->capture_default_str();
  bench->add_option("--workers", workers, "parallel instances")
      ->capture_default_str();
  bench->add_option("--model", cfg.model, "memory model")
      ->check(CLI::IsMember({"sc", "ra", "c11", "jr"}))
      ->capture_default_str();
  bench->add_option("--backend", cfg.backend, "how to decide")
      ->check(CLI::IsMember({"embedded", "oracle"}))
      ->capture_default_str();
  bench->add_option("--timeout", cfg.timeout, "per-row timeout in seconds")
      ->capture_default_str();
  bench->add_option("--mem-cap", cfg.mem_cap_mb, "solver memory cap in MB")
      ->capture_default_str();
  bench->add_option("--jr-n", cfg.jr_n, "step bound for the jr model");
  bench->add_option("--event-cap", cfg.event_cap, "event-count cap")
      ->capture_default_str();
  bench->add_option("--oracle-budget", cfg.oracle_budget,
                    "clause-evaluation budget for the oracle backend")
      ->capture_default_str();

  CLI::App* validate = app.add_subcommand(
      "validate", "check a litmus test or structure dump against the laws");
  validate->add_option("file", cfg.file, "litmus source or structure JSON")
      ->required();
  validate->add_option("--values", cfg.values,
                       "comma-separated read-value domain override");
  validate->add_option("--event-cap", cfg.event_cap, "event-count cap")
      ->capture_default_str();
  validate->add_flag("--machine", cfg.machine, "machine-readable output");

  // Solver protocol endpoints; hidden because only scripts want them.
  CLI::App* sq = app.add_subcommand("solve-qdimacs", "");
  sq->group("");
  sq->add_option("file", cfg.file, "")->required();
  sq->add_option("--timeout", cfg.timeout, "");
  sq->add_option("--mem-cap", cfg.mem_cap_mb, "");
  CLI::App* sc = app.add_subcommand("solve-qcir", "");
  sc->group("");
  sc->add_option("file", cfg.file, "")->required();
  sc->add_option("--timeout", cfg.timeout, "");
  sc->add_option("--mem-cap", cfg.mem_cap_mb, "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (check->parsed()) return cmd_check(cfg);
    if (emit->parsed()) return cmd_emit(cfg, out_path);
    if (bench->parsed()) return cmd_bench(from, to, workers, cfg);
    if (validate->parsed()) return cmd_validate(cfg);
    if (sq->parsed()) return cmd_solve_file(cfg, false);
    if (sc->parsed()) return cmd_solve_file(cfg, true);
    throw UsageError("no command");
  } catch (const std::exception& e) {
    if (cfg.machine) {
      ordered_json j;
      j["command"] = command;
      if (!cfg.file.empty()) j["file"] = cfg.file;
      j["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cerr << "error (" << error_kind(e) << "): " << e.what() << "\n";
    }
    return 2;
  }
}
