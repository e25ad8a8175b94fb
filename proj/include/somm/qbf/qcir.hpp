#pragma once

// QCIR-G14 output and a reader for the subset this library emits.
//
// The writer produces cleansed files: variables and gates share one integer
// namespace numbered consecutively from 1, assigned on a post-order walk
// from the output gate, so the same circuit always prints the same way.
// Quantifiers are written as gates (the format's non-prenex form); negation
// becomes a signed literal, so only and/or/exists/forall statements appear.
// A constant output is materialised as the empty and() or or() gate.
//
// The reader accepts that shape back, plus prenex exists/forall/free lines
// before output() for hand-written files. Free variables are treated as
// outermost existentials.

#include <cctype>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "somm/error.hpp"
#include "somm/qbf/circuit.hpp"

namespace somm::qbf {

inline std::string write_qcir(const Qbf& q) {
  const Circuit& c = *q.circuit;
  // number[v] for variables, assigned at first sight; gates get theirs when
  // their statement is emitted.
  std::vector<std::uint32_t> var_num(c.var_count(), 0);
  std::uint32_t next = 1;
  std::string body;
  std::vector<std::uint32_t> gate_num(c.gate_count(), 0);

  const auto var_ref = [&](VarId v) {
    if (var_num[v] == 0) var_num[v] = next++;
    return var_num[v];
  };

  // Signed literal of a gate that already has a statement (or is a
  // variable); Not folds into the sign.
  const auto lit = [&](GateId g) {
    bool neg = false;
    if (c.gate(g).kind == GateKind::Not) {
      neg = true;
      g = c.gate(g).a;
    }
    std::uint32_t n = c.gate(g).kind == GateKind::Var
                          ? var_num[c.gate(g).a]
                          : gate_num[g];
    return neg ? "-" + std::to_string(n) : std::to_string(n);
  };

  // Post-order over the reachable cone; children are emitted before the
  // statement that uses them.
  std::vector<std::pair<GateId, bool>> stack{{q.root, false}};
  std::vector<bool> done(c.gate_count(), false);
  while (!stack.empty()) {
    auto [g, ready] = stack.back();
    stack.pop_back();
    if (done[g]) continue;
    const Gate& gt = c.gate(g);
    if (!ready) {
      stack.emplace_back(g, true);
      switch (gt.kind) {
        case GateKind::Not:
        case GateKind::Exists:
        case GateKind::Forall:
          stack.emplace_back(gt.a, false);
          break;
        case GateKind::And:
        case GateKind::Or:
          for (size_t i = gt.list.size(); i-- > 0;)
            stack.emplace_back(gt.list[i], false);
          break;
        default:
          break;
      }
      continue;
    }
    done[g] = true;
    switch (gt.kind) {
      case GateKind::False_:
      case GateKind::True_: {
        gate_num[g] = next++;
        body += std::to_string(gate_num[g]);
        body += gt.kind == GateKind::True_ ? " = and()\n" : " = or()\n";
        break;
      }
      case GateKind::Var:
        var_ref(gt.a);
        break;
      case GateKind::Not:
        break;  // a sign, not a statement
      case GateKind::And:
      case GateKind::Or: {
        std::string stmt = gt.kind == GateKind::And ? " = and(" : " = or(";
        for (size_t i = 0; i < gt.list.size(); ++i) {
          if (i) stmt += ", ";
          stmt += lit(gt.list[i]);
        }
        gate_num[g] = next++;
        body += std::to_string(gate_num[g]) + stmt + ")\n";
        break;
      }
      case GateKind::Exists:
      case GateKind::Forall: {
        std::string stmt =
            gt.kind == GateKind::Exists ? " = exists(" : " = forall(";
        for (size_t i = 0; i < gt.list.size(); ++i) {
          if (i) stmt += ", ";
          stmt += std::to_string(var_ref(gt.list[i]));
        }
        stmt += "; " + lit(gt.a);
        gate_num[g] = next++;
        body += std::to_string(gate_num[g]) + stmt + ")\n";
        break;
      }
    }
  }

  std::string out = "#QCIR-G14 " + std::to_string(next - 1) + "\n";
  out += "output(" + lit(q.root) + ")\n";
  out += body;
  return out;
}

namespace detail {

struct QcirToken {
  std::string_view text;
  bool neg = false;
};

// One identifier-shaped token; QCIR names may be plain words or integers.
inline std::string_view qcir_word(std::string_view s, size_t& i) {
  size_t b = i;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                          s[i] == '_'))
    ++i;
  if (i == b) throw FormatError("qcir: expected a name");
  return s.substr(b, i - b);
}

inline void qcir_skip_ws(std::string_view s, size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline bool qcir_eat(std::string_view s, size_t& i, char ch) {
  qcir_skip_ws(s, i);
  if (i < s.size() && s[i] == ch) {
    ++i;
    return true;
  }
  return false;
}

// Comma-separated tokens up to the closing parenthesis or a semicolon.
inline std::vector<QcirToken> qcir_args(std::string_view s, size_t& i,
                                        bool* semi = nullptr) {
  std::vector<QcirToken> out;
  qcir_skip_ws(s, i);
  while (i < s.size() && s[i] != ')' && s[i] != ';') {
    QcirToken t;
    if (s[i] == '-') {
      t.neg = true;
      ++i;
    }
    t.text = qcir_word(s, i);
    out.push_back(t);
    qcir_skip_ws(s, i);
    if (i < s.size() && s[i] == ',') {
      ++i;
      qcir_skip_ws(s, i);
    }
  }
  if (semi) *semi = i < s.size() && s[i] == ';';
  if (i < s.size() && (s[i] == ')' || s[i] == ';')) ++i;
  return out;
}

}  // namespace detail

inline Qbf read_qcir(const std::string& text) {
  using detail::QcirToken;
  auto circuit = std::make_shared<Circuit>();
  std::unordered_map<std::string, VarId> vars;
  std::unordered_map<std::string, GateId> gates;
  std::unordered_set<std::string> bound;

  const auto var_of = [&](std::string_view tok) {
    std::string key(tok);
    auto it = vars.find(key);
    if (it != vars.end()) return it->second;
    VarId v = circuit->new_var("v" + key);
    vars.emplace(std::move(key), v);
    return v;
  };
  // An operand names a finished gate or a (possibly not yet bound) variable.
  const auto operand = [&](const QcirToken& t) {
    auto it = gates.find(std::string(t.text));
    GateId g = it != gates.end() ? it->second : circuit->mk_var(var_of(t.text));
    return t.neg ? circuit->mk_not(g) : g;
  };
  const auto block_vars = [&](const std::vector<QcirToken>& ts) {
    std::vector<VarId> vs;
    vs.reserve(ts.size());
    for (const QcirToken& t : ts) {
      if (t.neg) throw FormatError("qcir: negated quantifier variable");
      if (!bound.insert(std::string(t.text)).second)
        throw FormatError("qcir: variable bound twice: " +
                          std::string(t.text));
      vs.push_back(var_of(t.text));
    }
    return vs;
  };

  // Prefix blocks wrap the output once everything is parsed; outermost
  // first. Free variables become an outermost existential block.
  std::vector<std::pair<GateKind, std::vector<VarId>>> prefix;
  bool have_output = false;
  QcirToken out_tok;
  std::string out_name;  // keeps out_tok.text alive past the loop
  bool saw_format = false;

  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    size_t i = 0;
    detail::qcir_skip_ws(line, i);
    if (i == line.size() || line[i] == '\r') continue;
    if (line[i] == '#') {
      saw_format = true;  // format line or comment; content is not checked
      continue;
    }
    if (!saw_format) throw FormatError("qcir: missing #QCIR format line");

    std::string_view head = detail::qcir_word(line, i);
    if (!have_output &&
        (head == "exists" || head == "forall" || head == "free")) {
      if (!detail::qcir_eat(line, i, '('))
        throw FormatError("qcir: expected '('");
      auto vs = block_vars(detail::qcir_args(line, i));
      prefix.emplace_back(
          head == "forall" ? GateKind::Forall : GateKind::Exists,
          std::move(vs));
      continue;
    }
    if (head == "output") {
      if (have_output) throw FormatError("qcir: two output statements");
      if (!detail::qcir_eat(line, i, '('))
        throw FormatError("qcir: expected '('");
      auto args = detail::qcir_args(line, i);
      if (args.size() != 1) throw FormatError("qcir: output wants one literal");
      out_name = std::string(args[0].text);
      out_tok = {out_name, args[0].neg};
      have_output = true;
      continue;
    }

    // Gate statement: name = kind(...).
    if (!detail::qcir_eat(line, i, '='))
      throw FormatError("qcir: expected '=' after " + std::string(head));
    detail::qcir_skip_ws(line, i);
    std::string_view kind = detail::qcir_word(line, i);
    if (!detail::qcir_eat(line, i, '(')) throw FormatError("qcir: expected '('");
    if (gates.count(std::string(head)) || vars.count(std::string(head)))
      throw FormatError("qcir: name defined twice: " + std::string(head));

    GateId g;
    if (kind == "and" || kind == "or") {
      std::vector<GateId> ops;
      for (const QcirToken& t : detail::qcir_args(line, i))
        ops.push_back(operand(t));
      g = kind == "and" ? circuit->mk_and(std::move(ops))
                        : circuit->mk_or(std::move(ops));
    } else if (kind == "exists" || kind == "forall") {
      bool semi = false;
      auto vs = block_vars(detail::qcir_args(line, i, &semi));
      if (!semi) throw FormatError("qcir: quantifier gate wants '; literal'");
      auto bodies = detail::qcir_args(line, i);
      if (bodies.size() != 1)
        throw FormatError("qcir: quantifier gate wants one body literal");
      g = circuit->mk_quant(
          kind == "exists" ? GateKind::Exists : GateKind::Forall,
          std::move(vs), operand(bodies[0]));
    } else {
      throw FormatError("qcir: unsupported gate kind: " + std::string(kind));
    }
    gates.emplace(std::string(head), g);
  }

  if (!have_output) throw FormatError("qcir: no output statement");
  GateId root = operand(out_tok);
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
    root = circuit->mk_quant(it->first, it->second, root);
  for (const auto& [name, v] : vars)
    if (!bound.count(name))
      throw FormatError("qcir: unbound variable: " + name);
  return Qbf{std::move(circuit), root};
}

}  // namespace somm::qbf
