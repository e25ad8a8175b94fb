#pragma once

// Litmus test source language: a handful of threads over shared locations,
// plus a question about one final outcome. The grammar is
//
//   test NAME                      (optional; NAME runs to end of line)
//   init { x = 0; y = 0; }
//   { stmt* } || { stmt* } || ...
//   final { r1 == 1 && r2 == 1 }
//
//   stmt := loc = INT ;            store
//         | reg = loc ;            load
//         | if ( reg == INT ) { stmt* } [ else { stmt* } ]
//
// Locations are the names declared in init; every other assigned name is a
// thread-local register. // comments run to end of line.

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "somm/error.hpp"

namespace somm::litmus {

enum class StmtKind { Store, Load, If };

struct Stmt {
  StmtKind kind = StmtKind::Store;
  int line = 0;
  int col = 0;
  std::string loc;              // Store and Load
  std::string reg;              // Load target, If condition
  int value = 0;                // Store value, If comparison constant
  std::vector<Stmt> then_body;  // If only
  std::vector<Stmt> else_body;  // If only
};

struct LitmusTest {
  std::string name;
  std::vector<std::pair<std::string, int>> init;  // declaration order
  std::vector<std::vector<Stmt>> threads;
  std::vector<std::pair<std::string, int>> finals;  // reg == value conjuncts
};

namespace detail {

inline void collect_loads(const std::vector<Stmt>& body,
                          std::set<std::string>& regs) {
  for (const Stmt& s : body) {
    if (s.kind == StmtKind::Load) regs.insert(s.reg);
    if (s.kind == StmtKind::If) {
      collect_loads(s.then_body, regs);
      collect_loads(s.else_body, regs);
    }
  }
}

struct Token {
  enum Kind { Ident, Int, Punct, End };
  Kind kind = End;
  std::string text;
  int value = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string src) : src_(std::move(src)) {}

  const Token& peek() {
    if (!has_ahead_) {
      ahead_ = lex();
      has_ahead_ = true;
    }
    return ahead_;
  }

  Token next() {
    const Token t = peek();
    has_ahead_ = false;
    return t;
  }

  // Everything up to end of line, trimmed, minus any trailing comment.
  // Used for the free-form test name.
  std::string rest_of_line() {
    has_ahead_ = false;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (src_[pos_] == '/' && pos_ + 1 < src_.size() &&
          src_[pos_ + 1] == '/')
        break;
      out += src_[pos_];
      advance();
    }
    const auto from = out.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const auto to = out.find_last_not_of(" \t\r");
    return out.substr(from, to - from + 1);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() &&
                 src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token lex() {
    skip_blank();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        t.text += src_[pos_];
        advance();
      }
      t.kind = Token::Ident;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      t.text += src_[pos_];
      advance();
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        t.text += src_[pos_];
        advance();
      }
      try {
        t.value = std::stoi(t.text);
      } catch (const std::out_of_range&) {
        throw ParseError(t.line, t.col, "integer value out of range");
      }
      t.kind = Token::Int;
      return t;
    }
    for (const char* p : {"==", "&&", "||", "{", "}", "(", ")", ";", "="}) {
      const std::size_t len = std::char_traits<char>::length(p);
      if (src_.compare(pos_, len, p) == 0) {
        t.kind = Token::Punct;
        t.text = p;
        for (std::size_t i = 0; i < len; ++i) advance();
        return t;
      }
    }
    throw ParseError(t.line, t.col,
                     std::string("unexpected character '") + c + "'");
  }

  std::string src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token ahead_;
  bool has_ahead_ = false;
};

class Parser {
 public:
  explicit Parser(std::string src) : lx_(std::move(src)) {}

  LitmusTest run() {
    LitmusTest t;
    if (peek_ident("test")) {
      const Token kw = lx_.next();
      t.name = lx_.rest_of_line();
      if (t.name.empty())
        throw ParseError(kw.line, kw.col, "expected a test name after 'test'");
    }
    parse_init(t);
    if (!peek_punct("{")) {
      const Token& p = lx_.peek();
      throw ParseError(p.line, p.col, "expected a thread block");
    }
    for (;;) {
      t.threads.push_back(parse_block());
      if (peek_punct("||")) {
        lx_.next();
        continue;
      }
      break;
    }
    parse_final(t);
    const Token& tail = lx_.peek();
    if (tail.kind != Token::End)
      throw ParseError(tail.line, tail.col, "unexpected trailing input");
    check_registers(t);
    return t;
  }

 private:
  bool peek_ident(const char* s) {
    const Token& t = lx_.peek();
    return t.kind == Token::Ident && t.text == s;
  }

  bool peek_punct(const char* s) {
    const Token& t = lx_.peek();
    return t.kind == Token::Punct && t.text == s;
  }

  Token expect_ident(const char* what) {
    const Token t = lx_.next();
    if (t.kind != Token::Ident)
      throw ParseError(t.line, t.col,
                       std::string("expected ") + what + ", got '" + t.text +
                           "'");
    return t;
  }

  Token expect_punct(const char* s) {
    const Token t = lx_.next();
    if (t.kind != Token::Punct || t.text != s)
      throw ParseError(t.line, t.col,
                       std::string("expected '") + s + "', got '" +
                           (t.kind == Token::End ? "end of input" : t.text) +
                           "'");
    return t;
  }

  Token expect_keyword(const char* s) {
    const Token t = lx_.next();
    if (t.kind != Token::Ident || t.text != s)
      throw ParseError(t.line, t.col,
                       std::string("expected '") + s + "', got '" +
                           (t.kind == Token::End ? "end of input" : t.text) +
                           "'");
    return t;
  }

  Token expect_int() {
    const Token t = lx_.next();
    if (t.kind != Token::Int)
      throw ParseError(t.line, t.col,
                       "expected an integer value, got '" + t.text + "'");
    return t;
  }

  void parse_init(LitmusTest& t) {
    expect_keyword("init");
    expect_punct("{");
    while (!peek_punct("}")) {
      const Token loc = expect_ident("a location name");
      expect_punct("=");
      const Token v = expect_int();
      expect_punct(";");
      if (locs_.count(loc.text))
        throw ParseError(loc.line, loc.col,
                         "location '" + loc.text + "' initialised twice");
      locs_.insert(loc.text);
      t.init.emplace_back(loc.text, v.value);
    }
    lx_.next();
  }

  std::vector<Stmt> parse_block() {
    expect_punct("{");
    std::vector<Stmt> body;
    while (!peek_punct("}")) body.push_back(parse_stmt());
    lx_.next();
    return body;
  }

  Stmt parse_stmt() {
    if (peek_ident("if")) return parse_if();
    const Token lhs = expect_ident("a location or register name");
    for (const char* kw : {"init", "final", "test", "else"})
      if (lhs.text == kw)
        throw ParseError(lhs.line, lhs.col,
                         "unexpected keyword '" + lhs.text + "'");
    expect_punct("=");
    Stmt s;
    s.line = lhs.line;
    s.col = lhs.col;
    if (locs_.count(lhs.text)) {
      const Token v = lx_.next();
      if (v.kind != Token::Int)
        throw ParseError(v.line, v.col,
                         "stores take an integer value, got '" + v.text + "'");
      s.kind = StmtKind::Store;
      s.loc = lhs.text;
      s.value = v.value;
    } else {
      const Token src = lx_.next();
      if (src.kind == Token::Int)
        throw ParseError(lhs.line, lhs.col,
                         "'" + lhs.text +
                             "' is not an initialised location, and loads "
                             "read from a location, not a constant");
      if (src.kind != Token::Ident || !locs_.count(src.text))
        throw ParseError(src.line, src.col,
                         "unknown location '" + src.text + "'");
      s.kind = StmtKind::Load;
      s.reg = lhs.text;
      s.loc = src.text;
    }
    expect_punct(";");
    return s;
  }

  Stmt parse_if() {
    const Token kw = lx_.next();
    Stmt s;
    s.kind = StmtKind::If;
    s.line = kw.line;
    s.col = kw.col;
    expect_punct("(");
    const Token reg = expect_ident("a register name");
    if (locs_.count(reg.text))
      throw ParseError(reg.line, reg.col,
                       "conditions branch on registers, and '" + reg.text +
                           "' is a location");
    s.reg = reg.text;
    expect_punct("==");
    s.value = expect_int().value;
    expect_punct(")");
    s.then_body = parse_block();
    if (peek_ident("else")) {
      lx_.next();
      s.else_body = parse_block();
    }
    return s;
  }

  void parse_final(LitmusTest& t) {
    expect_keyword("final");
    expect_punct("{");
    for (;;) {
      const Token reg = expect_ident("a register name");
      if (locs_.count(reg.text))
        throw ParseError(reg.line, reg.col,
                         "final conditions test registers, and '" + reg.text +
                             "' is a location");
      expect_punct("==");
      const Token v = expect_int();
      t.finals.emplace_back(reg.text, v.value);
      final_pos_.push_back(reg);
      if (peek_punct("&&")) {
        lx_.next();
        continue;
      }
      break;
    }
    expect_punct("}");
  }

  // Collects the registers a statement list definitely assigns, and rejects
  // conditions on registers that some path reaches unassigned.
  static std::set<std::string> definite_assignment(
      const std::vector<Stmt>& body, std::set<std::string> assigned) {
    for (const Stmt& s : body) {
      switch (s.kind) {
        case StmtKind::Store:
          break;
        case StmtKind::Load:
          assigned.insert(s.reg);
          break;
        case StmtKind::If: {
          if (!assigned.count(s.reg))
            throw ParseError(s.line, s.col,
                             "register '" + s.reg +
                                 "' used before assignment");
          const auto a = definite_assignment(s.then_body, assigned);
          const auto b = definite_assignment(s.else_body, assigned);
          std::set<std::string> both;
          for (const auto& r : a)
            if (b.count(r)) both.insert(r);
          assigned = std::move(both);
          break;
        }
      }
    }
    return assigned;
  }

  void check_registers(const LitmusTest& t) const {
    std::map<std::string, int> owners;  // register -> number of threads
    for (const auto& th : t.threads) {
      std::set<std::string> regs;
      collect_loads(th, regs);
      for (const auto& r : regs) ++owners[r];
      definite_assignment(th, {});
    }
    for (const Token& reg : final_pos_) {
      const auto it = owners.find(reg.text);
      if (it == owners.end())
        throw ParseError(reg.line, reg.col,
                         "register '" + reg.text +
                             "' is never assigned by a load");
      if (it->second > 1)
        throw ParseError(reg.line, reg.col,
                         "register '" + reg.text +
                             "' is assigned in more than one thread");
    }
  }

  Lexer lx_;
  std::set<std::string> locs_;
  std::vector<Token> final_pos_;
};

}  // namespace detail

inline LitmusTest parse(const std::string& text) {
  return detail::Parser(text).run();
}

}  // namespace somm::litmus
