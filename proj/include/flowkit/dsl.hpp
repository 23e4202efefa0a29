#pragma once

// Textual model language: parser and canonical serializer.
//
// Grammar (whitespace-insensitive, '#' starts a line comment):
//
//   model       := { decl }
//   decl        := thingdecl | spheredecl | flowdecl | triggerdecl | junctiondecl
//   thingdecl   := "thing" IDENT [ "{" { attr } "}" ]
//   attr        := IDENT ":" ( "integer" | "{" IDENT { "," IDENT } "}" )
//   spheredecl  := "sphere" IDENT "{" { spheredecl | machinedecl } "}"
//   machinedecl := "machine" IDENT "of" IDENT "{" "stages" "{" { STAGE } "}" "}"
//   flowdecl    := "flow" path "->" path
//   triggerdecl := "trigger" path "=>" ( path | "junction" IDENT ) [ "when" guard ]
//   junctiondecl:= "junction" IDENT "=>" path
//   path        := IDENT { "." IDENT } "." STAGE
//   guard       := andexpr { "or" andexpr }
//   andexpr     := unary { "and" unary }
//   unary       := "not" unary | "(" guard ")" | atom
//   atom        := "tick" "<=" IDENT | IDENT "=" ( IDENT | INTEGER )
//
// Identifiers start with a letter and continue with letters, digits,
// underscores, and hyphens.  A hyphen only joins an identifier when the
// character after it could continue one, so "a->b" is three tokens.
// Duplicate names are hard errors, never shadowed.
//
// parse() never throws and never returns a partial model: either a model
// that satisfies every core invariant, or at least one error diagnostic.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowkit/core.hpp"

namespace flowkit {

// ---------------------------------------------------------------------------
// Diagnostics

struct Span {
  std::uint32_t line = 1;   // 1-based
  std::uint32_t col = 1;    // 1-based, in bytes
  std::uint32_t length = 1; // bytes, may run past the end of the line

  friend bool operator==(const Span&, const Span&) = default;
};

// Parse diagnostics are always errors.  Codes:
//   FM-P001  lexical error (bad character, invalid UTF-8)
//   FM-P002  syntax error
//   FM-P003  unresolved reference (thing, machine, stage, junction, attribute)
//   FM-P004  illegal arc or stage configuration
//   FM-P005  duplicate declaration
struct ParseDiagnostic {
  std::string code;
  Span span;
  std::string message;
};

struct ParseResult {
  std::optional<Model> model;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

namespace detail {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok : std::uint8_t {
  Ident, Integer, LBrace, RBrace, LParen, RParen,
  Arrow, FatArrow, Dot, Colon, Comma, Eq, Le, End, Bad,
};

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  Span span;
};

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool ident_cont(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '_';
}

class Lexer {
 public:
  Lexer(std::string_view text, std::vector<ParseDiagnostic>& diags)
      : text_(text), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  Token next() {
    skip_trivia();
    Span at{line_, col_, 1};
    if (pos_ >= text_.size()) return {Tok::End, {}, at};
    char c = text_[pos_];
    if (ident_start(c)) {
      std::size_t start = pos_;
      advance();
      while (pos_ < text_.size()) {
        char k = text_[pos_];
        if (ident_cont(k)) { advance(); continue; }
        // A hyphen joins only when something identifier-like follows it.
        if (k == '-' && pos_ + 1 < text_.size() && ident_cont(text_[pos_ + 1])) {
          advance(); advance();
          continue;
        }
        break;
      }
      at.length = std::uint32_t(pos_ - start);
      return {Tok::Ident, text_.substr(start, pos_ - start), at};
    }
    if (c >= '0' && c <= '9') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') advance();
      at.length = std::uint32_t(pos_ - start);
      return {Tok::Integer, text_.substr(start, pos_ - start), at};
    }
    switch (c) {
      case '{': advance(); return {Tok::LBrace, text_.substr(pos_ - 1, 1), at};
      case '}': advance(); return {Tok::RBrace, text_.substr(pos_ - 1, 1), at};
      case '(': advance(); return {Tok::LParen, text_.substr(pos_ - 1, 1), at};
      case ')': advance(); return {Tok::RParen, text_.substr(pos_ - 1, 1), at};
      case '.': advance(); return {Tok::Dot, text_.substr(pos_ - 1, 1), at};
      case ':': advance(); return {Tok::Colon, text_.substr(pos_ - 1, 1), at};
      case ',': advance(); return {Tok::Comma, text_.substr(pos_ - 1, 1), at};
      case '=':
        advance();
        if (pos_ < text_.size() && text_[pos_] == '>') {
          advance();
          at.length = 2;
          return {Tok::FatArrow, text_.substr(pos_ - 2, 2), at};
        }
        return {Tok::Eq, text_.substr(pos_ - 1, 1), at};
      case '-':
        advance();
        if (pos_ < text_.size() && text_[pos_] == '>') {
          advance();
          at.length = 2;
          return {Tok::Arrow, text_.substr(pos_ - 2, 2), at};
        }
        error(at, "stray '-'");
        return {Tok::Bad, text_.substr(pos_ - 1, 1), at};
      case '<':
        advance();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          advance();
          at.length = 2;
          return {Tok::Le, text_.substr(pos_ - 2, 2), at};
        }
        error(at, "stray '<' (only '<=' is recognized)");
        return {Tok::Bad, text_.substr(pos_ - 1, 1), at};
      default: break;
    }
    if (static_cast<unsigned char>(c) >= 0x80) {
      std::uint32_t len = utf8_len(pos_);
      if (len == 0) {
        error(at, "invalid UTF-8 sequence");
        advance();
      } else {
        at.length = len;
        error(at, "unexpected non-ASCII character outside a comment");
        for (std::uint32_t i = 0; i < len; ++i) advance();
      }
      return {Tok::Bad, {}, at};
    }
    error(at, std::string("unexpected character '") + c + "'");
    advance();
    return {Tok::Bad, text_.substr(pos_ - 1, 1), at};
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') {
          if (static_cast<unsigned char>(text_[pos_]) >= 0x80) {
            Span at{line_, col_, 1};
            std::uint32_t len = utf8_len(pos_);
            if (len == 0) {
              error(at, "invalid UTF-8 sequence");
              advance();
              continue;
            }
            for (std::uint32_t i = 0; i < len; ++i) advance();
            continue;
          }
          advance();
        }
      } else {
        break;
      }
    }
  }

  // Length of a well-formed UTF-8 sequence at 'at', or 0 when malformed.
  std::uint32_t utf8_len(std::size_t at) const {
    unsigned char b0 = text_[at];
    std::uint32_t n;
    if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2) n = 2;
    else if ((b0 & 0xF0) == 0xE0) n = 3;
    else if ((b0 & 0xF8) == 0xF0 && b0 <= 0xF4) n = 4;
    else return 0;
    if (at + n > text_.size()) return 0;
    for (std::uint32_t i = 1; i < n; ++i)
      if ((static_cast<unsigned char>(text_[at + i]) & 0xC0) != 0x80) return 0;
    return n;
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void error(Span at, std::string msg) {
    diags_.push_back({"FM-P001", at, std::move(msg)});
  }

  std::string_view text_;
  std::vector<ParseDiagnostic>& diags_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

// ---------------------------------------------------------------------------
// AST

struct AstPath {
  std::vector<std::string> segs;  // last is the stage name
  Span span;
};

struct AstThing {
  std::string name;
  std::vector<ThingAttr> attrs;
  Span span;
};

struct AstMachine {
  std::string name;
  std::string thing;
  std::vector<StageKind> stages;
  std::vector<Span> stage_spans;
  Span span;
  Span thing_span;
};

struct AstSphere {
  std::string name;
  Span span;
  std::vector<AstMachine> machines;
  std::vector<AstSphere> subspheres;
  // Declaration order inside this sphere: (is_machine, index into the
  // matching vector above).
  std::vector<std::pair<bool, std::size_t>> order;
};

struct AstFlow {
  AstPath source, target;
  Span span;
};

struct AstTrigger {
  AstPath source;
  std::optional<AstPath> target_path;   // exactly one of these two is set
  std::optional<std::string> target_junction;
  Span target_span;
  std::optional<Guard> guard;
  Span guard_span;
  Span span;
};

struct AstJunction {
  std::string name;
  AstPath output;
  Span span;
};

struct Ast {
  std::vector<AstThing> things;
  std::vector<AstSphere> spheres;   // top level only
  std::vector<AstFlow> flows;
  std::vector<AstTrigger> triggers;
  std::vector<AstJunction> junctions;
};

// ---------------------------------------------------------------------------
// Parser

inline constexpr std::size_t max_diagnostics = 128;

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<ParseDiagnostic>& diags)
      : toks_(std::move(toks)), diags_(diags) {}

  Ast run() {
    Ast ast;
    while (!at_end()) {
      if (diags_.size() >= max_diagnostics) break;
      if (!top_decl(ast)) sync_top();
    }
    return ast;
  }

 private:
  bool top_decl(Ast& ast) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) {
      error(t.span, "expected a declaration");
      return false;
    }
    if (t.text == "thing") return thing_decl(ast);
    if (t.text == "sphere") {
      auto s = sphere_decl();
      if (!s) return false;
      ast.spheres.push_back(std::move(*s));
      return true;
    }
    if (t.text == "flow") return flow_decl(ast);
    if (t.text == "trigger") return trigger_decl(ast);
    if (t.text == "junction") return junction_decl(ast);
    if (t.text == "machine") {
      error(t.span, "machines may only be declared inside a sphere");
      return false;
    }
    error(t.span, "expected 'thing', 'sphere', 'flow', 'trigger', or 'junction'");
    return false;
  }

  bool thing_decl(Ast& ast) {
    Span start = take().span;  // "thing"
    auto name = expect_ident("thing name");
    if (!name) return false;
    AstThing t;
    t.name = std::string(name->text);
    t.span = join(start, name->span);
    if (peek().kind == Tok::LBrace) {
      take();
      while (peek().kind != Tok::RBrace) {
        auto an = expect_ident("attribute name");
        if (!an) return false;
        if (!expect(Tok::Colon, "':' after attribute name")) return false;
        ThingAttr attr;
        attr.name = std::string(an->text);
        if (peek().kind == Tok::Ident && peek().text == "integer") {
          take();
          attr.domain.kind = AttrDomain::Kind::Integer;
        } else if (peek().kind == Tok::LBrace) {
          take();
          attr.domain.kind = AttrDomain::Kind::Symbols;
          while (true) {
            auto sym = expect_ident("domain symbol");
            if (!sym) return false;
            attr.domain.symbols.emplace_back(sym->text);
            if (peek().kind == Tok::Comma) { take(); continue; }
            break;
          }
          if (!expect(Tok::RBrace, "'}' after domain symbols")) return false;
        } else {
          error(peek().span, "expected 'integer' or '{' after ':'");
          return false;
        }
        t.attrs.push_back(std::move(attr));
      }
      t.span = join(start, take().span);  // '}'
    }
    ast.things.push_back(std::move(t));
    return true;
  }

  std::optional<AstSphere> sphere_decl() {
    Span start = take().span;  // "sphere"
    auto name = expect_ident("sphere name");
    if (!name) return std::nullopt;
    AstSphere s;
    s.name = std::string(name->text);
    s.span = join(start, name->span);
    if (!expect(Tok::LBrace, "'{' after sphere name")) return std::nullopt;
    while (peek().kind != Tok::RBrace) {
      if (at_end()) {
        error(peek().span, "unterminated sphere body");
        return std::nullopt;
      }
      const Token& t = peek();
      if (t.kind == Tok::Ident && t.text == "machine") {
        auto m = machine_decl();
        if (!m) return std::nullopt;
        s.order.emplace_back(true, s.machines.size());
        s.machines.push_back(std::move(*m));
      } else if (t.kind == Tok::Ident && t.text == "sphere") {
        auto inner = sphere_decl();
        if (!inner) return std::nullopt;
        s.order.emplace_back(false, s.subspheres.size());
        s.subspheres.push_back(std::move(*inner));
      } else {
        error(t.span, "expected 'machine', 'sphere', or '}' in sphere body");
        return std::nullopt;
      }
    }
    take();  // '}'
    return s;
  }

  std::optional<AstMachine> machine_decl() {
    Span start = take().span;  // "machine"
    auto name = expect_ident("machine name");
    if (!name) return std::nullopt;
    if (!expect_keyword("of")) return std::nullopt;
    auto thing = expect_ident("thing name after 'of'");
    if (!thing) return std::nullopt;
    AstMachine m;
    m.name = std::string(name->text);
    m.thing = std::string(thing->text);
    m.thing_span = thing->span;
    if (!expect(Tok::LBrace, "'{' after machine header")) return std::nullopt;
    if (!expect_keyword("stages")) return std::nullopt;
    if (!expect(Tok::LBrace, "'{' after 'stages'")) return std::nullopt;
    while (peek().kind != Tok::RBrace) {
      auto st = expect_ident("stage name");
      if (!st) return std::nullopt;
      auto k = stage_from_name(st->text);
      if (!k) {
        error(st->span, "'" + std::string(st->text) + "' is not a stage name");
        return std::nullopt;
      }
      m.stages.push_back(*k);
      m.stage_spans.push_back(st->span);
    }
    take();  // inner '}'
    auto close = expect(Tok::RBrace, "'}' after stage list");
    if (!close) return std::nullopt;
    m.span = join(start, close->span);
    return m;
  }

  std::optional<AstPath> path() {
    auto first = expect_ident("path");
    if (!first) return std::nullopt;
    AstPath p;
    p.segs.emplace_back(first->text);
    p.span = first->span;
    while (peek().kind == Tok::Dot) {
      take();
      auto seg = expect_ident("path segment after '.'");
      if (!seg) return std::nullopt;
      p.segs.emplace_back(seg->text);
      p.span = join(p.span, seg->span);
    }
    if (p.segs.size() < 2) {
      error(p.span, "path needs at least a machine and a stage");
      return std::nullopt;
    }
    if (!stage_from_name(p.segs.back())) {
      error(p.span, "path must end in a stage name");
      return std::nullopt;
    }
    return p;
  }

  bool flow_decl(Ast& ast) {
    Span start = take().span;  // "flow"
    auto src = path();
    if (!src) return false;
    if (!expect(Tok::Arrow, "'->' in flow declaration")) return false;
    auto dst = path();
    if (!dst) return false;
    AstFlow f{std::move(*src), std::move(*dst), join(start, prev_span_)};
    ast.flows.push_back(std::move(f));
    return true;
  }

  bool trigger_decl(Ast& ast) {
    Span start = take().span;  // "trigger"
    auto src = path();
    if (!src) return false;
    if (!expect(Tok::FatArrow, "'=>' in trigger declaration")) return false;
    AstTrigger t;
    t.source = std::move(*src);
    const Token& tt = peek();
    // "junction J" names a junction unless a '.' follows (then it is a
    // path through a sphere that happens to be called "junction").
    if (tt.kind == Tok::Ident && tt.text == "junction" && peek2().kind != Tok::Dot) {
      take();
      auto jn = expect_ident("junction name");
      if (!jn) return false;
      t.target_junction = std::string(jn->text);
      t.target_span = jn->span;
    } else {
      auto dst = path();
      if (!dst) return false;
      t.target_span = dst->span;
      t.target_path = std::move(*dst);
    }
    if (peek().kind == Tok::Ident && peek().text == "when") {
      Span wstart = take().span;
      auto g = guard_expr();
      if (!g) return false;
      t.guard = std::move(g->first);
      t.guard_span = join(wstart, g->second);
    }
    t.span = join(start, prev_span_);
    ast.triggers.push_back(std::move(t));
    return true;
  }

  bool junction_decl(Ast& ast) {
    Span start = take().span;  // "junction"
    auto name = expect_ident("junction name");
    if (!name) return false;
    if (!expect(Tok::FatArrow, "'=>' in junction declaration")) return false;
    auto out = path();
    if (!out) return false;
    AstJunction j;
    j.name = std::string(name->text);
    j.output = std::move(*out);
    j.span = join(start, prev_span_);
    ast.junctions.push_back(std::move(j));
    return true;
  }

  // Guard parsing builds the node pool bottom-up; returns the root index
  // and the span of the whole expression.
  using GuardPiece = std::pair<Guard, Span>;

  std::optional<GuardPiece> guard_expr() {
    Guard g;
    auto root = or_expr(g);
    if (!root) return std::nullopt;
    g.root = root->first;
    return GuardPiece{std::move(g), root->second};
  }

  using NodeAt = std::pair<std::uint32_t, Span>;

  std::optional<NodeAt> or_expr(Guard& g) {
    auto lhs = and_expr(g);
    if (!lhs) return std::nullopt;
    while (peek().kind == Tok::Ident && peek().text == "or") {
      take();
      auto rhs = and_expr(g);
      if (!rhs) return std::nullopt;
      GuardNode n;
      n.op = GuardNode::Op::Or;
      n.lhs = lhs->first;
      n.rhs = rhs->first;
      g.nodes.push_back(n);
      lhs = NodeAt{std::uint32_t(g.nodes.size() - 1), join(lhs->second, rhs->second)};
    }
    return lhs;
  }

  std::optional<NodeAt> and_expr(Guard& g) {
    auto lhs = unary_expr(g);
    if (!lhs) return std::nullopt;
    while (peek().kind == Tok::Ident && peek().text == "and") {
      take();
      auto rhs = unary_expr(g);
      if (!rhs) return std::nullopt;
      GuardNode n;
      n.op = GuardNode::Op::And;
      n.lhs = lhs->first;
      n.rhs = rhs->first;
      g.nodes.push_back(n);
      lhs = NodeAt{std::uint32_t(g.nodes.size() - 1), join(lhs->second, rhs->second)};
    }
    return lhs;
  }

  std::optional<NodeAt> unary_expr(Guard& g) {
    const Token& t = peek();
    if (t.kind == Tok::Ident && t.text == "not") {
      Span start = take().span;
      auto inner = unary_expr(g);
      if (!inner) return std::nullopt;
      GuardNode n;
      n.op = GuardNode::Op::Not;
      n.lhs = inner->first;
      g.nodes.push_back(n);
      return NodeAt{std::uint32_t(g.nodes.size() - 1), join(start, inner->second)};
    }
    if (t.kind == Tok::LParen) {
      take();
      auto inner = or_expr(g);
      if (!inner) return std::nullopt;
      auto close = expect(Tok::RParen, "')'");
      if (!close) return std::nullopt;
      return NodeAt{inner->first, join(t.span, close->span)};
    }
    return atom(g);
  }

  std::optional<NodeAt> atom(Guard& g) {
    auto name = expect_ident("guard attribute or 'tick'");
    if (!name) return std::nullopt;
    GuardNode n;
    if (name->text == "tick") {
      if (!expect(Tok::Le, "'<=' after 'tick'")) return std::nullopt;
      auto dl = expect_ident("deadline name");
      if (!dl) return std::nullopt;
      n.op = GuardNode::Op::ClockLe;
      n.name = std::string(dl->text);
      g.nodes.push_back(std::move(n));
      return NodeAt{std::uint32_t(g.nodes.size() - 1), join(name->span, prev_span_)};
    }
    if (!expect(Tok::Eq, "'=' in guard comparison")) return std::nullopt;
    n.op = GuardNode::Op::AttrEq;
    n.name = std::string(name->text);
    const Token& rhs = peek();
    if (rhs.kind == Tok::Ident) {
      take();
      n.symbol = std::string(rhs.text);
    } else if (rhs.kind == Tok::Integer) {
      take();
      n.numeric = true;
      n.number = std::stoll(std::string(rhs.text));
    } else {
      error(rhs.span, "expected a symbol or number after '='");
      return std::nullopt;
    }
    g.nodes.push_back(std::move(n));
    return NodeAt{std::uint32_t(g.nodes.size() - 1), join(name->span, prev_span_)};
  }

  // -- token plumbing --

  const Token& peek() const { return toks_[pos_]; }
  const Token& peek2() const { return toks_[pos_ + 1 < toks_.size() ? pos_ + 1 : toks_.size() - 1]; }
  bool at_end() const { return peek().kind == Tok::End; }

  Token take() {
    Token t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    prev_span_ = t.span;
    return t;
  }

  std::optional<Token> expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) {
      error(peek().span, "expected " + std::string(what));
      return std::nullopt;
    }
    return take();
  }

  std::optional<Token> expect_ident(std::string_view what) {
    if (peek().kind != Tok::Ident) {
      error(peek().span, "expected " + std::string(what));
      return std::nullopt;
    }
    return take();
  }

  bool expect_keyword(std::string_view kw) {
    if (peek().kind != Tok::Ident || peek().text != kw) {
      error(peek().span, "expected '" + std::string(kw) + "'");
      return false;
    }
    take();
    return true;
  }

  // After an error: skip to the next plausible top-level declaration,
  // dropping whatever brace nesting the bad declaration opened.
  void sync_top() {
    int depth = 0;
    while (!at_end()) {
      const Token& t = peek();
      if (t.kind == Tok::LBrace) ++depth;
      if (t.kind == Tok::RBrace && depth > 0) --depth;
      if (depth == 0 && t.kind == Tok::Ident &&
          (t.text == "thing" || t.text == "sphere" || t.text == "flow" ||
           t.text == "trigger" || t.text == "junction"))
        return;
      take();
    }
  }

  void error(Span at, std::string msg) {
    if (diags_.size() < max_diagnostics) diags_.push_back({"FM-P002", at, std::move(msg)});
  }

  static Span join(Span a, Span b) {
    // Byte-accurate joins would need offsets; the diagnostic contract only
    // needs the span to start at the declaration and cover the reported
    // region, so stretch to the end of the later token.
    if (b.line < a.line || (b.line == a.line && b.col < a.col)) return a;
    if (a.line == b.line) return Span{a.line, a.col, b.col + b.length - a.col};
    return Span{a.line, a.col, b.col + b.length};
  }

  std::vector<Token> toks_;
  std::vector<ParseDiagnostic>& diags_;
  std::size_t pos_ = 0;
  Span prev_span_;
};

// ---------------------------------------------------------------------------
// AST -> Model

class Builder {
 public:
  Builder(const Ast& ast, std::vector<ParseDiagnostic>& diags)
      : ast_(ast), diags_(diags) {}

  std::optional<Model> run() {
    try {
      for (const auto& t : ast_.things) build_thing(t);
      for (const auto& s : ast_.spheres) build_sphere(s, {});
      for (const auto& j : ast_.junctions) build_junction(j);
      for (const auto& f : ast_.flows) build_flow(f);
      for (const auto& tr : ast_.triggers) build_trigger(tr);
      for (const auto& j : ast_.junctions) {
        if (auto id = builder_.peek().junction_id(j.name)) {
          std::size_t n = builder_.peek().junctions[*id].inputs.size();
          if (n < 2)
            error("FM-P004", j.span,
                  "junction '" + j.name + "' has " + std::to_string(n) +
                      " trigger input(s); at least 2 required");
        }
      }
      if (failed_) return std::nullopt;
      return builder_.finish();
    } catch (const BuildError& e) {
      error("FM-P004", Span{}, e.what());
      return std::nullopt;
    }
  }

 private:
  void build_thing(const AstThing& t) {
    if (builder_.peek().find_thing(t.name)) {
      error("FM-P005", t.span, "duplicate thing '" + t.name + "'");
      return;
    }
    for (std::size_t i = 0; i < t.attrs.size(); ++i)
      for (std::size_t j = i + 1; j < t.attrs.size(); ++j)
        if (t.attrs[i].name == t.attrs[j].name) {
          error("FM-P005", t.span,
                "duplicate attribute '" + t.attrs[i].name + "' on thing '" + t.name + "'");
          return;
        }
    builder_.add_thing(t.name, t.attrs);
  }

  void build_sphere(const AstSphere& s, const std::vector<std::string>& parent_path) {
    const Model& m = builder_.peek();
    auto parent = m.resolve_sphere(parent_path);
    if (parent && (m.child_sphere(*parent, s.name) || m.machine_in(*parent, s.name))) {
      error("FM-P005", s.span, "duplicate name '" + s.name + "' in this sphere");
      return;
    }
    builder_.add_sphere(parent_path, s.name);
    std::vector<std::string> path = parent_path;
    path.push_back(s.name);
    for (auto [is_machine, idx] : s.order) {
      if (is_machine)
        build_machine(s.machines[idx], path);
      else
        build_sphere(s.subspheres[idx], path);
    }
  }

  void build_machine(const AstMachine& md, const std::vector<std::string>& sphere_path) {
    const Model& m = builder_.peek();
    auto sphere = m.resolve_sphere(sphere_path);
    if (sphere && (m.child_sphere(*sphere, md.name) || m.machine_in(*sphere, md.name))) {
      error("FM-P005", md.span, "duplicate name '" + md.name + "' in this sphere");
      return;
    }
    if (!m.find_thing(md.thing)) {
      error("FM-P003", md.thing_span, "unknown thing '" + md.thing + "'");
      return;
    }
    bool merged = false, split = false;
    for (std::size_t i = 0; i < md.stages.size(); ++i) {
      if (md.stages[i] == StageKind::Receive) merged = true;
      if (md.stages[i] == StageKind::Arrive || md.stages[i] == StageKind::Accept) split = true;
      for (std::size_t j = i + 1; j < md.stages.size(); ++j)
        if (md.stages[i] == md.stages[j]) {
          error("FM-P005", md.stage_spans[j],
                "stage " + std::string(stage_name(md.stages[j])) + " repeated in machine '" +
                    md.name + "'");
          return;
        }
    }
    if (merged && split) {
      error("FM-P004", md.span,
            "machine '" + md.name + "' mixes Receive with Arrive/Accept");
      return;
    }
    builder_.add_machine(sphere_path, md.name, md.thing, md.stages);
  }

  std::optional<Endpoint> resolve(const AstPath& p) {
    const Model& m = builder_.peek();
    auto stage = stage_from_name(p.segs.back());
    if (!stage) {
      error("FM-P002", p.span, "path must end in a stage name");
      return std::nullopt;
    }
    SphereId cur = root_sphere;
    for (std::size_t i = 0; i + 2 < p.segs.size(); ++i) {
      auto next = m.child_sphere(cur, p.segs[i]);
      if (!next) {
        error("FM-P003", p.span, "unknown sphere '" + p.segs[i] + "' in path");
        return std::nullopt;
      }
      cur = *next;
    }
    auto machine = m.machine_in(cur, p.segs[p.segs.size() - 2]);
    if (!machine) {
      error("FM-P003", p.span, "unknown machine '" + p.segs[p.segs.size() - 2] + "' in path");
      return std::nullopt;
    }
    Endpoint e{*machine, *stage};
    if (!m.endpoint_ok(e)) {
      error("FM-P003", p.span,
            "machine '" + m.machine_path(*machine) + "' has no " +
                std::string(stage_name(*stage)) + " stage");
      return std::nullopt;
    }
    return e;
  }

  void build_junction(const AstJunction& j) {
    if (builder_.peek().junction_id(j.name)) {
      error("FM-P005", j.span, "duplicate junction '" + j.name + "'");
      return;
    }
    auto out = resolve(j.output);
    if (!out) return;
    if (auto err = trigger_target_error(builder_.peek(), *out)) {
      error("FM-P004", j.output.span, *err);
      return;
    }
    builder_.add_junction(j.name, *out);
  }

  void build_flow(const AstFlow& f) {
    auto src = resolve(f.source);
    auto dst = resolve(f.target);
    if (!src || !dst) return;
    if (auto err = flow_arc_error(builder_.peek(), *src, *dst)) {
      error("FM-P004", f.span, *err);
      return;
    }
    builder_.add_flow_arc(*src, *dst);
  }

  void build_trigger(const AstTrigger& t) {
    auto src = resolve(t.source);
    if (!src) return;
    if (t.guard) {
      const Model& m = builder_.peek();
      const ThingKind& kind = m.things[m.machines[src->machine].thing];
      for (const auto& name : t.guard->attr_names())
        if (!kind.find_attr(name)) {
          error("FM-P003", t.guard_span,
                "guard references unknown attribute '" + name + "' of thing '" + kind.name + "'");
          return;
        }
    }
    if (t.target_junction) {
      auto id = builder_.peek().junction_id(*t.target_junction);
      if (!id) {
        error("FM-P003", t.target_span, "unknown junction '" + *t.target_junction + "'");
        return;
      }
      builder_.add_trigger_arc(*src, *id, t.guard);
      return;
    }
    auto dst = resolve(*t.target_path);
    if (!dst) return;
    if (auto err = trigger_target_error(builder_.peek(), *dst)) {
      error("FM-P004", t.target_span, *err);
      return;
    }
    builder_.add_trigger_arc(*src, *dst, t.guard);
  }

  void error(const char* code, Span at, std::string msg) {
    failed_ = true;
    if (diags_.size() < max_diagnostics) diags_.push_back({code, at, std::move(msg)});
  }

  const Ast& ast_;
  std::vector<ParseDiagnostic>& diags_;
  ModelBuilder builder_;
  bool failed_ = false;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Public entry points

inline ParseResult parse(std::string_view text) {
  ParseResult result;
  auto tokens = detail::Lexer(text, result.diagnostics).run();
  // Bad tokens were already reported; drop them so the parser does not
  // trip over them a second time.
  std::erase_if(tokens, [](const detail::Token& t) { return t.kind == detail::Tok::Bad; });
  detail::Ast ast = detail::Parser(std::move(tokens), result.diagnostics).run();
  // Name resolution on a half-parsed tree produces cascade noise, so the
  // build phase only runs on a cleanly parsed one.
  if (!result.diagnostics.empty()) return result;
  result.model = detail::Builder(ast, result.diagnostics).run();
  return result;
}

// ---------------------------------------------------------------------------
// Canonical serialization
//
// Sections in a fixed order (things, spheres, junctions, flows, triggers),
// one declaration per line, two-space indentation, a single blank line
// between non-empty sections, stage sets in stage-kind order.  The output
// of serialize() re-parses to a structurally equal model, and serializing
// that model reproduces the bytes.  An empty model serializes to nothing.

namespace detail {

inline void serialize_guard_node(const Guard& g, std::uint32_t at, int parent_prec,
                                 std::string& out) {
  const GuardNode& n = g.nodes[at];
  // Precedence: or = 1, and = 2, not = 3, atoms = 4.
  switch (n.op) {
    case GuardNode::Op::Or: {
      bool parens = parent_prec > 1;
      if (parens) out += '(';
      serialize_guard_node(g, n.lhs, 1, out);
      out += " or ";
      serialize_guard_node(g, n.rhs, 1, out);
      if (parens) out += ')';
      break;
    }
    case GuardNode::Op::And: {
      bool parens = parent_prec > 2;
      if (parens) out += '(';
      serialize_guard_node(g, n.lhs, 2, out);
      out += " and ";
      serialize_guard_node(g, n.rhs, 2, out);
      if (parens) out += ')';
      break;
    }
    case GuardNode::Op::Not:
      out += "not ";
      serialize_guard_node(g, n.lhs, 3, out);
      break;
    case GuardNode::Op::AttrEq:
      out += n.name;
      out += " = ";
      out += n.numeric ? std::to_string(n.number) : n.symbol;
      break;
    case GuardNode::Op::ClockLe:
      out += "tick <= ";
      out += n.name;
      break;
  }
}

inline std::string serialize_guard(const Guard& g) {
  std::string out;
  serialize_guard_node(g, g.root, 0, out);
  return out;
}

inline void serialize_sphere(const Model& m, SphereId id, int depth, std::string& out) {
  const Sphere& s = m.spheres[id];
  std::string pad(std::size_t(depth) * 2, ' ');
  out += pad + "sphere " + s.name + " {\n";
  // Interleave machines and subspheres in their declared order.
  struct Item { std::uint32_t seq; bool is_machine; std::uint32_t id; };
  std::vector<Item> items;
  for (MachineId mid : s.machines) items.push_back({m.machines[mid].decl_seq, true, mid});
  for (SphereId cid : s.children) items.push_back({m.spheres[cid].decl_seq, false, cid});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.seq < b.seq; });
  for (const Item& it : items) {
    if (it.is_machine) {
      const Machine& mc = m.machines[it.id];
      out += pad + "  machine " + mc.name + " of " + m.things[mc.thing].name + " { stages {";
      for (StageKind k : all_stage_kinds)
        if (mc.has_stage(k)) out += " " + std::string(stage_name(k));
      out += " } }\n";
    } else {
      serialize_sphere(m, it.id, depth + 1, out);
    }
  }
  out += pad + "}\n";
}

}  // namespace detail

inline std::string serialize(const Model& m) {
  std::vector<std::string> sections;

  if (!m.things.empty()) {
    std::string s;
    for (const auto& t : m.things) {
      s += "thing " + t.name;
      if (!t.attributes.empty()) {
        s += " {";
        for (const auto& a : t.attributes) {
          s += " " + a.name + ": ";
          if (a.domain.kind == AttrDomain::Kind::Integer) {
            s += "integer";
          } else {
            s += "{";
            for (std::size_t i = 0; i < a.domain.symbols.size(); ++i)
              s += (i ? ", " : "") + a.domain.symbols[i];
            s += "}";
          }
        }
        s += " }";
      }
      s += "\n";
    }
    sections.push_back(std::move(s));
  }

  if (!m.spheres[root_sphere].children.empty()) {
    std::string s;
    for (SphereId c : m.spheres[root_sphere].children) detail::serialize_sphere(m, c, 0, s);
    sections.push_back(std::move(s));
  }

  if (!m.junctions.empty()) {
    std::string s;
    for (const auto& j : m.junctions)
      for (const auto& t : m.triggers)
        if (t.index == j.output) {
          s += "junction " + j.name + " => " + m.endpoint_str(std::get<Endpoint>(t.target)) + "\n";
          break;
        }
    sections.push_back(std::move(s));
  }

  if (!m.flows.empty()) {
    std::string s;
    for (const auto& f : m.flows)
      s += "flow " + m.endpoint_str(f.source) + " -> " + m.endpoint_str(f.target) + "\n";
    sections.push_back(std::move(s));
  }

  {
    std::string s;
    for (const auto& t : m.triggers) {
      if (!std::holds_alternative<Endpoint>(t.source)) continue;  // junction outputs live above
      s += "trigger " + m.endpoint_str(std::get<Endpoint>(t.source)) + " => ";
      if (std::holds_alternative<Endpoint>(t.target))
        s += m.endpoint_str(std::get<Endpoint>(t.target));
      else
        s += "junction " + m.junctions[std::get<JunctionRef>(t.target).id].name;
      if (t.guard) s += " when " + detail::serialize_guard(*t.guard);
      s += "\n";
    }
    if (!s.empty()) sections.push_back(std::move(s));
  }

  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i) out += "\n";
    out += sections[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural equality
//
// Two models are structurally equal when they declare the same things, the
// same sphere/machine tree, and the same arcs in the same per-category
// order.  Arc endpoints compare by dotted path, so differing internal ids
// (e.g. after a round-trip) do not matter.  Stage sets compare as sets.

namespace detail {

inline bool guards_equal(const Guard& a, std::uint32_t na, const Guard& b, std::uint32_t nb) {
  const GuardNode& x = a.nodes[na];
  const GuardNode& y = b.nodes[nb];
  if (x.op != y.op) return false;
  switch (x.op) {
    case GuardNode::Op::AttrEq:
      return x.name == y.name && x.numeric == y.numeric &&
             (x.numeric ? x.number == y.number : x.symbol == y.symbol);
    case GuardNode::Op::ClockLe:
      return x.name == y.name;
    case GuardNode::Op::Not:
      return guards_equal(a, x.lhs, b, y.lhs);
    case GuardNode::Op::And:
    case GuardNode::Op::Or:
      return guards_equal(a, x.lhs, b, y.lhs) && guards_equal(a, x.rhs, b, y.rhs);
  }
  return false;
}

inline bool spheres_equal(const Model& ma, SphereId sa, const Model& mb, SphereId sb) {
  const Sphere& a = ma.spheres[sa];
  const Sphere& b = mb.spheres[sb];
  if (a.name != b.name) return false;
  if (a.machines.size() != b.machines.size() || a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.machines.size(); ++i) {
    const Machine& x = ma.machines[a.machines[i]];
    const Machine& y = mb.machines[b.machines[i]];
    if (x.name != y.name) return false;
    if (ma.things[x.thing].name != mb.things[y.thing].name) return false;
    if (x.stages.size() != y.stages.size()) return false;
    for (StageKind k : x.stages)
      if (!y.has_stage(k)) return false;
    if (!x.subspheres.empty() || !y.subspheres.empty()) return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!spheres_equal(ma, a.children[i], mb, b.children[i])) return false;
  return true;
}

}  // namespace detail

inline bool models_equal(const Model& a, const Model& b) {
  if (a.things.size() != b.things.size()) return false;
  for (std::size_t i = 0; i < a.things.size(); ++i)
    if (a.things[i] != b.things[i]) return false;

  if (!detail::spheres_equal(a, root_sphere, b, root_sphere)) return false;

  if (a.flows.size() != b.flows.size()) return false;
  for (std::size_t i = 0; i < a.flows.size(); ++i) {
    if (a.endpoint_str(a.flows[i].source) != b.endpoint_str(b.flows[i].source)) return false;
    if (a.endpoint_str(a.flows[i].target) != b.endpoint_str(b.flows[i].target)) return false;
  }

  if (a.junctions.size() != b.junctions.size()) return false;
  for (std::size_t i = 0; i < a.junctions.size(); ++i) {
    if (a.junctions[i].name != b.junctions[i].name) return false;
    if (a.junctions[i].inputs.size() != b.junctions[i].inputs.size()) return false;
  }

  // Endpoint-sourced triggers in declaration order; junction outputs by
  // junction, since their arc positions shift across a round-trip.
  auto endpoint_triggers = [](const Model& m) {
    std::vector<const TriggerArc*> out;
    for (const auto& t : m.triggers)
      if (std::holds_alternative<Endpoint>(t.source)) out.push_back(&t);
    return out;
  };
  auto ta = endpoint_triggers(a);
  auto tb = endpoint_triggers(b);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (a.endpoint_str(std::get<Endpoint>(ta[i]->source)) !=
        b.endpoint_str(std::get<Endpoint>(tb[i]->source)))
      return false;
    bool aj = std::holds_alternative<JunctionRef>(ta[i]->target);
    bool bj = std::holds_alternative<JunctionRef>(tb[i]->target);
    if (aj != bj) return false;
    if (aj) {
      if (a.junctions[std::get<JunctionRef>(ta[i]->target).id].name !=
          b.junctions[std::get<JunctionRef>(tb[i]->target).id].name)
        return false;
    } else if (a.endpoint_str(std::get<Endpoint>(ta[i]->target)) !=
               b.endpoint_str(std::get<Endpoint>(tb[i]->target))) {
      return false;
    }
    if (ta[i]->guard.has_value() != tb[i]->guard.has_value()) return false;
    if (ta[i]->guard &&
        !detail::guards_equal(*ta[i]->guard, ta[i]->guard->root, *tb[i]->guard,
                              tb[i]->guard->root))
      return false;
  }

  for (std::size_t i = 0; i < a.junctions.size(); ++i) {
    const TriggerArc* oa = nullptr;
    const TriggerArc* ob = nullptr;
    for (const auto& t : a.triggers)
      if (t.index == a.junctions[i].output) oa = &t;
    for (const auto& t : b.triggers)
      if (t.index == b.junctions[i].output) ob = &t;
    if (!oa || !ob) return false;
    if (a.endpoint_str(std::get<Endpoint>(oa->target)) !=
        b.endpoint_str(std::get<Endpoint>(ob->target)))
      return false;
  }
  return true;
}

}  // namespace flowkit
