#include "hornpoc/parser.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>

namespace hornpoc {

namespace {

// ---------------------------------------------------------------------------
// Source positions

class LineTable {
 public:
  LineTable(std::string_view src, std::string file) : file_(std::move(file)) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (src[i] == '\n') starts_.push_back(i + 1);
    }
  }

  SourceSpan span(std::size_t offset, std::size_t length) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    std::size_t line = static_cast<std::size_t>(it - starts_.begin());
    std::size_t col = offset - starts_[line - 1] + 1;
    return SourceSpan{file_, static_cast<int>(line), static_cast<int>(col),
                      static_cast<int>(std::max<std::size_t>(length, 1))};
  }

 private:
  std::string file_;
  std::vector<std::size_t> starts_;
};

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Ident, Number, String, LParen, RParen, LBrack, RBrack, Comma, Dot, Colon, Slash,
  And, Arrow, Neq, Annotation, End, Bad
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Slash: return "'/'";
    case Tok::And: return "'&&'";
    case Tok::Arrow: return "'=>'";
    case Tok::Neq: return "'<>'";
    case Tok::Annotation: return "annotation";
    case Tok::End: return "end of input";
    case Tok::Bad: return "invalid character";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;        // identifier / decoded string / raw annotation content
  std::size_t offset = 0;  // start of the token in the source
  std::size_t length = 0;
  std::size_t content_offset = 0;  // annotations: first byte after "(**"
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  Lexer(std::string_view src, std::size_t begin, std::size_t end, const LineTable& lines,
        std::vector<Diagnostic>& diags)
      : src_(src), pos_(begin), end_(end), lines_(lines), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  Token make(Tok k, std::size_t start, std::string text = {}) {
    Token t;
    t.kind = k;
    t.offset = start;
    t.length = pos_ - start;
    t.text = std::move(text);
    return t;
  }

  void skip_trivia() {
    while (pos_ < end_) {
      if (is_space(src_[pos_])) {
        ++pos_;
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < end_ && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token next() {
    skip_trivia();
    if (pos_ >= end_) return make(Tok::End, end_);
    std::size_t start = pos_;
    char c = src_[pos_];
    if (is_ident_start(c)) {
      while (pos_ < end_ && is_ident_char(src_[pos_])) ++pos_;
      return make(Tok::Ident, start, std::string(src_.substr(start, pos_ - start)));
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < end_ && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return make(Tok::Number, start, std::string(src_.substr(start, pos_ - start)));
    }
    if (c == '"') return string_literal();
    if (src_.substr(pos_, 3) == "(**") return annotation();
    auto two = src_.substr(pos_, 2);
    if (two == "&&") { pos_ += 2; return make(Tok::And, start); }
    if (two == "=>") { pos_ += 2; return make(Tok::Arrow, start); }
    if (two == "<>") { pos_ += 2; return make(Tok::Neq, start); }
    ++pos_;
    switch (c) {
      case '(': return make(Tok::LParen, start);
      case ')': return make(Tok::RParen, start);
      case '[': return make(Tok::LBrack, start);
      case ']': return make(Tok::RBrack, start);
      case ',': return make(Tok::Comma, start);
      case '.': return make(Tok::Dot, start);
      case ':': return make(Tok::Colon, start);
      case '/': return make(Tok::Slash, start);
      default: break;
    }
    diags_.push_back({Severity::Error, "syntax",
                      std::string("unexpected character '") + c + "'", lines_.span(start, 1)});
    return make(Tok::Bad, start);
  }

  Token string_literal() {
    std::size_t start = pos_++;
    std::string text;
    while (pos_ < end_ && src_[pos_] != '"' && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && pos_ + 1 < end_) ++pos_;
      text += src_[pos_++];
    }
    if (pos_ >= end_ || src_[pos_] != '"') {
      diags_.push_back({Severity::Error, "syntax", "unterminated string", lines_.span(start, pos_ - start)});
      return make(Tok::Bad, start);
    }
    ++pos_;
    return make(Tok::String, start, std::move(text));
  }

  Token annotation() {
    std::size_t start = pos_;
    std::size_t content = pos_ + 3;
    std::size_t close = src_.find("**)", content);
    if (close == std::string_view::npos || close + 3 > end_) {
      pos_ = end_;
      diags_.push_back({Severity::Error, "syntax", "unterminated annotation (missing '**)')",
                        lines_.span(start, 3)});
      return make(Tok::Bad, start);
    }
    pos_ = close + 3;
    Token t = make(Tok::Annotation, start, std::string(src_.substr(content, close - content)));
    t.content_offset = content;
    return t;
  }

  std::string_view src_;
  std::size_t pos_;
  std::size_t end_;
  const LineTable& lines_;
  std::vector<Diagnostic>& diags_;
};

// ---------------------------------------------------------------------------
// Raw syntax

struct RawTerm {
  enum Kind { Ident, Call, NameT } kind = Ident;
  std::string id;
  std::vector<RawTerm> args;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct RawFact {
  bool diseq = false;
  std::string pred;
  std::vector<RawTerm> args;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct RawAnnotation {
  std::string text;
  std::size_t offset = 0;          // of "(**"
  std::size_t content_offset = 0;  // after "(**"
  std::size_t length = 0;
};

struct RawSig {
  std::string id;
  std::optional<std::vector<std::string>> params;  // absent: untyped "/n" form
  std::size_t untyped_arity = 0;
  std::optional<std::string> result;
  std::optional<RawAnnotation> annotation;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct RawClause {
  std::string label;
  std::vector<RawFact> hyps;
  RawFact concl;
  std::optional<RawAnnotation> annotation;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct RawModel {
  std::vector<std::pair<std::string, std::size_t>> types;
  std::vector<RawSig> names, funs, preds;
  std::vector<RawClause> clauses;
  std::vector<RawFact> queries;
  std::optional<RawAnnotation> header, footer;
};

struct SyntaxError {};

class Parser {
 public:
  Parser(std::vector<Token> toks, const LineTable& lines, std::vector<Diagnostic>& diags)
      : toks_(std::move(toks)), lines_(lines), diags_(diags) {}

  RawModel model() {
    RawModel m;
    while (peek().kind != Tok::End) {
      std::size_t before = pos_;
      try {
        declaration(m);
      } catch (const SyntaxError&) {
        recover(before);
      }
    }
    return m;
  }

  RawFact single_fact() {
    RawFact f = fact();
    if (peek().kind == Tok::Dot) ++pos_;
    expect(Tok::End, "after fact");
    return f;
  }

  RawTerm single_term() {
    RawTerm t = term();
    expect(Tok::End, "after term");
    return t;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& advance() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& msg) {
    if (at.kind != Tok::Bad) diags_.push_back({Severity::Error, "syntax", msg, lines_.span(at.offset, at.length)});
    throw SyntaxError{};
  }

  const Token& expect(Tok k, const char* context) {
    if (peek().kind != k) {
      fail(peek(), std::string("expected ") + tok_name(k) + " " + context + ", found " + tok_name(peek().kind));
    }
    return advance();
  }

  void recover(std::size_t before) {
    if (pos_ == before) advance();
    while (peek().kind != Tok::End && peek().kind != Tok::Dot) advance();
    if (peek().kind == Tok::Dot) advance();
  }

  std::size_t end_of_previous() const {
    const Token& t = toks_[pos_ == 0 ? 0 : pos_ - 1];
    return t.offset + t.length;
  }

  void declaration(RawModel& m) {
    const Token& kw = peek();
    if (kw.kind != Tok::Ident) fail(kw, std::string("expected a declaration, found ") + tok_name(kw.kind));
    std::size_t start = kw.offset;
    const std::string word = kw.text;
    advance();
    if (word == "type") {
      m.types.emplace_back(expect(Tok::Ident, "after 'type'").text, start);
      expect(Tok::Dot, "to end the type declaration");
    } else if (word == "name") {
      m.names.push_back(signature(start, Tok::LBrack, Tok::RBrack, true, false));
    } else if (word == "fun") {
      m.funs.push_back(signature(start, Tok::LParen, Tok::RParen, true, true));
    } else if (word == "pred") {
      m.preds.push_back(signature(start, Tok::LParen, Tok::RParen, false, false));
    } else if (word == "clause") {
      m.clauses.push_back(clause(start));
    } else if (word == "query") {
      RawFact f = fact();
      expect(Tok::Dot, "to end the query");
      m.queries.push_back(std::move(f));
    } else if (word == "header" || word == "footer") {
      const Token& a = expect(Tok::Annotation, ("after '" + word + "'").c_str());
      RawAnnotation raw{a.text, a.offset, a.content_offset, a.length};
      auto& slot = word == "header" ? m.header : m.footer;
      if (slot) {
        diags_.push_back({Severity::Error, "duplicate-" + word, "more than one " + word,
                          lines_.span(start, word.size())});
      }
      slot = std::move(raw);
      if (peek().kind == Tok::Dot) advance();
    } else {
      fail(kw, "unknown declaration '" + word + "'");
    }
  }

  // name n[t1,..]: t | name n/k   fun f(t1,..): t | fun c: t | fun f/n   pred p(t1,..) | pred p/n
  RawSig signature(std::size_t start, Tok open, Tok close, bool has_result, bool allow_annotation) {
    RawSig s;
    s.offset = start;
    s.id = expect(Tok::Ident, "for the declared symbol").text;
    if (peek().kind == Tok::Slash) {
      advance();
      s.untyped_arity = std::stoul(expect(Tok::Number, "for the arity").text);
    } else {
      std::vector<std::string> params;
      if (peek().kind == open) {
        advance();
        if (peek().kind != close) {
          params.push_back(expect(Tok::Ident, "for a parameter type").text);
          while (peek().kind == Tok::Comma) {
            advance();
            params.push_back(expect(Tok::Ident, "for a parameter type").text);
          }
        }
        expect(close, "to close the parameter list");
      } else if (!(has_result && open == Tok::LParen && peek().kind == Tok::Colon)) {
        fail(peek(), std::string("expected ") + tok_name(open) + " or '/' after '" + s.id + "'");
      }
      s.params = std::move(params);
      if (has_result && peek().kind == Tok::Colon) {
        advance();
        s.result = expect(Tok::Ident, "for the result type").text;
      } else if (has_result && open == Tok::LParen) {
        fail(peek(), "expected ':' and a result type for function '" + s.id + "'");
      }
    }
    if (allow_annotation && peek().kind == Tok::Annotation) {
      const Token& a = advance();
      s.annotation = RawAnnotation{a.text, a.offset, a.content_offset, a.length};
    }
    expect(Tok::Dot, "to end the declaration");
    s.length = end_of_previous() - start;
    return s;
  }

  RawClause clause(std::size_t start) {
    RawClause c;
    c.offset = start;
    c.label = expect(Tok::String, "for the clause label").text;
    if (peek().kind != Tok::Arrow) {
      c.hyps.push_back(fact());
      while (peek().kind == Tok::And) {
        advance();
        c.hyps.push_back(fact());
      }
    }
    expect(Tok::Arrow, "before the conclusion");
    c.concl = fact();
    if (peek().kind == Tok::Annotation) {
      const Token& a = advance();
      c.annotation = RawAnnotation{a.text, a.offset, a.content_offset, a.length};
    }
    expect(Tok::Dot, "to end the clause");
    c.length = end_of_previous() - start;
    return c;
  }

  RawFact fact() {
    RawTerm lhs = term();
    RawFact f;
    f.offset = lhs.offset;
    if (peek().kind == Tok::Neq) {
      advance();
      RawTerm rhs = term();
      f.diseq = true;
      f.args = {std::move(lhs), std::move(rhs)};
    } else {
      if (lhs.kind != RawTerm::Call) fail(toks_[pos_ - 1], "expected a predicate application or a disequality");
      f.pred = lhs.id;
      f.args = std::move(lhs.args);
    }
    f.length = end_of_previous() - f.offset;
    return f;
  }

  RawTerm term() {
    const Token& id = expect(Tok::Ident, "for a term");
    RawTerm t;
    t.id = id.text;
    t.offset = id.offset;
    Tok close = Tok::End;
    if (peek().kind == Tok::LParen) {
      t.kind = RawTerm::Call;
      close = Tok::RParen;
    } else if (peek().kind == Tok::LBrack) {
      t.kind = RawTerm::NameT;
      close = Tok::RBrack;
    }
    if (close != Tok::End) {
      advance();
      if (peek().kind != close) {
        t.args.push_back(term());
        while (peek().kind == Tok::Comma) {
          advance();
          t.args.push_back(term());
        }
      }
      expect(close, "to close the argument list");
    }
    t.length = end_of_previous() - t.offset;
    return t;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const LineTable& lines_;
  std::vector<Diagnostic>& diags_;
};

// ---------------------------------------------------------------------------
// Annotation text

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.substr(i, 3) == "*\\)") {
      out += "*)";
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.substr(i, 2) == "*)") {
      out += "*\\)";
      ++i;
    } else {
      out += s[i];
    }
  }
  return out;
}

// Only whole blank lines are stripped at either end; a one-line block is trimmed.
std::string strip_block(std::string_view s) {
  std::size_t first = 0;
  while (first < s.size() && is_space(s[first])) ++first;
  if (first == s.size()) return {};
  std::size_t nl = s.rfind('\n', first);
  std::size_t begin = (nl == std::string_view::npos) ? first : nl + 1;
  std::size_t last = s.size();
  while (last > begin && is_space(s[last - 1])) --last;
  std::size_t nl2 = s.find('\n', last);
  std::size_t end = (nl2 == std::string_view::npos) ? last : nl2;
  if (end > begin && s[end - 1] == '\r') --end;
  return std::string(s.substr(begin, end - begin));
}

struct HolePiece {
  bool hole = false;
  std::string text;
  std::size_t offset = 0;  // source offset of the piece
};

struct SplitAnnotation {
  char delimiter = '|';
  std::vector<HolePiece> pieces;
};

std::optional<SplitAnnotation> split_annotation(const RawAnnotation& a, const LineTable& lines,
                                                std::vector<Diagnostic>& diags) {
  SplitAnnotation out;
  std::string_view raw = a.text;
  std::size_t i = 0;
  while (i < raw.size() && is_space(raw[i])) ++i;
  if (i == raw.size()) return out;
  out.delimiter = raw[i++];
  while (i < raw.size() && is_space(raw[i])) ++i;
  std::size_t end = raw.size();
  while (end > i && is_space(raw[end - 1])) --end;
  bool in_hole = false;
  std::size_t piece_start = i;
  for (std::size_t j = i; j <= end; ++j) {
    if (j == end || raw[j] == out.delimiter) {
      if (j == end && in_hole) {
        diags.push_back({Severity::Error, "hole", std::string("unterminated hole (missing closing '") +
                                                      out.delimiter + "')",
                         lines.span(a.content_offset + piece_start - 1, 1)});
        return std::nullopt;
      }
      std::string_view text = raw.substr(piece_start, j - piece_start);
      if (in_hole || !text.empty()) {
        out.pieces.push_back({in_hole, in_hole ? std::string(text) : unescape(text),
                              a.content_offset + piece_start});
      }
      in_hole = !in_hole;
      piece_start = j + 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elaboration

using Env = std::map<std::string, TypeName>;

class Elaborator {
 public:
  Elaborator(std::string_view src, const LineTable& lines, std::vector<Diagnostic>& diags)
      : src_(src), lines_(lines), diags_(diags) {}

  Model run(const RawModel& raw, std::string name) {
    Model m;
    m.name = std::move(name);
    for (const auto& [t, off] : raw.types) m.types.push_back(TypeName{t});
    for (const RawSig& s : raw.names) {
      NameSignature n{s.id, param_types(s), result_type(s), span(s.offset, s.length)};
      m.names.push_back(std::move(n));
    }
    for (const RawSig& s : raw.funs) {
      FunctionSymbol f{s.id, param_types(s), result_type(s), std::nullopt, span(s.offset, s.length)};
      if (s.annotation) f.annotation = symbol_annotation(*s.annotation, f);
      m.functions.push_back(std::move(f));
    }
    for (const RawSig& s : raw.preds) {
      m.predicates.push_back(PredicateSymbol{s.id, param_types(s), span(s.offset, s.length)});
    }
    m_ = &m;
    for (const RawClause& c : raw.clauses) {
      if (auto clause = elaborate_clause(c)) m.clauses.push_back(std::move(*clause));
    }
    for (const RawFact& q : raw.queries) {
      Env env;
      infer_facts({&q}, env);
      if (auto f = build_fact(q, env)) m.queries.push_back(Query{std::move(*f), span(q.offset, q.length)});
    }
    if (raw.header) m.header = unescape(strip_block(raw.header->text));
    if (raw.footer) m.footer = unescape(strip_block(raw.footer->text));
    m_ = nullptr;
    return m;
  }

  std::optional<Fact> fact_in(const RawFact& f, const Model& m) {
    m_ = &m;
    Env env;
    infer_facts({&f}, env);
    auto out = build_fact(f, env);
    m_ = nullptr;
    return out;
  }

 private:
  SourceSpan span(std::size_t off, std::size_t len) const { return lines_.span(off, len); }

  void error(const std::string& code, const std::string& msg, std::size_t off, std::size_t len) {
    diags_.push_back({Severity::Error, code, msg, span(off, len)});
  }

  static std::vector<TypeName> param_types(const RawSig& s) {
    std::vector<TypeName> out;
    if (s.params) {
      for (const auto& p : *s.params) out.push_back(TypeName{p});
    } else {
      out.assign(s.untyped_arity, TypeName::universal());
    }
    return out;
  }
  static TypeName result_type(const RawSig& s) {
    return s.result ? TypeName{*s.result} : TypeName::universal();
  }

  std::optional<FunctionSymbolAnnotation> symbol_annotation(const RawAnnotation& a, const FunctionSymbol& f) {
    auto split = split_annotation(a, lines_, diags_);
    if (!split) return std::nullopt;
    FunctionSymbolAnnotation out;
    out.delimiter = split->delimiter;
    out.span = span(a.offset, a.length);
    for (const HolePiece& p : split->pieces) {
      if (!p.hole) {
        out.segments.emplace_back(p.text);
        continue;
      }
      std::string_view t = p.text;
      while (!t.empty() && is_space(t.front())) t.remove_prefix(1);
      while (!t.empty() && is_space(t.back())) t.remove_suffix(1);
      bool digits = !t.empty() && t.size() < 9 &&
                    std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      int index = digits ? std::stoi(std::string(t)) : 0;
      if (!digits || index < 1 || static_cast<std::size_t>(index) > f.arity()) {
        error("hole-index",
              "hole '" + p.text + "' in annotation of '" + f.id + "' must be an argument position 1.." +
                  std::to_string(f.arity()),
              p.offset, p.text.size());
        return std::nullopt;
      }
      out.segments.emplace_back(IndexHole{index});
    }
    return out;
  }

  bool is_constant(const RawTerm& t) const { return t.kind == RawTerm::Ident && m_->find_constant(t.id); }

  void constrain(const RawTerm& t, const TypeName& type, Env& env) {
    auto [it, inserted] = env.try_emplace(t.id, type);
    if (!inserted && it->second != type) {
      error("variable-type",
            "variable '" + t.id + "' used at types '" + it->second.id + "' and '" + type.id + "'", t.offset,
            t.length);
    }
  }

  void infer(const RawTerm& t, const TypeName* expected, Env& env) {
    switch (t.kind) {
      case RawTerm::Ident:
        if (!is_constant(t) && expected) constrain(t, *expected, env);
        return;
      case RawTerm::Call: {
        const FunctionSymbol* f = m_->find_function(t.id, t.args.size());
        for (std::size_t i = 0; i < t.args.size(); ++i) infer(t.args[i], f ? &f->param_types[i] : nullptr, env);
        return;
      }
      case RawTerm::NameT: {
        const NameSignature* n = m_->find_name(t.id);
        bool typed = n && n->param_types.size() == t.args.size();
        for (std::size_t i = 0; i < t.args.size(); ++i) infer(t.args[i], typed ? &n->param_types[i] : nullptr, env);
        return;
      }
    }
  }

  std::optional<TypeName> synth(const RawTerm& t, const Env& env) const {
    switch (t.kind) {
      case RawTerm::Ident: {
        if (const FunctionSymbol* c = m_->find_constant(t.id)) return c->result_type;
        auto it = env.find(t.id);
        if (it != env.end()) return it->second;
        return std::nullopt;
      }
      case RawTerm::Call:
        if (const FunctionSymbol* f = m_->find_function(t.id, t.args.size())) return f->result_type;
        return std::nullopt;
      case RawTerm::NameT:
        if (const NameSignature* n = m_->find_name(t.id)) return n->type;
        return std::nullopt;
    }
    return std::nullopt;
  }

  void infer_facts(const std::vector<const RawFact*>& facts, Env& env) {
    for (const RawFact* f : facts) {
      if (f->diseq) continue;
      const PredicateSymbol* p = m_->find_predicate(f->pred);
      bool typed = p && p->arity() == f->args.size();
      for (std::size_t i = 0; i < f->args.size(); ++i) infer(f->args[i], typed ? &p->param_types[i] : nullptr, env);
    }
    // Disequalities take their type from whichever side is known; chains may
    // need several passes.
    for (std::size_t pass = 0; pass <= facts.size(); ++pass) {
      std::size_t before = env.size();
      for (const RawFact* f : facts) {
        if (!f->diseq) continue;
        auto type = synth(f->args[0], env);
        if (!type) type = synth(f->args[1], env);
        if (!type) continue;
        infer(f->args[0], &*type, env);
        infer(f->args[1], &*type, env);
      }
      if (env.size() == before) break;
    }
  }

  std::optional<Term> build(const RawTerm& t, const Env& env, bool in_hole) {
    switch (t.kind) {
      case RawTerm::Ident: {
        if (const FunctionSymbol* c = m_->find_constant(t.id)) return Term::constant(t.id, c->result_type);
        auto it = env.find(t.id);
        if (it != env.end()) return Term::variable(t.id, it->second);
        if (in_hole) {
          error("unknown-variable", "annotation refers to '" + t.id + "', which is not a variable of the clause",
                t.offset, t.length);
        } else {
          error("type-inference", "cannot infer the type of variable '" + t.id + "'", t.offset, t.length);
        }
        return std::nullopt;
      }
      case RawTerm::Call: {
        const FunctionSymbol* f = m_->find_function(t.id, t.args.size());
        if (!f) {
          error("unknown-function",
                "undeclared function symbol '" + t.id + "/" + std::to_string(t.args.size()) + "'", t.offset,
                t.length);
          return std::nullopt;
        }
        std::vector<Term> args;
        for (const RawTerm& a : t.args) {
          auto b = build(a, env, in_hole);
          if (!b) return std::nullopt;
          args.push_back(std::move(*b));
        }
        return Term::function(t.id, std::move(args), f->result_type);
      }
      case RawTerm::NameT: {
        const NameSignature* n = m_->find_name(t.id);
        if (!n) {
          error("unknown-name", "undeclared name '" + t.id + "'", t.offset, t.length);
          return std::nullopt;
        }
        if (n->param_types.size() != t.args.size()) {
          error("arity",
                "name '" + t.id + "' expects " + std::to_string(n->param_types.size()) + " parameters, got " +
                    std::to_string(t.args.size()),
                t.offset, t.length);
          return std::nullopt;
        }
        std::vector<Term> args;
        for (const RawTerm& a : t.args) {
          auto b = build(a, env, in_hole);
          if (!b) return std::nullopt;
          args.push_back(std::move(*b));
        }
        return Term::name(t.id, std::move(args), n->type);
      }
    }
    return std::nullopt;
  }

  std::optional<Fact> build_fact(const RawFact& f, const Env& env) {
    std::vector<Term> args;
    bool ok = true;
    if (!f.diseq) {
      const PredicateSymbol* p = m_->find_predicate(f.pred);
      if (!p) {
        error("unknown-predicate", "undeclared predicate '" + f.pred + "'", f.offset, f.pred.size());
        return std::nullopt;
      }
      if (p->arity() != f.args.size()) {
        error("arity",
              "predicate '" + f.pred + "' expects " + std::to_string(p->arity()) + " arguments, got " +
                  std::to_string(f.args.size()),
              f.offset, f.length);
        return std::nullopt;
      }
    }
    for (const RawTerm& a : f.args) {
      auto t = build(a, env, false);
      if (!t) {
        ok = false;
        continue;
      }
      args.push_back(std::move(*t));
    }
    if (!ok) return std::nullopt;
    if (f.diseq) return Fact::disequality(args[0], args[1]);
    return Fact::make(f.pred, std::move(args));
  }

  std::optional<ClauseAnnotation> clause_annotation(const RawAnnotation& a, const Env& env) {
    auto split = split_annotation(a, lines_, diags_);
    if (!split) return std::nullopt;
    ClauseAnnotation out;
    out.delimiter = split->delimiter;
    out.span = span(a.offset, a.length);
    bool ok = true;
    for (const HolePiece& p : split->pieces) {
      if (!p.hole) {
        out.segments.emplace_back(p.text);
        continue;
      }
      std::vector<Diagnostic> local;
      Lexer lex(src_, p.offset, p.offset + p.text.size(), lines_, local);
      std::vector<Token> toks = lex.run();
      Parser parser(std::move(toks), lines_, local);
      std::optional<RawTerm> raw;
      if (local.empty()) {
        try {
          raw = parser.single_term();
        } catch (const SyntaxError&) {
        }
      }
      if (!raw) {
        std::string msg = "cannot parse hole '" + p.text + "' as a term";
        if (!local.empty()) msg += ": " + local.front().message;
        error("hole", msg, p.offset, p.text.size());
        ok = false;
        continue;
      }
      auto term = build(*raw, env, true);
      if (!term) {
        ok = false;
        continue;
      }
      out.segments.emplace_back(TermHole{std::move(*term)});
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<Clause> elaborate_clause(const RawClause& c) {
    std::size_t errors_before = error_count();
    std::vector<const RawFact*> facts;
    for (const RawFact& h : c.hyps) facts.push_back(&h);
    facts.push_back(&c.concl);
    Env env;
    infer_facts(facts, env);
    Clause out;
    out.label = c.label;
    out.span = span(c.offset, c.length);
    for (const RawFact& h : c.hyps) {
      if (auto f = build_fact(h, env)) out.hypotheses.push_back(std::move(*f));
    }
    auto concl = build_fact(c.concl, env);
    if (concl) out.conclusion = std::move(*concl);
    if (c.annotation) out.annotation = clause_annotation(*c.annotation, env);
    if (error_count() != errors_before) return std::nullopt;
    return out;
  }

  std::size_t error_count() const {
    return static_cast<std::size_t>(std::count_if(diags_.begin(), diags_.end(),
                                                  [](const Diagnostic& d) { return d.is_error(); }));
  }

  std::string_view src_;
  const LineTable& lines_;
  std::vector<Diagnostic>& diags_;
  const Model* m_ = nullptr;
};

// ---------------------------------------------------------------------------
// Printing

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string type_list(const std::vector<TypeName>& ts) {
  std::string out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) out += ",";
    out += ts[i].id;
  }
  return out;
}

template <class Segments, class HoleText>
char pick_delimiter(const Segments& segs, char preferred, HoleText hole_text) {
  auto usable = [&](char d) {
    if (is_space(d) || d == '*' || d == ')' || d == '\\' || is_ident_char(d)) return false;
    for (const auto& seg : segs) {
      if (const auto* lit = std::get_if<std::string>(&seg)) {
        if (lit->find(d) != std::string::npos) return false;
      } else if (hole_text(seg).find(d) != std::string::npos) {
        return false;
      }
    }
    return true;
  };
  if (usable(preferred)) return preferred;
  for (char d : std::string_view("|@#$%!~^&?`;=+-<>{}")) {
    if (usable(d)) return d;
  }
  for (int d = 33; d < 127; ++d) {
    if (usable(static_cast<char>(d))) return static_cast<char>(d);
  }
  return preferred;
}

std::string clause_hole_text(const ClauseSegment& s) { return to_string(std::get<TermHole>(s).term); }
std::string symbol_hole_text(const SymbolSegment& s) { return std::to_string(std::get<IndexHole>(s).index); }

template <class Segments, class HoleText>
std::string body_with(const Segments& segs, char delimiter, HoleText hole_text) {
  std::string out;
  for (const auto& seg : segs) {
    if (const auto* lit = std::get_if<std::string>(&seg)) {
      out += escape(*lit);
    } else {
      out += delimiter;
      out += hole_text(seg);
      out += delimiter;
    }
  }
  return out;
}

template <class Annotation, class HoleText>
std::string print_annotation(const Annotation& a, HoleText hole_text) {
  char d = pick_delimiter(a.segments, a.delimiter, hole_text);
  return std::string(" (**") + d + " " + body_with(a.segments, d, hole_text) + " **)";
}

}  // namespace

std::string annotation_body(const ClauseAnnotation& a, char delimiter) {
  return body_with(a.segments, delimiter, clause_hole_text);
}

std::string annotation_body(const FunctionSymbolAnnotation& a, char delimiter) {
  return body_with(a.segments, delimiter, symbol_hole_text);
}

ParseResult parse_model(std::string_view source, const std::string& file, std::string model_name) {
  ParseResult result;
  LineTable lines(source, file);
  Lexer lexer(source, 0, source.size(), lines, result.diagnostics);
  std::vector<Token> toks = lexer.run();
  Parser parser(std::move(toks), lines, result.diagnostics);
  RawModel raw = parser.model();
  if (model_name.empty() && !file.empty()) model_name = std::filesystem::path(file).stem().string();
  Elaborator elab(source, lines, result.diagnostics);
  Model m = elab.run(raw, std::move(model_name));
  if (has_errors(result.diagnostics)) return result;
  std::vector<Diagnostic> v = validate(m);
  result.diagnostics.insert(result.diagnostics.end(), v.begin(), v.end());
  if (!has_errors(result.diagnostics)) result.model = std::move(m);
  return result;
}

std::optional<Fact> parse_fact(std::string_view text, const Model& m, std::vector<Diagnostic>& diags) {
  LineTable lines(text, "");
  std::size_t before = diags.size();
  Lexer lexer(text, 0, text.size(), lines, diags);
  std::vector<Token> toks = lexer.run();
  if (diags.size() != before) return std::nullopt;
  Parser parser(std::move(toks), lines, diags);
  RawFact raw;
  try {
    raw = parser.single_fact();
  } catch (const SyntaxError&) {
    return std::nullopt;
  }
  Elaborator elab(text, lines, diags);
  auto f = elab.fact_in(raw, m);
  if (has_errors(std::vector<Diagnostic>(diags.begin() + static_cast<std::ptrdiff_t>(before), diags.end()))) {
    return std::nullopt;
  }
  return f;
}

std::string print_model(const Model& m) {
  std::string out;
  if (m.header) out += "header (**\n" + escape(*m.header) + "\n**)\n\n";
  out += "// types\n";
  for (const TypeName& t : m.types) out += "type " + t.id + ".\n";
  out += "\n// names\n";
  for (const NameSignature& n : m.names) {
    out += "name " + n.id + "[" + type_list(n.param_types) + "]: " + n.type.id + ".\n";
  }
  out += "\n// functions\n";
  for (const FunctionSymbol& f : m.functions) {
    out += "fun " + f.id;
    if (f.arity() > 0) out += "(" + type_list(f.param_types) + ")";
    out += ": " + f.result_type.id;
    if (f.annotation) out += print_annotation(*f.annotation, symbol_hole_text);
    out += ".\n";
  }
  out += "\n// predicates\n";
  for (const PredicateSymbol& p : m.predicates) out += "pred " + p.id + "(" + type_list(p.param_types) + ").\n";
  out += "\n// clauses\n";
  for (const Clause& c : m.clauses) {
    out += "clause " + quote(c.label) + " " + to_string(c);
    if (c.annotation) out += print_annotation(*c.annotation, clause_hole_text);
    out += ".\n";
  }
  out += "\n// queries\n";
  for (const Query& q : m.queries) out += "query " + to_string(q.fact) + ".\n";
  if (m.footer) out += "\nfooter (**\n" + escape(*m.footer) + "\n**)\n";
  return out;
}

}  // namespace hornpoc
