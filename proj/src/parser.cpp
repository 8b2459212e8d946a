#include "kindforge/parser.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <set>

namespace kindforge {

std::string_view to_string(SiteCategory c) {
  switch (c) {
    case SiteCategory::TypeAbbreviation: return "type-abbreviation";
    case SiteCategory::Universal: return "universal";
    case SiteCategory::Recursive: return "recursive";
    case SiteCategory::TypeAbstraction: return "type-abstraction";
  }
  return "?";
}

namespace {

// Lexer -------------------------------------------------------------------------

enum class Tok : std::uint8_t { Ident, Int, KindLit, KVar, Sym, Eof };

struct Token {
  Tok kind;
  std::string text;
  Span span;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::Eof: return t.text.empty() ? "end of input" : t.text;
    case Tok::Ident: return "identifier '" + t.text + "'";
    case Tok::Int: return "integer " + t.text;
    default: return "'" + t.text + "'";
  }
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      Span at{line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::Eof, "", at});
        return out;
      }
      out.push_back(next(at));
    }
  }

  std::optional<std::uint32_t> max_kvar() const { return max_kvar_; }

 private:
  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        advance();
      } else if (peek() == '-' && peek(1) == '-') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token take(Tok kind, std::size_t n, Span at) {
    Token t{kind, std::string(src_.substr(pos_, n)), at};
    advance(n);
    return t;
  }

  // "1S" style literal: multiplicity char followed by a prekind and no more identifier chars.
  bool kind_literal() const { return (peek(1) == 'S' || peek(1) == 'T') && !ident_char(peek(2)); }

  Token next(Span at) {
    char c = peek();
    if (c == '1' && peek(1) == '-' && peek(2) == '>') return take(Tok::Sym, 3, at);
    if ((c == '1' || c == '*') && kind_literal()) return take(Tok::KindLit, 2, at);
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
      return take(Tok::Int, n, at);
    }
    if (c == '\'' && peek(1) == 'k' && std::isdigit(static_cast<unsigned char>(peek(2)))) {
      std::size_t n = 2;
      while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
      Token t = take(Tok::KVar, n, at);
      std::uint32_t id = static_cast<std::uint32_t>(std::stoul(t.text.substr(2)));
      max_kvar_ = std::max(max_kvar_.value_or(0), id);
      return t;
    }
    if (ident_start(c)) {
      std::size_t n = 1;
      while (ident_char(peek(n))) ++n;
      return take(Tok::Ident, n, at);
    }
    for (std::string_view two : {"->", "/\\", "=>"})
      if (c == two[0] && peek(1) == two[1]) return take(Tok::Sym, 2, at);
    if (std::string_view("(){}[]<>,:;.=\\!?+&|").find(c) != std::string_view::npos) return take(Tok::Sym, 1, at);
    std::string found = (static_cast<unsigned char>(c) < 0x80) ? fmt::format("'{}'", c) : "a non-ASCII character";
    throw ParseError(at, "a token", found);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
  std::optional<std::uint32_t> max_kvar_;
};

const std::set<std::string, std::less<>> kKeywords = {"forall", "rec",  "type", "data", "let",  "in",
                                                       "case",   "of",   "match", "with", "new",  "select",
                                                       "true",   "false", "Skip", "End"};

const std::set<std::string, std::less<>> kBaseTypes = {"Int", "Bool", "Char"};

bool is_upper(const std::string& name) { return !name.empty() && std::isupper(static_cast<unsigned char>(name[0])); }

// Binder kind placeholder for a missing annotation; replaced during numbering.
constexpr std::uint32_t kUnwritten = std::numeric_limits<std::uint32_t>::max();

// Parser ------------------------------------------------------------------------

struct RawAbbrev {
  std::string name;
  Kind kind;
  Span span;
  TypeRef body;
};

struct RawSignature {
  std::string name;
  TypeRef type;
  Span span;
};

struct RawBinding {
  std::string name;
  ExprRef body;
  Span span;
};

using RawDecl = std::variant<RawAbbrev, RawSignature, RawBinding>;

class Parser {
 public:
  explicit Parser(std::string_view src) {
    Lexer lexer(src);
    toks_ = lexer.run();
    max_kvar_ = lexer.max_kvar();
  }

  std::optional<std::uint32_t> max_kvar() const { return max_kvar_; }

  Kind kind_only() { return finish(kind()); }
  TypeRef type_only() { return finish(type()); }
  ExprRef expr_only() { return finish(expr()); }

  // Each declaration ends before the next token in column 1.
  std::vector<RawDecl> program() {
    std::vector<RawDecl> out;
    const std::size_t eof = toks_.size() - 1;
    while (toks_[pos_].kind != Tok::Eof) {
      const Token& t = toks_[pos_];
      if (t.span.col != 1) throw ParseError(t.span, "a declaration starting in column 1", describe(t));
      end_ = pos_ + 1;
      while (end_ < eof && toks_[end_].span.col != 1) ++end_;
      boundary_ = {Tok::Eof, end_ == eof ? "" : "the next declaration", toks_[end_].span};
      out.push_back(declaration());
      if (pos_ != end_) throw ParseError(peek().span, "the end of the declaration", describe(peek()));
      pos_ = end_;
    }
    return out;
  }

 private:
  template <typename T>
  T finish(T value) {
    if (peek().kind != Tok::Eof) throw ParseError(peek().span, "end of input", describe(peek()));
    return value;
  }

  const Token& peek(std::size_t k = 0) const {
    std::size_t limit = std::min(end_, toks_.size() - 1);
    if (pos_ + k < limit) return toks_[pos_ + k];
    return limit == toks_.size() - 1 ? toks_.back() : boundary_;
  }
  const Token& advance() {
    const Token& t = peek();
    if (pos_ < std::min(end_, toks_.size() - 1)) ++pos_;
    return t;
  }

  bool at_sym(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool at_kw(std::string_view s) const { return peek().kind == Tok::Ident && peek().text == s; }

  const Token& expect_sym(std::string_view s) {
    if (!at_sym(s)) throw ParseError(peek().span, fmt::format("'{}'", s), describe(peek()));
    return advance();
  }
  void expect_kw(std::string_view s) {
    if (!at_kw(s)) throw ParseError(peek().span, fmt::format("'{}'", s), describe(peek()));
    advance();
  }
  const Token& expect_name(std::string_view what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || kKeywords.contains(t.text)) throw ParseError(t.span, std::string(what), describe(t));
    return advance();
  }

  // Kinds -----------------------------------------------------------------------

  Kind kind() {
    const Token& t = peek();
    if (t.kind == Tok::KindLit) {
      advance();
      Multiplicity m = t.text[0] == '*' ? Multiplicity::un() : Multiplicity::lin();
      return Kind::concrete(m, t.text[1] == 'S' ? Prekind::S : Prekind::T);
    }
    if (t.kind == Tok::KVar) {
      advance();
      return Kind::var(static_cast<std::uint32_t>(std::stoul(t.text.substr(2))));
    }
    throw ParseError(t.span, "a kind (*S, 1S, *T, 1T)", describe(t));
  }

  Kind optional_kind() {
    if (!at_sym(":")) return Kind::var(kUnwritten);
    advance();
    return kind();
  }

  // Types -----------------------------------------------------------------------

  TypeRef type() {
    Span at = peek().span;
    if (at_kw("forall")) {
      advance();
      std::vector<std::tuple<std::string, Kind, Span>> binders;
      do {
        const Token& name = expect_name("a type variable");
        binders.emplace_back(name.text, optional_kind(), name.span);
      } while (peek().kind == Tok::Ident && !kKeywords.contains(peek().text));
      expect_sym(".");
      TypeRef body = type();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
        auto& [name, k, span] = *it;
        body = make_type(types::Forall{name, k, body}, it + 1 == binders.rend() ? at : span);
      }
      return body;
    }
    if (at_kw("rec")) {
      advance();
      const Token& name = expect_name("a type variable");
      Kind k = optional_kind();
      expect_sym(".");
      return make_type(types::Rec{name.text, k, type()}, at);
    }
    TypeRef dom = semi();
    if (at_sym("->") || at_sym("1->")) {
      Multiplicity m = advance().text == "->" ? Multiplicity::un() : Multiplicity::lin();
      return make_type(types::Arrow{m, dom, type()}, at);
    }
    return dom;
  }

  TypeRef semi() {
    Span at = peek().span;
    TypeRef head = type_atom();
    if (!at_sym(";")) return head;
    advance();
    return make_type(types::Semi{head, semi()}, at);
  }

  LabelMap<TypeRef> type_fields(std::string_view close) {
    LabelMap<TypeRef> out;
    if (at_sym(close)) {
      advance();
      return out;
    }
    while (true) {
      const Token& label = expect_name("a label");
      expect_sym(":");
      out.insert(label.text, type(), label.span);
      if (at_sym(close)) break;
      expect_sym(",");
    }
    advance();
    return out;
  }

  TypeRef type_atom() {
    const Token& t = peek();
    Span at = t.span;
    if (t.kind == Tok::Int && t.text == "1" && at_sym("(", 1) && at_sym(")", 2)) {
      pos_ += 3;
      return make_type(types::Unit{Multiplicity::lin()}, at);
    }
    if (t.kind == Tok::Sym) {
      if (t.text == "!" || t.text == "?") {
        advance();
        Polarity p = t.text == "!" ? Polarity::Out : Polarity::In;
        return make_type(types::Msg{p, type_atom()}, at);
      }
      if (t.text == "+" || t.text == "&") {
        View v = t.text == "+" ? View::Internal : View::External;
        advance();
        expect_sym("{");
        return make_type(types::Choice{v, type_fields("}")}, at);
      }
      if (t.text == "{") {
        advance();
        return make_type(types::Record{type_fields("}")}, at);
      }
      if (t.text == "<") {
        advance();
        return make_type(types::Variant{type_fields(">")}, at);
      }
      if (t.text == "(") {
        advance();
        if (at_sym(")")) {
          advance();
          return make_type(types::Unit{Multiplicity::un()}, at);
        }
        TypeRef first = type();
        if (at_sym(",")) {
          advance();
          TypeRef second = type();
          expect_sym(")");
          return make_type(types::Record{{{"fst", first}, {"snd", second}}}, at);
        }
        expect_sym(")");
        return first;
      }
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "Skip") return advance(), make_type(types::Skip{}, at);
      if (t.text == "End") return advance(), make_type(types::End{}, at);
      if (!kKeywords.contains(t.text)) {
        advance();
        if (kBaseTypes.contains(t.text)) return make_type(types::Base{t.text}, at);
        return make_type(types::Var{t.text}, at);
      }
    }
    throw ParseError(at, "a type", describe(t));
  }

  // Expressions -----------------------------------------------------------------

  ExprRef expr() {
    const Token& t = peek();
    Span at = t.span;
    if (at_sym("\\")) {
      advance();
      const Token& param = expect_name("a parameter name");
      expect_sym(":");
      TypeRef param_type = semi();
      Multiplicity m = Multiplicity::un();
      if (at_sym("1->")) {
        m = Multiplicity::lin();
        advance();
      } else {
        expect_sym("->");
      }
      return make_expr(exprs::Abs{m, param.text, param_type, expr()}, at);
    }
    if (at_sym("/\\")) {
      advance();
      const Token& var = expect_name("a type variable");
      Kind k = optional_kind();
      expect_sym("=>");
      return make_expr(exprs::TAbs{var.text, k, expr()}, at);
    }
    if (at_kw("let")) return let();
    if (at_kw("case") || at_kw("match")) {
      bool is_case = advance().text == "case";
      ExprRef scrutinee = expr();
      expect_kw(is_case ? "of" : "with");
      LabelMap<Branch> branches = case_branches();
      if (is_case) return make_expr(exprs::Case{scrutinee, std::move(branches)}, at);
      return make_expr(exprs::Match{scrutinee, std::move(branches)}, at);
    }
    return application();
  }

  ExprRef let() {
    Span at = advance().span;
    if (at_sym("(") && at_sym(")", 1)) {
      pos_ += 2;
      expect_sym("=");
      ExprRef scrutinee = expr();
      expect_kw("in");
      return make_expr(exprs::LetUnit{scrutinee, expr()}, at);
    }
    LabelMap<std::string> binders;
    if (at_sym("(")) {
      advance();
      const Token& x = expect_name("a variable");
      expect_sym(",");
      const Token& y = expect_name("a variable");
      expect_sym(")");
      binders.insert("fst", x.text, x.span);
      binders.insert("snd", y.text, y.span);
    } else {
      expect_sym("{");
      while (true) {
        const Token& label = expect_name("a label");
        expect_sym("=");
        binders.insert(label.text, expect_name("a variable").text, label.span);
        if (at_sym("}")) break;
        expect_sym(",");
      }
      advance();
    }
    expect_sym("=");
    ExprRef scrutinee = expr();
    expect_kw("in");
    return make_expr(exprs::LetRecord{std::move(binders), scrutinee, expr()}, at);
  }

  LabelMap<Branch> case_branches() {
    expect_sym("{");
    LabelMap<Branch> out;
    while (true) {
      const Token& label = expect_name("a label");
      const Token& binder = expect_name("a variable");
      expect_sym("->");
      out.insert(label.text, Branch{binder.text, expr()}, label.span);
      if (at_sym("}")) break;
      expect_sym(",");
    }
    advance();
    return out;
  }

  // Tokens in column 1 start the next declaration.
  bool continues() const { return peek().span.col != 1 && peek().kind != Tok::Eof; }

  bool at_atom_start() const {
    const Token& t = peek();
    if (!continues()) return false;
    switch (t.kind) {
      case Tok::Int: return true;
      case Tok::Ident:
        return !kKeywords.contains(t.text) || t.text == "true" || t.text == "false";
      case Tok::Sym: return t.text == "(" || t.text == "{";
      default: return false;
    }
  }

  ExprRef application() {
    Span at = peek().span;
    ExprRef e;
    if (at_kw("select")) {
      advance();
      const Token& label = expect_name("a label");
      e = make_expr(exprs::Select{label.text, atom()}, at);
    } else if (at_kw("new")) {
      advance();
      e = make_expr(exprs::New{type_atom()}, at);
    } else {
      e = atom();
    }
    while (true) {
      if (continues() && at_sym("[")) {
        advance();
        TypeRef arg = type();
        expect_sym("]");
        e = make_expr(exprs::TApp{e, arg}, at);
      } else if (at_atom_start()) {
        e = make_expr(exprs::App{e, atom()}, at);
      } else {
        return e;
      }
    }
  }

  ExprRef atom() {
    const Token& t = peek();
    Span at = t.span;
    if (t.kind == Tok::Int) {
      advance();
      try {
        return make_expr(exprs::IntLit{std::stoll(t.text)}, at);
      } catch (const std::out_of_range&) {
        throw ParseError(at, "an integer in range", t.text);
      }
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "false") return advance(), make_expr(exprs::BoolLit{t.text == "true"}, at);
      if (!kKeywords.contains(t.text)) {
        advance();
        if (auto b = builtin_from_name(t.text)) return make_expr(exprs::Const{*b}, at);
        return make_expr(exprs::Var{t.text}, at);
      }
    }
    if (at_sym("{")) {
      advance();
      LabelMap<ExprRef> fields;
      if (!at_sym("}")) {
        while (true) {
          const Token& label = expect_name("a label");
          expect_sym("=");
          fields.insert(label.text, expr(), label.span);
          if (at_sym("}")) break;
          expect_sym(",");
        }
      }
      advance();
      return make_expr(exprs::RecordLit{std::move(fields)}, at);
    }
    if (at_sym("(")) {
      advance();
      if (at_sym(")")) return advance(), make_expr(exprs::UnitLit{}, at);
      ExprRef first = expr();
      if (at_sym(",")) {
        advance();
        ExprRef second = expr();
        expect_sym(")");
        return make_expr(exprs::RecordLit{{{"fst", first}, {"snd", second}}}, at);
      }
      if (at_sym(":")) {
        Span colon = advance().span;
        TypeRef ascription = type();
        expect_sym(")");
        return injection(first, ascription, at, colon);
      }
      expect_sym(")");
      return first;
    }
    throw ParseError(at, "an expression", describe(t));
  }

  static ExprRef injection(const ExprRef& e, const TypeRef& ascription, Span at, Span colon) {
    const auto* app = as<exprs::App>(e);
    std::string label;
    if (app) {
      if (const auto* v = as<exprs::Var>(app->fun)) label = v->name;
      if (const auto* c = as<exprs::Const>(app->fun)) label = std::string(to_string(c->which));
    }
    if (label.empty()) throw ParseError(colon, "an injection '(label payload : type)'", "':'");
    return make_expr(exprs::Inject{label, ascription, app->arg}, at);
  }

  // Declarations ----------------------------------------------------------------

  RawDecl declaration() {
    const Token& t = peek();
    if (at_kw("data"))
      throw Error(ErrorCode::UnsupportedDeclaration, t.span,
                  "data declarations are not supported; encode the datatype as a variant, for example "
                  "'type T = <A: Int, B: ()>', and build values with '(A 5 : T)'");
    if (at_kw("type")) {
      advance();
      const Token& name = expect_name("an abbreviation name");
      if (!is_upper(name.text)) throw ParseError(name.span, "a capitalised abbreviation name", describe(name));
      Kind k = optional_kind();
      expect_sym("=");
      return RawAbbrev{name.text, k, t.span, type()};
    }
    const Token& name = expect_name("a declaration");
    if (at_sym(":")) {
      advance();
      return RawSignature{name.text, type(), t.span};
    }
    if (at_sym("=")) {
      advance();
      return RawBinding{name.text, expr(), t.span};
    }
    throw ParseError(peek().span, "':' or '='", describe(peek()));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  // Index of the first token past the current declaration.
  std::size_t end_ = std::numeric_limits<std::size_t>::max();
  Token boundary_{Tok::Eof, "", {}};
  std::optional<std::uint32_t> max_kvar_;
};

// Tree rebuilding ----------------------------------------------------------------

TypeRef with_node(const TypeRef& t, Type::Node node) { return make_type(std::move(node), t->span, t->alias); }

template <typename F>
LabelMap<TypeRef> map_fields(const LabelMap<TypeRef>& m, F&& f) {
  LabelMap<TypeRef> out;
  for (const auto& [l, t] : m) out.insert(l, f(t));
  return out;
}

// Rebuilds `t` with every immediate child type mapped through `f`.
template <typename F>
TypeRef map_children(const TypeRef& t, F&& f) {
  return std::visit(
      [&](const auto& n) -> TypeRef {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, types::Msg>)
          return with_node(t, types::Msg{n.polarity, f(n.payload)});
        else if constexpr (std::is_same_v<N, types::Choice>)
          return with_node(t, types::Choice{n.view, map_fields(n.branches, f)});
        else if constexpr (std::is_same_v<N, types::Semi>)
          return with_node(t, types::Semi{f(n.head), f(n.tail)});
        else if constexpr (std::is_same_v<N, types::Arrow>)
          return with_node(t, types::Arrow{n.mult, f(n.dom), f(n.cod)});
        else if constexpr (std::is_same_v<N, types::Record>)
          return with_node(t, types::Record{map_fields(n.fields, f)});
        else if constexpr (std::is_same_v<N, types::Variant>)
          return with_node(t, types::Variant{map_fields(n.fields, f)});
        else if constexpr (std::is_same_v<N, types::Forall>)
          return with_node(t, types::Forall{n.var, n.kind, f(n.body), n.site});
        else if constexpr (std::is_same_v<N, types::Rec>)
          return with_node(t, types::Rec{n.var, n.kind, f(n.body), n.site});
        else
          return t;
      },
      t->node);
}

// Rebuilds `e` mapping immediate child expressions through `fe` and the types
// it mentions through `ft`.
template <typename FE, typename FT>
ExprRef map_children(const ExprRef& e, FE&& fe, FT&& ft) {
  auto branches = [&](const LabelMap<Branch>& bs) {
    LabelMap<Branch> out;
    for (const auto& [l, b] : bs) out.insert(l, Branch{b.binder, fe(b.body)});
    return out;
  };
  return std::visit(
      [&](const auto& n) -> ExprRef {
        using N = std::decay_t<decltype(n)>;
        Expr::Node node = n;
        if constexpr (std::is_same_v<N, exprs::Abs>)
          node = exprs::Abs{n.mult, n.param, ft(n.param_type), fe(n.body)};
        else if constexpr (std::is_same_v<N, exprs::TAbs>)
          node = exprs::TAbs{n.var, n.kind, fe(n.body), n.site};
        else if constexpr (std::is_same_v<N, exprs::App>)
          node = exprs::App{fe(n.fun), fe(n.arg)};
        else if constexpr (std::is_same_v<N, exprs::TApp>)
          node = exprs::TApp{fe(n.fun), ft(n.arg)};
        else if constexpr (std::is_same_v<N, exprs::RecordLit>) {
          LabelMap<ExprRef> fields;
          for (const auto& [l, v] : n.fields) fields.insert(l, fe(v));
          node = exprs::RecordLit{std::move(fields)};
        } else if constexpr (std::is_same_v<N, exprs::LetRecord>)
          node = exprs::LetRecord{n.binders, fe(n.scrutinee), fe(n.body)};
        else if constexpr (std::is_same_v<N, exprs::LetUnit>)
          node = exprs::LetUnit{fe(n.scrutinee), fe(n.body)};
        else if constexpr (std::is_same_v<N, exprs::Inject>)
          node = exprs::Inject{n.label, ft(n.ascription), fe(n.payload)};
        else if constexpr (std::is_same_v<N, exprs::Case>)
          node = exprs::Case{fe(n.scrutinee), branches(n.branches)};
        else if constexpr (std::is_same_v<N, exprs::Match>)
          node = exprs::Match{fe(n.scrutinee), branches(n.branches)};
        else if constexpr (std::is_same_v<N, exprs::New>)
          node = exprs::New{ft(n.channel)};
        else if constexpr (std::is_same_v<N, exprs::Select>)
          node = exprs::Select{n.label, fe(n.scrutinee)};
        else
          return e;
        return make_expr(std::move(node), e->span);
      },
      e->node);
}

// Site numbering ------------------------------------------------------------------

// Assigns annotation sites in pre-order and fresh kind variables to binders
// without a written kind.
class Numberer {
 public:
  Numberer(std::vector<AnnotationSite>& sites, FreshSupply& supply) : sites_(sites), supply_(supply) {}

  int site(Span span, SiteCategory category, Kind raw, const std::string& owner) {
    AnnotationSite s{span, category, std::nullopt, raw, owner};
    if (raw.is_var() && raw.var_id() == kUnwritten)
      s.slot = supply_.fresh_kind();
    else if (raw.is_ground())
      s.written = raw;
    sites_.push_back(s);
    return static_cast<int>(sites_.size() - 1);
  }

  const AnnotationSite& at(int i) const { return sites_[static_cast<std::size_t>(i)]; }

  TypeRef type(const TypeRef& t, const std::string& owner) {
    if (const auto* f = as<types::Forall>(t)) {
      int i = site(t->span, SiteCategory::Universal, f->kind, owner);
      return with_node(t, types::Forall{f->var, at(i).slot, type(f->body, owner), i});
    }
    if (const auto* r = as<types::Rec>(t)) {
      int i = site(t->span, SiteCategory::Recursive, r->kind, owner);
      return with_node(t, types::Rec{r->var, at(i).slot, type(r->body, owner), i});
    }
    return map_children(t, [&](const TypeRef& c) { return type(c, owner); });
  }

  ExprRef expr(const ExprRef& e, const std::string& owner) {
    if (const auto* t = as<exprs::TAbs>(e)) {
      int i = site(e->span, SiteCategory::TypeAbstraction, t->kind, owner);
      return make_expr(exprs::TAbs{t->var, at(i).slot, expr(t->body, owner), i}, e->span);
    }
    return map_children(
        e, [&](const ExprRef& c) { return expr(c, owner); }, [&](const TypeRef& c) { return type(c, owner); });
  }

 private:
  std::vector<AnnotationSite>& sites_;
  FreshSupply& supply_;
};

// Free lowercase type variables in order of first occurrence, with that occurrence's span.
void free_lowercase(const TypeRef& t, std::set<std::string>& bound,
                    std::vector<std::pair<std::string, Span>>& out) {
  if (const auto* v = as<types::Var>(t)) {
    if (!is_upper(v->name) && !bound.contains(v->name) &&
        std::none_of(out.begin(), out.end(), [&](const auto& p) { return p.first == v->name; }))
      out.emplace_back(v->name, t->span);
    return;
  }
  const std::string* binder = nullptr;
  if (const auto* f = as<types::Forall>(t)) binder = &f->var;
  if (const auto* r = as<types::Rec>(t)) binder = &r->var;
  bool added = binder && bound.insert(*binder).second;
  map_children(t, [&](const TypeRef& c) {
    free_lowercase(c, bound, out);
    return c;
  });
  if (added) bound.erase(*binder);
}

TypeRef generalize(const TypeRef& t) {
  std::set<std::string> bound;
  std::vector<std::pair<std::string, Span>> free;
  free_lowercase(t, bound, free);
  TypeRef out = t;
  for (auto it = free.rbegin(); it != free.rend(); ++it)
    out = make_type(types::Forall{it->first, Kind::var(kUnwritten), out}, it->second);
  return out;
}

// Abbreviation expansion ----------------------------------------------------------

class Expander {
 public:
  struct Entry {
    const RawAbbrev* raw;
    TypeRef numbered;
    int site;
    TypeRef expanded;
    bool recursive = false;
  };

  explicit Expander(const std::vector<AnnotationSite>& sites) : sites_(sites) {}

  void declare(const std::string& name, Entry entry) { entries_[name] = std::move(entry); }

  // Expands the abbreviation `name`, memoized.
  const Entry& expand(const std::string& name) {
    Entry& e = entries_.at(name);
    if (e.expanded) return e;
    if (std::find(stack_.begin(), stack_.end(), name) != stack_.end())
      throw Error(ErrorCode::CyclicAbbreviation, e.raw->span,
                  fmt::format("abbreviation {} is part of a cycle through {}", name, fmt::join(stack_, ", ")));
    stack_.push_back(name);
    std::set<std::string> bound;
    TypeRef body = type(e.numbered, bound);
    stack_.pop_back();
    Entry& done = entries_.at(name);
    if (done.recursive) {
      Kind k = sites_[static_cast<std::size_t>(done.site)].slot;
      done.expanded = make_type(types::Rec{name, k, body, done.site}, done.raw->span, name);
    } else {
      auto copy = std::make_shared<Type>(*body);
      copy->alias = name;
      done.expanded = copy;
    }
    return done;
  }

  TypeRef type(const TypeRef& t, std::set<std::string>& bound) {
    if (const auto* v = as<types::Var>(t)) {
      if (bound.contains(v->name) || !is_upper(v->name)) return t;
      if (!stack_.empty() && stack_.back() == v->name) {
        entries_.at(v->name).recursive = true;
        return t;
      }
      if (!entries_.contains(v->name))
        throw Error(ErrorCode::UnknownTypeName, t->span, fmt::format("unknown type name {}", v->name));
      return expand(v->name).expanded;
    }
    const std::string* binder = nullptr;
    if (const auto* f = as<types::Forall>(t)) binder = &f->var;
    if (const auto* r = as<types::Rec>(t)) binder = &r->var;
    bool added = binder && bound.insert(*binder).second;
    TypeRef out = map_children(t, [&](const TypeRef& c) { return type(c, bound); });
    if (added) bound.erase(*binder);
    return out;
  }

  ExprRef expr(const ExprRef& e, std::set<std::string>& bound) {
    const auto* tabs = as<exprs::TAbs>(e);
    bool added = tabs && bound.insert(tabs->var).second;
    ExprRef out = map_children(
        e, [&](const ExprRef& c) { return expr(c, bound); }, [&](const TypeRef& c) { return type(c, bound); });
    if (added) bound.erase(tabs->var);
    return out;
  }

 private:
  const std::vector<AnnotationSite>& sites_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> stack_;
};

void reserve_written(const Parser& parser, FreshSupply& supply) {
  if (auto k = parser.max_kvar()) supply.reserve_kvar(*k);
}

}  // namespace

Kind parse_kind(std::string_view src) {
  Parser parser(src);
  return parser.kind_only();
}

TypeRef parse_type(std::string_view src, FreshSupply& supply) {
  Parser parser(src);
  TypeRef raw = parser.type_only();
  reserve_written(parser, supply);
  std::vector<AnnotationSite> sites;
  Numberer numberer(sites, supply);
  std::set<std::string> bound;
  return Expander(sites).type(numberer.type(raw, ""), bound);
}

TypeRef parse_type(std::string_view src) {
  FreshSupply supply;
  return parse_type(src, supply);
}

ExprRef parse_expr(std::string_view src, FreshSupply& supply) {
  Parser parser(src);
  ExprRef raw = parser.expr_only();
  reserve_written(parser, supply);
  std::vector<AnnotationSite> sites;
  Numberer numberer(sites, supply);
  std::set<std::string> bound;
  return Expander(sites).expr(numberer.expr(raw, ""), bound);
}

ExprRef parse_expr(std::string_view src) {
  FreshSupply supply;
  return parse_expr(src, supply);
}

Program parse_program(std::string_view src) {
  Parser parser(src);
  std::vector<RawDecl> raw = parser.program();

  Program p;
  reserve_written(parser, p.supply);

  // Pair signatures with bindings; a value declaration sits at its signature.
  std::map<std::string, Span> names;
  std::map<std::string, const RawBinding*> bindings;
  auto claim = [&](const std::string& name, Span span) {
    if (auto it = names.find(name); it != names.end())
      throw Error(ErrorCode::DuplicateName, span,
                  fmt::format("{} is already declared at {}", name, to_string(it->second)));
    names[name] = span;
  };
  for (const RawDecl& d : raw) {
    if (const auto* a = std::get_if<RawAbbrev>(&d)) claim(a->name, a->span);
    if (const auto* s = std::get_if<RawSignature>(&d)) claim(s->name, s->span);
  }
  for (const RawDecl& d : raw) {
    const auto* b = std::get_if<RawBinding>(&d);
    if (!b) continue;
    auto sig = std::find_if(raw.begin(), raw.end(), [&](const RawDecl& x) {
      const auto* s = std::get_if<RawSignature>(&x);
      return s && s->name == b->name;
    });
    if (sig == raw.end()) throw ParseError(b->span, fmt::format("a signature for {}", b->name), "a binding");
    if (bindings.contains(b->name))
      throw Error(ErrorCode::DuplicateName, b->span, fmt::format("{} is defined twice", b->name));
    bindings[b->name] = b;
  }

  Numberer numberer(p.sites, p.supply);
  Expander expander(p.sites);
  struct Pending {
    const RawSignature* sig;
    TypeRef signature;
    ExprRef body;
  };
  std::vector<std::variant<std::string, Pending>> order;
  for (const RawDecl& d : raw) {
    if (const auto* a = std::get_if<RawAbbrev>(&d)) {
      int site = numberer.site(a->span, SiteCategory::TypeAbbreviation, a->kind, a->name);
      expander.declare(a->name, {a, numberer.type(a->body, a->name), site, nullptr});
      order.emplace_back(a->name);
    } else if (const auto* s = std::get_if<RawSignature>(&d)) {
      auto b = bindings.find(s->name);
      if (b == bindings.end()) throw ParseError(s->span, fmt::format("a binding for {}", s->name), "a signature only");
      TypeRef signature = numberer.type(generalize(s->type), s->name);
      order.emplace_back(Pending{s, signature, numberer.expr(b->second->body, s->name)});
    }
  }

  for (auto& item : order) {
    if (const auto* name = std::get_if<std::string>(&item)) {
      const auto& e = expander.expand(*name);
      p.decls.emplace_back(TypeAbbrev{*name, e.site, e.expanded, e.recursive, e.raw->span});
    } else {
      auto& pending = std::get<Pending>(item);
      std::set<std::string> bound;
      TypeRef signature = expander.type(pending.signature, bound);
      ExprRef body = expander.expr(pending.body, bound);
      p.decls.emplace_back(ValueDecl{pending.sig->name, signature, body, pending.sig->span});
    }
  }
  return p;
}

namespace {

class SiteWriter {
 public:
  explicit SiteWriter(const std::vector<AnnotationSite>& sites) : sites_(sites) {}

  Kind slot(int site, Kind current) const {
    return site < 0 ? current : sites_[static_cast<std::size_t>(site)].slot;
  }

  TypeRef type(const TypeRef& t) {
    if (const auto* f = as<types::Forall>(t))
      return with_node(t, types::Forall{f->var, slot(f->site, f->kind), type(f->body), f->site});
    if (const auto* r = as<types::Rec>(t))
      return with_node(t, types::Rec{r->var, slot(r->site, r->kind), type(r->body), r->site});
    return map_children(t, [&](const TypeRef& c) { return type(c); });
  }

  ExprRef expr(const ExprRef& e) {
    if (const auto* t = as<exprs::TAbs>(e))
      return make_expr(exprs::TAbs{t->var, slot(t->site, t->kind), expr(t->body), t->site}, e->span);
    return map_children(
        e, [&](const ExprRef& c) { return expr(c); }, [&](const TypeRef& c) { return type(c); });
  }

 private:
  const std::vector<AnnotationSite>& sites_;
};

}  // namespace

Program with_site_kinds(Program p) {
  SiteWriter writer(p.sites);
  for (Decl& d : p.decls) {
    if (auto* a = std::get_if<TypeAbbrev>(&d)) {
      a->body = writer.type(a->body);
    } else {
      auto& v = std::get<ValueDecl>(d);
      v.signature = writer.type(v.signature);
      v.body = writer.expr(v.body);
    }
  }
  return p;
}

std::string print_program(const Program& p) {
  PrettyOptions opts{.use_aliases = true};
  std::string out;
  for (const Decl& d : p.decls) {
    if (!out.empty()) out += "\n";
    if (const auto* a = std::get_if<TypeAbbrev>(&d)) {
      // Print the definition itself rather than its name.
      TypeRef body = a->body;
      if (a->recursive) body = std::get<types::Rec>(body->node).body;
      body = make_type(body->node, body->span);
      out += fmt::format("type {} : {} = {}\n", a->name, pretty(p.sites[static_cast<std::size_t>(a->site)].slot),
                         pretty(body, opts));
    } else {
      const auto& v = std::get<ValueDecl>(d);
      out += fmt::format("{} : {}\n{} = {}\n", v.name, pretty(v.signature, opts), v.name, pretty(v.body, opts));
    }
  }
  return out;
}

}  // namespace kindforge
