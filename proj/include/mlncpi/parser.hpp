#pragma once

// Model (.mln) and evidence (.db) readers.
//
// Model grammar, one construct per line, `//` comments:
//   type T = {c1, c2}
//   predicate p(T1, T2)        hidden predicate
//   observed q(T1)             observed predicate (closed world)
//   2.5 agent(v1) => left(v1)  weighted formula
//   p(v1) ^ p(v2) => q(v1).    hard formula (trailing period)
// Operators by decreasing precedence: ! ^ | => <=>; => is right
// associative. `forall v1, v2 F` / `exists v F` extend as far right as
// possible. `a = b`, `a != b` compare terms. In formulae, identifiers
// starting with a lowercase letter are variables; capitalised or numeric
// identifiers and "quoted" names are constants. Free variables are
// implicitly universally quantified.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlncpi/error.hpp"
#include "mlncpi/logic.hpp"

namespace mlncpi {

struct MlnDocument {
  Signature signature;
  std::vector<WeightedFormula> formulas;
};

struct EvidenceAtom {
  PredicateId predicate = -1;
  std::vector<ConstantId> args;
  bool truth = true;
  SourceLocation loc;
};

struct EvidenceSet {
  std::vector<EvidenceAtom> atoms;
};

namespace detail {

enum class TokenKind {
  Identifier,
  Number,
  Quoted,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Equal,
  NotEqual,
  Period,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourceLocation loc;
};

inline std::string describe(const Token& t) {
  if (t.kind == TokenKind::End) return "end of line";
  return "'" + t.text + "'";
}

// Tokenises a single line. Comments (`//`) end the line.
inline std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto at = [&](std::size_t pos) { return SourceLocation{line_no, static_cast<int>(pos) + 1}; };
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') break;
    std::size_t start = i;
    auto symbol = [&](TokenKind k, std::size_t len) {
      out.push_back(Token{k, std::string(line.substr(start, len)), at(start)});
      i += len;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
      out.push_back(Token{TokenKind::Identifier, std::string(line.substr(start, i - start)), at(start)});
      continue;
    }
    bool sign = (c == '-' || c == '+') && i + 1 < line.size() &&
                (std::isdigit(static_cast<unsigned char>(line[i + 1])) || line[i + 1] == '.');
    if (std::isdigit(static_cast<unsigned char>(c)) || sign ||
        (c == '.' && i + 1 < line.size() && std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
      if (sign) ++i;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i + 1 < line.size() && line[i] == '.' && std::isdigit(static_cast<unsigned char>(line[i + 1]))) {
        ++i;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      }
      if (i < line.size() && (line[i] == 'e' || line[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < line.size() && (line[j] == '-' || line[j] == '+')) ++j;
        if (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) {
          i = j;
          while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        }
      }
      // Identifiers like 12abc are constants, not numbers.
      while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
      out.push_back(Token{TokenKind::Number, std::string(line.substr(start, i - start)), at(start)});
      continue;
    }
    if (c == '"') {
      ++i;
      while (i < line.size() && line[i] != '"') ++i;
      if (i >= line.size()) throw ParseError("unterminated quoted name", at(start));
      out.push_back(Token{TokenKind::Quoted, std::string(line.substr(start + 1, i - start - 1)), at(start)});
      ++i;
      continue;
    }
    switch (c) {
      case '(': symbol(TokenKind::LParen, 1); continue;
      case ')': symbol(TokenKind::RParen, 1); continue;
      case '{': symbol(TokenKind::LBrace, 1); continue;
      case '}': symbol(TokenKind::RBrace, 1); continue;
      case ',': symbol(TokenKind::Comma, 1); continue;
      case '^': symbol(TokenKind::And, 1); continue;
      case '|': symbol(TokenKind::Or, 1); continue;
      case '.': symbol(TokenKind::Period, 1); continue;
      case '!':
        if (line.substr(i, 2) == "!=") {
          symbol(TokenKind::NotEqual, 2);
        } else {
          symbol(TokenKind::Not, 1);
        }
        continue;
      case '=':
        if (line.substr(i, 2) == "=>") {
          symbol(TokenKind::Implies, 2);
        } else {
          symbol(TokenKind::Equal, 1);
        }
        continue;
      case '<':
        if (line.substr(i, 3) == "<=>") {
          symbol(TokenKind::Iff, 3);
          continue;
        }
        break;
      default:
        break;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", at(start));
  }
  out.push_back(Token{TokenKind::End, "", at(line.size())});
  return out;
}

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool accept(TokenKind k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  const Token& expect(TokenKind k, const char* what) {
    if (peek().kind != k) throw ParseError(std::string("expected ") + what + ", found " + describe(peek()), peek().loc);
    return next();
  }
  // The last token before End, if any.
  const Token* last_significant() const {
    if (tokens_.size() < 2) return nullptr;
    return &tokens_[tokens_.size() - 2];
  }
  void drop_last_significant() { tokens_.erase(tokens_.end() - 2); }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

inline bool is_variable_name(const Token& t) {
  return t.kind == TokenKind::Identifier && std::islower(static_cast<unsigned char>(t.text[0]));
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

class FormulaParser {
 public:
  FormulaParser(TokenStream& ts, Signature& sig) : ts_(ts), sig_(sig) {}

  WeightedFormula parse() {
    Formula f = parse_iff();
    if (ts_.peek().kind != TokenKind::End)
      throw ParseError("unexpected " + describe(ts_.peek()) + " after formula", ts_.peek().loc);
    return finish(std::move(f));
  }

 private:
  struct VarInfo {
    std::string name;
    TypeId type = kAnyType;
    bool typed = false;
  };

  Formula parse_iff() {
    Formula lhs = parse_implies();
    while (ts_.peek().kind == TokenKind::Iff) {
      SourceLocation loc = ts_.next().loc;
      Formula rhs = parse_implies();
      lhs = Formula::binary(FormulaKind::Iff, std::move(lhs), std::move(rhs));
      lhs.loc = loc;
    }
    return lhs;
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (ts_.peek().kind == TokenKind::Implies) {
      SourceLocation loc = ts_.next().loc;
      Formula rhs = parse_implies();
      lhs = Formula::binary(FormulaKind::Implies, std::move(lhs), std::move(rhs));
      lhs.loc = loc;
    }
    return lhs;
  }

  Formula parse_or() {
    Formula first = parse_and();
    if (ts_.peek().kind != TokenKind::Or) return first;
    SourceLocation loc = ts_.peek().loc;
    std::vector<Formula> parts;
    parts.push_back(std::move(first));
    while (ts_.accept(TokenKind::Or)) parts.push_back(parse_and());
    Formula f = Formula::nary(FormulaKind::Or, std::move(parts));
    f.loc = loc;
    return f;
  }

  Formula parse_and() {
    Formula first = parse_unary();
    if (ts_.peek().kind != TokenKind::And) return first;
    SourceLocation loc = ts_.peek().loc;
    std::vector<Formula> parts;
    parts.push_back(std::move(first));
    while (ts_.accept(TokenKind::And)) parts.push_back(parse_unary());
    Formula f = Formula::nary(FormulaKind::And, std::move(parts));
    f.loc = loc;
    return f;
  }

  Formula parse_unary() {
    const Token& t = ts_.peek();
    if (t.kind == TokenKind::Not) {
      SourceLocation loc = ts_.next().loc;
      Formula f = Formula::negation(parse_unary());
      f.loc = loc;
      return f;
    }
    if (t.kind == TokenKind::Identifier && (t.text == "forall" || t.text == "exists")) return parse_quantifier();
    return parse_primary();
  }

  Formula parse_quantifier() {
    const Token kw = ts_.next();
    FormulaKind kind = kw.text == "forall" ? FormulaKind::Forall : FormulaKind::Exists;
    std::vector<VariableId> vars;
    do {
      const Token& v = ts_.peek();
      if (!is_variable_name(v)) throw ParseError("expected a variable after '" + kw.text + "', found " + describe(v), v.loc);
      ts_.next();
      VariableId id = static_cast<VariableId>(vars_.size());
      vars_.push_back(VarInfo{v.text});
      scope_.emplace_back(v.text, id);
      vars.push_back(id);
    } while (ts_.accept(TokenKind::Comma));
    Formula body = parse_iff();
    for (std::size_t i = vars.size(); i-- > 0;) {
      scope_.pop_back();
      body = Formula::quantifier(kind, vars[i], kAnyType, std::move(body));
      body.loc = kw.loc;
    }
    return body;
  }

  Formula parse_primary() {
    const Token& t = ts_.peek();
    if (t.kind == TokenKind::LParen) {
      ts_.next();
      Formula f = parse_iff();
      ts_.expect(TokenKind::RParen, "')'");
      return f;
    }
    if (t.kind == TokenKind::Identifier) {
      if (t.text == "true" || t.text == "false") {
        Formula f = Formula::constant(t.text == "true");
        f.loc = ts_.next().loc;
        return f;
      }
      const Token& after = ts_.peek(1);
      if (after.kind != TokenKind::Equal && after.kind != TokenKind::NotEqual) return parse_atom();
    }
    if (t.kind == TokenKind::End) throw ParseError("unexpected end of line", t.loc);
    if (t.kind == TokenKind::Identifier || t.kind == TokenKind::Number || t.kind == TokenKind::Quoted) {
      SourceLocation loc = t.loc;
      Term lhs = parse_term(kAnyType);
      const Token& op = ts_.peek();
      if (op.kind != TokenKind::Equal && op.kind != TokenKind::NotEqual)
        throw ParseError("expected '=' or '!=', found " + describe(op), op.loc);
      ts_.next();
      Term rhs = parse_term(kAnyType);
      Formula f = Formula::comparison(op.kind == TokenKind::Equal ? FormulaKind::Equal : FormulaKind::NotEqual, lhs, rhs);
      f.loc = loc;
      return f;
    }
    throw ParseError("unexpected " + describe(t), t.loc);
  }

  Formula parse_atom() {
    const Token name = ts_.next();
    auto pid = sig_.find_predicate(name.text);
    if (!pid) throw ParseError("undeclared predicate '" + name.text + "'", name.loc);
    const Predicate& pred = sig_.predicate(*pid);
    std::vector<Term> args;
    if (ts_.accept(TokenKind::LParen)) {
      if (ts_.peek().kind != TokenKind::RParen) {
        do {
          std::size_t pos = args.size();
          TypeId type = pos < pred.arg_types.size() ? pred.arg_types[pos] : kAnyType;
          args.push_back(parse_term(type));
        } while (ts_.accept(TokenKind::Comma));
      }
      ts_.expect(TokenKind::RParen, "')' or ','");
    }
    if (static_cast<int>(args.size()) != pred.arity())
      throw ParseError("arity mismatch: '" + pred.name + "' expects " + std::to_string(pred.arity()) + " argument(s), got " +
                           std::to_string(args.size()),
                       name.loc);
    Formula f = Formula::make_atom(*pid, std::move(args));
    f.loc = name.loc;
    return f;
  }

  std::optional<VariableId> lookup_variable(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == name) return it->second;
    for (auto it = free_.begin(); it != free_.end(); ++it)
      if (it->first == name) return it->second;
    return std::nullopt;
  }

  Term parse_term(TypeId type) {
    const Token t = ts_.next();
    if (t.kind == TokenKind::Identifier && is_variable_name(t)) {
      if (t.text == "forall" || t.text == "exists") throw ParseError("unexpected quantifier in term position", t.loc);
      auto id = lookup_variable(t.text);
      if (!id) {
        id = static_cast<VariableId>(vars_.size());
        vars_.push_back(VarInfo{t.text});
        free_.emplace_back(t.text, *id);
      }
      VarInfo& info = vars_[static_cast<std::size_t>(*id)];
      if (type != kAnyType) {
        if (info.typed && info.type != type)
          throw ParseError("variable '" + t.text + "' used with types '" + sig_.type_name(info.type) + "' and '" +
                               sig_.type_name(type) + "'",
                           t.loc);
        info.type = type;
        info.typed = true;
      }
      return Term::variable(*id);
    }
    if (t.kind == TokenKind::Identifier || t.kind == TokenKind::Number || t.kind == TokenKind::Quoted) {
      ConstantId c = sig_.intern_constant(t.text);
      if (type != kAnyType) sig_.add_to_type(type, c);
      return Term::constant(c);
    }
    throw ParseError("expected a term, found " + describe(t), t.loc);
  }

  // Renumber variables so that free ones come first, and push inferred
  // types into quantifier nodes.
  WeightedFormula finish(Formula f) {
    std::vector<VariableId> order = free_variables(f);
    const std::size_t free_count = order.size();
    for (std::size_t v = 0; v < vars_.size(); ++v)
      if (std::find(order.begin(), order.end(), static_cast<VariableId>(v)) == order.end())
        order.push_back(static_cast<VariableId>(v));
    std::vector<VariableId> remap(vars_.size());
    for (std::size_t i = 0; i < order.size(); ++i) remap[static_cast<std::size_t>(order[i])] = static_cast<VariableId>(i);
    apply(f, remap);

    WeightedFormula wf;
    wf.free_count = static_cast<int>(free_count);
    for (VariableId old : order) {
      wf.variable_names.push_back(vars_[static_cast<std::size_t>(old)].name);
      wf.variable_types.push_back(vars_[static_cast<std::size_t>(old)].type);
    }
    set_quantifier_types(f, wf.variable_types);
    wf.formula = std::move(f);
    return wf;
  }

  static void apply(Formula& f, const std::vector<VariableId>& remap) {
    for (Term& t : f.args)
      if (t.is_variable) t.id = remap[static_cast<std::size_t>(t.id)];
    if (f.variable >= 0) f.variable = remap[static_cast<std::size_t>(f.variable)];
    for (Formula& c : f.children) apply(c, remap);
  }

  static void set_quantifier_types(Formula& f, const std::vector<TypeId>& types) {
    if (f.kind == FormulaKind::Forall || f.kind == FormulaKind::Exists)
      f.variable_type = types[static_cast<std::size_t>(f.variable)];
    for (Formula& c : f.children) set_quantifier_types(c, types);
  }

  TokenStream& ts_;
  Signature& sig_;
  std::vector<VarInfo> vars_;
  std::vector<std::pair<std::string, VariableId>> scope_;
  std::vector<std::pair<std::string, VariableId>> free_;
};

inline void parse_type_line(TokenStream& ts, Signature& sig) {
  ts.next();  // 'type'
  const Token& name = ts.expect(TokenKind::Identifier, "a type name");
  TypeId t = sig.add_type(name.text);
  ts.expect(TokenKind::Equal, "'='");
  ts.expect(TokenKind::LBrace, "'{'");
  if (ts.peek().kind != TokenKind::RBrace) {
    do {
      const Token& c = ts.next();
      if (c.kind != TokenKind::Identifier && c.kind != TokenKind::Number && c.kind != TokenKind::Quoted)
        throw ParseError("expected a constant, found " + describe(c), c.loc);
      sig.add_to_type(t, sig.intern_constant(c.text));
    } while (ts.accept(TokenKind::Comma));
  }
  ts.expect(TokenKind::RBrace, "'}' or ','");
  if (ts.peek().kind != TokenKind::End) throw ParseError("unexpected " + describe(ts.peek()), ts.peek().loc);
}

inline void parse_predicate_line(TokenStream& ts, Signature& sig) {
  const Token kw = ts.next();
  const Token& name = ts.expect(TokenKind::Identifier, "a predicate name");
  Predicate p;
  p.name = name.text;
  p.observed = kw.text == "observed";
  if (ts.accept(TokenKind::LParen)) {
    if (ts.peek().kind != TokenKind::RParen) {
      do {
        const Token& type = ts.expect(TokenKind::Identifier, "a type name");
        p.arg_types.push_back(sig.add_type(type.text));
      } while (ts.accept(TokenKind::Comma));
    }
    ts.expect(TokenKind::RParen, "')' or ','");
  }
  if (ts.peek().kind != TokenKind::End) throw ParseError("unexpected " + describe(ts.peek()), ts.peek().loc);
  if (sig.find_predicate(p.name)) throw ParseError("duplicate predicate declaration '" + p.name + "'", name.loc);
  sig.add_predicate(std::move(p));
}

inline std::optional<double> parse_number(const std::string& text) {
  double v = 0.0;
  const char* begin = text.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

}  // namespace detail

// Parse a model file. Errors carry the line and column of the offending
// token.
inline MlnDocument parse_mln(std::string_view text) {
  MlnDocument doc;
  auto lines = detail::split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    detail::TokenStream ts(detail::tokenize(lines[li], line_no));
    const detail::Token& first = ts.peek();
    if (first.kind == detail::TokenKind::End) continue;
    if (first.kind == detail::TokenKind::Identifier && first.text == "type" &&
        ts.peek(1).kind == detail::TokenKind::Identifier) {
      detail::parse_type_line(ts, doc.signature);
      continue;
    }
    if (first.kind == detail::TokenKind::Identifier && (first.text == "predicate" || first.text == "observed") &&
        ts.peek(1).kind == detail::TokenKind::Identifier) {
      detail::parse_predicate_line(ts, doc.signature);
      continue;
    }

    Weight weight = Weight::infinite();
    bool weighted = false;
    if (first.kind == detail::TokenKind::Number) {
      if (auto w = detail::parse_number(first.text)) {
        if (!std::isfinite(*w)) throw ParseError("weight must be finite", first.loc);
        weight = Weight::soft(*w);
        weighted = true;
        ts.next();
      }
    }
    const detail::Token* last = ts.last_significant();
    bool period = last && last->kind == detail::TokenKind::Period;
    if (weighted && period) throw ParseError("a hard formula (trailing '.') cannot carry a weight", last->loc);
    if (!weighted && !period)
      throw ParseError("formula needs a leading weight or a trailing '.'", ts.peek().loc);
    if (period) ts.drop_last_significant();

    detail::FormulaParser fp(ts, doc.signature);
    WeightedFormula wf = fp.parse();
    wf.weight = weight;
    wf.line = line_no;
    wf.source = std::string(lines[li]);
    if (auto pos = wf.source.find("//"); pos != std::string::npos) wf.source.erase(pos);
    while (!wf.source.empty() && std::isspace(static_cast<unsigned char>(wf.source.back()))) wf.source.pop_back();
    doc.formulas.push_back(std::move(wf));
  }
  return doc;
}

// Parse evidence against the model's declarations. Constants mentioned here
// join the argument types they appear in.
inline EvidenceSet parse_evidence(std::string_view text, Signature& sig) {
  EvidenceSet out;
  std::map<std::pair<PredicateId, std::vector<ConstantId>>, bool> seen;
  auto lines = detail::split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    detail::TokenStream ts(detail::tokenize(lines[li], line_no));
    if (ts.peek().kind == detail::TokenKind::End) continue;
    bool truth = !ts.accept(detail::TokenKind::Not);
    const detail::Token name = ts.expect(detail::TokenKind::Identifier, "a predicate name");
    auto pid = sig.find_predicate(name.text);
    if (!pid) throw ParseError("undeclared predicate '" + name.text + "'", name.loc);
    const Predicate& pred = sig.predicate(*pid);
    if (!pred.observed) throw ParseError("evidence for hidden predicate '" + name.text + "'", name.loc);
    std::vector<detail::Token> arg_tokens;
    if (ts.accept(detail::TokenKind::LParen)) {
      if (ts.peek().kind != detail::TokenKind::RParen) {
        do {
          const detail::Token& c = ts.next();
          if (c.kind != detail::TokenKind::Identifier && c.kind != detail::TokenKind::Number &&
              c.kind != detail::TokenKind::Quoted)
            throw ParseError("expected a constant, found " + detail::describe(c), c.loc);
          arg_tokens.push_back(c);
        } while (ts.accept(detail::TokenKind::Comma));
      }
      ts.expect(detail::TokenKind::RParen, "')' or ','");
    }
    if (ts.peek().kind != detail::TokenKind::End)
      throw ParseError("unexpected " + detail::describe(ts.peek()), ts.peek().loc);
    if (static_cast<int>(arg_tokens.size()) != pred.arity())
      throw ParseError("arity mismatch: '" + pred.name + "' expects " + std::to_string(pred.arity()) + " argument(s), got " +
                           std::to_string(arg_tokens.size()),
                       name.loc);
    EvidenceAtom atom;
    atom.predicate = *pid;
    atom.truth = truth;
    atom.loc = name.loc;
    for (std::size_t i = 0; i < arg_tokens.size(); ++i) {
      ConstantId c = sig.intern_constant(arg_tokens[i].text);
      sig.add_to_type(pred.arg_types[i], c);
      atom.args.push_back(c);
    }
    auto key = std::make_pair(atom.predicate, atom.args);
    auto [it, inserted] = seen.emplace(key, truth);
    if (!inserted) {
      if (it->second != truth) throw ParseError("contradictory evidence for '" + name.text + "'", name.loc);
      continue;
    }
    out.atoms.push_back(std::move(atom));
  }
  return out;
}

// Reads the atom lines of an emitted solution (everything before `---`)
// into a world over the hidden atoms.
inline World parse_solution(std::string_view text, const Signature& sig, const AtomIndex& atoms) {
  World world(atoms.hidden_count());
  auto lines = detail::split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (lines[li] == "---") break;
    const int line_no = static_cast<int>(li) + 1;
    detail::TokenStream ts(detail::tokenize(lines[li], line_no));
    if (ts.peek().kind == detail::TokenKind::End) continue;
    const detail::Token name = ts.expect(detail::TokenKind::Identifier, "a predicate name");
    auto pid = sig.find_predicate(name.text);
    if (!pid || sig.predicate(*pid).observed)
      throw ParseError("'" + name.text + "' is not a hidden predicate", name.loc);
    std::vector<ConstantId> args;
    if (ts.accept(detail::TokenKind::LParen)) {
      if (ts.peek().kind != detail::TokenKind::RParen) {
        do {
          const detail::Token& c = ts.next();
          auto id = sig.find_constant(c.text);
          if (!id) throw ParseError("unknown constant '" + c.text + "'", c.loc);
          args.push_back(*id);
        } while (ts.accept(detail::TokenKind::Comma));
      }
      ts.expect(detail::TokenKind::RParen, "')'");
    }
    if (static_cast<int>(args.size()) != sig.predicate(*pid).arity())
      throw ParseError("arity mismatch for '" + name.text + "'", name.loc);
    AtomId id = atoms.id(*pid, args);
    if (id == kNoAtom) throw ParseError("atom outside its predicate's domain", name.loc);
    world.set(id, true);
  }
  return world;
}

}  // namespace mlncpi
