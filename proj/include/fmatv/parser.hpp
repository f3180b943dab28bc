#pragma once

// Recursive-descent parser for the `.ll` subset.
//
//   module   := (define | declare | `source_filename = "..."` | `target ... = "..."`
//                | `attributes #N = { ... }`)*
//   define   := 'define' attr* 'double' attr* @name '(' params ')' fnattr* '{' label? inst* ret '}'
//   inst     := %id '=' ( binop flag* 'double' operand ',' operand
//                       | 'tail'? 'call' 'double' @name '(' args ')' fnattr* )
//   ret      := 'ret' 'double' operand
//   operand  := %id | decimal literal | 0x<16 hex digits>

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fmatv/ir.hpp"

namespace fmatv {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

enum class Tok { Ident, Local, Global, AttrGroup, Number, String, LParen, RParen, LBrace, RBrace, LBracket, RBracket, Comma, Equals, Colon, Ellipsis, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", line_, col_});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$' || c == '-';
  }

  char peek(std::size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token next() {
    const int line = line_, col = col_;
    const char c = peek();
    auto single = [&](Tok k) {
      advance();
      return Token{k, std::string(1, c), line, col};
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case '{': return single(Tok::LBrace);
      case '}': return single(Tok::RBrace);
      case '[': return single(Tok::LBracket);
      case ']': return single(Tok::RBracket);
      case ',': return single(Tok::Comma);
      case '=': return single(Tok::Equals);
      case ':': return single(Tok::Colon);
      default: break;
    }
    if (c == '.' && peek(1) == '.' && peek(2) == '.') {
      advance(), advance(), advance();
      return {Tok::Ellipsis, "...", line, col};
    }
    if (c == '"') {
      advance();
      std::string s;
      while (pos_ < src_.size() && peek() != '"') {
        s += peek();
        advance();
      }
      if (pos_ >= src_.size()) throw ParseError(line, col, "unterminated string");
      advance();
      return {Tok::String, s, line, col};
    }
    if (c == '%' || c == '@' || c == '#') {
      advance();
      std::string s;
      while (pos_ < src_.size() && is_ident_char(peek())) {
        s += peek();
        advance();
      }
      if (s.empty()) throw ParseError(line, col, std::string("expected identifier after '") + c + "'");
      const Tok k = c == '%' ? Tok::Local : c == '@' ? Tok::Global : Tok::AttrGroup;
      return {k, s, line, col};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || ((c == '-' || c == '+') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      std::string s;
      s += c;
      advance();
      while (pos_ < src_.size()) {
        char d = peek();
        bool exp_sign = (d == '+' || d == '-') && (s.back() == 'e' || s.back() == 'E') && s.rfind("0x", 0) != 0;
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '.' || exp_sign) {
          s += d;
          advance();
        } else {
          break;
        }
      }
      return {Tok::Number, s, line, col};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() && is_ident_char(peek())) {
        s += peek();
        advance();
      }
      return {Tok::Ident, s, line, col};
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline const std::set<std::string, std::less<>>& fast_math_flags() {
  static const std::set<std::string, std::less<>> flags{"fast", "nnan", "ninf", "nsz", "arcp", "contract", "afn", "reassoc"};
  return flags;
}

inline bool is_discarded_attr(const Token& t) {
  if (t.kind == Tok::AttrGroup) return true;
  if (t.kind != Tok::Ident) return false;
  return t.text == "noundef" || t.text == "local_unnamed_addr" || t.text == "unnamed_addr" || t.text == "dso_local";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Module parse_module() {
    Module m;
    while (cur().kind != Tok::End) {
      const Token& t = cur();
      if (is_word("define")) {
        m.functions.push_back(parse_define());
      } else if (is_word("declare")) {
        m.declarations.push_back(parse_declare());
      } else if (is_word("source_filename")) {
        bump();
        expect(Tok::Equals, "'='");
        expect(Tok::String, "string");
      } else if (is_word("target")) {
        bump();
        expect(Tok::Ident, "target property");
        expect(Tok::Equals, "'='");
        expect(Tok::String, "string");
      } else if (is_word("attributes")) {
        skip_attribute_group();
      } else {
        throw error(t, "unsupported top-level token '" + t.text + "'");
      }
    }
    return m;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& look(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& bump() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_word(std::string_view w) const { return cur().kind == Tok::Ident && cur().text == w; }

  static ParseError error(const Token& t, const std::string& msg) { return ParseError(t.line, t.column, msg); }

  const Token& expect(Tok k, const std::string& what) {
    if (cur().kind != k) throw error(cur(), "expected " + what + ", found '" + cur().text + "'");
    return bump();
  }

  void expect_word(std::string_view w) {
    if (!is_word(w)) throw error(cur(), "expected '" + std::string(w) + "', found '" + cur().text + "'");
    bump();
  }

  void expect_double() {
    if (cur().kind == Tok::Ident && cur().text != "double") throw error(cur(), "unsupported type '" + cur().text + "'");
    expect_word("double");
  }

  void skip_attrs() {
    while (is_discarded_attr(cur())) bump();
  }

  void skip_attribute_group() {
    bump();
    expect(Tok::AttrGroup, "attribute group id");
    expect(Tok::Equals, "'='");
    expect(Tok::LBrace, "'{'");
    while (cur().kind != Tok::RBrace) {
      if (cur().kind == Tok::End) throw error(cur(), "unterminated attribute group");
      bump();
    }
    bump();
  }

  static LocalId local_from(const Token& t) {
    const std::string& s = t.text;
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return LocalId::anon(std::stoull(s));
    return LocalId::named(s);
  }

  Expr parse_operand() {
    const Token& t = cur();
    if (t.kind == Tok::Local) {
      bump();
      return Expr::local(local_from(t));
    }
    if (t.kind == Tok::Number) {
      bump();
      auto v = parse_literal(t);
      return Expr::literal(v);
    }
    throw error(t, "expected operand, found '" + t.text + "'");
  }

  static Binary64 parse_literal(const Token& t) {
    const std::string& s = t.text;
    const bool hex = s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
    if (hex && s.size() != 18) throw error(t, "hex float literal must have 16 digits: '" + s + "'");
    // LLVM decimal literals contain only digits, '.', exponent and sign.
    if (!hex) {
      for (char c : s)
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+'))
          throw error(t, "malformed float literal '" + s + "'");
    }
    auto v = parse_binary64(s);
    if (!v) throw error(t, "malformed float literal '" + s + "'");
    return *v;
  }

  std::vector<std::string> parse_flags() {
    std::vector<std::string> flags;
    while (cur().kind == Tok::Ident && fast_math_flags().contains(cur().text)) flags.push_back(bump().text);
    return flags;
  }

  FunctionDef parse_define() {
    expect_word("define");
    skip_attrs();
    expect_double();
    skip_attrs();
    FunctionDef f;
    f.name = GlobalId(expect(Tok::Global, "function name").text);
    expect(Tok::LParen, "'('");
    if (cur().kind != Tok::RParen) {
      for (;;) {
        expect_double();
        skip_attrs();
        const Token& id = expect(Tok::Local, "parameter name");
        f.params.push_back(Param{DType::Double, local_from(id)});
        if (cur().kind == Tok::Comma) {
          bump();
          continue;
        }
        break;
      }
    }
    expect(Tok::RParen, "')'");
    skip_attrs();
    expect(Tok::LBrace, "'{'");
    f.body = parse_body(f.params.size());
    expect(Tok::RBrace, "'}'");
    return f;
  }

  GlobalId parse_declare() {
    expect_word("declare");
    skip_attrs();
    expect_double();
    skip_attrs();
    GlobalId name(expect(Tok::Global, "function name").text);
    expect(Tok::LParen, "'('");
    while (cur().kind != Tok::RParen) {
      if (cur().kind == Tok::Ellipsis) {
        bump();
      } else {
        expect_double();
        skip_attrs();
        if (cur().kind == Tok::Local) bump();
      }
      if (cur().kind == Tok::Comma) bump();
      else break;
    }
    expect(Tok::RParen, "')'");
    skip_attrs();
    return name;
  }

  bool at_label() const {
    return (cur().kind == Tok::Number || cur().kind == Tok::Ident) && look(1).kind == Tok::Colon;
  }

  BasicBlock parse_body(std::size_t nparams) {
    BasicBlock blk;
    blk.blk_id = LocalId::anon(nparams);
    if (at_label()) {
      const Token& t = bump();
      bump();
      if (t.kind == Tok::Number) {
        if (!std::all_of(t.text.begin(), t.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          throw error(t, "malformed label '" + t.text + "'");
        blk.blk_id = LocalId::anon(std::stoull(t.text));
      } else {
        blk.blk_id = LocalId::named(t.text);
      }
    }
    for (;;) {
      if (is_word("ret")) {
        bump();
        expect_double();
        blk.blk_term = Terminator{DType::Double, parse_operand()};
        break;
      }
      if (is_word("br") || is_word("switch") || at_label())
        throw error(cur(), "unsupported: control flow");
      if (cur().kind == Tok::RBrace || cur().kind == Tok::End)
        throw error(cur(), "block has no terminator");
      blk.blk_code.push_back(parse_instruction());
    }
    if (cur().kind != Tok::RBrace) throw error(cur(), "unsupported: control flow");
    return blk;
  }

  Instruction parse_instruction() {
    const Token& d = expect(Tok::Local, "instruction result");
    Instruction inst;
    inst.dest = local_from(d);
    expect(Tok::Equals, "'='");
    const Token& op = cur();
    if (op.kind != Tok::Ident) throw error(op, "expected instruction, found '" + op.text + "'");
    if (op.text == "fmul" || op.text == "fadd" || op.text == "fsub") {
      bump();
      FBinop b;
      b.op = op.text == "fmul" ? BinOp::FMul : op.text == "fadd" ? BinOp::FAdd : BinOp::FSub;
      b.fm_flags = parse_flags();
      expect_double();
      b.lhs = parse_operand();
      expect(Tok::Comma, "','");
      b.rhs = parse_operand();
      inst.body = std::move(b);
      return inst;
    }
    if (op.text == "tail" || op.text == "call") {
      IntrinsicCall call;
      if (op.text == "tail") {
        call.tail = true;
        bump();
      }
      expect_word("call");
      if (cur().kind == Tok::Ident && fast_math_flags().contains(cur().text))
        throw error(cur(), "unsupported: fast-math flags on call");
      skip_attrs();
      expect_double();
      call.callee = GlobalId(expect(Tok::Global, "callee").text);
      expect(Tok::LParen, "'('");
      if (cur().kind != Tok::RParen) {
        for (;;) {
          expect_double();
          skip_attrs();
          call.args.push_back(CallArg{DType::Double, parse_operand()});
          if (cur().kind == Tok::Comma) {
            bump();
            continue;
          }
          break;
        }
      }
      expect(Tok::RParen, "')'");
      skip_attrs();
      inst.body = std::move(call);
      return inst;
    }
    if (op.text == "phi") throw error(op, "unsupported: phi nodes");
    throw error(op, "unsupported instruction '" + op.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `.ll` text in the supported subset. Throws ParseError.
inline Module parse_module(std::string_view text) {
  detail::Lexer lex(text);
  detail::Parser p(lex.run());
  return p.parse_module();
}

}  // namespace fmatv
