// ===========================================================================
// cfg_text.hpp -- textual syntax for CFG programs
//
// Reader and canonical printer for the `.cfg` format (see docs/cfg-format.md
// for the surface syntax).  The printer is canonical: for any program P,
// parse(print(P)) reproduces P structurally, and printing is idempotent on
// parsed text.  Instructions end at a newline or `;`; comments run from `#`
// to end of line.
// ===========================================================================
#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "varan/cfg.hpp"

namespace varan {

// ---------------------------------------------------------------------------
// Word spelling shared by parser and printer: words at or below the signed
// maximum print as unsigned decimals, the rest as negative signed decimals,
// so every word has exactly one canonical spelling.
// ---------------------------------------------------------------------------

inline std::string print_word(MachineInt w) {
  if (w.unsigned_value() <= max_signed)
    return std::to_string(w.unsigned_value());
  return std::to_string(w.signed_value());
}

namespace text_detail {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

struct Token {
  enum class Kind : std::uint8_t { End, Newline, Int, Ident, String, Punct };
  Kind kind = Kind::End;
  std::string text;          // ident spelling, punct spelling, string body
  std::uint64_t value = 0;   // Int only
  int line = 0;
  int col = 0;
};

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

[[noreturn]] inline void fail_at(int line, int col, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ":" + std::to_string(col) +
                   ": " + msg);
}

inline std::vector<Token> tokenize(const std::string& src) {
  // Longest first.  Operators ending in `u` bind the suffix only when the
  // next character cannot continue an identifier, so `x<u y` is the unsigned
  // comparison while `x<ulimit` compares against the variable `ulimit`.
  static const char* puncts[] = {
      "==u", "!=u", "<=u", ">=u", ">>u", "->", "<<", ">>", "<=", ">=",
      "==",  "!=",  "&&",  "||",  "<u",  ">u", "/u", "%u", "@",  "(",
      ")",   "[",   "]",   "{",   "}",   ":",  ";",  ",",  "=",  "?",
      "<",   ">",   "+",   "-",   "*",   "/",  "%",  "&",  "|",  "^",
      "!",   "~",
  };

  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();

  auto push = [&](Token::Kind k, std::string text, std::uint64_t v = 0) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.value = v;
    t.line = line;
    t.col = col;
    out.push_back(std::move(t));
  };

  while (i < n) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      push(Token::Kind::Newline, "\n");
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      std::uint64_t v = 0;
      if (c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
        i += 2;
        std::size_t digits = 0;
        while (i < n && std::isxdigit(static_cast<unsigned char>(src[i]))) {
          char d = src[i];
          std::uint64_t dv = std::isdigit(static_cast<unsigned char>(d))
                                 ? static_cast<std::uint64_t>(d - '0')
                                 : static_cast<std::uint64_t>(
                                       std::tolower(d) - 'a' + 10);
          v = v * 16 + dv;
          if (v > 0xFFFFFFFFull)
            fail_at(line, col, "integer literal does not fit in 32 bits");
          ++i;
          ++digits;
        }
        if (digits == 0) fail_at(line, col, "malformed hexadecimal literal");
      } else {
        while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) {
          v = v * 10 + static_cast<std::uint64_t>(src[i] - '0');
          if (v > 0xFFFFFFFFull)
            fail_at(line, col, "integer literal does not fit in 32 bits");
          ++i;
        }
      }
      if (i < n && ident_start(src[i]))
        fail_at(line, col, "malformed number");
      push(Token::Kind::Int, src.substr(start, i - start), v);
      col += static_cast<int>(i - start);
      continue;
    }
    if (ident_start(c)) {
      std::size_t start = i;
      while (i < n && ident_char(src[i])) ++i;
      push(Token::Kind::Ident, src.substr(start, i - start));
      col += static_cast<int>(i - start);
      continue;
    }
    if (c == '"') {
      std::size_t start = ++i;
      while (i < n && src[i] != '"' && src[i] != '\n') ++i;
      if (i >= n || src[i] != '"')
        fail_at(line, col, "unterminated string literal");
      push(Token::Kind::String, src.substr(start, i - start));
      col += static_cast<int>(i - start) + 2;
      ++i;
      continue;
    }
    bool matched = false;
    for (const char* p : puncts) {
      std::size_t len = std::char_traits<char>::length(p);
      if (src.compare(i, len, p) != 0) continue;
      if (p[len - 1] == 'u' && i + len < n && ident_char(src[i + len]))
        continue;  // the `u` belongs to a following identifier
      push(Token::Kind::Punct, p);
      i += len;
      col += static_cast<int>(len);
      matched = true;
      break;
    }
    if (!matched)
      fail_at(line, col, std::string("unexpected character '") + c + "'");
  }
  push(Token::Kind::End, "");
  return out;
}

// ---------------------------------------------------------------------------
// Name tables
// ---------------------------------------------------------------------------

inline std::optional<MemChunk> chunk_from_name(const std::string& s) {
  if (s == "int8s") return MemChunk::Int8Signed;
  if (s == "int8u") return MemChunk::Int8Unsigned;
  if (s == "int16s") return MemChunk::Int16Signed;
  if (s == "int16u") return MemChunk::Int16Unsigned;
  if (s == "int32") return MemChunk::Int32;
  return std::nullopt;
}

inline const char* chunk_name(MemChunk c) {
  switch (c) {
    case MemChunk::Int8Signed: return "int8s";
    case MemChunk::Int8Unsigned: return "int8u";
    case MemChunk::Int16Signed: return "int16s";
    case MemChunk::Int16Unsigned: return "int16u";
    case MemChunk::Int32: return "int32";
  }
  return "int32";
}

inline std::optional<UnOp> named_unop(const std::string& s) {
  if (s == "cast8s") return UnOp::Cast8Signed;
  if (s == "cast8u") return UnOp::Cast8Unsigned;
  if (s == "cast16s") return UnOp::Cast16Signed;
  if (s == "cast16u") return UnOp::Cast16Unsigned;
  if (s == "boolval") return UnOp::BoolVal;
  return std::nullopt;
}

inline const char* named_unop_name(UnOp op) {
  switch (op) {
    case UnOp::Cast8Signed: return "cast8s";
    case UnOp::Cast8Unsigned: return "cast8u";
    case UnOp::Cast16Signed: return "cast16s";
    case UnOp::Cast16Unsigned: return "cast16u";
    case UnOp::BoolVal: return "boolval";
    default: return nullptr;
  }
}

inline bool is_reserved(const std::string& s) {
  static const std::set<std::string> kw = {
      "function", "symbol", "entry",  "stack",  "ids",    "skip",
      "if",       "call",   "return", "report", "addrglobal",
      "addrstack", "boolval", "cast8s", "cast8u", "cast16s", "cast16u",
      "int8s",    "int8u",  "int16s", "int16u", "int32",
  };
  return kw.count(s) > 0;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::string src) : toks_(tokenize(src)) {}

  CfgProgram run() {
    CfgProgram prog;
    bool bare_mode = false;
    skip_blank_lines();
    while (!at(Token::Kind::End)) {
      if (is_ident("symbol")) {
        if (bare_mode) fail("symbol declarations must precede instructions");
        parse_symbol(prog);
      } else if (is_ident("function")) {
        if (bare_mode)
          fail("cannot mix bare instructions with function definitions");
        prog.functions.push_back(parse_function());
      } else if (at(Token::Kind::Int)) {
        if (!prog.functions.empty())
          fail("cannot mix bare instructions with function definitions");
        bare_mode = true;
        parse_bare_main(prog);
      } else {
        fail("expected 'symbol', 'function', or an instruction");
      }
      skip_blank_lines();
    }
    if (prog.functions.empty()) fail("program defines no functions");
    return prog;
  }

 private:
  struct FuncCtx {
    CfgFunction fn;
    std::map<std::string, VarId> var_ids;
    std::set<VarId> used_ids;
    VarId next_id = 1;
  };

  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  // --- token plumbing ------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    std::size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Token::Kind k) const { return peek().kind == k; }
  bool is_punct(const char* p) const {
    return at(Token::Kind::Punct) && peek().text == p;
  }
  bool is_ident(const char* s) const {
    return at(Token::Kind::Ident) && peek().text == s;
  }
  Token advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept_punct(const char* p) {
    if (!is_punct(p)) return false;
    advance();
    return true;
  }
  bool accept_ident(const char* s) {
    if (!is_ident(s)) return false;
    advance();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Token::Kind::End      ? "end of input"
                      : t.kind == Token::Kind::Newline ? "end of line"
                                                        : "'" + t.text + "'";
    fail_at(t.line, t.col, msg + " (got " + got + ")");
  }
  void expect_punct(const char* p) {
    if (!accept_punct(p)) fail(std::string("expected '") + p + "'");
  }
  std::string expect_ident(const char* what) {
    if (!at(Token::Kind::Ident)) fail(std::string("expected ") + what);
    return advance().text;
  }
  std::string expect_name(const char* what) {
    if (!at(Token::Kind::Ident)) fail(std::string("expected ") + what);
    const Token& t = peek();
    if (is_reserved(t.text))
      fail_at(t.line, t.col,
              "'" + t.text + "' is a reserved word and cannot be used here");
    return advance().text;
  }
  std::uint64_t expect_int(const char* what) {
    if (!at(Token::Kind::Int)) fail(std::string("expected ") + what);
    return advance().value;
  }
  void skip_blank_lines() {
    while (at(Token::Kind::Newline) || is_punct(";")) advance();
  }
  // An instruction or declaration ends at `;`, a newline, a closing brace,
  // or the end of input.
  void expect_terminator() {
    if (accept_punct(";") || at(Token::Kind::End) || is_punct("}")) return;
    if (at(Token::Kind::Newline)) {
      advance();
      return;
    }
    fail("expected end of instruction");
  }

  // --- variables -----------------------------------------------------------

  VarId lookup_var(FuncCtx& c, const std::string& name) {
    auto it = c.var_ids.find(name);
    if (it != c.var_ids.end()) return it->second;
    while (c.used_ids.count(c.next_id)) ++c.next_id;
    VarId id = c.next_id++;
    c.var_ids.emplace(name, id);
    c.used_ids.insert(id);
    c.fn.var_names.emplace(id, name);
    return id;
  }

  // --- top-level forms -----------------------------------------------------

  void parse_symbol(CfgProgram& prog) {
    advance();  // 'symbol'
    std::string name = expect_name("symbol name");
    std::uint64_t size = expect_int("symbol size in bytes");
    prog.globals.emplace_back(name, static_cast<std::uint32_t>(size));
    expect_terminator();
  }

  void parse_bare_main(CfgProgram& prog) {
    FuncCtx c;
    c.fn.name = "main";
    bool first = true;
    while (true) {
      skip_blank_lines();
      if (at(Token::Kind::End)) break;
      if (!at(Token::Kind::Int)) fail("expected an instruction");
      NodeId node = parse_node_line(c);
      if (first) {
        c.fn.entry = node;
        first = false;
      }
    }
    prog.functions.push_back(std::move(c.fn));
  }

  CfgFunction parse_function() {
    advance();  // 'function'
    FuncCtx c;
    c.fn.name = expect_name("function name");
    expect_punct("(");
    std::vector<std::string> param_names;
    if (!is_punct(")")) {
      do {
        param_names.push_back(expect_name("parameter name"));
      } while (accept_punct(","));
    }
    expect_punct(")");
    if (accept_ident("stack"))
      c.fn.stack_size =
          static_cast<std::uint32_t>(expect_int("stack size in bytes"));
    if (!accept_ident("entry")) fail("expected 'entry'");
    c.fn.entry = static_cast<NodeId>(expect_int("entry node id"));
    expect_punct("{");

    // `ids` lines must appear before the first instruction so that every
    // explicit variable id is fixed before names are resolved.
    skip_blank_lines();
    while (is_ident("ids")) {
      parse_ids_line(c);
      skip_blank_lines();
    }
    for (const std::string& p : param_names)
      c.fn.params.push_back(lookup_var(c, p));
    {
      std::set<VarId> dedup(c.fn.params.begin(), c.fn.params.end());
      if (dedup.size() != c.fn.params.size())
        fail("duplicate parameter name");
    }

    while (!is_punct("}")) {
      if (at(Token::Kind::End)) fail("missing '}' at end of function");
      if (is_ident("ids"))
        fail("'ids' lines must precede the first instruction");
      if (!at(Token::Kind::Int)) fail("expected an instruction");
      parse_node_line(c);
      skip_blank_lines();
    }
    expect_punct("}");
    expect_terminator();
    return c.fn;
  }

  void parse_ids_line(FuncCtx& c) {
    advance();  // 'ids'
    do {
      std::string name = expect_name("variable name");
      expect_punct("=");
      std::uint64_t raw = expect_int("variable id");
      if (raw == 0) fail("variable ids must be positive");
      VarId id = static_cast<VarId>(raw);
      if (c.var_ids.count(name))
        fail("variable '" + name + "' already has an id");
      if (c.used_ids.count(id))
        fail("variable id " + std::to_string(id) + " is already taken");
      c.var_ids.emplace(name, id);
      c.used_ids.insert(id);
      c.fn.var_names.emplace(id, name);
    } while (accept_punct(","));
    expect_terminator();
  }

  NodeId parse_node_line(FuncCtx& c) {
    std::uint64_t raw = expect_int("node id");
    if (raw == 0) fail("node ids must be positive");
    NodeId node = static_cast<NodeId>(raw);
    if (c.fn.body.count(node))
      fail("node " + std::to_string(node) + " is defined twice");
    expect_punct(":");
    Instruction ins = parse_instruction(c);
    if (accept_punct("@")) {
      if (!accept_ident("report")) fail("expected 'report' after '@'");
      c.fn.report_nodes.insert(node);
    }
    expect_terminator();
    c.fn.body.emplace(node, std::move(ins));
    return node;
  }

  NodeId expect_goto() {
    expect_punct("->");
    std::uint64_t raw = expect_int("successor node id");
    if (raw == 0) fail("node ids must be positive");
    return static_cast<NodeId>(raw);
  }

  Instruction parse_instruction(FuncCtx& c) {
    if (!at(Token::Kind::Ident)) fail("expected an instruction");
    const std::string head = peek().text;

    if (head == "skip") {
      advance();
      return SkipInstr{expect_goto()};
    }
    if (head == "if") {
      advance();
      expect_punct("(");
      Expr cond = parse_expr(c);
      expect_punct(")");
      expect_punct("->");
      NodeId t = static_cast<NodeId>(expect_int("successor node id"));
      expect_punct(",");
      NodeId f = static_cast<NodeId>(expect_int("successor node id"));
      if (t == 0 || f == 0) fail("node ids must be positive");
      return IfInstr{std::move(cond), t, f};
    }
    if (head == "return") {
      advance();
      if (at(Token::Kind::Newline) || at(Token::Kind::End) || is_punct(";") ||
          is_punct("}") || is_punct("@"))
        return ReturnInstr{std::nullopt};
      return ReturnInstr{parse_expr(c)};
    }
    if (head == "call") {
      advance();
      return parse_call(c, std::nullopt);
    }
    if (auto chunk = chunk_from_name(head)) {
      advance();
      expect_punct("[");
      Expr addr = parse_expr(c);
      expect_punct("]");
      expect_punct("=");
      Expr value = parse_expr(c);
      NodeId next = expect_goto();
      return StoreInstr{*chunk, std::move(addr), std::move(value), next};
    }
    if (is_reserved(head)) fail("unexpected keyword '" + head + "'");

    // Assignment or call-with-destination.
    VarId dst = lookup_var(c, expect_ident("variable name"));
    expect_punct("=");
    if (accept_ident("call")) return parse_call(c, dst);
    Expr value = parse_expr(c);
    NodeId next = expect_goto();
    return AssignInstr{dst, std::move(value), next};
  }

  Instruction parse_call(FuncCtx& c, std::optional<VarId> dst) {
    CallInstr call;
    call.dst = dst;
    if (at(Token::Kind::String)) call.signature = advance().text;
    if (at(Token::Kind::Ident)) {
      // A bare identifier in callee position is the address of that symbol.
      call.callee = Expr::constant(
          Constant::global(expect_name("callee name")));
    } else {
      expect_punct("(");
      call.callee = parse_expr(c);
      expect_punct(")");
    }
    expect_punct("(");
    if (!is_punct(")")) {
      do {
        call.args.push_back(parse_expr(c));
      } while (accept_punct(","));
    }
    expect_punct(")");
    call.next = expect_goto();
    return call;
  }

  // --- expressions ---------------------------------------------------------
  //
  // Precedence, loosest first:
  //   ?:   ||   &&   |   ^   &   == != ==u !=u   < <= > >= <u <=u >u >=u
  //   << >> >>u   + -   * / % /u %u   unary - ! ~   primary
  //
  // `a && b` abbreviates `a ? b : 0` and `a || b` abbreviates `a ? 1 : b`.

  Expr parse_expr(FuncCtx& c) { return parse_cond(c); }

  Expr parse_cond(FuncCtx& c) {
    Expr g = parse_or(c);
    if (!accept_punct("?")) return g;
    Expr t = parse_expr(c);
    expect_punct(":");
    Expr f = parse_expr(c);
    return Expr::cond(std::move(g), std::move(t), std::move(f));
  }

  Expr parse_or(FuncCtx& c) {
    Expr e = parse_and(c);
    while (accept_punct("||")) {
      Expr rhs = parse_and(c);
      e = Expr::cond(std::move(e),
                     Expr::constant(Constant::integer(MachineInt::from_bits(1))),
                     std::move(rhs));
    }
    return e;
  }

  Expr parse_and(FuncCtx& c) {
    Expr e = parse_bitor(c);
    while (accept_punct("&&")) {
      Expr rhs = parse_bitor(c);
      e = Expr::cond(std::move(e), std::move(rhs),
                     Expr::constant(Constant::integer(MachineInt::from_bits(0))));
    }
    return e;
  }

  Expr parse_binary_level(FuncCtx& c, Expr (Parser::*sub)(FuncCtx&),
                          const std::vector<std::pair<const char*, BinOp>>& ops) {
    Expr e = (this->*sub)(c);
    for (;;) {
      bool any = false;
      for (const auto& [sym, op] : ops) {
        if (accept_punct(sym)) {
          Expr rhs = (this->*sub)(c);
          e = Expr::binary(op, std::move(e), std::move(rhs));
          any = true;
          break;
        }
      }
      if (!any) return e;
    }
  }

  Expr parse_bitor(FuncCtx& c) {
    return parse_binary_level(c, &Parser::parse_bitxor, {{"|", BinOp::Or}});
  }
  Expr parse_bitxor(FuncCtx& c) {
    return parse_binary_level(c, &Parser::parse_bitand, {{"^", BinOp::Xor}});
  }
  Expr parse_bitand(FuncCtx& c) {
    return parse_binary_level(c, &Parser::parse_equality, {{"&", BinOp::And}});
  }
  Expr parse_equality(FuncCtx& c) {
    return parse_binary_level(c, &Parser::parse_rel,
                              {{"==u", BinOp::CmpEqU},
                               {"!=u", BinOp::CmpNeU},
                               {"==", BinOp::CmpEq},
                               {"!=", BinOp::CmpNe}});
  }
  Expr parse_rel(FuncCtx& c) {
    return parse_binary_level(c, &Parser::parse_shift,
                              {{"<=u", BinOp::CmpLeU},
                               {">=u", BinOp::CmpGeU},
                               {"<u", BinOp::CmpLtU},
                               {">u", BinOp::CmpGtU},
                               {"<=", BinOp::CmpLe},
                               {">=", BinOp::CmpGe},
                               {"<", BinOp::CmpLt},
                               {">", BinOp::CmpGt}});
  }
  Expr parse_shift(FuncCtx& c) {
    return parse_binary_level(c, &Parser::parse_additive,
                              {{"<<", BinOp::Shl},
                               {">>u", BinOp::ShrU},
                               {">>", BinOp::ShrS}});
  }
  Expr parse_additive(FuncCtx& c) {
    return parse_binary_level(
        c, &Parser::parse_mult, {{"+", BinOp::Add}, {"-", BinOp::Sub}});
  }
  Expr parse_mult(FuncCtx& c) {
    return parse_binary_level(c, &Parser::parse_unary,
                              {{"*", BinOp::Mul},
                               {"/u", BinOp::DivU},
                               {"%u", BinOp::RemU},
                               {"/", BinOp::DivS},
                               {"%", BinOp::RemS}});
  }

  Expr parse_unary(FuncCtx& c) {
    if (accept_punct("-")) {
      // A minus directly on a literal folds into a negative constant; the
      // printer writes `-(e)` for a genuine negation of a literal.
      if (at(Token::Kind::Int)) {
        std::uint64_t v = advance().value;
        return Expr::constant(Constant::integer(
            MachineInt::from_integer(-static_cast<std::int64_t>(v))));
      }
      return Expr::unary(UnOp::Neg, parse_unary(c));
    }
    if (accept_punct("!")) return Expr::unary(UnOp::BoolNot, parse_unary(c));
    if (accept_punct("~")) return Expr::unary(UnOp::Not, parse_unary(c));
    return parse_primary(c);
  }

  MachineInt parse_signed_literal(const char* what) {
    bool neg = accept_punct("-");
    std::int64_t v = static_cast<std::int64_t>(expect_int(what));
    return MachineInt::from_integer(neg ? -v : v);
  }

  Expr parse_primary(FuncCtx& c) {
    if (at(Token::Kind::Int)) {
      std::uint64_t v = advance().value;
      return Expr::constant(Constant::integer(
          MachineInt::from_integer(static_cast<std::int64_t>(v))));
    }
    if (accept_punct("(")) {
      Expr e = parse_expr(c);
      expect_punct(")");
      return e;
    }
    if (!at(Token::Kind::Ident)) fail("expected an expression");
    const std::string name = peek().text;

    if (auto op = named_unop(name)) {
      advance();
      expect_punct("(");
      Expr e = parse_expr(c);
      expect_punct(")");
      return Expr::unary(*op, std::move(e));
    }
    if (name == "addrglobal") {
      advance();
      expect_punct("(");
      std::string sym = expect_name("symbol name");
      MachineInt ofs{};
      if (accept_punct(",")) ofs = parse_signed_literal("byte offset");
      expect_punct(")");
      return Expr::constant(Constant::global(std::move(sym), ofs));
    }
    if (name == "addrstack") {
      advance();
      expect_punct("(");
      MachineInt ofs = parse_signed_literal("byte offset");
      expect_punct(")");
      return Expr::constant(Constant::stack(ofs));
    }
    if (auto chunk = chunk_from_name(name)) {
      advance();
      expect_punct("[");
      Expr addr = parse_expr(c);
      expect_punct("]");
      return Expr::load(*chunk, std::move(addr));
    }
    if (is_reserved(name)) fail("unexpected keyword '" + name + "'");
    return Expr::var(lookup_var(c, expect_ident("variable name")));
  }
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

// Binding strength of each expression form; loosest binds lowest.
enum Level : int {
  LvCond = 0,
  LvOr,
  LvAnd,
  LvBitOr,
  LvBitXor,
  LvBitAnd,
  LvEq,
  LvRel,
  LvShift,
  LvAdd,
  LvMul,
  LvUnary,
  LvPrimary,
};

struct BinSpell {
  const char* sym;
  int level;
};

inline BinSpell binop_spelling(BinOp op) {
  switch (op) {
    case BinOp::Add: return {"+", LvAdd};
    case BinOp::Sub: return {"-", LvAdd};
    case BinOp::Mul: return {"*", LvMul};
    case BinOp::DivS: return {"/", LvMul};
    case BinOp::RemS: return {"%", LvMul};
    case BinOp::DivU: return {"/u", LvMul};
    case BinOp::RemU: return {"%u", LvMul};
    case BinOp::And: return {"&", LvBitAnd};
    case BinOp::Or: return {"|", LvBitOr};
    case BinOp::Xor: return {"^", LvBitXor};
    case BinOp::Shl: return {"<<", LvShift};
    case BinOp::ShrS: return {">>", LvShift};
    case BinOp::ShrU: return {">>u", LvShift};
    case BinOp::CmpEq: return {"==", LvEq};
    case BinOp::CmpNe: return {"!=", LvEq};
    case BinOp::CmpLt: return {"<", LvRel};
    case BinOp::CmpLe: return {"<=", LvRel};
    case BinOp::CmpGt: return {">", LvRel};
    case BinOp::CmpGe: return {">=", LvRel};
    case BinOp::CmpEqU: return {"==u", LvEq};
    case BinOp::CmpNeU: return {"!=u", LvEq};
    case BinOp::CmpLtU: return {"<u", LvRel};
    case BinOp::CmpLeU: return {"<=u", LvRel};
    case BinOp::CmpGtU: return {">u", LvRel};
    case BinOp::CmpGeU: return {">=u", LvRel};
  }
  return {"+", LvAdd};
}

inline std::string print_constant(const Constant& c) {
  switch (c.kind) {
    case Constant::Kind::Int:
      return print_word(c.value);
    case Constant::Kind::GlobalAddr:
      if (c.value == MachineInt{})
        return "addrglobal(" + c.symbol + ")";
      return "addrglobal(" + c.symbol + ", " + print_word(c.value) + ")";
    case Constant::Kind::StackAddr:
      return "addrstack(" + print_word(c.value) + ")";
  }
  return "0";
}

inline void print_expr_rec(std::ostream& os, const CfgFunction& f,
                           const Expr& e, int min_level) {
  auto paren_open = [&](int level) {
    if (level < min_level) os << "(";
    return level < min_level;
  };

  switch (e.kind()) {
    case Expr::Kind::Var:
      os << var_name(f, e.var_id());
      return;
    case Expr::Kind::Const:
      os << print_constant(e.constant_value());
      return;
    case Expr::Kind::Load:
      os << chunk_name(e.chunk()) << "[";
      print_expr_rec(os, f, e.child(0), LvCond);
      os << "]";
      return;
    case Expr::Kind::Unary: {
      UnOp op = e.unop();
      if (const char* fn = named_unop_name(op)) {
        os << fn << "(";
        print_expr_rec(os, f, e.child(0), LvCond);
        os << ")";
        return;
      }
      bool parens = paren_open(LvUnary);
      os << (op == UnOp::Neg ? "-" : op == UnOp::Not ? "~" : "!");
      const Expr& kid = e.child(0);
      if (op == UnOp::Neg && kid.kind() == Expr::Kind::Const &&
          kid.constant_value().kind == Constant::Kind::Int) {
        // `-lit` would re-read as a negative literal, not as a negation.
        os << "(" << print_constant(kid.constant_value()) << ")";
      } else {
        print_expr_rec(os, f, kid, LvUnary);
      }
      if (parens) os << ")";
      return;
    }
    case Expr::Kind::Binary: {
      BinSpell s = binop_spelling(e.binop());
      bool parens = paren_open(s.level);
      print_expr_rec(os, f, e.child(0), s.level);
      os << " " << s.sym << " ";
      print_expr_rec(os, f, e.child(1), s.level + 1);
      if (parens) os << ")";
      return;
    }
    case Expr::Kind::Cond: {
      const Expr& g = e.child(0);
      const Expr& t = e.child(1);
      const Expr& z = e.child(2);
      bool t_is_one = t.is_int_literal(1);
      bool z_is_zero = z.is_int_literal(0);
      if (z_is_zero && !t_is_one) {
        bool parens = paren_open(LvAnd);
        print_expr_rec(os, f, g, LvAnd);
        os << " && ";
        print_expr_rec(os, f, t, LvAnd + 1);
        if (parens) os << ")";
      } else if (t_is_one && !z_is_zero) {
        bool parens = paren_open(LvOr);
        print_expr_rec(os, f, g, LvOr);
        os << " || ";
        print_expr_rec(os, f, z, LvOr + 1);
        if (parens) os << ")";
      } else {
        bool parens = paren_open(LvCond);
        print_expr_rec(os, f, g, LvOr);
        os << " ? ";
        print_expr_rec(os, f, t, LvCond);
        os << " : ";
        print_expr_rec(os, f, z, LvCond);
        if (parens) os << ")";
      }
      return;
    }
  }
}

inline void print_instruction(std::ostream& os, const CfgFunction& f,
                              const Instruction& ins) {
  std::visit(
      [&](const auto& i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, SkipInstr>) {
          os << "skip -> " << i.next;
        } else if constexpr (std::is_same_v<T, AssignInstr>) {
          os << var_name(f, i.dst) << " = ";
          print_expr_rec(os, f, i.value, LvCond);
          os << " -> " << i.next;
        } else if constexpr (std::is_same_v<T, StoreInstr>) {
          os << chunk_name(i.chunk) << "[";
          print_expr_rec(os, f, i.addr, LvCond);
          os << "] = ";
          print_expr_rec(os, f, i.value, LvCond);
          os << " -> " << i.next;
        } else if constexpr (std::is_same_v<T, IfInstr>) {
          os << "if (";
          print_expr_rec(os, f, i.cond, LvCond);
          os << ") -> " << i.if_true << ", " << i.if_false;
        } else if constexpr (std::is_same_v<T, CallInstr>) {
          if (i.dst) os << var_name(f, *i.dst) << " = ";
          os << "call ";
          if (!i.signature.empty()) os << '"' << i.signature << "\" ";
          const Expr& callee = i.callee;
          if (callee.kind() == Expr::Kind::Const &&
              callee.constant_value().kind == Constant::Kind::GlobalAddr &&
              callee.constant_value().value == MachineInt{}) {
            os << callee.constant_value().symbol;
          } else {
            os << "(";
            print_expr_rec(os, f, callee, LvCond);
            os << ")";
          }
          os << "(";
          for (std::size_t k = 0; k < i.args.size(); ++k) {
            if (k) os << ", ";
            print_expr_rec(os, f, i.args[k], LvCond);
          }
          os << ") -> " << i.next;
        } else if constexpr (std::is_same_v<T, ReturnInstr>) {
          os << "return";
          if (i.value) {
            os << " ";
            print_expr_rec(os, f, *i.value, LvCond);
          }
        }
      },
      ins);
}

inline void print_function(std::ostream& os, const CfgFunction& f) {
  os << "function " << f.name << "(";
  for (std::size_t k = 0; k < f.params.size(); ++k) {
    if (k) os << ", ";
    os << var_name(f, f.params[k]);
  }
  os << ")";
  if (f.stack_size) os << " stack " << f.stack_size;
  os << " entry " << f.entry << " {\n";

  // Emit an id for every variable the body mentions so that a reparse
  // reproduces the numbering exactly.
  std::map<VarId, std::string> ids = f.var_names;
  for (VarId v : function_vars(f))
    if (!ids.count(v)) ids.emplace(v, var_name(f, v));
  if (!ids.empty()) {
    os << "  ids ";
    bool first = true;
    for (const auto& [id, name] : ids) {
      if (!first) os << ", ";
      os << name << " = " << id;
      first = false;
    }
    os << ";\n";
  }

  for (const auto& [node, ins] : f.body) {
    os << "  " << node << ": ";
    print_instruction(os, f, ins);
    if (f.report_nodes.count(node)) os << " @report";
    os << ";\n";
  }
  os << "}\n";
}

}  // namespace text_detail

// ---------------------------------------------------------------------------
// Public interface
// ---------------------------------------------------------------------------

// Parses a whole program from text.  Throws ParseError on malformed input;
// the result is not yet validated (call validate() for consistency checks).
inline CfgProgram parse_program(const std::string& src) {
  text_detail::Parser p(src);
  return p.run();
}

// Renders an expression with the variable names of its enclosing function.
inline std::string print_expr(const CfgFunction& f, const Expr& e) {
  std::ostringstream os;
  text_detail::print_expr_rec(os, f, e, text_detail::LvCond);
  return os.str();
}

// Canonical text of a whole program: parse_program(print_program(p)) == p.
inline std::string print_program(const CfgProgram& p) {
  std::ostringstream os;
  for (const auto& [name, size] : p.globals)
    os << "symbol " << name << " " << size << ";\n";
  if (!p.globals.empty()) os << "\n";
  bool first = true;
  for (const CfgFunction& f : p.functions) {
    if (!first) os << "\n";
    text_detail::print_function(os, f);
    first = false;
  }
  return os.str();
}

}  // namespace varan
