#include "semq/sql/parser.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

#include "semq/sql/lexer.hpp"

namespace semq::sql {

namespace {

const char* const kClauseKeywords[] = {"SELECT", "FROM",  "WHERE", "GROUP", "HAVING",
                                       "ORDER",  "LIMIT", "INNER", "SEMI",  "JOIN",
                                       "ON",     "AND",   "OR",    "AS"};

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(tokenize(text)) {}

  std::shared_ptr<SelectStmt> parse_statement() {
    auto stmt = parse_select();
    if (peek().is_symbol(";")) advance();
    expect_end();
    return stmt;
  }

  ExprPtr parse_standalone_expr() {
    auto expr = parse_expr();
    expect_end();
    return expr;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  const Token& advance() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  bool accept_keyword(const std::string& upper) {
    if (peek().is_keyword(upper)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_keyword(const std::string& upper) {
    if (!accept_keyword(upper)) fail(fmt::format("expected {}", upper));
  }
  bool accept_symbol(const std::string& s) {
    if (peek().is_symbol(s)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_symbol(const std::string& s) {
    if (!accept_symbol(s)) fail(fmt::format("expected '{}'", s));
  }
  void expect_end() {
    if (peek().type != TokenType::End) fail("trailing input after statement");
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    std::string got = t.type == TokenType::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(fmt::format("{} (got {})", message, got), t.span);
  }

  bool is_clause_keyword(const Token& t) const {
    if (t.type != TokenType::Ident) return false;
    return std::any_of(std::begin(kClauseKeywords), std::end(kClauseKeywords),
                       [&](const char* k) { return t.is_keyword(k); });
  }

  std::string expect_ident(const char* what) {
    if (peek().type != TokenType::Ident || is_clause_keyword(peek())) {
      fail(fmt::format("expected {}", what));
    }
    return advance().text;
  }

  std::shared_ptr<SelectStmt> parse_select() {
    expect_keyword("SELECT");
    auto stmt = std::make_shared<SelectStmt>();
    stmt->items.push_back(parse_select_item());
    while (accept_symbol(",")) stmt->items.push_back(parse_select_item());

    expect_keyword("FROM");
    stmt->from = parse_table_ref();
    while (peek().is_keyword("INNER") || peek().is_keyword("SEMI") || peek().is_keyword("JOIN")) {
      JoinClause join;
      if (accept_keyword("SEMI")) {
        join.semi = true;
      } else {
        accept_keyword("INNER");
      }
      expect_keyword("JOIN");
      join.right = parse_table_ref();
      expect_keyword("ON");
      join.on = parse_expr();
      stmt->joins.push_back(std::move(join));
    }

    if (accept_keyword("WHERE")) stmt->where = parse_expr();
    if (accept_keyword("GROUP")) {
      expect_keyword("BY");
      stmt->group_by.push_back(parse_column_ref());
      while (accept_symbol(",")) stmt->group_by.push_back(parse_column_ref());
    }
    if (accept_keyword("HAVING")) stmt->having = parse_expr();
    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      stmt->order_by.push_back(parse_order_item());
      while (accept_symbol(",")) stmt->order_by.push_back(parse_order_item());
    }
    if (accept_keyword("LIMIT")) {
      if (peek().type != TokenType::Integer || peek().int_value < 0) fail("expected row count");
      stmt->limit = static_cast<std::size_t>(advance().int_value);
    }
    return stmt;
  }

  SelectItem parse_select_item() {
    SelectItem item;
    item.span = peek().span;
    if (peek().is_symbol("*")) {
      advance();
      item.kind = SelectItem::Kind::Star;
      return item;
    }
    if (peek().type == TokenType::SemLiteral) {
      const Token& t = advance();
      item.kind = SelectItem::Kind::Sem;
      item.sem = make_nl_expr(t.text, t.span);
    } else if (peek().is_keyword("SEM_AGG") && peek(1).is_symbol("(")) {
      advance();
      expect_symbol("(");
      if (peek().type != TokenType::SemLiteral) fail("sem_agg expects an s'...' expression");
      const Token& t = advance();
      item.kind = SelectItem::Kind::SemAgg;
      item.sem = make_nl_expr(t.text, t.span);
      expect_symbol(")");
    } else {
      item.kind = SelectItem::Kind::Expression;
      item.expr = parse_expr();
    }
    if (accept_keyword("AS")) item.alias = expect_ident("alias after AS");
    item.span.end = peek().span.begin;
    return item;
  }

  TableRef parse_table_ref() {
    TableRef ref;
    ref.span = peek().span;
    if (accept_symbol("(")) {
      ref.subquery = parse_select();
      expect_symbol(")");
    } else {
      ref.table = expect_ident("table name");
      ref.alias = ref.table;
    }
    if (accept_keyword("AS")) {
      ref.alias = expect_ident("alias after AS");
    } else if (peek().type == TokenType::Ident && !is_clause_keyword(peek())) {
      ref.alias = advance().text;
    }
    if (ref.subquery && ref.alias.empty()) {
      throw ParseError("subquery in FROM requires an alias", ref.span);
    }
    return ref;
  }

  OrderItem parse_order_item() {
    OrderItem item;
    if (peek().type == TokenType::SemLiteral) {
      const Token& t = advance();
      item.sem = make_nl_expr(t.text, t.span);
    } else {
      item.expr = parse_expr();
    }
    if (accept_keyword("DESC")) {
      item.ascending = false;
    } else {
      accept_keyword("ASC");
    }
    return item;
  }

  ColumnRef parse_column_ref() {
    ColumnRef ref;
    ref.name = expect_ident("column name");
    if (accept_symbol(".")) {
      ref.qualifier = std::move(ref.name);
      ref.name = expect_ident("column name after '.'");
    }
    return ref;
  }

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr left = parse_and();
    while (peek().is_keyword("OR")) {
      Span s = advance().span;
      left = Expr::make_binary(BinaryOp::Or, left, parse_and(), s);
    }
    return left;
  }

  ExprPtr parse_and() {
    ExprPtr left = parse_not();
    while (peek().is_keyword("AND")) {
      Span s = advance().span;
      left = Expr::make_binary(BinaryOp::And, left, parse_not(), s);
    }
    return left;
  }

  ExprPtr parse_not() {
    if (peek().is_keyword("NOT") && !peek(1).is_keyword("LIKE") && !peek(1).is_keyword("IN")) {
      Span s = advance().span;
      return Expr::make_not(parse_not(), s);
    }
    return parse_predicate();
  }

  ExprPtr parse_predicate() {
    ExprPtr left = parse_operand();
    const Token& t = peek();
    if (t.type == TokenType::Symbol) {
      static const std::pair<const char*, BinaryOp> ops[] = {
          {"=", BinaryOp::Eq}, {"!=", BinaryOp::Ne}, {"<", BinaryOp::Lt},
          {"<=", BinaryOp::Le}, {">", BinaryOp::Gt}, {">=", BinaryOp::Ge}};
      for (const auto& [sym, op] : ops) {
        if (t.is_symbol(sym)) {
          Span s = advance().span;
          return Expr::make_binary(op, left, parse_operand(), s);
        }
      }
    }
    bool negated = false;
    if (peek().is_keyword("NOT") && (peek(1).is_keyword("LIKE") || peek(1).is_keyword("IN"))) {
      negated = true;
      advance();
    }
    if (accept_keyword("LIKE")) {
      ExprPtr like = Expr::make_binary(BinaryOp::Like, left, parse_operand());
      return negated ? Expr::make_not(like) : like;
    }
    if (accept_keyword("IN")) {
      expect_symbol("(");
      std::vector<catalog::Value> list;
      list.push_back(parse_literal_value());
      while (accept_symbol(",")) list.push_back(parse_literal_value());
      expect_symbol(")");
      return Expr::make_in(left, std::move(list), negated);
    }
    if (negated) fail("expected LIKE or IN after NOT");
    if (accept_keyword("IS")) {
      bool is_not = accept_keyword("NOT");
      expect_keyword("NULL");
      return Expr::make_is_null(left, is_not);
    }
    return left;
  }

  catalog::Value parse_literal_value() {
    const Token& t = peek();
    switch (t.type) {
      case TokenType::Integer:
        advance();
        return t.int_value;
      case TokenType::Float:
        advance();
        return t.float_value;
      case TokenType::String:
        advance();
        return t.text;
      case TokenType::Ident:
        if (t.is_keyword("NULL")) {
          advance();
          return std::monostate{};
        }
        if (t.is_keyword("TRUE")) {
          advance();
          return true;
        }
        if (t.is_keyword("FALSE")) {
          advance();
          return false;
        }
        [[fallthrough]];
      default:
        fail("expected literal");
    }
  }

  ExprPtr parse_operand() {
    const Token& t = peek();
    Span s = t.span;
    switch (t.type) {
      case TokenType::Integer:
      case TokenType::Float:
      case TokenType::String:
        return Expr::make_literal(parse_literal_value(), s);
      case TokenType::SemLiteral: {
        advance();
        return Expr::make_sem(make_nl_expr(t.text, s), s);
      }
      case TokenType::Symbol:
        if (t.is_symbol("(")) {
          advance();
          ExprPtr inner = parse_expr();
          expect_symbol(")");
          return inner;
        }
        fail("expected expression");
      case TokenType::Ident:
        break;
      default:
        fail("expected expression");
    }

    if (t.is_keyword("NULL") || t.is_keyword("TRUE") || t.is_keyword("FALSE")) {
      return Expr::make_literal(parse_literal_value(), s);
    }
    if (peek(1).is_symbol("(")) {
      if (t.is_keyword("COUNT")) {
        advance();
        expect_symbol("(");
        if (accept_symbol("*")) {
          expect_symbol(")");
          return Expr::make_agg(AggFunc::CountStar, nullptr, s);
        }
        ExprPtr arg = parse_expr();
        expect_symbol(")");
        return Expr::make_agg(AggFunc::Count, arg, s);
      }
      static const std::pair<const char*, AggFunc> aggs[] = {{"SUM", AggFunc::Sum},
                                                             {"AVG", AggFunc::Avg},
                                                             {"MIN", AggFunc::Min},
                                                             {"MAX", AggFunc::Max}};
      for (const auto& [name, agg] : aggs) {
        if (t.is_keyword(name)) {
          advance();
          expect_symbol("(");
          ExprPtr arg = parse_expr();
          expect_symbol(")");
          return Expr::make_agg(agg, arg, s);
        }
      }
      static const std::pair<const char*, ScalarFunc> funcs[] = {
          {"LENGTH", ScalarFunc::Length}, {"LOWER", ScalarFunc::Lower},
          {"UPPER", ScalarFunc::Upper}};
      for (const auto& [name, func] : funcs) {
        if (t.is_keyword(name)) {
          advance();
          expect_symbol("(");
          ExprPtr arg = parse_expr();
          expect_symbol(")");
          return Expr::make_func(func, arg, s);
        }
      }
      fail("unknown function");
    }
    if (is_clause_keyword(t)) fail("expected expression");
    return Expr::make_column(parse_column_ref(), s);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

std::shared_ptr<SelectStmt> parse(const std::string& query) {
  return Parser(query).parse_statement();
}

ExprPtr parse_predicate_text(const std::string& text) {
  return Parser(text).parse_standalone_expr();
}

}  // namespace semq::sql
