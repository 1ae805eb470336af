#include "semq/sql/ast.hpp"

#include <fmt/format.h>

namespace semq::sql {

namespace {

std::shared_ptr<Expr> base(Expr::Kind kind, Span span) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->span = span;
  return e;
}

}  // namespace

ExprPtr Expr::make_literal(catalog::Value v, Span s) {
  auto e = base(Kind::Literal, s);
  e->literal = std::move(v);
  return e;
}

ExprPtr Expr::make_column(ColumnRef ref, Span s) {
  auto e = base(Kind::Column, s);
  e->column = std::move(ref);
  return e;
}

ExprPtr Expr::make_binary(BinaryOp op, ExprPtr l, ExprPtr r, Span s) {
  auto e = base(Kind::Binary, s);
  e->op = op;
  e->left = std::move(l);
  e->right = std::move(r);
  return e;
}

ExprPtr Expr::make_not(ExprPtr inner, Span s) {
  auto e = base(Kind::Not, s);
  e->left = std::move(inner);
  return e;
}

ExprPtr Expr::make_is_null(ExprPtr inner, bool negated, Span s) {
  auto e = base(Kind::IsNull, s);
  e->left = std::move(inner);
  e->negated = negated;
  return e;
}

ExprPtr Expr::make_in(ExprPtr inner, std::vector<catalog::Value> list, bool negated, Span s) {
  auto e = base(Kind::InList, s);
  e->left = std::move(inner);
  e->in_list = std::move(list);
  e->negated = negated;
  return e;
}

ExprPtr Expr::make_func(ScalarFunc f, ExprPtr arg, Span s) {
  auto e = base(Kind::Func, s);
  e->func = f;
  e->left = std::move(arg);
  return e;
}

ExprPtr Expr::make_agg(AggFunc f, ExprPtr arg, Span s) {
  auto e = base(Kind::Agg, s);
  e->agg = f;
  e->left = std::move(arg);
  return e;
}

ExprPtr Expr::make_sem(NlExpr sem, Span s) {
  auto e = base(Kind::Sem, s);
  e->sem = std::move(sem);
  return e;
}

namespace {

std::string op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Eq:
      return "=";
    case BinaryOp::Ne:
      return "!=";
    case BinaryOp::Lt:
      return "<";
    case BinaryOp::Le:
      return "<=";
    case BinaryOp::Gt:
      return ">";
    case BinaryOp::Ge:
      return ">=";
    case BinaryOp::Like:
      return "LIKE";
    case BinaryOp::And:
      return "AND";
    case BinaryOp::Or:
      return "OR";
  }
  return "?";
}

std::string func_text(ScalarFunc f) {
  switch (f) {
    case ScalarFunc::Length:
      return "length";
    case ScalarFunc::Lower:
      return "lower";
    case ScalarFunc::Upper:
      return "upper";
  }
  return "?";
}

std::string agg_text(AggFunc f) {
  switch (f) {
    case AggFunc::CountStar:
    case AggFunc::Count:
      return "count";
    case AggFunc::Sum:
      return "sum";
    case AggFunc::Avg:
      return "avg";
    case AggFunc::Min:
      return "min";
    case AggFunc::Max:
      return "max";
  }
  return "?";
}

std::string render_literal(const catalog::Value& v) {
  if (catalog::is_null(v)) return "NULL";
  if (std::holds_alternative<std::string>(v)) {
    std::string out = "'";
    for (char c : std::get<std::string>(v)) {
      if (c == '\'') out += '\'';
      out += c;
    }
    return out + "'";
  }
  return catalog::value_to_string(v);
}

}  // namespace

std::string render_expr(const ExprPtr& expr) {
  if (!expr) return "";
  switch (expr->kind) {
    case Expr::Kind::Literal:
      return render_literal(expr->literal);
    case Expr::Kind::Column:
      return expr->column.display();
    case Expr::Kind::Binary:
      return fmt::format("({} {} {})", render_expr(expr->left), op_text(expr->op),
                         render_expr(expr->right));
    case Expr::Kind::Not:
      return fmt::format("(NOT {})", render_expr(expr->left));
    case Expr::Kind::IsNull:
      return fmt::format("({} IS {}NULL)", render_expr(expr->left),
                         expr->negated ? "NOT " : "");
    case Expr::Kind::InList: {
      std::string list;
      for (std::size_t i = 0; i < expr->in_list.size(); ++i) {
        if (i > 0) list += ", ";
        list += render_literal(expr->in_list[i]);
      }
      return fmt::format("({} {}IN ({}))", render_expr(expr->left),
                         expr->negated ? "NOT " : "", list);
    }
    case Expr::Kind::Func:
      return fmt::format("{}({})", func_text(expr->func), render_expr(expr->left));
    case Expr::Kind::Agg:
      if (expr->agg == AggFunc::CountStar) return "count(*)";
      return fmt::format("{}({})", agg_text(expr->agg), render_expr(expr->left));
    case Expr::Kind::Sem:
      return expr->sem.display();
  }
  return "";
}

std::vector<ExprPtr> split_conjuncts(const ExprPtr& expr) {
  std::vector<ExprPtr> out;
  if (!expr) return out;
  if (expr->kind == Expr::Kind::Binary && expr->op == BinaryOp::And) {
    auto left = split_conjuncts(expr->left);
    auto right = split_conjuncts(expr->right);
    out.insert(out.end(), left.begin(), left.end());
    out.insert(out.end(), right.begin(), right.end());
    return out;
  }
  out.push_back(expr);
  return out;
}

ExprPtr conjoin(const std::vector<ExprPtr>& conjuncts) {
  ExprPtr out;
  for (const auto& c : conjuncts) {
    out = out ? Expr::make_binary(BinaryOp::And, out, c) : c;
  }
  return out;
}

bool contains_sem(const ExprPtr& expr) {
  if (!expr) return false;
  if (expr->kind == Expr::Kind::Sem) return true;
  return contains_sem(expr->left) || contains_sem(expr->right);
}

bool contains_agg(const ExprPtr& expr) {
  if (!expr) return false;
  if (expr->kind == Expr::Kind::Agg) return true;
  return contains_agg(expr->left) || contains_agg(expr->right);
}

void collect_columns(const ExprPtr& expr, std::vector<ColumnRef>& out) {
  if (!expr) return;
  if (expr->kind == Expr::Kind::Column) out.push_back(expr->column);
  collect_columns(expr->left, out);
  collect_columns(expr->right, out);
}

}  // namespace semq::sql
