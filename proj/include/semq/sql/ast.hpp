#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semq/catalog/value.hpp"
#include "semq/sql/nl_expr.hpp"

namespace semq::sql {

enum class BinaryOp { Eq, Ne, Lt, Le, Gt, Ge, Like, And, Or };
enum class ScalarFunc { Length, Lower, Upper };
enum class AggFunc { CountStar, Count, Sum, Avg, Min, Max };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Scalar/boolean expression tree. Sem atoms appear only in the AST; the
// planner hoists them into semantic plan nodes before execution.
struct Expr {
  enum class Kind { Literal, Column, Binary, Not, IsNull, InList, Func, Agg, Sem };

  Kind kind = Kind::Literal;
  Span span;

  catalog::Value literal;                // Literal
  ColumnRef column;                      // Column
  BinaryOp op = BinaryOp::Eq;            // Binary
  ExprPtr left, right;                   // Binary; Not/IsNull/Func/Agg use left
  bool negated = false;                  // IsNull (IS NOT NULL), InList (NOT IN)
  std::vector<catalog::Value> in_list;   // InList
  ScalarFunc func = ScalarFunc::Length;  // Func
  AggFunc agg = AggFunc::CountStar;      // Agg
  NlExpr sem;                            // Sem

  static ExprPtr make_literal(catalog::Value v, Span s = {});
  static ExprPtr make_column(ColumnRef ref, Span s = {});
  static ExprPtr make_binary(BinaryOp op, ExprPtr l, ExprPtr r, Span s = {});
  static ExprPtr make_not(ExprPtr e, Span s = {});
  static ExprPtr make_is_null(ExprPtr e, bool negated, Span s = {});
  static ExprPtr make_in(ExprPtr e, std::vector<catalog::Value> list, bool negated, Span s = {});
  static ExprPtr make_func(ScalarFunc f, ExprPtr arg, Span s = {});
  static ExprPtr make_agg(AggFunc f, ExprPtr arg, Span s = {});
  static ExprPtr make_sem(NlExpr e, Span s = {});
};

// Deterministic SQL-ish rendering used by explain and alias generation.
std::string render_expr(const ExprPtr& expr);

// Splits nested ANDs into a conjunct list (left-to-right source order).
std::vector<ExprPtr> split_conjuncts(const ExprPtr& expr);
ExprPtr conjoin(const std::vector<ExprPtr>& conjuncts);

bool contains_sem(const ExprPtr& expr);
bool contains_agg(const ExprPtr& expr);
// Column refs in evaluation order (skips sem placeholder internals).
void collect_columns(const ExprPtr& expr, std::vector<ColumnRef>& out);

struct SelectStmt;

struct TableRef {
  std::string table;  // empty for subqueries
  std::string alias;  // binding alias (defaults to table name)
  std::shared_ptr<SelectStmt> subquery;
  Span span;
};

struct JoinClause {
  bool semi = false;  // INNER otherwise
  TableRef right;
  ExprPtr on;
};

struct SelectItem {
  enum class Kind { Star, Expression, Sem, SemAgg };
  Kind kind = Kind::Star;
  ExprPtr expr;     // Expression (may contain Agg)
  NlExpr sem;       // Sem / SemAgg
  std::string alias;
  Span span;
};

struct OrderItem {
  ExprPtr expr;                 // relational key (null when sem)
  std::optional<NlExpr> sem;    // semantic ordering criterion
  bool ascending = true;
};

struct SelectStmt {
  std::vector<SelectItem> items;
  TableRef from;
  std::vector<JoinClause> joins;
  ExprPtr where;
  std::vector<ColumnRef> group_by;
  ExprPtr having;
  std::vector<OrderItem> order_by;
  std::optional<std::size_t> limit;
};

}  // namespace semq::sql
