#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semq/catalog/table.hpp"
#include "semq/sql/ast.hpp"

namespace semq::sql {

enum class PlanKind {
  Scan,
  RelFilter,
  RelProject,
  HashJoin,
  GroupBy,
  OrderBy,
  Limit,
  SemFilter,
  SemProj,
  SemJoin,
  SemOrderBy,
  SemAgg,
};

std::string plan_kind_name(PlanKind kind);
bool is_semantic(PlanKind kind);

struct ProjectItem {
  ExprPtr expr;
  std::string alias;  // output column name
};

struct AggItem {
  enum class Kind { CountStar, Count, Sum, Avg, Min, Max, Collect };
  Kind kind = Kind::CountStar;
  ExprPtr arg;        // null for CountStar; Collect aggregates a column ref
  std::string alias;  // output column name
};

struct OrderKey {
  ExprPtr expr;
  bool ascending = true;
};

struct PlanNode;
using PlanPtr = std::shared_ptr<PlanNode>;

// One node per logical operator. Semantic kinds carry `expr`; SemJoin has two
// children, every other non-Scan kind has one.
struct PlanNode {
  PlanKind kind = PlanKind::Scan;
  std::vector<PlanPtr> children;

  std::optional<NlExpr> expr;   // SemFilter/SemProj/SemJoin/SemOrderBy/SemAgg
  ExprPtr rel_predicate;        // RelFilter; SemJoin pair pre-filter
  std::string output_alias;     // SemProj/SemAgg derived column
  std::string collect_column;   // SemAgg: hidden list column it consumes

  std::string table_name;       // Scan
  std::string table_alias;      // Scan

  std::vector<std::pair<ColumnRef, ColumnRef>> join_keys;  // HashJoin (left, right)
  bool semi = false;                                       // HashJoin/SemJoin

  std::vector<ColumnRef> group_keys;   // GroupBy
  std::vector<AggItem> aggregates;     // GroupBy
  std::vector<OrderKey> order_keys;    // OrderBy
  std::size_t limit = 0;               // Limit
  std::vector<ProjectItem> projections;  // RelProject

  catalog::Schema schema;  // bound output schema

  const PlanPtr& child() const { return children.at(0); }
};

// Deep copy (expressions are shared immutably; node structure is cloned).
PlanPtr clone_plan(const PlanPtr& plan);

// Counts nodes of the given kind.
std::size_t count_nodes(const PlanPtr& plan, PlanKind kind);
std::size_t count_semantic_nodes(const PlanPtr& plan);

// One-line operator description, e.g. "HashJoin (ur.app = p.app)".
std::string node_label(const PlanNode& node);

// Deterministic indented rendering, root first, children indented two spaces.
std::string explain(const PlanPtr& plan);

}  // namespace semq::sql
