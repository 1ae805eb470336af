#pragma once

#include "semq/catalog/catalog.hpp"
#include "semq/sql/ast.hpp"
#include "semq/sql/plan.hpp"

namespace semq::sql {

// Binds an AST against the catalog and produces a logical plan with output
// schemas on every node. Throws BindError naming the offending identifier.
PlanPtr bind(const SelectStmt& stmt, const catalog::Catalog& catalog);

// parse + bind.
PlanPtr plan_query(const std::string& query, const catalog::Catalog& catalog);

}  // namespace semq::sql
