#include "semq/sql/planner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "semq/sql/parser.hpp"

namespace semq::sql {

namespace {

using catalog::ColumnInfo;
using catalog::ColumnType;
using catalog::Schema;

// Hidden columns (collect lists, hoisted aggregates) carry this prefix and
// are dropped by SELECT *.
constexpr const char* kHiddenPrefix = "__";

std::size_t resolve_or_throw(const Schema& schema, const ColumnRef& ref) {
  auto idx = catalog::resolve_column(schema, ref.qualifier, ref.name);
  if (!idx) throw BindError(fmt::format("unknown column '{}'", ref.display()));
  return *idx;
}

void validate_placeholders(const NlExpr& expr, const Schema& schema) {
  for (const auto& ref : expr.placeholders) resolve_or_throw(schema, ref);
}

ColumnType infer_expr_type(const ExprPtr& expr, const Schema& schema) {
  switch (expr->kind) {
    case Expr::Kind::Literal:
      switch (expr->literal.index()) {
        case 1:
          return ColumnType::Int64;
        case 2:
          return ColumnType::Float64;
        case 4:
          return ColumnType::Bool;
        default:
          return ColumnType::Text;
      }
    case Expr::Kind::Column:
      return schema[resolve_or_throw(schema, expr->column)].type;
    case Expr::Kind::Binary:
    case Expr::Kind::Not:
    case Expr::Kind::IsNull:
    case Expr::Kind::InList:
      return ColumnType::Bool;
    case Expr::Kind::Func:
      return expr->func == ScalarFunc::Length ? ColumnType::Int64 : ColumnType::Text;
    case Expr::Kind::Agg:
      switch (expr->agg) {
        case AggFunc::CountStar:
        case AggFunc::Count:
          return ColumnType::Int64;
        case AggFunc::Avg:
          return ColumnType::Float64;
        case AggFunc::Sum:
          return infer_expr_type(expr->left, schema) == ColumnType::Float64 ? ColumnType::Float64
                                                                            : ColumnType::Int64;
        case AggFunc::Min:
        case AggFunc::Max:
          return infer_expr_type(expr->left, schema);
      }
      return ColumnType::Int64;
    case Expr::Kind::Sem:
      return ColumnType::Text;
  }
  return ColumnType::Text;
}

// Resolves every column reference (and sem placeholder) in the expression.
void validate_expr(const ExprPtr& expr, const Schema& schema, bool allow_agg) {
  if (!expr) return;
  switch (expr->kind) {
    case Expr::Kind::Column:
      resolve_or_throw(schema, expr->column);
      return;
    case Expr::Kind::Sem:
      validate_placeholders(expr->sem, schema);
      return;
    case Expr::Kind::Agg:
      if (!allow_agg) throw BindError("aggregate not allowed in this clause");
      validate_expr(expr->left, schema, false);
      return;
    default:
      validate_expr(expr->left, schema, allow_agg);
      validate_expr(expr->right, schema, allow_agg);
      return;
  }
}

PlanPtr make_node(PlanKind kind, std::vector<PlanPtr> children, Schema schema) {
  auto node = std::make_shared<PlanNode>();
  node->kind = kind;
  node->children = std::move(children);
  node->schema = std::move(schema);
  return node;
}

struct ConjunctSplit {
  std::vector<ExprPtr> relational;
  std::vector<NlExpr> semantic;
};

// Top-level AND conjuncts only; an s'...' below OR/NOT is unsupported.
ConjunctSplit split_where(const ExprPtr& expr, const char* clause) {
  ConjunctSplit out;
  for (const auto& conjunct : split_conjuncts(expr)) {
    if (conjunct->kind == Expr::Kind::Sem) {
      out.semantic.push_back(conjunct->sem);
    } else if (contains_sem(conjunct)) {
      throw BindError(
          fmt::format("s'...' must be a top-level AND conjunct in {}", clause));
    } else {
      out.relational.push_back(conjunct);
    }
  }
  return out;
}

class Planner {
 public:
  explicit Planner(const catalog::Catalog& cat) : catalog_(cat) {}

  PlanPtr bind_select(const SelectStmt& stmt) {
    PlanPtr plan = bind_from(stmt);

    // WHERE: relational conjuncts first, then SemFilters in source order.
    if (stmt.where) {
      if (contains_agg(stmt.where)) throw BindError("aggregate not allowed in WHERE");
      auto split = split_where(stmt.where, "WHERE");
      if (!split.relational.empty()) {
        plan = add_rel_filter(plan, conjoin(split.relational));
      }
      for (const auto& sem : split.semantic) plan = add_sem_filter(plan, sem);
    }

    bool grouped = !stmt.group_by.empty() || select_has_aggregate(stmt) ||
                   contains_agg(stmt.having);
    std::vector<AggItem> aggregates;
    ExprPtr having_rel_pre;   // below SemAggs (aggregate/key references only)
    std::vector<NlExpr> having_sem;
    std::vector<ExprPtr> having_rel_post;  // may reference sem_agg outputs

    struct PendingSemAgg {
      NlExpr expr;
      std::string alias;
      std::string collect;
    };
    std::vector<PendingSemAgg> sem_aggs;

    if (grouped) {
      // Aggregate list is built from SELECT items, HAVING and ORDER BY.
      Schema input = plan->schema;
      std::vector<ColumnRef> keys;
      for (const auto& key : stmt.group_by) {
        resolve_or_throw(input, key);
        keys.push_back(key);
      }
      std::size_t hidden = 0;
      for (const auto& item : stmt.items) {
        if (item.kind == SelectItem::Kind::Star) {
          throw BindError("SELECT * cannot be combined with GROUP BY / aggregates");
        }
        if (item.kind == SelectItem::Kind::Expression) {
          bind_grouped_item(item, input, keys, aggregates);
        } else if (item.kind == SelectItem::Kind::SemAgg) {
          if (item.alias.empty()) throw BindError("sem_agg(...) requires an AS alias");
          auto distinct = item.sem.distinct_placeholders();
          if (distinct.size() != 1) {
            throw BindError("sem_agg template must reference exactly one column");
          }
          resolve_or_throw(input, distinct[0]);
          std::string collect = fmt::format("{}collect_{}", kHiddenPrefix, hidden++);
          aggregates.push_back(AggItem{AggItem::Kind::Collect,
                                       Expr::make_column(distinct[0]), collect});
          sem_aggs.push_back({item.sem, item.alias, collect});
        }
      }
      if (stmt.having) {
        auto split = split_where(stmt.having, "HAVING");
        having_sem = std::move(split.semantic);
        std::vector<ExprPtr> pre;
        for (const auto& conjunct : split.relational) {
          // Conjuncts whose plain columns all exist in the GroupBy output can
          // run before SemAggs and spare semantic calls on dropped groups.
          ExprPtr rewritten = hoist_aggregates(conjunct, input, aggregates);
          if (references_only(rewritten, keys, aggregates)) {
            pre.push_back(rewritten);
          } else {
            having_rel_post.push_back(rewritten);
          }
        }
        having_rel_pre = conjoin(pre);
      }
      for (const auto& order : stmt.order_by) {
        if (order.expr && contains_agg(order.expr)) {
          hoist_aggregates(order.expr, input, aggregates);
        }
      }

      plan = build_group_by(plan, keys, aggregates);
      // Key/aggregate-only HAVING conjuncts run before SemAggs so dropped
      // groups cost no semantic calls.
      if (having_rel_pre) plan = add_rel_filter(plan, having_rel_pre);
      for (auto& pending : sem_aggs) {
        plan = build_sem_agg(plan, pending.expr, pending.alias, pending.collect);
      }
      for (const auto& conjunct : having_rel_post) plan = add_rel_filter(plan, conjunct);
      for (const auto& sem : having_sem) plan = add_sem_filter(plan, sem);
    } else if (stmt.having) {
      throw BindError("HAVING requires GROUP BY or aggregates");
    }

    // SELECT: stack SemProj nodes in item order, then project.
    std::vector<ProjectItem> projections;
    std::set<std::string> seen_names;
    auto claim_name = [&](const std::string& name, Span) {
      if (!seen_names.insert(name).second) {
        throw BindError(fmt::format("duplicate output column '{}'", name));
      }
    };
    for (const auto& item : stmt.items) {
      switch (item.kind) {
        case SelectItem::Kind::Star: {
          for (const auto& col : plan->schema) {
            if (col.name.rfind(kHiddenPrefix, 0) == 0) continue;
            claim_name(col.name, item.span);
            projections.push_back(
                ProjectItem{Expr::make_column(ColumnRef{col.qualifier, col.name}), col.name});
          }
          break;
        }
        case SelectItem::Kind::Expression: {
          ExprPtr expr = item.expr;
          if (grouped) {
            std::vector<AggItem> tmp(aggregates);
            expr = hoist_aggregates(expr, Schema{}, tmp);  // rewrite against existing list
          }
          validate_expr(expr, plan->schema, false);
          std::string alias = item.alias;
          if (alias.empty()) {
            alias = expr->kind == Expr::Kind::Column ? expr->column.name : render_expr(item.expr);
          }
          claim_name(alias, item.span);
          projections.push_back(ProjectItem{expr, alias});
          break;
        }
        case SelectItem::Kind::Sem: {
          if (item.alias.empty()) {
            throw BindError("semantic projection s'...' in SELECT requires an AS alias");
          }
          plan = build_sem_proj(plan, item.sem, item.alias);
          claim_name(item.alias, item.span);
          projections.push_back(ProjectItem{Expr::make_column(ColumnRef{"", item.alias}),
                                            item.alias});
          break;
        }
        case SelectItem::Kind::SemAgg: {
          claim_name(item.alias, item.span);
          projections.push_back(ProjectItem{Expr::make_column(ColumnRef{"", item.alias}),
                                            item.alias});
          break;
        }
      }
    }

    // ORDER BY: semantic ordering happens below the projection (templates see
    // the full pre-projection schema); relational keys prefer the projected
    // schema (SELECT aliases) and fall back to the pre-projection one.
    std::optional<NlExpr> sem_order;
    std::vector<OrderKey> rel_orders;
    for (const auto& order : stmt.order_by) {
      if (order.sem) {
        if (stmt.order_by.size() != 1) {
          throw BindError("semantic ORDER BY cannot be combined with other keys");
        }
        sem_order = order.sem;
      } else {
        ExprPtr expr = order.expr;
        if (grouped && contains_agg(expr)) {
          std::vector<AggItem> tmp(aggregates);
          expr = hoist_aggregates(expr, Schema{}, tmp);
        }
        rel_orders.push_back(OrderKey{expr, order.ascending});
      }
    }

    if (sem_order) {
      validate_placeholders(*sem_order, plan->schema);
      auto node = make_node(PlanKind::SemOrderBy, {plan}, plan->schema);
      node->expr = sem_order;
      plan = node;
    }

    Schema projected;
    for (const auto& item : projections) {
      projected.push_back(ColumnInfo{"", item.alias, infer_expr_type(item.expr, plan->schema)});
    }

    bool order_above_project = false;
    if (!rel_orders.empty()) {
      order_above_project = std::all_of(rel_orders.begin(), rel_orders.end(), [&](const auto& k) {
        try {
          validate_expr(k.expr, projected, false);
          return true;
        } catch (const BindError&) {
          return false;
        }
      });
      if (!order_above_project) {
        for (const auto& k : rel_orders) validate_expr(k.expr, plan->schema, false);
        auto node = make_node(PlanKind::OrderBy, {plan}, plan->schema);
        node->order_keys = rel_orders;
        plan = node;
      }
    }

    auto project = make_node(PlanKind::RelProject, {plan}, projected);
    project->projections = std::move(projections);
    plan = project;

    if (order_above_project) {
      auto node = make_node(PlanKind::OrderBy, {plan}, plan->schema);
      node->order_keys = rel_orders;
      plan = node;
    }
    if (stmt.limit) {
      auto node = make_node(PlanKind::Limit, {plan}, plan->schema);
      node->limit = *stmt.limit;
      plan = node;
    }
    return plan;
  }

 private:
  static bool select_has_aggregate(const SelectStmt& stmt) {
    return std::any_of(stmt.items.begin(), stmt.items.end(), [](const SelectItem& item) {
      return item.kind == SelectItem::Kind::SemAgg ||
             (item.kind == SelectItem::Kind::Expression && contains_agg(item.expr));
    });
  }

  PlanPtr bind_from(const SelectStmt& stmt) {
    PlanPtr plan = bind_table_ref(stmt.from);
    for (const auto& join : stmt.joins) {
      PlanPtr right = bind_table_ref(join.right);
      plan = bind_join(plan, right, join);
    }
    return plan;
  }

  PlanPtr bind_table_ref(const TableRef& ref) {
    if (ref.subquery) {
      PlanPtr sub = bind_select(*ref.subquery);
      Schema schema = sub->schema;
      for (auto& col : schema) col.qualifier = ref.alias;
      auto node = sub;
      node->schema = schema;  // re-qualify subquery outputs under the alias
      return node;
    }
    const catalog::Table& table = catalog_.table(ref.table);
    Schema schema = table.schema();
    for (auto& col : schema) col.qualifier = ref.alias;
    auto node = make_node(PlanKind::Scan, {}, std::move(schema));
    node->table_name = ref.table;
    node->table_alias = ref.alias;
    return node;
  }

  PlanPtr bind_join(PlanPtr left, PlanPtr right, const JoinClause& join) {
    Schema combined = left->schema;
    combined.insert(combined.end(), right->schema.begin(), right->schema.end());

    std::vector<NlExpr> sem_atoms;
    std::vector<ExprPtr> rel_conjuncts;
    std::vector<std::pair<ColumnRef, ColumnRef>> keys;
    for (const auto& conjunct : split_conjuncts(join.on)) {
      if (conjunct->kind == Expr::Kind::Sem) {
        validate_placeholders(conjunct->sem, combined);
        sem_atoms.push_back(conjunct->sem);
        continue;
      }
      if (contains_sem(conjunct)) {
        throw BindError("s'...' must be a top-level AND conjunct in JOIN ON");
      }
      validate_expr(conjunct, combined, false);
      rel_conjuncts.push_back(conjunct);
      if (conjunct->kind == Expr::Kind::Binary && conjunct->op == BinaryOp::Eq &&
          conjunct->left->kind == Expr::Kind::Column &&
          conjunct->right->kind == Expr::Kind::Column) {
        const auto& a = conjunct->left->column;
        const auto& b = conjunct->right->column;
        bool a_left = catalog::resolve_column(left->schema, a.qualifier, a.name).has_value();
        bool b_left = catalog::resolve_column(right->schema, b.qualifier, b.name).has_value();
        if (a_left && b_left) {
          keys.emplace_back(a, b);
        } else if (!a_left && catalog::resolve_column(right->schema, a.qualifier, a.name) &&
                   catalog::resolve_column(left->schema, b.qualifier, b.name)) {
          keys.emplace_back(b, a);
        }
      }
    }

    if (!sem_atoms.empty()) {
      Schema schema = join.semi ? left->schema : combined;
      if (join.semi && sem_atoms.size() > 1) {
        throw BindError("SEMI JOIN supports a single s'...' condition");
      }
      auto node = make_node(PlanKind::SemJoin, {left, right}, std::move(schema));
      node->expr = sem_atoms.front();
      node->semi = join.semi;
      node->rel_predicate = conjoin(rel_conjuncts);
      PlanPtr plan = node;
      for (std::size_t i = 1; i < sem_atoms.size(); ++i) plan = add_sem_filter(plan, sem_atoms[i]);
      return plan;
    }

    if (keys.empty()) {
      throw BindError("JOIN ON requires at least one equality between the two sides");
    }
    // Non-key conjuncts stay as a filter above the join; the optimizer will
    // push one-sided conjuncts below it.
    std::vector<ExprPtr> residual;
    for (const auto& conjunct : rel_conjuncts) {
      bool used_as_key =
          conjunct->kind == Expr::Kind::Binary && conjunct->op == BinaryOp::Eq &&
          conjunct->left->kind == Expr::Kind::Column &&
          conjunct->right->kind == Expr::Kind::Column &&
          std::any_of(keys.begin(), keys.end(), [&](const auto& key) {
            return (key.first == conjunct->left->column && key.second == conjunct->right->column) ||
                   (key.first == conjunct->right->column && key.second == conjunct->left->column);
          });
      if (!used_as_key) residual.push_back(conjunct);
    }
    Schema schema = join.semi ? left->schema : combined;
    auto node = make_node(PlanKind::HashJoin, {left, right}, std::move(schema));
    node->join_keys = std::move(keys);
    node->semi = join.semi;
    PlanPtr plan = node;
    if (!residual.empty()) {
      if (join.semi) {
        for (const auto& conjunct : residual) validate_expr(conjunct, plan->schema, false);
      }
      plan = add_rel_filter(plan, conjoin(residual));
    }
    return plan;
  }

  PlanPtr add_rel_filter(PlanPtr child, ExprPtr predicate) {
    validate_expr(predicate, child->schema, false);
    auto node = make_node(PlanKind::RelFilter, {child}, child->schema);
    node->rel_predicate = std::move(predicate);
    return node;
  }

  PlanPtr add_sem_filter(PlanPtr child, const NlExpr& sem) {
    validate_placeholders(sem, child->schema);
    auto node = make_node(PlanKind::SemFilter, {child}, child->schema);
    node->expr = sem;
    return node;
  }

  PlanPtr build_sem_proj(PlanPtr child, const NlExpr& sem, const std::string& alias) {
    validate_placeholders(sem, child->schema);
    Schema schema = child->schema;
    schema.push_back(ColumnInfo{"", alias, ColumnType::Text});
    auto node = make_node(PlanKind::SemProj, {child}, std::move(schema));
    node->expr = sem;
    node->output_alias = alias;
    return node;
  }

  PlanPtr build_sem_agg(PlanPtr child, const NlExpr& sem, const std::string& alias,
                        const std::string& collect) {
    Schema schema;
    for (const auto& col : child->schema) {
      if (col.name == collect) {
        schema.push_back(ColumnInfo{"", alias, ColumnType::Text});
      } else {
        schema.push_back(col);
      }
    }
    auto node = make_node(PlanKind::SemAgg, {child}, std::move(schema));
    node->expr = sem;
    node->output_alias = alias;
    node->collect_column = collect;
    return node;
  }

  PlanPtr build_group_by(PlanPtr child, const std::vector<ColumnRef>& keys,
                         const std::vector<AggItem>& aggregates) {
    Schema schema;
    for (const auto& key : keys) {
      const auto& col = child->schema[resolve_or_throw(child->schema, key)];
      schema.push_back(col);
    }
    for (const auto& agg : aggregates) {
      ColumnType type = ColumnType::Int64;
      switch (agg.kind) {
        case AggItem::Kind::CountStar:
        case AggItem::Kind::Count:
          type = ColumnType::Int64;
          break;
        case AggItem::Kind::Avg:
          type = ColumnType::Float64;
          break;
        case AggItem::Kind::Sum:
          type = infer_expr_type(agg.arg, child->schema) == ColumnType::Float64
                     ? ColumnType::Float64
                     : ColumnType::Int64;
          break;
        case AggItem::Kind::Min:
        case AggItem::Kind::Max:
          type = infer_expr_type(agg.arg, child->schema);
          break;
        case AggItem::Kind::Collect:
          type = ColumnType::TextList;
          break;
      }
      if (agg.arg) validate_expr(agg.arg, child->schema, false);
      schema.push_back(ColumnInfo{"", agg.alias, type});
    }
    auto node = make_node(PlanKind::GroupBy, {child}, std::move(schema));
    node->group_keys = keys;
    node->aggregates = aggregates;
    return node;
  }

  // SELECT item that is (or contains) an aggregate call.
  void bind_grouped_item(const SelectItem& item, const Schema& input,
                         const std::vector<ColumnRef>& keys, std::vector<AggItem>& aggregates) {
    if (item.expr->kind == Expr::Kind::Agg) {
      std::string alias = item.alias.empty() ? render_expr(item.expr) : item.alias;
      find_or_add_aggregate(item.expr, input, aggregates, alias);
      return;
    }
    if (contains_agg(item.expr)) {
      throw BindError("aggregates must be bare calls in SELECT (no surrounding expression)");
    }
    if (item.expr->kind != Expr::Kind::Column) {
      throw BindError("non-aggregate SELECT items under GROUP BY must be group-key columns");
    }
    const auto& ref = item.expr->column;
    bool is_key = std::any_of(keys.begin(), keys.end(), [&](const ColumnRef& key) {
      return key.name == ref.name && (ref.qualifier.empty() || key.qualifier == ref.qualifier ||
                                      key.qualifier.empty());
    });
    if (!is_key) {
      throw BindError(fmt::format("column '{}' must appear in GROUP BY", ref.display()));
    }
  }

  static std::string aggregate_signature(const ExprPtr& agg) { return render_expr(agg); }

  // Returns the output alias of the matching aggregate, adding it if new.
  std::string find_or_add_aggregate(const ExprPtr& agg, const Schema& input,
                                    std::vector<AggItem>& aggregates,
                                    std::string preferred_alias = "") {
    if (agg->left) validate_expr(agg->left, input, false);
    AggItem::Kind kind = AggItem::Kind::CountStar;
    switch (agg->agg) {
      case AggFunc::CountStar:
        kind = AggItem::Kind::CountStar;
        break;
      case AggFunc::Count:
        kind = AggItem::Kind::Count;
        break;
      case AggFunc::Sum:
        kind = AggItem::Kind::Sum;
        break;
      case AggFunc::Avg:
        kind = AggItem::Kind::Avg;
        break;
      case AggFunc::Min:
        kind = AggItem::Kind::Min;
        break;
      case AggFunc::Max:
        kind = AggItem::Kind::Max;
        break;
    }
    std::string sig = aggregate_signature(agg);
    for (const auto& existing : aggregates) {
      if (existing.kind == kind && render_agg_signature(existing) == sig) return existing.alias;
    }
    std::string alias = preferred_alias.empty()
                            ? fmt::format("{}agg_{}", kHiddenPrefix, aggregates.size())
                            : preferred_alias;
    aggregates.push_back(AggItem{kind, agg->left, alias});
    return alias;
  }

  static std::string render_agg_signature(const AggItem& item) {
    switch (item.kind) {
      case AggItem::Kind::CountStar:
        return "count(*)";
      case AggItem::Kind::Count:
        return fmt::format("count({})", render_expr(item.arg));
      case AggItem::Kind::Sum:
        return fmt::format("sum({})", render_expr(item.arg));
      case AggItem::Kind::Avg:
        return fmt::format("avg({})", render_expr(item.arg));
      case AggItem::Kind::Min:
        return fmt::format("min({})", render_expr(item.arg));
      case AggItem::Kind::Max:
        return fmt::format("max({})", render_expr(item.arg));
      case AggItem::Kind::Collect:
        return fmt::format("collect({})", render_expr(item.arg));
    }
    return "";
  }

  // Rewrites Agg subtrees to column references over GroupBy outputs, adding
  // hidden aggregates as needed. `input` validates new aggregate arguments;
  // pass an empty schema to only match existing ones.
  ExprPtr hoist_aggregates(const ExprPtr& expr, const Schema& input,
                           std::vector<AggItem>& aggregates) {
    if (!expr) return expr;
    if (expr->kind == Expr::Kind::Agg) {
      std::string sig = aggregate_signature(expr);
      for (const auto& existing : aggregates) {
        if (render_agg_signature(existing) == sig) {
          return Expr::make_column(ColumnRef{"", existing.alias}, expr->span);
        }
      }
      std::string alias = find_or_add_aggregate(expr, input, aggregates);
      return Expr::make_column(ColumnRef{"", alias}, expr->span);
    }
    ExprPtr left = hoist_aggregates(expr->left, input, aggregates);
    ExprPtr right = hoist_aggregates(expr->right, input, aggregates);
    if (left == expr->left && right == expr->right) return expr;
    auto copy = std::make_shared<Expr>(*expr);
    copy->left = left;
    copy->right = right;
    return copy;
  }

  // True when every column in the expression is a group key or aggregate
  // output (i.e. evaluable directly above GroupBy).
  bool references_only(const ExprPtr& expr, const std::vector<ColumnRef>& keys,
                       const std::vector<AggItem>& aggregates) {
    std::vector<ColumnRef> cols;
    collect_columns(expr, cols);
    for (const auto& ref : cols) {
      bool ok = std::any_of(keys.begin(), keys.end(),
                            [&](const ColumnRef& key) {
                              return key.name == ref.name &&
                                     (ref.qualifier.empty() || ref.qualifier == key.qualifier);
                            }) ||
                std::any_of(aggregates.begin(), aggregates.end(), [&](const AggItem& agg) {
                  return agg.alias == ref.name && ref.qualifier.empty();
                });
      if (!ok) return false;
    }
    return true;
  }

  const catalog::Catalog& catalog_;
};

}  // namespace

PlanPtr bind(const SelectStmt& stmt, const catalog::Catalog& catalog) {
  return Planner(catalog).bind_select(stmt);
}

PlanPtr plan_query(const std::string& query, const catalog::Catalog& catalog) {
  auto stmt = parse(query);
  return bind(*stmt, catalog);
}

}  // namespace semq::sql
