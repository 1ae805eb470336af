#include "semq/sql/plan.hpp"

#include <fmt/format.h>

namespace semq::sql {

std::string plan_kind_name(PlanKind kind) {
  switch (kind) {
    case PlanKind::Scan:
      return "Scan";
    case PlanKind::RelFilter:
      return "RelFilter";
    case PlanKind::RelProject:
      return "RelProject";
    case PlanKind::HashJoin:
      return "HashJoin";
    case PlanKind::GroupBy:
      return "GroupBy";
    case PlanKind::OrderBy:
      return "OrderBy";
    case PlanKind::Limit:
      return "Limit";
    case PlanKind::SemFilter:
      return "SemFilter";
    case PlanKind::SemProj:
      return "SemProj";
    case PlanKind::SemJoin:
      return "SemJoin";
    case PlanKind::SemOrderBy:
      return "SemOrderBy";
    case PlanKind::SemAgg:
      return "SemAgg";
  }
  return "?";
}

bool is_semantic(PlanKind kind) {
  switch (kind) {
    case PlanKind::SemFilter:
    case PlanKind::SemProj:
    case PlanKind::SemJoin:
    case PlanKind::SemOrderBy:
    case PlanKind::SemAgg:
      return true;
    default:
      return false;
  }
}

PlanPtr clone_plan(const PlanPtr& plan) {
  if (!plan) return nullptr;
  auto copy = std::make_shared<PlanNode>(*plan);
  for (auto& child : copy->children) child = clone_plan(child);
  return copy;
}

std::size_t count_nodes(const PlanPtr& plan, PlanKind kind) {
  if (!plan) return 0;
  std::size_t n = plan->kind == kind ? 1 : 0;
  for (const auto& child : plan->children) n += count_nodes(child, kind);
  return n;
}

std::size_t count_semantic_nodes(const PlanPtr& plan) {
  if (!plan) return 0;
  std::size_t n = is_semantic(plan->kind) ? 1 : 0;
  for (const auto& child : plan->children) n += count_semantic_nodes(child);
  return n;
}

std::string node_label(const PlanNode& node) {
  switch (node.kind) {
    case PlanKind::Scan:
      if (node.table_alias != node.table_name) {
        return fmt::format("Scan {} AS {}", node.table_name, node.table_alias);
      }
      return fmt::format("Scan {}", node.table_name);
    case PlanKind::RelFilter:
      return fmt::format("RelFilter {}", render_expr(node.rel_predicate));
    case PlanKind::RelProject: {
      std::string cols;
      for (std::size_t i = 0; i < node.projections.size(); ++i) {
        if (i > 0) cols += ", ";
        const auto& item = node.projections[i];
        std::string rendered = render_expr(item.expr);
        cols += rendered;
        if (!item.alias.empty() && item.alias != rendered) {
          cols += fmt::format(" AS {}", item.alias);
        }
      }
      return fmt::format("RelProject [{}]", cols);
    }
    case PlanKind::HashJoin: {
      std::string keys;
      for (std::size_t i = 0; i < node.join_keys.size(); ++i) {
        if (i > 0) keys += " AND ";
        keys += fmt::format("{} = {}", node.join_keys[i].first.display(),
                            node.join_keys[i].second.display());
      }
      return fmt::format("HashJoin{} ({})", node.semi ? " SEMI" : "", keys);
    }
    case PlanKind::GroupBy: {
      std::string keys;
      for (std::size_t i = 0; i < node.group_keys.size(); ++i) {
        if (i > 0) keys += ", ";
        keys += node.group_keys[i].display();
      }
      std::string aggs;
      for (std::size_t i = 0; i < node.aggregates.size(); ++i) {
        if (i > 0) aggs += ", ";
        const auto& agg = node.aggregates[i];
        switch (agg.kind) {
          case AggItem::Kind::CountStar:
            aggs += "count(*)";
            break;
          case AggItem::Kind::Count:
            aggs += fmt::format("count({})", render_expr(agg.arg));
            break;
          case AggItem::Kind::Sum:
            aggs += fmt::format("sum({})", render_expr(agg.arg));
            break;
          case AggItem::Kind::Avg:
            aggs += fmt::format("avg({})", render_expr(agg.arg));
            break;
          case AggItem::Kind::Min:
            aggs += fmt::format("min({})", render_expr(agg.arg));
            break;
          case AggItem::Kind::Max:
            aggs += fmt::format("max({})", render_expr(agg.arg));
            break;
          case AggItem::Kind::Collect:
            aggs += fmt::format("collect({})", render_expr(agg.arg));
            break;
        }
        aggs += fmt::format(" AS {}", agg.alias);
      }
      return fmt::format("GroupBy keys=[{}] aggs=[{}]", keys, aggs);
    }
    case PlanKind::OrderBy: {
      std::string keys;
      for (std::size_t i = 0; i < node.order_keys.size(); ++i) {
        if (i > 0) keys += ", ";
        keys += fmt::format("{} {}", render_expr(node.order_keys[i].expr),
                            node.order_keys[i].ascending ? "ASC" : "DESC");
      }
      return fmt::format("OrderBy [{}]", keys);
    }
    case PlanKind::Limit:
      return fmt::format("Limit {}", node.limit);
    case PlanKind::SemFilter:
      return fmt::format("SemFilter {}", node.expr->display());
    case PlanKind::SemProj:
      return fmt::format("SemProj {} AS {}", node.expr->display(), node.output_alias);
    case PlanKind::SemJoin: {
      std::string extra =
          node.rel_predicate ? fmt::format(" AND {}", render_expr(node.rel_predicate)) : "";
      return fmt::format("SemJoin{} {}{}", node.semi ? " SEMI" : "", node.expr->display(), extra);
    }
    case PlanKind::SemOrderBy:
      return fmt::format("SemOrderBy {}", node.expr->display());
    case PlanKind::SemAgg:
      return fmt::format("SemAgg {} AS {}", node.expr->display(), node.output_alias);
  }
  return "?";
}

namespace {

void render(const PlanPtr& node, int depth, std::string& out) {
  out += std::string(static_cast<std::size_t>(depth) * 2, ' ');
  out += node_label(*node);
  out += '\n';
  for (const auto& child : node->children) render(child, depth + 1, out);
}

}  // namespace

std::string explain(const PlanPtr& plan) {
  std::string out;
  if (plan) render(plan, 0, out);
  return out;
}

}  // namespace semq::sql
