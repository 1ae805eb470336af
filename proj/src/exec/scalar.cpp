#include "semq/exec/scalar.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "semq/common.hpp"

namespace semq::exec {

using catalog::Value;
using sql::BinaryOp;
using sql::Expr;

namespace {

bool truthy(const Value& v) {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  return false;
}

bool is_numeric(const Value& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

// Comparable iff same category (numeric/text/bool); NULL never compares.
bool comparable(const Value& a, const Value& b) {
  if (catalog::is_null(a) || catalog::is_null(b)) return false;
  if (is_numeric(a) && is_numeric(b)) return true;
  return a.index() == b.index();
}

std::string lower_copy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string upper_copy(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

}  // namespace

bool like_match(const std::string& text, const std::string& pattern) {
  // Iterative wildcard match with backtracking over the last %.
  std::size_t t = 0, p = 0;
  std::size_t star_p = std::string::npos, star_t = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '_' || pattern[p] == text[t])) {
      ++t;
      ++p;
    } else if (p < pattern.size() && pattern[p] == '%') {
      star_p = p++;
      star_t = t;
    } else if (star_p != std::string::npos) {
      p = star_p + 1;
      t = ++star_t;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%') ++p;
  return p == pattern.size();
}

Value eval_scalar(const sql::ExprPtr& expr, const catalog::Chunk& chunk, std::size_t row) {
  switch (expr->kind) {
    case Expr::Kind::Literal:
      return expr->literal;
    case Expr::Kind::Column: {
      auto index = catalog::resolve_column(*chunk.schema, expr->column.qualifier,
                                           expr->column.name);
      if (!index)
        throw ExecError(fmt::format("column '{}' not found at execution time",
                                    expr->column.display()));
      return chunk.cell(row, *index);
    }
    case Expr::Kind::Binary: {
      if (expr->op == BinaryOp::And) {
        return truthy(eval_scalar(expr->left, chunk, row)) &&
               truthy(eval_scalar(expr->right, chunk, row));
      }
      if (expr->op == BinaryOp::Or) {
        return truthy(eval_scalar(expr->left, chunk, row)) ||
               truthy(eval_scalar(expr->right, chunk, row));
      }
      Value lhs = eval_scalar(expr->left, chunk, row);
      Value rhs = eval_scalar(expr->right, chunk, row);
      if (expr->op == BinaryOp::Like) {
        auto* text = std::get_if<std::string>(&lhs);
        auto* pattern = std::get_if<std::string>(&rhs);
        return text && pattern && like_match(*text, *pattern);
      }
      if (!comparable(lhs, rhs)) return false;
      int cmp = catalog::compare_values(lhs, rhs);
      switch (expr->op) {
        case BinaryOp::Eq:
          return cmp == 0;
        case BinaryOp::Ne:
          return cmp != 0;
        case BinaryOp::Lt:
          return cmp < 0;
        case BinaryOp::Le:
          return cmp <= 0;
        case BinaryOp::Gt:
          return cmp > 0;
        case BinaryOp::Ge:
          return cmp >= 0;
        default:
          return false;
      }
    }
    case Expr::Kind::Not:
      return !truthy(eval_scalar(expr->left, chunk, row));
    case Expr::Kind::IsNull: {
      bool null = catalog::is_null(eval_scalar(expr->left, chunk, row));
      return expr->negated ? !null : null;
    }
    case Expr::Kind::InList: {
      Value lhs = eval_scalar(expr->left, chunk, row);
      bool found = false;
      for (const auto& candidate : expr->in_list) {
        if (comparable(lhs, candidate) && catalog::compare_values(lhs, candidate) == 0) {
          found = true;
          break;
        }
      }
      return expr->negated ? !found : found;
    }
    case Expr::Kind::Func: {
      Value arg = eval_scalar(expr->left, chunk, row);
      if (catalog::is_null(arg)) return Value{};
      auto* text = std::get_if<std::string>(&arg);
      if (!text) return Value{};
      switch (expr->func) {
        case sql::ScalarFunc::Length:
          return static_cast<std::int64_t>(text->size());
        case sql::ScalarFunc::Lower:
          return lower_copy(*text);
        case sql::ScalarFunc::Upper:
          return upper_copy(*text);
      }
      return Value{};
    }
    case Expr::Kind::Agg:
      throw ExecError("aggregate expression reached row-level evaluation");
    case Expr::Kind::Sem:
      throw ExecError("semantic expression reached relational evaluation");
  }
  return Value{};
}

bool eval_predicate(const sql::ExprPtr& expr, const catalog::Chunk& chunk, std::size_t row) {
  return truthy(eval_scalar(expr, chunk, row));
}

void AggAccumulator::add(const catalog::Chunk& chunk, std::size_t row) {
  using Kind = sql::AggItem::Kind;
  if (item_.kind == Kind::CountStar) {
    ++count_;
    return;
  }
  Value v = eval_scalar(item_.arg, chunk, row);
  if (item_.kind == Kind::Collect) {
    collected_.push_back(catalog::value_to_string(v));
    return;
  }
  if (catalog::is_null(v)) return;
  switch (item_.kind) {
    case Kind::Count:
      ++count_;
      break;
    case Kind::Sum:
    case Kind::Avg:
      ++count_;
      if (auto* i = std::get_if<std::int64_t>(&v)) {
        int_sum_ += *i;
        double_sum_ += static_cast<double>(*i);
      } else if (auto* d = std::get_if<double>(&v)) {
        all_int_ = false;
        double_sum_ += *d;
      } else {
        throw ExecError(fmt::format("cannot aggregate non-numeric value '{}'",
                                    catalog::value_to_string(v)));
      }
      break;
    case Kind::Min:
      if (!any_ || catalog::compare_values(v, best_) < 0) best_ = v;
      break;
    case Kind::Max:
      if (!any_ || catalog::compare_values(v, best_) > 0) best_ = v;
      break;
    default:
      break;
  }
  any_ = true;
}

catalog::Value AggAccumulator::finish() const {
  using Kind = sql::AggItem::Kind;
  switch (item_.kind) {
    case Kind::CountStar:
    case Kind::Count:
      return count_;
    case Kind::Sum:
      if (!any_) return Value{};
      return all_int_ ? Value{int_sum_} : Value{double_sum_};
    case Kind::Avg:
      if (!any_) return Value{};
      return double_sum_ / static_cast<double>(count_);
    case Kind::Min:
    case Kind::Max:
      return any_ ? best_ : Value{};
    case Kind::Collect:
      return collected_;
  }
  return Value{};
}

}  // namespace semq::exec
