#include "semq/catalog/catalog.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "semq/catalog/csv.hpp"
#include "semq/common.hpp"

namespace semq::catalog {

void Catalog::register_table(std::string name, Table table) {
  tables_.insert_or_assign(std::move(name), std::move(table));
}

bool Catalog::has_table(const std::string& name) const { return tables_.count(name) > 0; }

const Table& Catalog::table(const std::string& name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw ConfigError(fmt::format("unknown table '{}'", name));
  return it->second;
}

std::vector<std::string> Catalog::table_names() const {
  std::vector<std::string> names;
  names.reserve(tables_.size());
  for (const auto& [name, _] : tables_) names.push_back(name);
  return names;
}

Catalog load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open manifest '{}'", path));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("manifest '{}': {}", path, e.what()));
  }

  const nlohmann::json* entries = &doc;
  if (doc.is_object()) {
    if (!doc.contains("tables")) throw ConfigError("manifest object lacks 'tables'");
    entries = &doc["tables"];
  }
  if (!entries->is_array()) throw ConfigError("manifest 'tables' must be an array");

  auto base = std::filesystem::path(path).parent_path();
  Catalog catalog;
  for (const auto& entry : *entries) {
    if (!entry.contains("name") || !entry.contains("path")) {
      throw ConfigError("manifest entry needs 'name' and 'path'");
    }
    std::map<std::string, ColumnType> schema;
    if (entry.contains("schema")) {
      for (const auto& [col, type] : entry["schema"].items()) {
        schema.emplace(col, type_from_name(type.get<std::string>()));
      }
    }
    auto csv_path = base / std::filesystem::path(entry["path"].get<std::string>());
    Table table = load_csv(csv_path.string(), schema.empty() ? nullptr : &schema);
    catalog.register_table(entry["name"].get<std::string>(), std::move(table));
  }
  return catalog;
}

}  // namespace semq::catalog
