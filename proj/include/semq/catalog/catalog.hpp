#pragma once

#include <map>
#include <string>

#include "semq/catalog/table.hpp"

namespace semq::catalog {

// Named, immutable-after-load table registry.
class Catalog {
 public:
  void register_table(std::string name, Table table);
  bool has_table(const std::string& name) const;
  const Table& table(const std::string& name) const;  // throws ConfigError
  std::vector<std::string> table_names() const;

 private:
  std::map<std::string, Table> tables_;
};

// Manifest format:
//   {"tables": [{"name": "reviews", "path": "reviews.csv",
//                "schema": {"rating": "int64"}}, ...]}
// `schema` is optional and partial; paths resolve relative to the manifest.
Catalog load_manifest(const std::string& path);

}  // namespace semq::catalog
