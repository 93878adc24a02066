#include "xscreen/jsonvalidate.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "xscreen/error.hpp"

namespace xscreen::jsonvalidate {

using nlohmann::json;

namespace {

bool matches_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

void check(const json& value, const json& schema, const std::string& path,
           std::vector<std::string>& violations) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) violations.push_back(path + ": disallowed");
    return;
  }
  if (!schema.is_object()) return;

  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) {
        ok = ok || matches_type(value, t.get<std::string>());
      }
    } else {
      ok = matches_type(value, schema["type"].get<std::string>());
    }
    if (!ok) {
      violations.push_back(path + ": expected type " + schema["type"].dump());
      return;
    }
  }

  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& candidate : schema["enum"]) ok = ok || candidate == value;
    if (!ok) violations.push_back(path + ": value not in enum");
  }

  if (value.is_number()) {
    const double x = value.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
      violations.push_back(path + ": below minimum");
    }
    if (schema.contains("exclusiveMinimum") &&
        x <= schema["exclusiveMinimum"].get<double>()) {
      violations.push_back(path + ": not above exclusiveMinimum");
    }
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
      violations.push_back(path + ": above maximum");
    }
    if (schema.contains("exclusiveMaximum") &&
        x >= schema["exclusiveMaximum"].get<double>()) {
      violations.push_back(path + ": not below exclusiveMaximum");
    }
  }

  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!value.contains(key.get<std::string>())) {
          violations.push_back(path + ": missing required key " +
                               key.get<std::string>());
        }
      }
    }
    const json props = schema.value("properties", json::object());
    for (auto it = value.begin(); it != value.end(); ++it) {
      const std::string child = path + "/" + it.key();
      if (props.contains(it.key())) {
        check(it.value(), props[it.key()], child, violations);
      } else if (schema.contains("additionalProperties")) {
        check(it.value(), schema["additionalProperties"], child, violations);
      }
    }
  }

  if (value.is_array()) {
    if (schema.contains("minItems") &&
        value.size() < schema["minItems"].get<std::size_t>()) {
      violations.push_back(path + ": fewer than minItems");
    }
    if (schema.contains("items")) {
      std::size_t i = 0;
      for (const auto& item : value) {
        check(item, schema["items"], path + "/" + std::to_string(i++), violations);
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate(const json& document, const json& schema) {
  std::vector<std::string> violations;
  check(document, schema, "$", violations);
  return violations;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrCode::schema_violation, "cannot open JSON file: " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrCode::schema_violation,
                "invalid JSON in " + path + ": " + e.what());
  }
  return doc;
}

}  // namespace xscreen::jsonvalidate
