#ifndef XSCREEN_JSONVALIDATE_HPP
#define XSCREEN_JSONVALIDATE_HPP

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace xscreen::jsonvalidate {

/// Validate a document against the subset of JSON Schema used by the shipped
/// schema files: type, properties, required, additionalProperties, items,
/// enum, minimum, exclusiveMinimum, maximum, minItems. Returns violation
/// messages with JSON-pointer-ish paths; empty means valid.
std::vector<std::string> validate(const nlohmann::json& document,
                                  const nlohmann::json& schema);

nlohmann::json load_json(const std::string& path);

}  // namespace xscreen::jsonvalidate

#endif  // XSCREEN_JSONVALIDATE_HPP
