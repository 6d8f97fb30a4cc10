#include "gevo/constraints.hpp"

#include <json.hpp>

namespace gevo {

const std::set<std::string>& reserved_c_words() {
  static const std::set<std::string> words = {
      "auto",   "break",  "case",     "char",   "const",    "continue", "default",  "do",
      "double", "else",   "enum",     "extern", "float",    "for",      "goto",     "if",
      "inline", "int",    "long",     "main",   "register", "restrict", "return",   "short",
      "signed", "sizeof", "static",   "struct", "switch",   "typedef",  "union",    "unsigned",
      "void",   "volatile", "while"};
  return words;
}

const std::string& ConstraintSpecItem::str(const std::string& key) const {
  auto it = strs.find(key);
  if (it == strs.end()) {
    throw std::runtime_error("constraint '" + type + "' is missing field '" + key + "'");
  }
  return it->second;
}

double ConstraintSpecItem::num(const std::string& key) const {
  auto it = nums.find(key);
  if (it == nums.end()) {
    throw std::runtime_error("constraint '" + type + "' is missing numeric field '" + key + "'");
  }
  return it->second;
}

std::vector<ConstraintSpecItem> parse_constraint_spec(const std::string& json_text) {
  const nlohmann::json doc = nlohmann::json::parse(json_text);
  if (!doc.is_array()) throw std::runtime_error("constraint spec must be a JSON array");
  std::vector<ConstraintSpecItem> out;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("type")) {
      throw std::runtime_error("constraint spec entries must be objects with a 'type' field");
    }
    ConstraintSpecItem item;
    item.type = entry.at("type").get<std::string>();
    for (auto it = entry.begin(); it != entry.end(); ++it) {
      if (it.key() == "type") continue;
      if (it->is_string()) {
        item.strs[it.key()] = it->get<std::string>();
      } else if (it->is_number()) {
        item.nums[it.key()] = it->get<double>();
      } else {
        throw std::runtime_error("constraint field '" + it.key() + "' must be string or number");
      }
    }
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace gevo
