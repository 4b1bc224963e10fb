#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "kgbench/diagnostics.hpp"
#include "kgbench/text.hpp"

namespace kgbench {

// TOML subset sufficient for a flat config file: comments, [sections], and
// key = value pairs with quoted strings, integers, floats, and booleans.
// Anything fancier is rejected with the offending line number.
inline nlohmann::json parse_toml(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    std::string line(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++lineno;

    // Strip comments outside strings.
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty() || name.front() == '[')
        throw ConfigError("config line " + std::to_string(lineno) + ": unsupported section syntax");
      root[name] = nlohmann::json::object();
      section = &root[name];
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key.find_first_not_of(
                           "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                           std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": invalid key \"" + key + "\"");
    if (value.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": missing value");

    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated string");
      std::string parsed;
      for (std::size_t i = 1; i + 1 < value.size(); ++i) {
        if (value[i] == '\\' && i + 2 < value.size() + 1) {
          char c = value[++i];
          switch (c) {
            case 'n': parsed.push_back('\n'); break;
            case 't': parsed.push_back('\t'); break;
            case 'r': parsed.push_back('\r'); break;
            case '"': parsed.push_back('"'); break;
            case '\\': parsed.push_back('\\'); break;
            default:
              throw ConfigError("config line " + std::to_string(lineno) + ": unknown escape \\" +
                                std::string(1, c));
          }
        } else {
          parsed.push_back(value[i]);
        }
      }
      (*section)[key] = parsed;
    } else if (value == "true" || value == "false") {
      (*section)[key] = value == "true";
    } else {
      bool is_float = value.find('.') != std::string::npos || value.find('e') != std::string::npos ||
                      value.find('E') != std::string::npos;
      try {
        if (is_float) {
          (*section)[key] = std::stod(value);
        } else {
          (*section)[key] = std::stoll(value);
        }
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(lineno) + ": cannot parse value \"" + value +
                          "\"");
      }
    }
  }
  return root;
}

}  // namespace kgbench
