#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "inbetween/io/json_codec.hpp"

namespace inbetween {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errs)
      : std::runtime_error(join(errs)), errors(std::move(errs)) {}
  std::vector<std::string> errors;

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s = "invalid configuration (" + std::to_string(e.size()) + " error" + (e.size() == 1 ? "" : "s") + "):";
    for (const auto& x : e) s += "\n  " + x;
    return s;
  }
};

namespace detail {
inline bool parse_bool(std::string v, bool& out) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
  return false;
}

template <class N>
bool parse_number(const std::string& v, N& out) {
  std::istringstream in(v);
  in >> out;
  return in && (in >> std::ws).eof();
}
}  // namespace detail

// Sections [generator], [critic], [train]; keys as in the JSON form of ModelConfig.
// Unset keys keep their defaults. Every problem is reported in one ConfigError.
inline ModelConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("syntax error: ") + e.what()});
  }
  Json j = config_to_json(ModelConfig{});
  std::vector<std::string> errors;
  for (const auto& [section, keys] : tree) {
    if (!j.contains(section) || keys.empty()) {
      errors.push_back(keys.empty() ? "entry '" + section + "' must appear inside a section"
                                    : "unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, node] : keys) {
      const std::string where = section + "." + key;
      if (!j[section].contains(key)) {
        errors.push_back("unknown key " + where);
        continue;
      }
      Json& slot = j[section][key];
      const std::string v = node.get_value<std::string>();
      bool ok = true;
      if (slot.is_boolean()) {
        bool b = false;
        ok = detail::parse_bool(v, b);
        if (ok) slot = b;
      } else if (slot.is_number_unsigned()) {
        std::uint64_t u = 0;
        ok = v.find('-') == std::string::npos && detail::parse_number(v, u);
        if (ok) slot = u;
      } else if (slot.is_number_integer()) {
        long long n = 0;
        ok = detail::parse_number(v, n);
        if (ok) slot = n;
      } else if (slot.is_number_float()) {
        double d = 0;
        ok = detail::parse_number(v, d);
        if (ok) slot = d;
      } else {
        slot = v;
      }
      if (!ok) errors.push_back(where + ": cannot parse '" + v + "' as " + slot.type_name());
    }
  }
  ModelConfig c;
  try {
    c = config_from_json(j);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  for (auto& e : c.validate()) errors.push_back(e);
  if (!errors.empty()) throw ConfigError(errors);
  return c;
}

inline ModelConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path});
  return parse_config(in);
}

// Writes every key with its current value.
inline void write_config(std::ostream& out, const ModelConfig& c) {
  const Json j = config_to_json(c);
  for (const char* section : {"generator", "critic", "train"}) {
    out << '[' << section << "]\n";
    for (const auto& [k, v] : j.at(section).items()) out << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    out << '\n';
  }
}

}  // namespace inbetween
