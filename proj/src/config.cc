#include "mvcg/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mvcg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError("not a number: '" + std::string(text) + "'");
  return value;
}

std::map<std::string, std::string> parse_key_values(std::string_view text,
                                                    std::string_view source) {
  std::map<std::string, std::string> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto where = std::string(source) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where + ": expected 'name = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty())
      throw ConfigError(where + ": expected 'name = value'");
    if (!out.emplace(key, value).second)
      throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

ModelParams parse_model_params(std::string_view text, std::string_view source) {
  const auto kv = parse_key_values(text, source);
  for (const auto& [key, value] : kv)
    if (!find_param_field(key))
      throw ConfigError(std::string(source) + ": unknown key '" + key + "'");

  ModelParams p;
  for (const auto& f : param_fields()) {
    const auto it = kv.find(std::string(f.name));
    if (it == kv.end()) {
      if (f.name == "lambda" || f.name == "F") continue;
      throw ConfigError(std::string(source) + ": missing key '" +
                        std::string(f.name) + "'");
    }
    try {
      p.*f.member = parse_double(it->second);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ": " + std::string(f.name) +
                        ": " + e.what());
    }
  }
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ModelParams read_model_params(const std::string& path) {
  return parse_model_params(read_file(path), path);
}

void apply_override(ModelParams& p, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override must be name=value: '" +
                      std::string(assignment) + "'");
  const auto name = trim(assignment.substr(0, eq));
  const ParamField* f = find_param_field(name);
  if (!f) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  p.*f->member = parse_double(assignment.substr(eq + 1));
}

}  // namespace mvcg
