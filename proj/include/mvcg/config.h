// Flat key-value configuration files: one `name = value` per line, `#`
// starts a comment. Every ModelParams field is a key; only lambda and F may
// be omitted (they default to 0).

#ifndef MVCG_CONFIG_H
#define MVCG_CONFIG_H

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mvcg/model.h"

namespace mvcg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bit-exact decimal to double. Throws ConfigError on trailing garbage.
double parse_double(std::string_view text);

// Raw key/value pairs in file order, duplicates rejected.
std::map<std::string, std::string> parse_key_values(std::string_view text,
                                                    std::string_view source);

ModelParams parse_model_params(std::string_view text,
                               std::string_view source = "<string>");
ModelParams read_model_params(const std::string& path);

std::string read_file(const std::string& path);

// Applies "name=value" to p. Throws ConfigError for unknown names.
void apply_override(ModelParams& p, std::string_view assignment);

}  // namespace mvcg

#endif  // MVCG_CONFIG_H
