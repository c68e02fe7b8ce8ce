#include "rfpls/cli.hpp"

#include "rfpls/error.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace rfpls::cli {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key + ": wrong value type");
  }
}

int get_count(const json& value, const std::string& key) {
  if (!value.is_number_integer()) throw ConfigError(key + ": must be an integer");
  return get_as<int>(value, key);
}

double get_real(const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError(key + ": must be a number");
  return get_as<double>(value, key);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "methods") {
      if (!value.is_array()) throw ConfigError("methods: must be an array of method names");
      config.methods.clear();
      for (const json& m : value) {
        if (!m.is_string()) throw ConfigError("methods: must be an array of method names");
        try {
          config.methods.push_back(parse_method(m.get<std::string>()));
        } catch (const InputError& e) {
          throw ConfigError(std::string("methods: ") + e.what());
        }
      }
    } else if (key == "contamination_levels") {
      if (!value.is_array()) throw ConfigError("contamination_levels: must be an array of numbers");
      config.contamination_levels.clear();
      for (const json& l : value) config.contamination_levels.push_back(get_real(l, key));
    } else if (key == "replications") {
      config.replications = get_count(value, key);
    } else if (key == "n_train") {
      config.n_train = get_count(value, key);
    } else if (key == "n_test") {
      config.n_test = get_count(value, key);
    } else if (key == "num_basis") {
      config.num_basis = get_count(value, key);
    } else if (key == "max_components") {
      config.max_components = get_count(value, key);
    } else if (key == "cv_folds") {
      config.cv_folds = get_count(value, key);
    } else if (key == "trim_alpha") {
      config.trim_alpha = get_real(value, key);
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("seed: must be a non-negative integer");
      config.seed = get_as<std::uint64_t>(value, key);
    } else if (key == "workers") {
      config.workers = get_count(value, key);
    } else if (key == "output_path") {
      if (!value.is_string()) throw ConfigError("output_path: must be a string");
      config.output_path = value.get<std::string>();
    } else {
      throw ConfigError(key + ": unknown config key");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

}  // namespace rfpls::cli
