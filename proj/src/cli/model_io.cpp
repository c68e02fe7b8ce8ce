#include "rfpls/cli.hpp"

#include "rfpls/error.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace rfpls::cli {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "rfpls-model";

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw InputError(std::string("model field '") + field + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(std::string("model field '") + field + "' must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

const json& require(const json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) throw InputError(std::string("model is missing field '") + field + "'");
  return j.at(field);
}

}  // namespace

std::string serialize_model(const FittedSofr& fit) {
  json j;
  j["format"] = kFormatTag;
  j["version"] = kModelVersion;
  j["method"] = std::string(method_name(fit.method));
  j["components"] = fit.components;
  j["intercept"] = fit.intercept;

  json predictors = json::array();
  Eigen::Index offset = 0;
  for (const BasisSystem& s : fit.systems) {
    json p;
    p["domain"] = {s.domain().lo, s.domain().hi};
    p["num_basis"] = s.num_basis();
    p["order"] = s.order();
    p["beta"] = vector_to_json(fit.beta.segment(offset, s.num_basis()));
    offset += s.num_basis();
    predictors.push_back(std::move(p));
  }
  j["predictors"] = std::move(predictors);

  if (fit.robust) {
    const RobustReport& r = *fit.robust;
    j["robust"] = {
        {"tuning", r.tuning},
        {"irpls_iterations", r.irpls_iterations},
        {"irpls_converged", r.irpls_converged},
        {"m_iterations", r.m_iterations},
        {"m_converged", r.m_converged},
        {"weights", vector_to_json(r.weights)},
    };
  }
  return j.dump(2) + "\n";
}

FittedSofr deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }

  try {
    if (require(j, "format") != kFormatTag) throw InputError("not an rfpls model file");
    const int version = require(j, "version").get<int>();
    if (version != kModelVersion) {
      throw InputError("model version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kModelVersion) + ")");
    }

    FittedSofr fit;
    fit.method = parse_method(require(j, "method").get<std::string>());
    fit.components = require(j, "components").get<int>();
    fit.intercept = require(j, "intercept").get<double>();

    const json& predictors = require(j, "predictors");
    if (!predictors.is_array() || predictors.empty()) throw InputError("model has no predictors");
    std::vector<Eigen::VectorXd> blocks;
    Eigen::Index total = 0;
    for (const json& p : predictors) {
      const json& domain = require(p, "domain");
      if (!domain.is_array() || domain.size() != 2) throw InputError("predictor domain must be [lo, hi]");
      fit.systems.push_back(BasisSystem::bspline({domain[0].get<double>(), domain[1].get<double>()},
                                                 require(p, "num_basis").get<int>(),
                                                 require(p, "order").get<int>()));
      blocks.push_back(vector_from_json(require(p, "beta"), "beta"));
      if (blocks.back().size() != fit.systems.back().num_basis()) {
        throw InputError("predictor beta length does not match its num_basis");
      }
      total += blocks.back().size();
    }
    fit.beta.resize(total);
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
      fit.beta.segment(offset, b.size()) = b;
      offset += b.size();
    }

    if (j.contains("robust")) {
      const json& r = j.at("robust");
      RobustReport report;
      report.tuning = require(r, "tuning").get<double>();
      report.irpls_iterations = require(r, "irpls_iterations").get<int>();
      report.irpls_converged = require(r, "irpls_converged").get<bool>();
      report.m_iterations = require(r, "m_iterations").get<int>();
      report.m_converged = require(r, "m_converged").get<bool>();
      report.weights = vector_from_json(require(r, "weights"), "weights");
      fit.robust = std::move(report);
    }
    return fit;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const FittedSofr& fit) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << serialize_model(fit);
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

FittedSofr read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return deserialize_model(text.str());
}

}  // namespace rfpls::cli
