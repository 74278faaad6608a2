#pragma once

// Versioned JSON round-trip for fitted models.  The file stores everything
// needed to recondition the process exactly: input space, design with
// responses, trend kind, kernel parameters, process variance and nugget.
// Derived quantities (beta, log-likelihood) are stored for inspection and
// cross-checked on load.

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "gpsobol/common.hpp"
#include "gpsobol/design.hpp"
#include "gpsobol/distributions.hpp"
#include "gpsobol/gp.hpp"

namespace gpsobol {

namespace detail {

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected a JSON array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const FittedGp& gp, const InputSpace& space) {
  nlohmann::json j;
  j["format"] = "gpsobol-model";
  j["version"] = kModelFormatVersion;
  j["input_space"] = space.to_json();
  j["trend"] = trend_name(gp.trend().kind());
  j["theta"] = detail::vector_to_json(gp.params().theta);
  j["p"] = detail::vector_to_json(gp.params().p);
  j["sigma2"] = gp.params().sigma2;
  j["nugget"] = gp.nugget();
  j["beta"] = detail::vector_to_json(gp.beta());
  j["log_likelihood"] = gp.log_likelihood();
  nlohmann::json points = nlohmann::json::array();
  for (Eigen::Index i = 0; i < gp.size(); ++i)
    points.push_back(detail::vector_to_json(gp.design().points.row(i).transpose()));
  j["design"] = {{"points", std::move(points)},
                 {"responses", detail::vector_to_json(gp.design().responses)}};
  return j;
}

inline void save_model(const std::string& path, const FittedGp& gp, const InputSpace& space) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_model: cannot open " + path);
  out << model_to_json(gp, space).dump(2) << '\n';
  if (!out) throw ConfigError("save_model: write failed for " + path);
}

struct LoadedModel {
  FittedGp gp;
  InputSpace space;
};

inline LoadedModel model_from_json(const nlohmann::json& j) {
  detail::require_keys(j,
                       {"format", "version", "input_space", "trend", "theta", "p", "sigma2",
                        "nugget", "beta", "log_likelihood", "design"},
                       {}, "model file");
  if (j.at("format").get<std::string>() != "gpsobol-model")
    throw ConfigError("model file: unknown format tag");
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kModelFormatVersion)
    throw ConfigError("model file: unsupported version (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  InputSpace space = InputSpace::from_json(j.at("input_space"));

  const nlohmann::json& dj = j.at("design");
  detail::require_keys(dj, {"points", "responses"}, {}, "model design");
  if (!dj.at("points").is_array() || dj.at("points").empty())
    throw ConfigError("model design: points must be a non-empty array");
  Design design;
  const std::size_t n = dj.at("points").size();
  design.points.resize(static_cast<Eigen::Index>(n), space.dim());
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd row =
        detail::vector_from_json(dj.at("points")[i], "model design point");
    if (row.size() != space.dim())
      throw ConfigError("model design: point dimension does not match the input space");
    design.points.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  design.responses = detail::vector_from_json(dj.at("responses"), "model design responses");

  const double sigma2 = detail::get_number(j, "sigma2", "model file");
  const double nugget = detail::get_number(j, "nugget", "model file");
  FittedGp gp(std::move(design), trend_from_name(j.at("trend").get<std::string>()),
              detail::vector_from_json(j.at("theta"), "model theta"),
              detail::vector_from_json(j.at("p"), "model p"), nugget, sigma2);

  // The stored coefficients are derived; a mismatch beyond round-off means
  // the file was edited inconsistently.
  const Eigen::VectorXd stored_beta = detail::vector_from_json(j.at("beta"), "model beta");
  if (stored_beta.size() != gp.beta().size() ||
      (stored_beta - gp.beta()).norm() > 1e-6 * (1.0 + gp.beta().norm()))
    throw ConfigError("model file: stored beta does not match the reconditioned model");
  return LoadedModel{std::move(gp), std::move(space)};
}

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_model: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("load_model: invalid JSON in " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace gpsobol
