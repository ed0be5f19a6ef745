#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mcvar/cli.hpp"
#include "mcvar/errors.hpp"

namespace mcvar::cli {

namespace {

using nlohmann::json;

const json& section(const json& root, const char* name) {
  if (!root.contains(name)) throw ValidationError(name, "missing section");
  const json& s = root.at(name);
  if (!s.is_object()) throw ValidationError(name, "must be an object");
  return s;
}

void reject_unknown(const json& obj, const std::string& prefix, const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw ValidationError(prefix + key, "unknown field");
  }
}

double number(const json& obj, const std::string& prefix, const char* key, bool allow_inf = false) {
  const std::string field = prefix + key;
  if (!obj.contains(key)) throw ValidationError(field, "missing");
  const json& v = obj.at(key);
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(field, "must be finite");
    return d;
  }
  if (allow_inf && v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity" || s == "infinity") return kInf;
  }
  throw ValidationError(field, allow_inf ? "must be a number or \"inf\"" : "must be a number");
}

// Same error, field name qualified by its section.
ValidationError qualified(const ValidationError& e, const std::string& prefix) {
  std::string msg = e.what();
  const std::string head = e.field() + ": ";
  if (msg.rfind(head, 0) == 0) msg.erase(0, head.size());
  return ValidationError(prefix + e.field(), msg);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config", "top level must be an object");
  reject_unknown(root, "", {"market", "problem"});

  RunConfig cfg;
  const json& m = section(root, "market");
  reject_unknown(m, "market.", {"r", "mu", "sigma", "s0", "T"});
  cfg.market.r = number(m, "market.", "r");
  cfg.market.mu = number(m, "market.", "mu");
  cfg.market.sigma = number(m, "market.", "sigma");
  cfg.market.s0 = number(m, "market.", "s0");
  cfg.market.T = number(m, "market.", "T");
  try {
    cfg.market.validate();
  } catch (const ValidationError& e) {
    throw qualified(e, "market.");
  }

  const json& p = section(root, "problem");
  reject_unknown(p, "problem.", {"x_d", "x_u", "x_0", "lambda", "z"});
  cfg.problem.x_d = number(p, "problem.", "x_d");
  cfg.problem.x_u = p.contains("x_u") ? number(p, "problem.", "x_u", true) : kInf;
  cfg.problem.x_0 = number(p, "problem.", "x_0");
  cfg.problem.lambda = number(p, "problem.", "lambda");
  if (p.contains("z") && !p.at("z").is_null()) cfg.problem.z = number(p, "problem.", "z");
  try {
    cfg.problem.validate(cfg.x_r());
  } catch (const ValidationError& e) {
    throw qualified(e, "problem.");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace mcvar::cli
