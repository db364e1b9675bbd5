#pragma once

// JSON job files. Needs nlohmann/json (vendor/json.hpp) on the include path.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "curvehull/pipeline.hpp"

namespace curvehull {

struct JobFile {
  CurveJob job;
  nlohmann::json source;
  std::string origin;
  std::optional<std::string> out;
};

namespace detail {

using nlohmann::json;

class JobReader {
 public:
  explicit JobReader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw StructuralError(origin_ + ": " + (where.empty() ? "/" : where) + ": " + what);
  }

  void only_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : obj.items())
      if (!allowed.count(k)) fail(where + "/" + k, "unknown key");
  }

  const std::string& string(const json& v, const std::string& where) const {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get_ref<const std::string&>();
  }

  const json& array(const json& v, const std::string& where) const {
    if (!v.is_array()) fail(where, "expected an array");
    return v;
  }

  double number(const json& v, const std::string& where) const {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
  }

  long integer(const json& v, const std::string& where, long lo) const {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    const long n = v.get<long>();
    if (n < lo) fail(where, "must be at least " + std::to_string(lo));
    return n;
  }

  Rational rational(const json& v, const std::string& where) const {
    try {
      if (v.is_string()) return parse_rational(v.get_ref<const std::string&>());
      if (v.is_number()) return parse_rational(v.dump());
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
    fail(where, "expected a number or a rational string such as \"1/2\"");
  }

  Poly poly(const json& v, const std::string& where, const std::vector<std::string>& vars) const {
    try {
      return parse_poly(string(v, where), vars);
    } catch (const StructuralError& e) {
      fail(where, e.what());
    }
  }

 private:
  std::string origin_;
};

inline std::string line_column(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace detail

inline JobFile parse_job(const std::string& text, const std::string& origin = "<job>") {
  using detail::json;
  JobFile jf;
  jf.origin = origin;
  try {
    jf.source = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw StructuralError(origin + ":" + detail::line_column(text, e.byte) + ": " + msg);
  }
  const detail::JobReader rd(origin);
  const json& root = jf.source;
  rd.only_keys(root, "", {"variables", "curve", "normalization", "isolated_points", "generators", "level",
                          "subspaces", "box", "tol", "max_level", "grid", "directions", "seed", "chart_delta",
                          "out"});
  CurveJob& job = jf.job;

  if (!root.contains("variables")) rd.fail("/variables", "required");
  std::set<std::string> seen;
  for (const auto& v : rd.array(root["variables"], "/variables")) {
    const std::string& name = rd.string(v, "/variables");
    if (!seen.insert(name).second) rd.fail("/variables", "duplicate variable '" + name + "'");
    job.variables.push_back(name);
  }
  if (job.variables.empty()) rd.fail("/variables", "at least one variable is needed");
  const size_t n = job.variables.size();

  if (root.contains("curve")) {
    const json& c = root["curve"];
    rd.only_keys(c, "/curve", {"defining_poly", "components"});
    if (c.contains("defining_poly") == c.contains("components"))
      rd.fail("/curve", "give exactly one of defining_poly or components");
    if (c.contains("defining_poly")) {
      job.curve = rd.poly(c["defining_poly"], "/curve/defining_poly", job.variables);
    } else {
      Poly f = Poly::constant(job.variables, Rational(1));
      const json& comps = rd.array(c["components"], "/curve/components");
      if (comps.empty()) rd.fail("/curve/components", "empty");
      for (size_t i = 0; i < comps.size(); ++i)
        f = f * rd.poly(comps[i], "/curve/components/" + std::to_string(i), job.variables);
      job.curve = f;
    }
  }

  if (root.contains("normalization")) {
    const json& arr = rd.array(root["normalization"], "/normalization");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "/normalization/" + std::to_string(i);
      rd.only_keys(arr[i], at, {"defining_poly", "variables", "phi_map"});
      for (const char* k : {"defining_poly", "variables", "phi_map"})
        if (!arr[i].contains(k)) rd.fail(at + "/" + k, "required");
      std::vector<std::string> vars;
      for (const auto& v : rd.array(arr[i]["variables"], at + "/variables"))
        vars.push_back(rd.string(v, at + "/variables"));
      if (vars.size() != 2) rd.fail(at + "/variables", "a normalization lives in exactly two variables");
      NormalizationData nd;
      nd.relation = rd.poly(arr[i]["defining_poly"], at + "/defining_poly", vars);
      const json& phi = arr[i]["phi_map"];
      rd.only_keys(phi, at + "/phi_map", {job.variables.begin(), job.variables.end()});
      for (const auto& name : job.variables) {
        if (!phi.contains(name)) rd.fail(at + "/phi_map/" + name, "required");
        nd.phi.push_back(rd.poly(phi[name], at + "/phi_map/" + name, vars));
      }
      job.normalization.push_back(std::move(nd));
    }
  }
  if (!job.curve && job.normalization.empty() && !root.contains("isolated_points"))
    rd.fail("/curve", "a job needs a curve, a normalization or isolated points");

  if (root.contains("isolated_points")) {
    const json& arr = rd.array(root["isolated_points"], "/isolated_points");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "/isolated_points/" + std::to_string(i);
      std::vector<Rational> p;
      for (const auto& c : rd.array(arr[i], at)) p.push_back(rd.rational(c, at));
      if (p.size() != n) rd.fail(at, "expected " + std::to_string(n) + " coordinates");
      job.isolated_points.push_back(std::move(p));
    }
  }

  if (root.contains("generators")) {
    const json& arr = rd.array(root["generators"], "/generators");
    for (size_t i = 0; i < arr.size(); ++i)
      job.generators.push_back(rd.poly(arr[i], "/generators/" + std::to_string(i), job.variables));
  }

  if (root.contains("level")) job.level = static_cast<int>(rd.integer(root["level"], "/level", 1));
  if (root.contains("subspaces")) {
    const json& arr = rd.array(root["subspaces"], "/subspaces");
    if (arr.size() != job.generators.size() + 1)
      rd.fail("/subspaces", "expected one subspace for 1 and one per generator");
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "/subspaces/" + std::to_string(i);
      std::vector<ElementText> w;
      for (const auto& e : rd.array(arr[i], at)) {
        if (e.is_string()) {
          w.push_back({e.get<std::string>()});
          continue;
        }
        ElementText t;
        for (const auto& part : rd.array(e, at)) t.push_back(rd.string(part, at));
        w.push_back(std::move(t));
      }
      job.subspaces.push_back(std::move(w));
    }
  }

  if (root.contains("box")) {
    const json& b = root["box"];
    rd.only_keys(b, "/box", {job.variables.begin(), job.variables.end()});
    for (const auto& [name, range] : b.items()) {
      const std::string at = "/box/" + name;
      if (!range.is_array() || range.size() != 2) rd.fail(at, "expected [lo, hi]");
      const double lo = rd.number(range[0], at), hi = rd.number(range[1], at);
      if (!(lo < hi)) rd.fail(at, "empty range");
      job.box[name] = {lo, hi};
    }
  }
  if (root.contains("tol")) {
    job.tol = rd.number(root["tol"], "/tol");
    if (!(job.tol > 0)) rd.fail("/tol", "must be positive");
  }
  if (root.contains("max_level")) job.max_level = static_cast<int>(rd.integer(root["max_level"], "/max_level", 1));
  if (root.contains("grid")) job.grid = static_cast<int>(rd.integer(root["grid"], "/grid", 10));
  if (root.contains("seed")) job.seed = static_cast<unsigned>(rd.integer(root["seed"], "/seed", 0));
  if (root.contains("chart_delta")) {
    job.chart_delta = rd.number(root["chart_delta"], "/chart_delta");
    if (!(*job.chart_delta > 0)) rd.fail("/chart_delta", "must be positive");
  }
  if (root.contains("directions")) {
    const json& d = root["directions"];
    if (d.is_number_integer()) {
      if (n != 2) rd.fail("/directions", "a direction count is only meaningful in the plane");
      const long k = rd.integer(d, "/directions", 3);
      for (long i = 0; i < k; ++i) {
        const double a = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
        job.directions.push_back({std::cos(a), std::sin(a)});
      }
    } else {
      const json& arr = rd.array(d, "/directions");
      for (size_t i = 0; i < arr.size(); ++i) {
        const std::string at = "/directions/" + std::to_string(i);
        std::vector<double> c;
        for (const auto& v : rd.array(arr[i], at)) c.push_back(rd.number(v, at));
        if (c.size() != n) rd.fail(at, "expected " + std::to_string(n) + " components");
        job.directions.push_back(std::move(c));
      }
    }
  }
  if (root.contains("out")) jf.out = rd.string(root["out"], "/out");
  return jf;
}

namespace detail {

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

/// Machine-readable report. The provenance block repeats the job document
/// and every setting the run depended on, so the run can be redone from it.
inline nlohmann::json report_json(const CertReport& r, const JobFile& jf) {
  using detail::json;
  json out;
  out["status"] = to_string(r.status);
  out["reason"] = r.reason;
  out["level"] = r.level;
  out["gap"] = detail::finite_or_null(r.gap);
  out["tol"] = r.tol;
  out["block_sizes"] = r.block_sizes;
  json levels = json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"level", l.level}, {"gap", detail::finite_or_null(l.gap)}, {"block_sizes", l.block_sizes},
                      {"note", l.note}});
  out["levels"] = levels;
  json rays = json::array();
  for (const auto& ray : r.fan.rays) rays.push_back(ray.direction);
  out["recession_rays"] = rays;
  json w = json::array();
  for (const auto& c : r.w) w.push_back(to_string(c));
  out["chart_functional"] = w;
  if (r.pencil) out["pencil"] = {{"x", r.pencil->x_names}, {"lifted", r.pencil->k()}, {"blocks", r.pencil->blocks.size()}};

  const CurveJob& job = jf.job;
  json prov;
  prov["job_file"] = jf.origin;
  prov["job"] = jf.source;
  prov["seed"] = job.seed;
  prov["tol"] = job.tol;
  prov["max_level"] = job.max_level;
  prov["level"] = job.level ? json(*job.level) : json(nullptr);
  prov["grid"] = job.grid;
  json box = json::object();
  for (const auto& [name, range] : job.box) box[name] = {range.first, range.second};
  prov["box"] = box;
  prov["chart_delta"] = job.chart_delta ? json(*job.chart_delta) : json(nullptr);
  prov["bases"] = r.bases;
  prov["generators"] = r.generators;
  prov["directions"] = r.directions.size();
  prov["solver"] = {{"feas_tol", sdp::Options{}.feas_tol}, {"gap_tol", sdp::Options{}.gap_tol}};
  out["provenance"] = prov;
  return out;
}

inline JobFile load_job(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError(path + ": cannot open job file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_job(ss.str(), path);
}

}  // namespace curvehull
