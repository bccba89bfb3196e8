#include "fapprox/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fapprox/families.hpp"

namespace fapprox {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
  }
}

const json& need(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing required key");
  return j.at(key);
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double get_double(const json& j, const std::string& path, const char* key, double fallback) {
  return j.contains(key) ? as_double(j.at(key), path + "." + key) : fallback;
}

int get_int(const json& j, const std::string& path, const char* key, int fallback) {
  return j.contains(key) ? as_int(j.at(key), path + "." + key) : fallback;
}

Complex as_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {as_double(j, path), 0.0};
  if (j.is_array() && j.size() == 2) return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]")};
  fail(path, "expected a number or a [re, im] pair");
}

std::vector<double> as_doubles(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> as_ints(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vector as_vector(const json& j, const std::string& path, int dim) {
  if (!j.is_array()) fail(path, "expected an array");
  if (static_cast<int>(j.size()) != dim) fail(path, "expected " + std::to_string(dim) + " entries");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = as_complex(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Matrix as_matrix(const json& j, const std::string& path, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(path, "expected " + std::to_string(dim) + " rows");
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) m.row(r) = as_vector(j[r], path + "[" + std::to_string(r) + "]", dim).transpose();
  return m;
}

SpacePairPtr parse_space(const json& j) {
  const std::string p = "space";
  const std::string kind = as_string(need(j, p, "kind"), p + ".kind");
  try {
    if (kind == "identity") {
      allow_keys(j, p, {"kind", "dim"});
      return identity_space(as_int(need(j, p, "dim"), p + ".dim"));
    }
    if (kind == "diag") {
      allow_keys(j, p, {"kind", "h", "v"});
      return diagonal_space(as_doubles(need(j, p, "h"), p + ".h"), as_doubles(need(j, p, "v"), p + ".v"));
    }
    if (kind == "spectral-laplacian-1d") {
      allow_keys(j, p, {"kind", "modes"});
      return spectral_laplacian_1d(as_int(need(j, p, "modes"), p + ".modes"));
    }
    if (kind == "explicit") {
      allow_keys(j, p, {"kind", "gram_h", "gram_v"});
      const json& h = need(j, p, "gram_h");
      if (!h.is_array()) fail(p + ".gram_h", "expected an array");
      const int n = static_cast<int>(h.size());
      return build_space_pair(as_matrix(h, p + ".gram_h", n), as_matrix(need(j, p, "gram_v"), p + ".gram_v", n));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    fail(p, e.what());
  }
  fail(p + ".kind", "unknown space kind '" + kind + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

FormPath parse_form(const json& j, const SpacePairPtr& sp, double horizon, const std::string& base_dir) {
  const std::string p = "form";
  const std::string family = as_string(need(j, p, "family"), p + ".family");
  const int n = sp->dim();
  try {
    if (family == "scalar-poly") {
      allow_keys(j, p, {"family", "coeffs"});
      const json& c = need(j, p, "coeffs");
      if (!c.is_array() || c.empty()) fail(p + ".coeffs", "expected a non-empty array");
      return scalar_poly(sp, horizon, [&] {
        std::vector<Complex> v;
        for (std::size_t i = 0; i < c.size(); ++i) v.push_back(as_complex(c[i], p + ".coeffs[" + std::to_string(i) + "]"));
        return v;
      }());
    }
    if (family == "scalar-power") {
      allow_keys(j, p, {"family", "a", "b", "eta"});
      return scalar_power(sp, horizon, as_complex(need(j, p, "a"), p + ".a"), as_complex(need(j, p, "b"), p + ".b"),
                          as_double(need(j, p, "eta"), p + ".eta"));
    }
    if (family == "spectral-heat-1d") {
      allow_keys(j, p, {"family", "kappa_a", "kappa_b", "kappa_eta", "p0", "p1"});
      HeatParams hp;
      hp.kappa_a = get_double(j, p, "kappa_a", hp.kappa_a);
      hp.kappa_b = get_double(j, p, "kappa_b", hp.kappa_b);
      hp.kappa_eta = get_double(j, p, "kappa_eta", hp.kappa_eta);
      hp.potential0 = get_double(j, p, "p0", hp.potential0);
      hp.potential1 = get_double(j, p, "p1", hp.potential1);
      return spectral_heat(sp, horizon, hp);
    }
    if (family == "rotating-mix") {
      allow_keys(j, p, {"family", "diag", "rate", "eta"});
      RotatingParams rp;
      const Vector d = as_vector(need(j, p, "diag"), p + ".diag", n);
      rp.diag.assign(d.data(), d.data() + n);
      rp.rate = get_double(j, p, "rate", rp.rate);
      rp.eta = get_double(j, p, "eta", rp.eta);
      return rotating_mix(sp, horizon, rp);
    }
    if (family == "autonomous") {
      allow_keys(j, p, {"family", "matrix"});
      return autonomous(sp, horizon, as_matrix(need(j, p, "matrix"), p + ".matrix", n));
    }
    if (family == "table") {
      allow_keys(j, p, {"family", "times", "matrices", "path"});
      json table = j;
      std::string tp = p;
      if (j.contains("path")) {
        if (j.contains("times") || j.contains("matrices")) fail(p + ".path", "give either a path or inline samples");
        std::filesystem::path file = as_string(j.at("path"), p + ".path");
        if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
        table = read_json_file(file.string());
        tp = file.string();
        allow_keys(table, tp, {"times", "matrices"});
      }
      const std::vector<double> times = as_doubles(need(table, tp, "times"), tp + ".times");
      const json& mats = need(table, tp, "matrices");
      if (!mats.is_array() || mats.size() != times.size()) fail(tp + ".matrices", "expected one matrix per time");
      std::vector<Matrix> ms;
      for (std::size_t i = 0; i < mats.size(); ++i) {
        ms.push_back(as_matrix(mats[i], tp + ".matrices[" + std::to_string(i) + "]", n));
      }
      return table_path(sp, horizon, times, std::move(ms));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    fail(p, e.what());
  }
  fail(p + ".family", "unknown form family '" + family + "'");
}

// "zero", "constant" (value), "modes" (amplitude k^-decay), "table" (f only).
TimeFunction parse_datum(const json& j, const std::string& p, int dim, bool allow_table) {
  const std::string kind = as_string(need(j, p, "kind"), p + ".kind");
  if (kind == "zero") {
    allow_keys(j, p, {"kind"});
    const Vector z = Vector::Zero(dim);
    return [z](double) { return z; };
  }
  if (kind == "constant") {
    allow_keys(j, p, {"kind", "value"});
    const Vector v = as_vector(need(j, p, "value"), p + ".value", dim);
    return [v](double) { return v; };
  }
  if (kind == "modes") {
    allow_keys(j, p, {"kind", "amplitude", "decay"});
    const double amp = get_double(j, p, "amplitude", 1.0);
    const double decay = get_double(j, p, "decay", 0.0);
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = amp * std::pow(k + 1.0, -decay);
    return [v](double) { return v; };
  }
  if (kind == "table" && allow_table) {
    allow_keys(j, p, {"kind", "times", "values"});
    const std::vector<double> ts = as_doubles(need(j, p, "times"), p + ".times");
    const json& vals = need(j, p, "values");
    if (ts.empty() || !vals.is_array() || vals.size() != ts.size()) fail(p + ".values", "expected one vector per time");
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (!(ts[i] > ts[i - 1])) fail(p + ".times", "must be strictly increasing");
    }
    std::vector<Vector> vs;
    for (std::size_t i = 0; i < vals.size(); ++i) vs.push_back(as_vector(vals[i], p + ".values[" + std::to_string(i) + "]", dim));
    return [ts, vs](double t) -> Vector {
      if (t <= ts.front()) return vs.front();
      if (t >= ts.back()) return vs.back();
      const std::size_t k = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
      const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
      return (1.0 - w) * vs[k - 1] + w * vs[k];
    };
  }
  fail(p + ".kind", "unknown data kind '" + kind + "'");
}

SolverConfig parse_solver(const json& j) {
  const std::string p = "solver";
  allow_keys(j, p, {"cells", "gauss_order", "mu_cap", "tol", "max_iter", "substeps", "method"});
  SolverConfig s;
  s.cells = get_int(j, p, "cells", s.cells);
  s.gauss_order = get_int(j, p, "gauss_order", s.gauss_order);
  s.mu_cap = get_double(j, p, "mu_cap", s.mu_cap);
  s.tol = get_double(j, p, "tol", s.tol);
  s.max_iter = get_int(j, p, "max_iter", s.max_iter);
  s.substeps = get_int(j, p, "substeps", s.substeps);
  if (j.contains("method")) s.method = as_string(j.at("method"), p + ".method");
  if (s.cells < 1) fail(p + ".cells", "must be positive");
  if (s.gauss_order < 1 || s.gauss_order > 16) fail(p + ".gauss_order", "must lie in 1..16");
  if (s.mu_cap < 0.0) fail(p + ".mu_cap", "must be non-negative");
  if (!(s.tol > 0.0)) fail(p + ".tol", "must be positive");
  if (s.max_iter < 1) fail(p + ".max_iter", "must be positive");
  if (s.substeps < 1) fail(p + ".substeps", "must be positive");
  if (s.method != "at" && s.method != "oracle") fail(p + ".method", "expected \"at\" or \"oracle\"");
  return s;
}

StudyConfig parse_study(const json& j) {
  const std::string p = "study";
  allow_keys(j, p, {"ladder", "batch_size", "seed", "method"});
  StudyConfig s;
  if (j.contains("ladder")) s.ladder = as_ints(j.at("ladder"), p + ".ladder");
  s.batch_size = get_int(j, p, "batch_size", s.batch_size);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail(p + ".seed", "expected a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("method")) s.method = as_string(j.at("method"), p + ".method");
  if (s.ladder.empty()) fail(p + ".ladder", "must not be empty");
  for (std::size_t i = 0; i < s.ladder.size(); ++i) {
    if (s.ladder[i] < 1 || (i > 0 && s.ladder[i] <= s.ladder[i - 1])) {
      fail(p + ".ladder", "must be positive and strictly ascending");
    }
  }
  if (s.batch_size < 1) fail(p + ".batch_size", "must be positive");
  if (s.method != "at" && s.method != "oracle") fail(p + ".method", "expected \"at\" or \"oracle\"");
  return s;
}

VerifyConfig parse_verify(const json& j) {
  const std::string p = "verify";
  allow_keys(j, p, {"affine_ladder", "pair_samples", "contour_angle", "radius_cap", "contour_points", "contour_times",
                    "mu_ladder"});
  VerifyConfig v;
  if (j.contains("affine_ladder")) v.affine_ladder = as_ints(j.at("affine_ladder"), p + ".affine_ladder");
  v.pair_samples = get_int(j, p, "pair_samples", v.pair_samples);
  v.contour_angle = get_double(j, p, "contour_angle", v.contour_angle);
  v.radius_cap = get_double(j, p, "radius_cap", v.radius_cap);
  v.contour_points = get_int(j, p, "contour_points", v.contour_points);
  if (j.contains("contour_times")) v.contour_times = as_doubles(j.at("contour_times"), p + ".contour_times");
  if (j.contains("mu_ladder")) v.mu_ladder = as_doubles(j.at("mu_ladder"), p + ".mu_ladder");
  for (int m : v.affine_ladder) {
    if (m < 1) fail(p + ".affine_ladder", "entries must be positive");
  }
  if (v.pair_samples < 2) fail(p + ".pair_samples", "must be at least 2");
  if (v.contour_points < 0) fail(p + ".contour_points", "must be non-negative");
  if (!(v.radius_cap > 0.0)) fail(p + ".radius_cap", "must be positive");
  for (double s : v.contour_times) {
    if (!(s > 0.0)) fail(p + ".contour_times", "entries must be positive");
  }
  return v;
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }
  allow_keys(root, "config", {"space", "form", "gamma", "horizon", "data", "solver", "study", "verify"});
  const double horizon = get_double(root, "config", "horizon", 1.0);
  if (!(horizon > 0.0)) fail("config.horizon", "must be positive");
  const double gamma = as_double(need(root, "config", "gamma"), "config.gamma");
  if (gamma < 0.0 || gamma >= 1.0) fail("config.gamma", "must lie in [0, 1)");

  SpacePairPtr sp = parse_space(need(root, "config", "space"));
  const json& form_json = need(root, "config", "form");
  FormPath form = parse_form(form_json, sp, horizon, base_dir);

  const int n = sp->dim();
  TimeFunction f = [z = Vector(Vector::Zero(n))](double) { return z; };
  Vector u0 = Vector::Zero(n);
  if (root.contains("data")) {
    const json& d = root.at("data");
    allow_keys(d, "data", {"f", "u0"});
    if (d.contains("f")) f = parse_datum(d.at("f"), "data.f", n, true);
    if (d.contains("u0")) u0 = parse_datum(d.at("u0"), "data.u0", n, false)(0.0);
  }

  return ProblemConfig{sp,
                       form,
                       gamma,
                       horizon,
                       f,
                       u0,
                       root.contains("solver") ? parse_solver(root.at("solver")) : SolverConfig{},
                       root.contains("study") ? parse_study(root.at("study")) : StudyConfig{},
                       root.contains("verify") ? parse_verify(root.at("verify")) : VerifyConfig{},
                       form_json.at("family").get<std::string>()};
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace fapprox
