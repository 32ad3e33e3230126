#include "kropina/field.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kropina/linalg.hpp"
#include "kropina/sampling.hpp"

namespace kropina {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class S>
FieldEval<S> eval_field_impl(const FieldSpec& spec, std::span<const S> x) {
  const int n = spec.n;
  FieldEval<S> out;
  std::vector<S> defs;
  defs.reserve(spec.defs.size());
  for (const Expr& d : spec.defs)
    defs.push_back(d.eval<S>(x, defs));
  out.a = Matrix<S>(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      S v = spec.metric(i, j).eval<S>(x, defs);
      out.a(i, j) = v;
      if (i != j) out.a(j, i) = v;
    }
  out.b.reserve(n);
  for (int i = 0; i < n; ++i) out.b.push_back(spec.oneform[i].eval<S>(x, defs));

  LuFactor<S> f = lu_factor(out.a);
  out.det_a = lu_det(f);
  out.b_up = lu_solve(f, out.b);
  out.b2 = out.b[0] * out.b_up[0];
  for (int i = 1; i < n; ++i) out.b2 += out.b[i] * out.b_up[i];
  if constexpr (std::is_same_v<S, double>) {
    out.a_inv = lu_inverse(f, 0.0, 1.0);
  } else {
    out.a_inv = lu_inverse(f, Jet::constant(x[0], 0.0), Jet::constant(x[0], 1.0));
  }
  return out;
}

void probe_guards(const FieldSpec& spec) {
  const int n = spec.n;
  std::vector<std::vector<double>> probes;
  std::vector<double> center(n);
  for (int i = 0; i < n; ++i)
    center[i] = 0.5 * (spec.guard[i][0] + spec.guard[i][1]);
  probes.push_back(center);
  // box corners (n <= 6 keeps this small)
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i)
      c[i] = (mask >> i) & 1 ? spec.guard[i][1] : spec.guard[i][0];
    probes.push_back(std::move(c));
  }
  Rng rng = make_stream(0x9e3779b97f4a7c15ull, 7);
  for (int k = 0; k < 16; ++k) {
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i)
      c[i] = spec.guard[i][0] + rng.uniform() * (spec.guard[i][1] - spec.guard[i][0]);
    probes.push_back(std::move(c));
  }
  for (const auto& p : probes) {
    FieldEval<double> fe;
    try {
      fe = eval_field(spec, p);
    } catch (const DomainError& e) {
      throw ConfigError("field '" + spec.name + "' fails to evaluate at a probe point: " + e.what());
    }
    if (!is_spd(fe.a))
      throw ConfigError("field '" + spec.name + "': metric not positive definite inside the guard box");
    if (fe.b2 < 1e-6)
      throw ConfigError("field '" + spec.name + "': b^2 below 1e-6 inside the guard box (degenerate 1-form)");
  }
}

}  // namespace

bool FieldSpec::in_guard(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n) return false;
  for (int i = 0; i < n; ++i)
    if (x[i] < guard[i][0] || x[i] > guard[i][1]) return false;
  return true;
}

FieldSpec parse_field_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config document: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config document must be an object");

  FieldSpec spec;
  spec.config_text = json_text;
  try {
    spec.name = doc.at("name").get<std::string>();
    spec.n = doc.at("dimension").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config missing name/dimension: ") + e.what());
  }
  if (spec.n < 2) throw ConfigError("dimension must be at least 2");
  if (spec.n > 6) throw ConfigError("dimension above desk scale (max 6)");
  if (doc.contains("description"))
    spec.description = doc["description"].get<std::string>();

  std::map<std::string, int> names;
  if (doc.contains("defs")) {
    const json& defs = doc["defs"];
    if (!defs.is_object()) throw ConfigError("defs must be an object");
    for (auto it = defs.begin(); it != defs.end(); ++it) {
      const std::string& key = it.key();
      if (key.size() >= 2 && key[0] == 'x' &&
          key.find_first_not_of("0123456789", 1) == std::string::npos)
        throw ConfigError("definition name '" + key + "' shadows a coordinate");
      try {
        spec.defs.push_back(parse_expr(it.value().get<std::string>(), names));
      } catch (const ParseError& e) {
        throw ConfigError("def '" + key + "': " + e.what());
      }
      names[key] = static_cast<int>(spec.def_names.size());
      spec.def_names.push_back(key);
    }
  }

  auto parse_entry = [&](const std::string& text, const std::string& where) {
    try {
      Expr e = parse_expr(text, names);
      if (e.max_var() > spec.n)
        throw ConfigError(where + ": coordinate beyond the declared dimension");
      return e;
    } catch (const ParseError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  };

  const json& mu = doc.at("metric_upper");
  if (!mu.is_array()) throw ConfigError("metric_upper must be an array of rows");
  spec.metric = Matrix<Expr>(spec.n);
  if (static_cast<int>(mu.size()) != spec.n)
    throw ConfigError("metric_upper must have one row per dimension");
  const bool full_rows = mu[0].is_array() && static_cast<int>(mu[0].size()) == spec.n;
  for (int i = 0; i < spec.n; ++i) {
    const json& row = mu[i];
    if (!row.is_array()) throw ConfigError("metric_upper rows must be arrays");
    const int expected = full_rows ? spec.n : spec.n - i;
    if (static_cast<int>(row.size()) != expected)
      throw ConfigError("metric_upper row " + std::to_string(i + 1) +
                        " has the wrong length");
    for (int k = 0; k < expected; ++k) {
      const int j = full_rows ? k : i + k;
      Expr e = parse_entry(row[k].get<std::string>(),
                           "metric entry (" + std::to_string(i + 1) + "," +
                               std::to_string(j + 1) + ")");
      if (full_rows && j < i) {
        // lower-triangle entry of a full matrix: must mirror the upper one
        if (!structurally_equal(e, spec.metric(j, i)))
          throw ConfigError("metric entries (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ") and (" +
                            std::to_string(j + 1) + "," + std::to_string(i + 1) +
                            ") differ: metric must be symmetric");
        continue;
      }
      spec.metric(i, j) = e;
      spec.metric(j, i) = e;
    }
  }

  const json& of = doc.at("oneform");
  if (!of.is_array() || static_cast<int>(of.size()) != spec.n)
    throw ConfigError("oneform must list one expression per dimension");
  for (int i = 0; i < spec.n; ++i)
    spec.oneform.push_back(
        parse_entry(of[i].get<std::string>(), "oneform entry " + std::to_string(i + 1)));

  spec.guard.assign(spec.n, {-0.8, 0.8});
  if (doc.contains("guard_box")) {
    const json& gb = doc["guard_box"];
    if (!gb.is_array() || static_cast<int>(gb.size()) != spec.n)
      throw ConfigError("guard_box must list one [lo, hi] pair per dimension");
    for (int i = 0; i < spec.n; ++i) {
      if (!gb[i].is_array() || gb[i].size() != 2)
        throw ConfigError("guard_box entries must be [lo, hi] pairs");
      spec.guard[i] = {gb[i][0].get<double>(), gb[i][1].get<double>()};
      if (!(spec.guard[i][0] < spec.guard[i][1]))
        throw ConfigError("guard_box entries must satisfy lo < hi");
    }
  }

  probe_guards(spec);
  return spec;
}

FieldEval<double> eval_field(const FieldSpec& spec, std::span<const double> x) {
  return eval_field_impl<double>(spec, x);
}

FieldEval<Jet> eval_field(const FieldSpec& spec, std::span<const Jet> x) {
  return eval_field_impl<Jet>(spec, x);
}

// ---------------------------------------------------------------------------
// Catalog

std::vector<std::string> catalog_names() {
  return {"euclidean-constant", "conformal-gradient", "sphere-hopf", "random-poly"};
}

std::string random_poly_document(uint64_t seed) {
  // identity-plus-small-quadratic metric with a cubic 1-form; coefficients
  // drawn from the given seed. Amplitudes keep the metric SPD on the default
  // guard box and b^2 of order one.
  const int n = 3;
  std::ostringstream out;
  Rng r = make_stream(seed, 1);
  auto coef = [&](double amp) { return fmt_double(amp * (2.0 * r.uniform() - 1.0)); };

  const char* vars[3] = {"x1", "x2", "x3"};
  auto quad = [&](double amp) {
    std::string s;
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        s += (s.empty() ? "" : " + ") + std::string("(") + coef(amp) + ")*" +
             vars[k] + "*" + vars[l];
      }
    return s;
  };
  auto cubic = [&](double amp) {
    std::string s;
    for (int k = 0; k < n; ++k)
      s += (s.empty() ? "" : " + ") + std::string("(") + coef(amp) + ")*" + vars[k];
    for (int k = 0; k < n; ++k)
      s += " + (" + std::string(coef(amp)) + ")*" + vars[k] + "^2";
    s += " + (" + std::string(coef(amp)) + ")*x1*x2*x3";
    return s;
  };

  out << "{\n  \"name\": \"random-poly\",\n";
  out << "  \"description\": \"identity plus a small seeded quadratic metric perturbation with a cubic 1-form; a generic instance with no special curvature structure\",\n";
  out << "  \"dimension\": 3,\n  \"metric_upper\": [\n";
  for (int i = 0; i < n; ++i) {
    out << "    [";
    for (int j = i; j < n; ++j) {
      std::string base = (i == j) ? "1 + " : "";
      out << "\"" << base << quad(0.04) << "\"";
      if (j + 1 < n) out << ", ";
    }
    out << "]";
    if (i + 1 < n) out << ",";
    out << "\n";
  }
  out << "  ],\n  \"oneform\": [\n";
  for (int i = 0; i < n; ++i) {
    std::string base = (i == 0) ? "1 + " : "";
    out << "    \"" << base << cubic(0.15) << "\"";
    if (i + 1 < n) out << ",";
    out << "\n";
  }
  out << "  ],\n  \"guard_box\": [[-0.8, 0.8], [-0.8, 0.8], [-0.8, 0.8]]\n}\n";
  return out.str();
}

std::string catalog_document(const std::string& name, uint64_t seed) {
  if (name == "random-poly") return random_poly_document(seed);
  auto names = catalog_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError("unknown catalog entry '" + name + "'");
  const std::string path = std::string(KROPINA_CATALOG_DIR) + "/" + name + ".json";
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FieldSpec load_catalog(const std::string& name, uint64_t seed) {
  return parse_field_config(catalog_document(name, seed));
}

}  // namespace kropina
