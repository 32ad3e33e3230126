// Geometric input data: a Riemannian metric a_ij(x) and a 1-form b_i(x)
// defined through expressions, loaded from JSON documents. A small catalog of
// ready-made fields ships as config files next to the sources.

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "kropina/expr.hpp"
#include "kropina/tensor.hpp"

namespace kropina {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FieldSpec {
  std::string name;
  std::string description;
  int n = 0;
  std::vector<std::string> def_names;
  std::vector<Expr> defs;                    // evaluated in order
  Matrix<Expr> metric;                       // full symmetric matrix of exprs
  std::vector<Expr> oneform;
  std::vector<std::array<double, 2>> guard;  // coordinate box

  bool in_guard(std::span<const double> x) const;
  std::string config_text;  // original document, kept for hashing/round trips
};

// Parses and validates a field configuration document (see README for the
// schema). Validation probes the guard box: the metric must be symmetric
// positive definite and b^2 = a^{ij} b_i b_j >= 1e-6 at every probe point.
FieldSpec parse_field_config(const std::string& json_text);

// Everything eval_field derives from the expressions at one point.
template <class S>
struct FieldEval {
  Matrix<S> a;
  Matrix<S> a_inv;
  S det_a;
  std::vector<S> b;     // b_i
  std::vector<S> b_up;  // b^i = a^{ij} b_j
  S b2;                 // a^{ij} b_i b_j
};

FieldEval<double> eval_field(const FieldSpec& spec, std::span<const double> x);
FieldEval<Jet> eval_field(const FieldSpec& spec, std::span<const Jet> x);

// Catalog access. `random-poly` is generated deterministically from the seed;
// the other entries load their config files verbatim.
std::vector<std::string> catalog_names();
std::string catalog_document(const std::string& name, uint64_t seed);
FieldSpec load_catalog(const std::string& name, uint64_t seed);

// The generated document text for the seeded generic instance.
std::string random_poly_document(uint64_t seed);

}  // namespace kropina
