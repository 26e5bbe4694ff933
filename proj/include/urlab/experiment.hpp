#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urlab/carleson.hpp"
#include "urlab/elliptic.hpp"
#include "urlab/urdiag.hpp"

namespace urlab {

// Flat key-value configuration with dotted sections, one `key = value` pair
// per line, '#' comments.
class ExperimentConfig {
 public:
  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_text(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  std::string canonical_text() const;  // sorted key=value dump
  std::string hash() const;            // FNV-1a 64 over the canonical text
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

 private:
  std::map<std::string, std::string> kv_;
};

// Named coefficient catalog: identity, log_oscillating (1 + sin(ln t)/2)I,
// integrable_decay (1 + t/(1+t))I, anisotropic diag(1,2), cross (constant
// off-diagonal entries).
std::function<Matrix(const Vector&)> make_coeff(const std::string& name, int n);

BoundarySample boundary_from_config(const ExperimentConfig& cfg);
DomainBox domain_from_config(const ExperimentConfig& cfg, const BoundarySample& sample);
OperatorSpec operator_from_config(const ExperimentConfig& cfg, const BoundarySample& sample);

struct ExperimentResult {
  std::string bundle_dir;
  std::vector<std::string> files;
  int exit_code = 0;  // 0 ok, 2 validation, 3 numerical
  std::string message;
};

// Executes one CLI verb (gen-boundary, solve, functional, bwgl, dichotomy)
// into out_root/bundle-<hash>/; deterministic given config + seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& verb,
                                const std::string& out_root);

// Grayscale SVG of a 2-D slice (fixed last coordinate for 3-D fields).
void write_svg_slice(const ScalarField& f, const std::string& path);

}  // namespace urlab
