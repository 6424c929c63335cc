#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "noncelab/experiment.hpp"

namespace noncelab::cli {

/// Flat key=value run configuration. Every key has a default; unknown keys
/// are rejected with ConfigError.
class RunConfig {
 public:
  RunConfig();

  /// Reads "key = value" lines; '#' starts a comment.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  bool explicitly_set(const std::string& key) const { return explicit_.count(key) != 0; }

  const std::string& str(const std::string& key) const;
  double real(const std::string& key) const;
  uint64_t u64(const std::string& key) const;
  size_t size(const std::string& key) const { return static_cast<size_t>(u64(key)); }
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<size_t> sizes(const std::string& key) const;

  SimConfig sim() const;
  /// Built-in name or "<file>[:name]".
  CurveParams curve() const;
  /// Points into `curve`, which must outlive the result.
  ScalarTraceSpec spec(const CurveParams& curve) const;

  /// Sorted "key = value" lines of the effective configuration, minus the
  /// output directory itself.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> explicit_;
};

}  // namespace noncelab::cli
