// Diagnostics reports: JSON for machines, aligned text for people, CSV curves for plotting.
#pragma once

#include "nlreg/diagnostics.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nlreg {

using Json = nlohmann::ordered_json;

struct ProbeRecord {
  std::string key;       ///< records are sorted by key before output
  Verdict verdict = Verdict::Inconclusive;
  std::string property;  ///< the property the probe checks, printed on FAIL lines
  std::string summary;
  Json data = Json::object();
};

struct CurveRecord {
  std::string key;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

class DiagnosticsReport {
 public:
  std::string title;
  std::string config_hash;
  std::vector<ProbeRecord> probes;
  std::vector<CurveRecord> curves;

  void add(ProbeRecord record) { probes.push_back(std::move(record)); }
  void add_curve(CurveRecord curve) { curves.push_back(std::move(curve)); }
  /// FAIL if any probe failed, PASS if every probe passed, INCONCLUSIVE otherwise.
  Verdict overall() const;
  Json to_json() const;
  std::string to_text() const;
  /// Writes <stem>.json, <stem>.txt and <stem>_<curve>.csv into `dir`.
  void write(const std::filesystem::path& dir, const std::string& stem) const;

 private:
  std::vector<const ProbeRecord*> sorted() const;
};

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Common probe records.
ProbeRecord growth_record(const std::string& key, const GrowthProbe& p, const std::string& property);
CurveRecord growth_curve(const std::string& key, const GrowthProbe& p);

}  // namespace nlreg
