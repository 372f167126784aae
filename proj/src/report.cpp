#include "nlreg/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>

namespace nlreg {

Verdict DiagnosticsReport::overall() const {
  bool all_pass = !probes.empty();
  for (const auto& p : probes) {
    if (p.verdict == Verdict::Fail) return Verdict::Fail;
    all_pass &= p.verdict == Verdict::Pass;
  }
  return all_pass ? Verdict::Pass : Verdict::Inconclusive;
}

std::vector<const ProbeRecord*> DiagnosticsReport::sorted() const {
  std::vector<const ProbeRecord*> out;
  for (const auto& p : probes) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->key < b->key; });
  return out;
}

Json DiagnosticsReport::to_json() const {
  Json j;
  j["title"] = title;
  j["config_hash"] = config_hash;
  j["verdict"] = verdict_name(overall());
  Json list = Json::array();
  for (const ProbeRecord* p : sorted()) {
    Json e;
    e["key"] = p->key;
    e["verdict"] = verdict_name(p->verdict);
    e["property"] = p->property;
    e["summary"] = p->summary;
    e["data"] = p->data;
    list.push_back(std::move(e));
  }
  j["probes"] = std::move(list);
  return j;
}

std::string DiagnosticsReport::to_text() const {
  const auto order = sorted();
  std::size_t wk = 5, wv = 7;
  for (const ProbeRecord* p : order) {
    wk = std::max(wk, p->key.size());
    wv = std::max(wv, std::string_view(verdict_name(p->verdict)).size());
  }
  std::string out = fmt::format("{}\nconfig {}\n\n", title, config_hash);
  out += fmt::format("{:<{}}  {:<{}}  {}\n", "probe", wk, "verdict", wv, "summary");
  for (const ProbeRecord* p : order) {
    out += fmt::format("{:<{}}  {:<{}}  {}\n", p->key, wk, verdict_name(p->verdict), wv, p->summary);
    if (p->verdict == Verdict::Fail) out += fmt::format("{:<{}}  violated: {}\n", "", wk + wv + 2, p->property);
  }
  out += fmt::format("\noverall {}\n", verdict_name(overall()));
  return out;
}

void DiagnosticsReport::write(const std::filesystem::path& dir, const std::string& stem) const {
  std::filesystem::create_directories(dir);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error(Errc::Io, "cannot write " + p.string());
    return os;
  };
  open(dir / (stem + ".json")) << to_json().dump(2) << '\n';
  open(dir / (stem + ".txt")) << to_text();
  for (const auto& c : curves) {
    auto os = open(dir / fmt::format("{}_{}.csv", stem, c.key));
    for (std::size_t i = 0; i < c.columns.size(); ++i) os << (i ? "," : "") << c.columns[i];
    os << '\n';
    for (const auto& row : c.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt::format("{:.12g}", row[i]);
      os << '\n';
    }
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

ProbeRecord growth_record(const std::string& key, const GrowthProbe& p, const std::string& property) {
  ProbeRecord r;
  r.key = key;
  r.verdict = p.verdict;
  r.property = property;
  r.summary = fmt::format("alpha {} (predicted {:.3f}, decades {:.2f}){}", p.alpha_label(), p.predicted,
                          p.fit.decades, p.note.empty() ? "" : "; " + p.note);
  r.data["alpha"] = p.alpha;
  r.data["alpha_label"] = p.alpha_label();
  r.data["predicted"] = p.predicted;
  r.data["slope"] = p.fit.slope;
  r.data["fit_residual"] = p.fit.residual;
  r.data["decades"] = p.fit.decades;
  r.data["radii"] = p.radii;
  r.data["sup_mass"] = p.sup_curve;
  return r;
}

CurveRecord growth_curve(const std::string& key, const GrowthProbe& p) {
  CurveRecord c;
  c.key = key;
  c.columns = {"radius", "sup_mass"};
  for (std::size_t i = 0; i < p.radii.size(); ++i) c.rows.push_back({p.radii[i], p.sup_curve[i]});
  return c;
}

}  // namespace nlreg
