#include "nlreg/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nlreg {

namespace {

/// Node plus its dotted path, for error messages with line numbers.
struct Field {
  YAML::Node node;
  std::string path;

  [[noreturn]] void fail(const std::string& what) const {
    const auto mark = node.Mark();
    const int line = mark.line >= 0 ? mark.line + 1 : 0;
    throw Error(Errc::Schema, fmt::format("line {}, field '{}': {}", line, path, what));
  }
  bool has(const std::string& key) const { return node.IsMap() && node[key]; }
  Field at(const std::string& key) const {
    if (!has(key)) fail(fmt::format("missing key '{}'", key));
    return {node[key], path.empty() ? key : path + "." + key};
  }
  std::optional<Field> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Field{node[key], path.empty() ? key : path + "." + key};
  }
  void only(std::initializer_list<const char*> keys) const {
    if (!node.IsMap()) fail("expected a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const auto k = kv.first.as<std::string>();
      if (!allowed.count(k)) Field{kv.first, path.empty() ? k : path + "." + k}.fail("unknown key");
    }
  }
  double number() const {
    if (!node.IsScalar()) fail("expected a number");
    const auto text = node.as<std::string>();
    // Fractions such as 1/512 are accepted for readability.
    if (const auto slash = text.find('/'); slash != std::string::npos) {
      try {
        return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
      } catch (const std::exception&) {
        fail("expected a number");
      }
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) fail("expected a number");
      return v;
    } catch (const std::invalid_argument&) {
      fail("expected a number");
    } catch (const std::out_of_range&) {
      fail("number out of range");
    }
  }
  int integer() const {
    const double v = number();
    if (v != std::floor(v)) fail("expected an integer");
    return static_cast<int>(v);
  }
  std::string string() const {
    if (!node.IsScalar()) fail("expected a string");
    return node.as<std::string>();
  }
  std::string choice(std::initializer_list<const char*> options) const {
    const std::string v = string();
    for (const char* o : options)
      if (v == o) return v;
    std::string list;
    for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
    fail(fmt::format("'{}' is not one of {}", v, list));
  }
  Vec vec(int dim) const {
    if (!node.IsSequence()) fail("expected a list");
    if (static_cast<int>(node.size()) != dim) fail(fmt::format("expected {} components", dim));
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Field{node[i], fmt::format("{}[{}]", path, i)}.number();
    return v;
  }
  std::vector<double> list() const {
    if (!node.IsSequence()) fail("expected a list");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(Field{node[i], fmt::format("{}[{}]", path, i)}.number());
    return out;
  }
};

/// Either a list of radii or {from, to}: dyadic radii from `from` up to `to`.
std::vector<double> read_radii(const Field& f) {
  if (f.node.IsSequence()) return f.list();
  f.only({"from", "to"});
  const double a = f.at("from").number(), b = f.at("to").number();
  if (!(a > 0.0 && b >= a)) f.fail("need 0 < from <= to");
  std::vector<double> out;
  for (double r = a; r <= b * (1 + 1e-12); r *= 2.0) out.push_back(r);
  return out;
}

SourceSpec read_source(const Field& f, int dim, double s) {
  f.only({"family", "value", "amplitude", "beta", "center", "morrey_beta"});
  SourceSpec out;
  out.family = f.at("family").choice({"zero", "constant", "power"});
  out.center = Vec::Zero(dim);
  if (out.family == "constant") out.value = f.at("value").number();
  if (out.family == "power") {
    const Field b = f.at("beta");
    out.beta = b.number();
    if (!(out.beta >= 0.0 && out.beta < 2.0 * s))
      b.fail(fmt::format("Morrey exponent beta = {} must satisfy 0 <= beta < 2s = {}", out.beta, 2.0 * s));
    if (out.beta >= dim) b.fail("beta must be below N for local integrability");
    if (auto a = f.opt("amplitude")) out.amplitude = a->number();
    if (auto c = f.opt("center")) out.center = c->vec(dim);
  }
  if (auto m = f.opt("morrey_beta")) {
    out.morrey_beta = m->number();
    if (!(*out.morrey_beta >= 0.0 && *out.morrey_beta < 2.0 * s))
      m->fail(fmt::format("Morrey exponent {} must satisfy 0 <= beta < 2s = {}", *out.morrey_beta, 2.0 * s));
  }
  return out;
}

double source_beta(const SourceSpec& f) {
  if (f.morrey_beta) return *f.morrey_beta;
  return f.family == "power" ? f.beta : 0.0;
}

}  // namespace

ScalarSource SourceSpec::build(int dim) const {
  if (family == "constant") {
    const double v = value;
    return {[v](const Vec&) { return v; }, {}};
  }
  if (family == "power") {
    const double a = amplitude, b = beta;
    const Vec c = center.size() ? center : Vec(Vec::Zero(dim));
    return {[a, b, c](const Vec& x) {
              const double r = (x - c).norm();
              return r == 0.0 ? 0.0 : a * std::pow(r, -b);
            },
            {c}};
  }
  return {[](const Vec&) { return 0.0; }, {}};
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::Schema, fmt::format("line {}: {}", e.mark.line + 1, e.msg));
  }
  const Field top{root, ""};
  top.only({"name", "seed", "output", "kernel", "domain", "grid", "f", "V", "exterior", "solver", "probes"});
  ExperimentConfig c;
  c.text = text;
  c.hash = fnv1a_hex(text);
  c.base_dir = base_dir;
  c.name = top.at("name").string();
  if (auto sd = top.opt("seed")) {
    try {
      c.seed = std::stoull(sd->string(), nullptr, 0);
    } catch (const std::exception&) {
      sd->fail("expected an integer seed (hex with 0x allowed)");
    }
  }
  c.output = base_dir / (top.has("output") ? top.at("output").string() : "out/" + c.name);

  const Field k = top.at("kernel");
  k.only({"family", "s", "dim", "anisotropy", "rho"});
  c.kernel_family = k.at("family").choice({"mu_isotropic", "mu_anisotropic", "perturbed", "flattening", "asymmetric_test"});
  const Field sf = k.at("s");
  c.s = sf.number();
  if (!(c.s > 0.0 && c.s < 1.0)) sf.fail("s must lie in (0, 1)");
  const Field df = k.at("dim");
  c.dim = df.integer();
  if (c.dim < 1 || c.dim > 2) df.fail("dim must be 1 or 2");
  if (auto a = k.opt("anisotropy")) c.anisotropy = a->number();
  if (auto r = k.opt("rho")) c.rho = r->number();
  if (c.kernel_family == "flattening" && c.dim != 2) k.at("family").fail("flattening kernels need dim 2");

  const Field d = top.at("domain");
  d.only({"shape", "a", "b", "lo", "hi", "center", "radius", "curvature", "regularity_radius"});
  c.domain_shape = d.at("shape").choice({"interval", "half_space", "ball", "box", "parabola"});
  if (c.domain_shape == "interval") {
    if (c.dim != 1) d.at("shape").fail("intervals need dim 1");
    c.domain_lo = make_vec({d.at("a").number()});
    c.domain_hi = make_vec({d.at("b").number()});
    if (!(c.domain_hi(0) > c.domain_lo(0))) d.at("b").fail("need a < b");
  } else if (c.domain_shape == "box") {
    c.domain_lo = d.at("lo").vec(c.dim);
    c.domain_hi = d.at("hi").vec(c.dim);
  } else if (c.domain_shape == "ball") {
    c.ball_center = d.at("center").vec(c.dim);
    c.ball_radius = d.at("radius").number();
  } else if (c.domain_shape == "parabola") {
    if (c.dim != 2) d.at("shape").fail("parabola domains need dim 2");
    if (auto cv = d.opt("curvature")) c.curvature = cv->number();
  }
  if (auto r0 = d.opt("regularity_radius")) c.regularity_radius = r0->number();

  const Field g = top.at("grid");
  g.only({"h", "cells_per_unit", "lo", "hi"});
  if (g.has("h")) c.h = g.at("h").number();
  else c.h = 1.0 / g.at("cells_per_unit").number();
  if (!(c.h > 0.0)) g.fail("grid spacing must be positive");
  if (auto lo = g.opt("lo")) c.grid_lo = lo->vec(c.dim);
  if (auto hi = g.opt("hi")) c.grid_hi = hi->vec(c.dim);
  if (!c.grid_lo.size() || !c.grid_hi.size()) {
    if (c.domain_shape == "interval" || c.domain_shape == "box") {
      c.grid_lo = c.domain_lo;
      c.grid_hi = c.domain_hi;
    } else if (c.domain_shape == "ball") {
      c.grid_lo = c.ball_center.array() - c.ball_radius;
      c.grid_hi = c.ball_center.array() + c.ball_radius;
    } else {
      g.fail("unbounded domains need explicit grid lo and hi");
    }
  }
  std::size_t nodes = 1;
  for (int a = 0; a < c.dim; ++a) nodes *= static_cast<std::size_t>(std::llround((c.grid_hi(a) - c.grid_lo(a)) / c.h)) + 1;
  if ((c.dim == 1 && nodes > 4097) || (c.dim == 2 && nodes > 257 * 257))
    g.fail(fmt::format("{} nodes exceed the desk-scale limit", nodes));

  c.f = top.has("f") ? read_source(top.at("f"), c.dim, c.s) : SourceSpec{};
  if (auto v = top.opt("V")) {
    c.V = read_source(*v, c.dim, c.s);
    c.has_V = true;
  }
  if (auto e = top.opt("exterior")) {
    e->only({"kind", "slope", "offset"});
    c.exterior = e->at("kind").choice({"zero", "affine", "halfspace_profile"});
    c.exterior_slope = Vec::Zero(c.dim);
    if (c.exterior == "affine") {
      c.exterior_slope = e->at("slope").vec(c.dim);
      if (auto o = e->opt("offset")) c.exterior_offset = o->number();
    }
  }
  if (auto so = top.opt("solver")) {
    so->only({"tol", "max_iter"});
    if (auto t = so->opt("tol")) c.solver.tol = t->number();
    if (auto m = so->opt("max_iter")) c.solver.max_iter = m->integer();
  }

  if (auto pl = top.opt("probes")) {
    if (!pl->node.IsSequence()) pl->fail("expected a list of probes");
    for (std::size_t i = 0; i < pl->node.size(); ++i) {
      const Field p{pl->node[i], fmt::format("probes[{}]", i)};
      p.only({"kind", "centers", "radii", "predicted", "width", "R", "target"});
      ProbeSpec ps;
      ps.kind = p.at("kind").choice(
          {"interior_growth", "boundary_growth", "quotient", "caccioppoli", "liouville", "q_curve", "morrey"});
      if (auto cs = p.opt("centers")) {
        if (!cs->node.IsSequence()) cs->fail("expected a list of points");
        for (std::size_t j = 0; j < cs->node.size(); ++j)
          ps.centers.push_back(Field{cs->node[j], fmt::format("{}[{}]", cs->path, j)}.vec(c.dim));
      }
      if (auto r = p.opt("radii")) ps.radii = read_radii(*r);
      if (auto pr = p.opt("predicted")) ps.predicted = pr->number();
      if (auto w = p.opt("width")) ps.width = w->number();
      if (auto R = p.opt("R")) ps.R = R->number();
      if (auto t = p.opt("target")) ps.target = t->choice({"affine", "halfspace"});
      if (ps.kind == "liouville" && ps.target.empty()) p.fail("liouville probes need a target");
      if ((ps.kind == "interior_growth" || ps.kind == "q_curve") && ps.centers.empty())
        p.fail("this probe needs centers");
      if (ps.kind != "caccioppoli" && ps.kind != "liouville" && ps.radii.empty() && ps.kind != "quotient")
        p.fail("this probe needs radii");
      c.probes.push_back(std::move(ps));
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error(Errc::Io, "cannot read " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  ExperimentConfig c = parse_config(ss.str(), file.parent_path());
  c.file = file;
  return c;
}

std::shared_ptr<const Kernel> ExperimentConfig::kernel() const {
  if (kernel_family == "mu_isotropic") return std::make_shared<Kernel>(Kernel::mu(s, dim));
  if (kernel_family == "mu_anisotropic") {
    const AnisotropyDensity b = dim == 2 ? AnisotropyDensity::cosine(anisotropy) : AnisotropyDensity::constant(1.0 + anisotropy);
    return std::make_shared<Kernel>(Kernel::mu(s, dim, b));
  }
  if (kernel_family == "perturbed") {
    const double eps = anisotropy;
    auto lambda = [eps](const Vec& x, const Vec& y) { return eps * std::exp(-0.25 * (x + y).squaredNorm()); };
    return std::make_shared<Kernel>(Kernel::perturbed(s, dim, AnisotropyDensity::constant(1.0), lambda,
                                                      fmt::format("{} exp(-|x+y|^2/4)", eps),
                                                      1.0 / (1.0 + std::abs(eps))));
  }
  if (kernel_family == "flattening") {
    const Domain dom = domain_shape == "parabola" ? domain()
                                                  : Domain::graph(BoundaryGraph::parabola(1, curvature), 1.0, 2);
    auto map = std::make_shared<FlatteningMap>(build_flattening(dom, rho));
    return std::make_shared<Kernel>(Kernel::diffeo(map, std::make_shared<Kernel>(Kernel::mu(s, dim))));
  }
  // asymmetric_test: deliberately violates K(x, y) = K(y, x).
  const double ss = s;
  auto k = [ss](const Vec& x, const Vec& y) { return mu1(x, y, ss) * (1.0 + 0.5 * std::tanh(x(0) - y(0))); };
  return std::make_shared<Kernel>(Kernel::general(s, dim, k, dim + 2.0 * s, "asymmetric test kernel", 0.5));
}

Domain ExperimentConfig::domain() const {
  Domain d = [&] {
    if (domain_shape == "interval") return Domain::interval(domain_lo(0), domain_hi(0));
    if (domain_shape == "box") return Domain::box(domain_lo, domain_hi);
    if (domain_shape == "ball") return Domain::ball(ball_center, ball_radius);
    if (domain_shape == "half_space") return Domain::half_space(dim);
    return Domain::graph(BoundaryGraph::parabola(dim - 1, curvature), 1.0, dim);
  }();
  if (regularity_radius) return Domain(d.shape(), d.dim(), *regularity_radius);
  return d;
}

Grid ExperimentConfig::grid() const { return Grid::cover(grid_lo, grid_hi, h); }

FarField ExperimentConfig::exterior_field() const {
  if (exterior == "affine") {
    const Vec a = exterior_slope;
    const double b = exterior_offset;
    return FarField::function([a, b](const Vec& x) { return b + a.dot(x); }, 1.0,
                              fmt::format("affine slope {}", a(0)));
  }
  if (exterior == "halfspace_profile") {
    const double ss = s;
    return FarField::function([ss](const Vec& x) { return std::pow(positive_part(x(x.size() - 1)), ss); }, s,
                              "max(x_N, 0)^s");
  }
  return FarField::zero();
}

DirichletProblem ExperimentConfig::problem() const {
  DirichletProblem p{kernel(), domain(), grid(), {}, std::nullopt, FarField::zero()};
  p.f = f.build(dim);
  if (has_V) p.V = V.build(dim);
  p.exterior = exterior_field();
  return p;
}

DiagnosticsReport run_probes(const ExperimentConfig& cfg, const DiscreteField& u) {
  DiagnosticsReport rep;
  rep.title = cfg.name;
  rep.config_hash = cfg.hash;
  const Domain domain = cfg.domain();
  const double s = cfg.s;
  const double beta = source_beta(cfg.f);
  const ScalarSource f = cfg.f.build(cfg.dim);
  for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
    const ProbeSpec& p = cfg.probes[i];
    const std::string key = fmt::format("p{:02d}_{}", i, p.kind);
    if (p.kind == "interior_growth") {
      const double pred = p.predicted.value_or(std::min(1.0, 2.0 * s - beta));
      const GrowthProbe g = interior_growth(u, domain, p.centers, p.radii, pred);
      rep.add(growth_record(key, g, "interior mean oscillation ||u - u_B||_{L^2(B_r)} <= C r^{N/2 + min(1, 2s - beta) - eps}"));
      rep.add_curve(growth_curve(key, g));
    } else if (p.kind == "boundary_growth") {
      const double pred = p.predicted.value_or(std::min(s, 2.0 * s - beta));
      const auto pts = p.centers.empty() ? domain.boundary_points_1d() : p.centers;
      const GrowthProbe g = boundary_growth(u, domain, pts, p.radii, pred);
      rep.add(growth_record(key, g, "boundary mass ||u||_{L^2(B_r(z))} <= C r^{N/2 + min(s, 2s - beta) - eps}"));
      rep.add_curve(growth_curve(key, g));
    } else if (p.kind == "quotient") {
      std::vector<double> scales = p.radii;
      if (scales.empty())
        for (double r = 4.0 * cfg.h; r <= 0.25 * p.width * (1 + 1e-12); r *= 2.0) scales.push_back(r);
      const QuotientReport q = quotient_regularity(u, domain, p.width, s, scales);
      const double pred = p.predicted.value_or(s - beta);
      ProbeRecord r;
      r.key = key;
      r.property = "u/d^s is Hoelder of order min(gamma, s - beta) up to the boundary";
      double decades = std::log10(scales.back() / scales.front());
      r.verdict = decades < 1.5 ? Verdict::Inconclusive : (q.exponent >= pred - 0.1 ? Verdict::Pass : Verdict::Fail);
      bool psi_pos = std::all_of(q.psi.begin(), q.psi.end(), [](double v) { return v > 0.0; });
      r.summary = fmt::format("exponent {} (predicted {:.3f}); psi {:.4f} (advisory: {})", q.label(), pred,
                              fmt::join(q.psi, ", "), psi_pos ? "positive" : "not positive");
      r.data["exponent"] = q.exponent;
      r.data["label"] = q.label();
      r.data["psi"] = q.psi;
      r.data["scales"] = scales;
      rep.add(std::move(r));
      for (std::size_t b = 0; b < q.holder.size(); ++b) {
        CurveRecord c{fmt::format("{}_strip{}", key, b), {"scale", "oscillation"}, {}};
        for (std::size_t j = 0; j < q.holder[b].scales.size(); ++j)
          c.rows.push_back({q.holder[b].scales[j], q.holder[b].oscillation[j]});
        rep.add_curve(std::move(c));
      }
    } else if (p.kind == "caccioppoli") {
      const CaccioppoliReport c = caccioppoli(u, *cfg.kernel(), f, Cutoff{p.R, Vec::Zero(cfg.dim)});
      ProbeRecord r;
      r.key = key;
      r.property = "Caccioppoli energy inequality with eps = 1/2";
      r.verdict = c.holds() ? Verdict::Pass : Verdict::Fail;
      r.summary = fmt::format("lhs {:.6e} rhs {:.6e} ratio {:.4f}", c.lhs, c.rhs, c.constant());
      r.data["lhs"] = c.lhs;
      r.data["rhs"] = c.rhs;
      rep.add(std::move(r));
    } else if (p.kind == "liouville") {
      const LiouvilleTarget t = p.target == "affine" ? LiouvilleTarget::Affine : LiouvilleTarget::HalfSpaceProfile;
      const Grid& g = u.grid();
      const double dist = liouville_distance(u, t, s, Region{g.lo(), g.hi()});
      ProbeRecord r;
      r.key = key;
      r.property = "entire solutions are affine (full space) or proportional to max(x_N, 0)^s (half space)";
      r.verdict = dist <= 0.05 ? Verdict::Pass : Verdict::Fail;
      r.summary = fmt::format("relative L2 distance to the {} family {:.3e}", p.target, dist);
      r.data["distance"] = dist;
      rep.add(std::move(r));
    } else if (p.kind == "q_curve") {
      for (std::size_t j = 0; j < p.centers.size(); ++j) {
        const QCurve q = q_curve(u, domain, p.centers[j], p.radii, s);
        ProbeRecord r;
        r.key = fmt::format("{}_{}", key, j);
        r.property = "Q_{u,z}(r) is Cauchy as r -> 0";
        r.verdict = q.cauchy_fitted ? (q.cauchy.decades < 1.5 ? Verdict::Inconclusive
                                                                : (q.cauchy.slope > 0.0 ? Verdict::Pass : Verdict::Fail))
                                    : Verdict::Inconclusive;
        r.summary = q.cauchy_fitted ? fmt::format("Q({:.4g}) = {:.6f}, difference decay exponent {:.3f}", p.radii.front(),
                                                  q.Q.front(), q.cauchy.slope)
                                    : fmt::format("Q({:.4g}) = {:.6f}, differences at round-off", p.radii.front(), q.Q.front());
        r.data["radii"] = q.radii;
        r.data["Q"] = q.Q;
        CurveRecord c{r.key, {"radius", "Q"}, {}};
        for (std::size_t m = 0; m < q.radii.size(); ++m) c.rows.push_back({q.radii[m], q.Q[m]});
        rep.add(std::move(r));
        rep.add_curve(std::move(c));
      }
    } else if (p.kind == "morrey") {
      const double norm = morrey_norm(u, beta, s, p.centers.empty() ? std::vector<Vec>{Vec::Zero(cfg.dim)} : p.centers,
                                      p.radii);
      ProbeRecord r;
      r.key = key;
      r.property = "the field lies in the Morrey space M_beta";
      r.verdict = std::isfinite(norm) ? Verdict::Pass : Verdict::Fail;
      r.summary = fmt::format("Morrey norm {:.6e} at beta {:.3f}", norm, beta);
      r.data["norm"] = norm;
      rep.add(std::move(r));
    }
  }
  return rep;
}

}  // namespace nlreg
