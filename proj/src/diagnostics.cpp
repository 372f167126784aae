#include "nlreg/diagnostics.hpp"

#include "nlreg/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace nlreg {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

BallQuadrature ball_quadrature(const DiscreteField& u, const Vec& z, double r) {
  const Grid& g = u.grid();
  const int n = g.dim();
  const double h = g.h();
  BallQuadrature q;
  const auto gl = quad::gauss_legendre(n == 1 ? 4 : 2);
  if (n == 1) {
    const double a = std::max(z(0) - r, g.lo()(0)), b = std::min(z(0) + r, g.hi()(0));
    if (!(b > a)) return q;
    const int first = static_cast<int>(std::floor((a - g.lo()(0)) / h));
    for (int i = std::max(first, 0); i + 1 < g.extent(0); ++i) {
      const double x0 = std::max(g.lo()(0) + i * h, a), x1 = std::min(g.lo()(0) + (i + 1) * h, b);
      if (x0 >= b) break;
      if (!(x1 > x0)) continue;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double t = gl.nodes[k], w = gl.weights[k];
        const Vec p = make_vec({0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t});
        q.points.push_back(p);
        q.weights.push_back(0.5 * (x1 - x0) * w);
        q.u.push_back(u.value(p));
      }
    }
    return q;
  }
  // N >= 2: tensor Gauss points of every cell, kept when inside the ball.
  std::array<int, kMaxDim> lo_idx{}, hi_idx{};
  for (int a = 0; a < n; ++a) {
    lo_idx[a] = std::max(0, static_cast<int>(std::floor((z(a) - r - g.lo()(a)) / h)));
    hi_idx[a] = std::min(g.extent(a) - 1, static_cast<int>(std::ceil((z(a) + r - g.lo()(a)) / h)));
  }
  const int m = static_cast<int>(gl.nodes.size());
  std::array<int, kMaxDim> c = lo_idx;
  while (true) {
    bool inside_box = true;
    for (int a = 0; a < n; ++a) inside_box &= c[a] < hi_idx[a];
    if (inside_box) {
      const Vec corner = g.node(c);
      int total = 1;
      for (int a = 0; a < n; ++a) total *= m;
      for (int k = 0; k < total; ++k) {
        Vec p(n);
        double w = 1.0;
        int rest = k;
        for (int a = 0; a < n; ++a) {
          const double t = gl.nodes[rest % m], wt = gl.weights[rest % m];
          rest /= m;
          p(a) = corner(a) + 0.5 * h * (1.0 + t);
          w *= 0.5 * h * wt;
        }
        if ((p - z).norm() <= r) {
          q.points.push_back(p);
          q.weights.push_back(w);
          q.u.push_back(u.value(p));
        }
      }
    }
    int a = 0;
    for (; a < n; ++a) {
      if (++c[a] < hi_idx[a]) break;
      c[a] = lo_idx[a];
    }
    if (a == n) break;
  }
  return q;
}

AffineProjection project_affine(const DiscreteField& u, const Vec& z, double r, double s) {
  const int n = u.grid().dim();
  const BallQuadrature q = ball_quadrature(u, z, r);
  const bool linear = s > 0.5;
  const int m = linear ? 1 + n : 1;
  auto basis = [&](const Vec& x, int j) { return j == 0 ? 1.0 : x(j - 1) - z(j - 1); };
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  double unorm = 0.0;
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    for (int i = 0; i < m; ++i) {
      b(i) += q.weights[k] * q.u[k] * basis(q.points[k], i);
      for (int j = 0; j < m; ++j) G(i, j) += q.weights[k] * basis(q.points[k], i) * basis(q.points[k], j);
    }
    unorm += q.weights[k] * q.u[k] * q.u[k];
  }
  AffineProjection out;
  out.z = z;
  out.r = r;
  out.T = Vec::Zero(n);
  if (q.points.empty()) return out;
  const Eigen::VectorXd c = G.ldlt().solve(b);
  out.t = c(0);
  for (int j = 1; j < m; ++j) out.T(j - 1) = c(j);
  Eigen::VectorXd ortho = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    double pu = 0.0;
    for (int j = 0; j < m; ++j) pu += c(j) * basis(q.points[k], j);
    const double res = q.u[k] - pu;
    out.residual_mass += q.weights[k] * res * res;
    for (int i = 0; i < m; ++i) ortho(i) += q.weights[k] * res * basis(q.points[k], i);
  }
  for (int i = 0; i < m; ++i) {
    const double scale = std::sqrt(unorm * G(i, i));
    if (scale > 0.0) out.orthogonality = std::max(out.orthogonality, std::abs(ortho(i)) / scale);
  }
  return out;
}

std::string GrowthProbe::alpha_label() const {
  if (all_zero) return "all-zero";
  if (at_cap) return fmt::format("≥ cap ({:.1f})", kGrowthCap);
  return fmt::format("{:.3f}", alpha);
}

namespace {

void check_radii(const Grid& g, const std::vector<double>& radii) {
  if (radii.size() < 4) throw Error(Errc::FitIllConditioned, "growth probes need at least 4 radii");
  for (double r : radii)
    if (r < 4.0 * g.h() * (1 - 1e-9))
      throw Error(Errc::InvalidArgument, fmt::format("radius {} below 4h = {}", r, 4.0 * g.h()));
}

/// Fits the sup curve, fills alpha and the verdict.
void finish_growth(GrowthProbe& p, int dim) {
  const std::size_t nr = p.radii.size();
  p.sup_curve.assign(nr, 0.0);
  for (const auto& row : p.mass)
    for (std::size_t j = 0; j < nr; ++j) p.sup_curve[j] = std::max(p.sup_curve[j], row[j]);
  const double top = *std::max_element(p.sup_curve.begin(), p.sup_curve.end());
  if (top == 0.0) {
    p.all_zero = true;
    p.verdict = Verdict::Inconclusive;
    p.note = "all-zero field";
    return;
  }
  // Masses at round-off level carry no exponent information.
  const double floor = 1e-26 * std::pow(p.radii.back(), dim);
  if (top <= floor) {
    p.at_cap = true;
    p.alpha = kGrowthCap;
    p.verdict = Verdict::Pass;
    p.note = "residual at numerical zero";
    return;
  }
  std::vector<double> rr, mm;
  for (std::size_t j = 0; j < nr; ++j)
    if (p.sup_curve[j] > floor) {
      rr.push_back(p.radii[j]);
      mm.push_back(p.sup_curve[j]);
    }
  p.fit = fit_loglog(rr, mm);
  p.alpha = 0.5 * (p.fit.slope - dim);
  if (p.alpha >= kGrowthCap) {
    p.at_cap = true;
    p.alpha = kGrowthCap;
  }
  if (p.fit.decades < 1.5) {
    p.verdict = Verdict::Inconclusive;
    p.note = fmt::format("scale window spans {:.2f} decades", p.fit.decades);
    return;
  }
  p.verdict = p.alpha >= p.predicted - 0.1 ? Verdict::Pass : Verdict::Fail;
}

}  // namespace

GrowthProbe interior_growth(const DiscreteField& u, const Domain& domain, const std::vector<Vec>& centers,
                            const std::vector<double>& radii, double predicted, bool affine, double s) {
  check_radii(u.grid(), radii);
  const double rmax = *std::max_element(radii.begin(), radii.end());
  for (const Vec& z : centers)
    if (domain.dist(z) < rmax * (1 - 1e-12))
      throw Error(Errc::RadiusEscapesDomain,
                  fmt::format("center at distance {:.4g} from the boundary, largest radius {:.4g}", domain.dist(z), rmax));
  GrowthProbe p;
  p.centers = centers;
  p.radii = radii;
  p.predicted = predicted;
  p.mass.assign(centers.size(), std::vector<double>(radii.size(), 0.0));
  const int total = static_cast<int>(centers.size() * radii.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < total; ++k) {
    const std::size_t c = static_cast<std::size_t>(k) / radii.size(), j = static_cast<std::size_t>(k) % radii.size();
    if (affine) {
      p.mass[c][j] = project_affine(u, centers[c], radii[j], s).residual_mass;
    } else {
      const BallQuadrature q = ball_quadrature(u, centers[c], radii[j]);
      double vol = 0.0, mean = 0.0;
      for (std::size_t i = 0; i < q.u.size(); ++i) {
        vol += q.weights[i];
        mean += q.weights[i] * q.u[i];
      }
      mean /= vol;
      double m = 0.0;
      for (std::size_t i = 0; i < q.u.size(); ++i) m += q.weights[i] * (q.u[i] - mean) * (q.u[i] - mean);
      p.mass[c][j] = m;
    }
  }
  finish_growth(p, u.grid().dim());
  return p;
}

GrowthProbe boundary_growth(const DiscreteField& u, const Domain& domain, const std::vector<Vec>& points,
                            const std::vector<double>& radii, double predicted) {
  check_radii(u.grid(), radii);
  const double rmax = *std::max_element(radii.begin(), radii.end());
  if (rmax > domain.regularity_radius() * (1 + 1e-12))
    throw Error(Errc::RadiusEscapesDomain,
                fmt::format("radius {:.4g} exceeds the regularity radius {:.4g}", rmax, domain.regularity_radius()));
  for (const Vec& z : points)
    if (!domain.on_boundary(z)) throw Error(Errc::InvalidArgument, "boundary_growth needs boundary points");
  GrowthProbe p;
  p.centers = points;
  p.radii = radii;
  p.predicted = predicted;
  p.mass.assign(points.size(), std::vector<double>(radii.size(), 0.0));
  const int total = static_cast<int>(points.size() * radii.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < total; ++k) {
    const std::size_t c = static_cast<std::size_t>(k) / radii.size(), j = static_cast<std::size_t>(k) % radii.size();
    const BallQuadrature q = ball_quadrature(u, points[c], radii[j]);
    double m = 0.0;
    for (std::size_t i = 0; i < q.u.size(); ++i) m += q.weights[i] * q.u[i] * q.u[i];
    p.mass[c][j] = m;
  }
  finish_growth(p, u.grid().dim());
  return p;
}

double ds2(const Domain& domain, const Vec& x, double s) {
  const Cutoff phi2{2.0, Vec::Zero(domain.dim())};
  const double c = phi2(x);
  return c == 0.0 ? 0.0 : c * std::pow(domain.dist(x), s);
}

BoundaryProjection project_ds(const DiscreteField& u, const Domain& domain, const Vec& z, double r, double s) {
  const BallQuadrature q = ball_quadrature(u, z, r);
  double num = 0.0, den = 0.0, unorm = 0.0;
  std::vector<double> d(q.points.size());
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    d[k] = ds2(domain, q.points[k], s);
    num += q.weights[k] * q.u[k] * d[k];
    den += q.weights[k] * d[k] * d[k];
    unorm += q.weights[k] * q.u[k] * q.u[k];
  }
  if (den < 1e-14)
    throw Error(Errc::DegenerateDenominator, fmt::format("int d^2s over B_{:.3g} is {:.3e}", r, den));
  BoundaryProjection out;
  out.z = z;
  out.r = r;
  out.Q = num / den;
  double ortho = 0.0;
  for (std::size_t k = 0; k < q.points.size(); ++k) ortho += q.weights[k] * (q.u[k] - out.Q * d[k]) * d[k];
  const double scale = std::sqrt(unorm * den);
  out.orthogonality = scale > 0.0 ? std::abs(ortho) / scale : 0.0;
  return out;
}

QCurve q_curve(const DiscreteField& u, const Domain& domain, const Vec& z, const std::vector<double>& radii,
               double s) {
  QCurve c;
  c.radii = radii;
  for (double r : radii) c.Q.push_back(project_ds(u, domain, z, r, s).Q);
  std::vector<double> rr, dq;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    const double diff = std::abs(c.Q[k] - c.Q[k + 1]);
    if (diff > 1e-15 * (1.0 + std::abs(c.Q[k]))) {
      rr.push_back(std::min(radii[k], radii[k + 1]));
      dq.push_back(diff);
    }
  }
  try {
    c.cauchy = fit_loglog(rr, dq);
    c.cauchy_fitted = true;
  } catch (const Error&) {
  }
  return c;
}

std::string QuotientReport::label() const {
  if (lipschitz_or_better) return "≥ cap (C^{0,1} or better)";
  return fmt::format("{:.3f}", exponent);
}

QuotientReport quotient_regularity(const DiscreteField& u, const Domain& domain, double strip_width, double s,
                                   const std::vector<double>& scales) {
  const Grid& g = u.grid();
  if (g.dim() != 1) throw Error(Errc::InvalidArgument, "quotient_regularity is implemented for N = 1");
  const double h = g.h();
  if (strip_width < 8.0 * h * (1 - 1e-12))
    throw Error(Errc::StripTooThin, fmt::format("strip width {:.4g} below 8h = {:.4g}", strip_width, 8.0 * h));

  // Quotient on the nodes, with the collar d < 2h filled by the nearest valid value.
  const int n = g.extent(0);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  std::vector<bool> valid(n, false);
  for (int i = 0; i < n; ++i) {
    const Vec x = g.node(static_cast<std::size_t>(i));
    const double d = domain.dist(x);
    if (d >= 2.0 * h * (1 - 1e-9)) {
      q(i) = u[static_cast<std::size_t>(i)] / std::pow(d, s);
      valid[i] = true;
    }
  }
  std::vector<int> left(n, -1), right(n, -1);
  for (int i = 0, last = -1; i < n; ++i) left[i] = last = valid[i] ? i : last;
  for (int i = n - 1, last = -1; i >= 0; --i) right[i] = last = valid[i] ? i : last;
  for (int i = 0; i < n; ++i) {
    if (valid[i]) continue;
    const int l = left[i], r = right[i];
    if (l < 0 && r < 0) throw Error(Errc::EmptyField, "no node with d >= 2h");
    q(i) = q(l < 0 || (r >= 0 && r - i < i - l) ? r : l);
  }
  const DiscreteField quotient(g, q);

  QuotientReport rep;
  rep.exponent = std::numeric_limits<double>::infinity();
  rep.lipschitz_or_better = true;
  const double r1 = 4.0 * h;
  for (const Vec& z : domain.boundary_points_1d()) {
    if (!g.contains(z, 1e-12)) continue;
    rep.boundary_points.push_back(z);
    rep.psi.push_back(2.0 * project_ds(u, domain, z, r1, s).Q - project_ds(u, domain, z, 2.0 * r1, s).Q);
    // Side of z that lies in the domain.
    const double side = domain.contains(z + make_vec({h})) ? 1.0 : -1.0;
    const double a = z(0), b = z(0) + side * strip_width;
    Region strip{make_vec({std::min(a, b)}), make_vec({std::max(a, b)})};
    const HolderFit fit = fit_holder(quotient, strip, scales);
    rep.holder.push_back(fit);
    if (!fit.lipschitz_or_better) rep.lipschitz_or_better = false;
    rep.exponent = std::min(rep.exponent, fit.lipschitz_or_better ? 1.0 : fit.exponent);
  }
  if (rep.boundary_points.empty()) throw Error(Errc::InvalidArgument, "no boundary point inside the grid");
  return rep;
}

namespace {

struct TestField {
  double L = 0.0;  ///< int |V| u^2
  double H = 0.0;  ///< [u]^2_{H^s(R)}
  double M = 0.0;  ///< |u|^2_{L^2}
};

/// Minimal c + c_delta subject to c H_k + c_delta M_k >= L_k / eta, c, c_delta >= 0.
std::pair<double, double> coercivity_lp(const std::vector<TestField>& t, double eta) {
  std::vector<std::pair<double, double>> cand;
  double c_only = 0.0, cd_only = 0.0;
  for (const auto& f : t) {
    c_only = std::max(c_only, f.L / (eta * f.H));
    cd_only = std::max(cd_only, f.L / (eta * f.M));
  }
  cand.emplace_back(c_only, 0.0);
  cand.emplace_back(0.0, cd_only);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const double det = t[i].H * t[j].M - t[j].H * t[i].M;
      if (std::abs(det) < 1e-14 * (t[i].H * t[j].M + t[j].H * t[i].M)) continue;
      const double c = (t[i].L * t[j].M - t[j].L * t[i].M) / (eta * det);
      const double cd = (t[i].H * t[j].L - t[j].H * t[i].L) / (eta * det);
      if (c >= 0.0 && cd >= 0.0) cand.emplace_back(c, cd);
    }
  std::pair<double, double> best{std::numeric_limits<double>::infinity(), 0.0};
  double best_sum = std::numeric_limits<double>::infinity();
  for (const auto& [c, cd] : cand) {
    bool ok = true;
    for (const auto& f : t) ok &= c * f.H + cd * f.M >= f.L / eta * (1 - 1e-10);
    if (ok && c + cd < best_sum) {
      best_sum = c + cd;
      best = {c, cd};
    }
  }
  return best;
}

std::vector<TestField> random_test_fields(const ScalarSource& V, double s, int count, std::uint64_t seed) {
  const double h = 1.0 / 128.0;
  const Grid g = Grid::cover(make_vec({-2.0}), make_vec({2.0}), h);
  const Region box{g.lo(), g.hi()};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(-0.8, 0.8), width(0.1, 0.4), amp(-1.0, 1.0);
  std::vector<TestField> out;
  for (int k = 0; k < count; ++k) {
    struct Bump {
      double c, w, a;
    };
    std::vector<Bump> bumps(3);
    for (auto& b : bumps) b = {centre(rng), width(rng), amp(rng)};
    // Smooth bumps supported in (-1.6, 1.6), well inside the box.
    auto u = [bumps](double x) {
      double v = 0.0;
      for (const auto& b : bumps) v += b.a * quintic_bump(std::abs(x - b.c) / (2.0 * b.w));
      return v;
    };
    TestField t;
    const DiscreteField field = DiscreteField::sample(g, [&](const Vec& x) { return u(x(0)); });
    const double inner = hs_seminorm(field, box, s);
    double outer = 0.0, mass = 0.0;
    const double a = box.lo(0), b = box.hi(0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.node(i)(0);
      const double w = (i == 0 || i + 1 == g.size()) ? 0.5 * h : h;
      const double v = field[i];
      mass += w * v * v;
      if (x > a && x < b) outer += w * v * v * (std::pow(x - a, -2.0 * s) + std::pow(b - x, -2.0 * s)) / (2.0 * s);
    }
    t.H = inner * inner + 2.0 * outer;
    t.M = mass;
    std::vector<double> breaks{-1.6};
    for (const Vec& p : V.singularities)
      if (p(0) > -1.6 && p(0) < 1.6) breaks.push_back(p(0));
    breaks.push_back(1.6);
    std::sort(breaks.begin(), breaks.end());
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j)
      t.L += quad::integrate_singular(
          [&](double x) {
            const double v = u(x);
            return std::abs(V.f(make_vec({x}))) * v * v;
          },
          breaks[j], breaks[j + 1], 1e-9);
    if (t.M > 0.0) out.push_back(t);
  }
  return out;
}

}  // namespace

CoercivityReport coercivity_check(const ScalarSource& V, double s, const std::vector<double>& deltas, int tests,
                                  std::uint64_t seed) {
  if (tests < 20) throw Error(Errc::InvalidArgument, "coercivity_check needs at least 20 test fields");
  const auto set = random_test_fields(V, s, 2 * tests, seed);
  const std::vector<TestField> half(set.begin(), set.begin() + std::min<std::size_t>(set.size(), tests));
  CoercivityReport rep;
  rep.trivial = std::all_of(set.begin(), set.end(), [](const TestField& t) { return t.L == 0.0; });
  if (rep.trivial) {
    for (double d : deltas) rep.points.push_back({d, 0.0, 0.0, 0.0, 0.0, 0.0, true});
    rep.verdict = Verdict::Pass;
    return rep;
  }
  std::vector<Vec> centers;
  for (int i = 0; i <= 32; ++i) centers.push_back(make_vec({-1.6 + 3.2 * i / 32.0}));
  for (const Vec& p : V.singularities) centers.push_back(p);
  bool all_ok = true;
  for (double d : deltas) {
    CoercivityPoint pt;
    pt.delta = d;
    pt.eta = kato_modulus(V, d, s, 1, centers);
    std::tie(pt.c, pt.c_delta) = coercivity_lp(half, pt.eta);
    std::tie(pt.c_doubled, pt.c_delta_doubled) = coercivity_lp(set, pt.eta);
    const double a = pt.c + pt.c_delta, b = pt.c_doubled + pt.c_delta_doubled;
    pt.stable = std::isfinite(a) && std::isfinite(b) && b <= 1.5 * a && b >= 0.5 * a;
    all_ok &= pt.stable;
    rep.points.push_back(pt);
  }
  rep.verdict = all_ok ? Verdict::Pass : Verdict::Fail;
  return rep;
}

double liouville_distance(const DiscreteField& u, LiouvilleTarget target, double s, const Region& region) {
  const Grid& g = u.grid();
  const int n = g.dim();
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (region.contains(g.node(i))) nodes.push_back(i);
  if (nodes.empty()) throw Error(Errc::EmptyField, "no grid node inside the region");
  const int m = target == LiouvilleTarget::Affine ? 1 + n : 1;
  auto basis = [&](const Vec& x, int j) {
    if (target == LiouvilleTarget::HalfSpaceProfile) return std::pow(positive_part(x(n - 1)), s);
    return j == 0 ? 1.0 : x(j - 1);
  };
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  double unorm = 0.0;
  for (std::size_t i : nodes) {
    const Vec x = g.node(i);
    for (int a = 0; a < m; ++a) {
      b(a) += u[i] * basis(x, a);
      for (int c = 0; c < m; ++c) G(a, c) += basis(x, a) * basis(x, c);
    }
    unorm += u[i] * u[i];
  }
  if (unorm == 0.0) throw Error(Errc::EmptyField, "the field vanishes on the region");
  const Eigen::VectorXd c = G.ldlt().solve(b);
  double res = 0.0;
  for (std::size_t i : nodes) {
    const Vec x = g.node(i);
    double p = 0.0;
    for (int a = 0; a < m; ++a) p += c(a) * basis(x, a);
    res += (u[i] - p) * (u[i] - p);
  }
  return std::sqrt(res / unorm);
}

}  // namespace nlreg
