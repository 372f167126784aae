#include "nlreg/solver.hpp"

#include "nlreg/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace nlreg {

namespace {

/// Quartic antiderivative of |t|^{-1-2s} (fourth differences give the hat stiffness).
long double quartic_potential(long double t, long double s) {
  if (t == 0.0L) return 0.0L;
  const long double a = std::fabs(t);
  if (std::fabs(1.0L - 2.0L * s) < 1e-6L) return t * t * std::log(a) / ((3 - 2 * s) * (2 - 2 * s) * (-2 * s));
  return std::pow(a, 3 - 2 * s) / ((3 - 2 * s) * (2 - 2 * s) * (1 - 2 * s) * (-2 * s));
}

/// Cubic B-spline: autocorrelation of the unit hat.
double bspline(double w) {
  const double a = std::abs(w);
  if (a <= 1.0) return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
  if (a <= 2.0) return std::pow(2.0 - a, 3) / 6.0;
  return 0.0;
}

/// Per-axis lattice offsets covering the box plus `layers` virtual layers.
struct Lattice {
  const Grid& grid;
  int layers;
  int n;

  int ext(int a) const { return grid.extent(a) + 2 * layers; }
  bool in_box(const std::array<int, kMaxDim>& idx) const {
    for (int a = 0; a < n; ++a)
      if (idx[a] < 0 || idx[a] >= grid.extent(a)) return false;
    return true;
  }
  Vec point(const std::array<int, kMaxDim>& idx) const {
    Vec x(n);
    for (int a = 0; a < n; ++a) x(a) = grid.lo()(a) + idx[a] * grid.h();
    return x;
  }
};

/// Table of E_{mu_1}(chi_0, chi_k) on the unit lattice for |k|_inf <= 2 (2D).
std::map<std::pair<int, int>, double> near_table_2d(double s) {
  static std::mutex mu;
  static std::map<double, std::map<std::pair<int, int>, double>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(s);
  if (it != cache.end()) return it->second;
  PVConfig cfg;
  cfg.angular_nodes = 256;
  cfg.delta_sd = 1e-2;
  cfg.tol = 1e-9;
  std::map<std::pair<int, int>, double> table;
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= a; ++b) table[{a, b}] = hat_stiffness_reference({a, b, 0}, 2, s, 1.0, cfg);
  cache[s] = table;
  return table;
}

/// E_{mu_1}(chi_i, chi_j) for lattice offset k.
class Mu1Entries {
 public:
  Mu1Entries(int dim, double s, double h) : dim_(dim), s_(s), h_(h) {
    if (dim == 2) near_ = near_table_2d(s);
    else if (dim != 1) throw Error(Errc::InvalidArgument, "assembly supports N <= 2");
  }
  double operator()(const std::array<int, kMaxDim>& k) const {
    if (dim_ == 1) return hat_stiffness_1d(k[0], s_, h_);
    const int a = std::abs(k[0]), b = std::abs(k[1]);
    const double scale = std::pow(h_, dim_ - 2.0 * s_);
    if (std::max(a, b) <= 2) return scale * near_.at({std::max(a, b), std::min(a, b)});
    const double r2 = static_cast<double>(a) * a + static_cast<double>(b) * b;
    const double p = dim_ + 2.0 * s_;
    return -scale * (std::pow(r2, -0.5 * p) + p * (p + 2.0 - dim_) / 6.0 * std::pow(r2, -0.5 * p - 1.0));
  }

 private:
  int dim_;
  double s_, h_;
  std::map<std::pair<int, int>, double> near_;
};

struct TailIntegrals {
  double mass = 0.0, data = 0.0, error = 0.0;
};

/// h^N int_T K(x, y) dy and h^N int_T g(y) K(x, y) dy over T = complement of [lo, hi].
TailIntegrals tail_integrals(const Kernel& k, const Vec& x, const Vec& lo, const Vec& hi, const FarField& g,
                             double h) {
  const int n = k.dim();
  const double inf = std::numeric_limits<double>::infinity();
  const bool with_data = g.kind != FarField::Kind::Zero;
  TailIntegrals out;
  auto accumulate = [&](auto&& point_at, double from, double jac_power) {
    double err = 0.0;
    out.mass += quad::integrate([&](double t) { return k(x, point_at(t)) * std::pow(t, jac_power); }, from, inf,
                                1e-10, 12, &err);
    out.error += err;
    if (with_data) {
      out.data += quad::integrate(
          [&](double t) {
            const Vec y = point_at(t);
            return g(y) * k(x, y) * std::pow(t, jac_power);
          },
          from, inf, 1e-10, 12, &err);
      out.error += std::abs(err);
    }
  };
  if (n == 1) {
    accumulate([&](double t) { return make_vec({x(0) + t}); }, hi(0) - x(0), 0.0);
    accumulate([&](double t) { return make_vec({x(0) - t}); }, x(0) - lo(0), 0.0);
  } else {
    constexpr int kRays = 128;
    const double w = 2.0 * std::numbers::pi / kRays;
    TailIntegrals sum;
    for (int r = 0; r < kRays; ++r) {
      const double ang = w * (r + 0.5);
      const Vec th = make_vec({std::cos(ang), std::sin(ang)});
      double exit = inf;
      for (int a = 0; a < 2; ++a) {
        if (th(a) > 0) exit = std::min(exit, (hi(a) - x(a)) / th(a));
        if (th(a) < 0) exit = std::min(exit, (lo(a) - x(a)) / th(a));
      }
      TailIntegrals saved = out;
      out = {};
      accumulate([&](double t) { return Vec(x + t * th); }, exit, 1.0);
      sum.mass += w * out.mass;
      sum.data += w * out.data;
      sum.error += w * out.error;
      out = saved;
    }
    out.mass += sum.mass;
    out.data += sum.data;
    out.error += sum.error;
  }
  const double cell = std::pow(h, n);
  out.mass *= cell;
  out.data *= cell;
  out.error *= cell;
  return out;
}

/// int f chi_i for a 1D hat centered at x with half-width h, split at singular points.
double hat_moment_1d(const ScalarSource& f, double x, double h) {
  std::vector<double> breaks{x - h, x, x + h};
  for (const Vec& p : f.singularities)
    if (p(0) > x - h && p(0) < x + h && std::abs(p(0) - x) > 1e-14 * h) breaks.push_back(p(0));
  std::sort(breaks.begin(), breaks.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    sum += quad::integrate_singular(
        [&](double t) { return f.f(make_vec({t})) * (1.0 - std::abs(t - x) / h); }, breaks[i], breaks[i + 1],
        1e-10);
  }
  return sum;
}

double hat_moment_2d(const ScalarSource& f, const Vec& x, double h) {
  constexpr int kNodes = 6;
  const quad::Rule& rule = quad::gauss_legendre(kNodes);
  double sum = 0.0;
  for (int qx = -1; qx <= 0; ++qx) {
    for (int qy = -1; qy <= 0; ++qy) {
      for (int i = 0; i < kNodes; ++i) {
        for (int j = 0; j < kNodes; ++j) {
          const double t1 = (qx + 0.5 * (1.0 + rule.nodes[i])) * h, t2 = (qy + 0.5 * (1.0 + rule.nodes[j])) * h;
          const double w = rule.weights[i] * rule.weights[j] * 0.25 * h * h;
          const double hat = (1.0 - std::abs(t1) / h) * (1.0 - std::abs(t2) / h);
          sum += w * hat * f.f(make_vec({x(0) + t1, x(1) + t2}));
        }
      }
    }
  }
  return sum;
}

}  // namespace

double hat_stiffness_1d(long k, double s, double h) {
  const long a = std::labs(k);
  const double scale = std::pow(h, 1.0 - 2.0 * s);
  if (a < 24) {
    static constexpr int c[5] = {1, -4, 6, -4, 1};
    long double sum = 0.0L;
    for (int m = -2; m <= 2; ++m) sum += c[m + 2] * quartic_potential(static_cast<long double>(a + m), s);
    return -scale * static_cast<double>(sum);
  }
  // Central fourth difference = D^4 + D^6/6 + D^8/80 + (17/30240) D^10 + ...
  const double t = static_cast<double>(a), q = 2.0 * s;
  const double d4 = std::pow(t, -1.0 - q);
  const double d6 = (1 + q) * (2 + q) * std::pow(t, -3.0 - q);
  const double d8 = (1 + q) * (2 + q) * (3 + q) * (4 + q) * std::pow(t, -5.0 - q);
  const double d10 = (1 + q) * (2 + q) * (3 + q) * (4 + q) * (5 + q) * (6 + q) * std::pow(t, -7.0 - q);
  const double c10 = 4.0 / 322560.0 + 12.0 / (24.0 * 1920.0) + 4.0 / (24.0 * 24.0 * 24.0);
  return -scale * (d4 + d6 / 6.0 + d8 / 80.0 + c10 * d10);
}

double hat_stiffness_reference(const std::array<int, kMaxDim>& k, int dim, double s, double h, const PVConfig& cfg) {
  const Kernel mu = Kernel::mu(s, dim);
  auto autocorrelation = [dim](const Vec& w) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= bspline(w(a));
    return v;
  };
  Vec x(dim);
  for (int a = 0; a < dim; ++a) x(a) = k[a];
  return std::pow(h, dim - 2.0 * s) * apply_point(mu, autocorrelation, x, cfg);
}

StiffnessOperator assemble_operator(const Kernel& k, const Grid& grid, const FarField& exterior,
                                    const AssemblyOptions& opts) {
  const int n = grid.dim();
  if (n != k.dim()) throw Error(Errc::InvalidArgument, "kernel and grid dimension differ");
  if (n > 2) throw Error(Errc::InvalidArgument, "assembly supports N <= 2");
  const std::size_t nodes = grid.size();
  const std::size_t bytes = nodes * nodes * sizeof(double) * 2;
  if (bytes > opts.max_bytes)
    throw Error(Errc::OutOfMemory,
                fmt::format("{} box nodes need about {:.1f} MiB of dense storage (limit {:.1f} MiB); "
                            "coarsen the grid or shrink the box",
                            nodes, bytes / 1048576.0, opts.max_bytes / 1048576.0));
  const int layers = opts.ring_layers >= 0 ? opts.ring_layers : (n == 1 ? 32 : 2);
  const double h = grid.h(), s = k.s();
  const Mu1Entries mu1(n, s, h);
  const Lattice lat{grid, layers, n};

  StiffnessOperator op;
  op.grid = grid;
  op.full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(nodes));
  op.exterior_rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes));

  auto entry = [&](const Vec& xi, const Vec& xj, const std::array<int, kMaxDim>& off) {
    const double r = (xi - xj).norm();
    return mu1(off) * k(xi, xj) * std::pow(r, n + 2.0 * s);
  };

  const auto count = static_cast<long>(nodes);
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < count; ++i) {
    const auto ii = grid.multi(static_cast<std::size_t>(i));
    const Vec xi = grid.node(ii);
    for (long j = i + 1; j < count; ++j) {
      const auto jj = grid.multi(static_cast<std::size_t>(j));
      std::array<int, kMaxDim> off{};
      for (int a = 0; a < n; ++a) off[a] = jj[a] - ii[a];
      op.full(i, j) = entry(xi, grid.node(jj), off);
    }
  }
  for (long i = 0; i < count; ++i)
    for (long j = 0; j < i; ++j) op.full(i, j) = op.full(j, i);

  Vec lo = grid.lo(), hi = grid.hi();
  lo.array() -= (layers + 0.5) * h;
  hi.array() += (layers + 0.5) * h;
  double tail_error = 0.0;
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : tail_error)
  for (long i = 0; i < count; ++i) {
    const auto ii = grid.multi(static_cast<std::size_t>(i));
    const Vec xi = grid.node(ii);
    double ring_sum = 0.0, ring_data = 0.0;
    // Virtual lattice layers around the box.
    std::array<int, kMaxDim> v{};
    const int ex = lat.ext(0), ey = n == 2 ? lat.ext(1) : 1;
    for (int b = 0; b < ey; ++b) {
      for (int a = 0; a < ex; ++a) {
        v[0] = a - layers;
        if (n == 2) v[1] = b - layers;
        if (lat.in_box(v)) continue;
        std::array<int, kMaxDim> off{};
        for (int d = 0; d < n; ++d) off[d] = v[d] - ii[d];
        const Vec xj = lat.point(v);
        const double aij = entry(xi, xj, off);
        ring_sum += aij;
        if (exterior.kind != FarField::Kind::Zero) ring_data += aij * exterior(xj);
      }
    }
    const TailIntegrals tail = tail_integrals(k, xi, lo, hi, exterior, h);
    double row = 0.0;
    for (long j = 0; j < count; ++j)
      if (j != i) row += op.full(i, j);
    op.full(i, i) = -row - ring_sum + tail.mass;
    op.exterior_rhs(i) = -ring_data + tail.data;
    tail_error += tail.error;
  }
  op.tail_error = tail_error;
  return op;
}

BilinearFormValue bilinear_form(const Kernel& k, const DiscreteField& u, const DiscreteField& psi) {
  const Grid& g = u.grid();
  if (!g.same_layout(psi.grid())) throw Error(Errc::GridMismatch, "u and psi live on different grids");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (psi[i] == 0.0) continue;
    const auto idx = g.multi(i);
    for (int a = 0; a < g.dim(); ++a)
      if (idx[a] < 2 || idx[a] > g.extent(a) - 3)
        throw Error(Errc::SupportEscape, fmt::format("psi is nonzero within 2h of the box edge at node {}", i));
  }
  const StiffnessOperator op = assemble_operator(k, g, u.far_field());
  BilinearFormValue out;
  // The support check makes psi vanish on the ring, so psi^T (A u - exterior) is the full form.
  out.value = psi.values().dot(op.full * u.values() - op.exterior_rhs);
  out.error = op.tail_error * psi.values().cwiseAbs().maxCoeff() * std::max(1.0, u.values().cwiseAbs().maxCoeff());
  return out;
}

Eigen::VectorXd load_vector(const ScalarSource& f, const Grid& grid, const std::vector<std::size_t>& nodes) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(nodes.size()));
  const auto count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < count; ++i) {
    const Vec x = grid.node(nodes[static_cast<std::size_t>(i)]);
    b(i) = grid.dim() == 1 ? hat_moment_1d(f, x(0), grid.h()) : hat_moment_2d(f, x, grid.h());
  }
  return b;
}

StiffnessSystem assemble(const DirichletProblem& problem, const AssemblyOptions& opts) {
  if (!problem.kernel) throw Error(Errc::InvalidArgument, "problem has no kernel");
  if (problem.domain.dim() != problem.grid.dim())
    throw Error(Errc::InvalidArgument, "domain and grid dimension differ");
  StiffnessSystem sys;
  sys.exterior = problem.exterior;
  const Grid& g = problem.grid;
  for (std::size_t i = 0; i < g.size(); ++i)
    (problem.domain.contains(g.node(i)) ? sys.active : sys.fixed).push_back(i);
  if (sys.active.empty()) throw Error(Errc::InvalidArgument, "no grid node lies inside the domain");
  sys.op = assemble_operator(*problem.kernel, g, problem.exterior, opts);
  sys.g_box = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  if (problem.exterior.kind != FarField::Kind::Zero)
    for (std::size_t j : sys.fixed) sys.g_box(static_cast<Eigen::Index>(j)) = problem.exterior(g.node(j));

  const auto na = static_cast<Eigen::Index>(sys.active.size());
  sys.potential = problem.V ? load_vector(*problem.V, g, sys.active) : Eigen::VectorXd::Zero(na);
  sys.load = load_vector(problem.f, g, sys.active);
  sys.A.resize(na, na);
  for (Eigen::Index a = 0; a < na; ++a)
    for (Eigen::Index b = 0; b < na; ++b)
      sys.A(a, b) = sys.op.full(static_cast<Eigen::Index>(sys.active[a]), static_cast<Eigen::Index>(sys.active[b]));
  sys.A.diagonal() += sys.potential;
  refresh_rhs(sys);
  return sys;
}

void refresh_rhs(StiffnessSystem& sys) {
  const auto na = static_cast<Eigen::Index>(sys.active.size());
  sys.rhs = sys.load;
  for (Eigen::Index a = 0; a < na; ++a) {
    const auto i = static_cast<Eigen::Index>(sys.active[a]);
    double coupling = 0.0;
    for (std::size_t j : sys.fixed) coupling += sys.op.full(i, static_cast<Eigen::Index>(j)) * sys.g_box(static_cast<Eigen::Index>(j));
    sys.rhs(a) += sys.op.exterior_rhs(i) - coupling;
  }
}

}  // namespace nlreg
