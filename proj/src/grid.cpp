#include "nlreg/grid.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <bit>
#include <cmath>
#include <fstream>

namespace nlreg {

Grid::Grid(int dim, std::vector<int> extents, Vec lo, double h)
    : dim_(dim), extents_(std::move(extents)), lo_(std::move(lo)), h_(h) {
  if (dim < 1 || dim > kMaxDim || static_cast<int>(extents_.size()) != dim || lo_.size() != dim)
    throw Error(Errc::InvalidArgument, "grid dimension and extents disagree");
  if (!(h > 0.0)) throw Error(Errc::InvalidArgument, "grid spacing must be positive");
  size_ = 1;
  for (int e : extents_) {
    if (e < 2) throw Error(Errc::InvalidArgument, "each grid axis needs at least 2 nodes");
    size_ *= static_cast<std::size_t>(e);
  }
}

Grid Grid::cover(const Vec& lo, const Vec& hi, double h) {
  std::vector<int> ext(lo.size());
  for (Eigen::Index a = 0; a < lo.size(); ++a)
    ext[a] = static_cast<int>(std::llround((hi(a) - lo(a)) / h)) + 1;
  return Grid(static_cast<int>(lo.size()), std::move(ext), lo, h);
}

Vec Grid::hi() const {
  Vec out = lo_;
  for (int a = 0; a < dim_; ++a) out(a) += (extents_[a] - 1) * h_;
  return out;
}

std::size_t Grid::flat(const std::array<int, kMaxDim>& idx) const {
  std::size_t f = 0, stride = 1;
  for (int a = 0; a < dim_; ++a) {
    f += static_cast<std::size_t>(idx[a]) * stride;
    stride *= static_cast<std::size_t>(extents_[a]);
  }
  return f;
}

std::array<int, kMaxDim> Grid::multi(std::size_t f) const {
  std::array<int, kMaxDim> idx{};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>(f % static_cast<std::size_t>(extents_[a]));
    f /= static_cast<std::size_t>(extents_[a]);
  }
  return idx;
}

Vec Grid::node(const std::array<int, kMaxDim>& idx) const {
  Vec x(dim_);
  for (int a = 0; a < dim_; ++a) x(a) = lo_(a) + idx[a] * h_;
  return x;
}

Vec Grid::node(std::size_t f) const { return node(multi(f)); }

bool Grid::contains(const Vec& x, double slack) const {
  const Vec top = hi();
  for (int a = 0; a < dim_; ++a)
    if (x(a) < lo_(a) - slack || x(a) > top(a) + slack) return false;
  return true;
}

bool Grid::same_layout(const Grid& o) const {
  if (dim_ != o.dim_ || extents_ != o.extents_) return false;
  if (std::abs(h_ - o.h_) > 1e-12 * h_) return false;
  return (lo_ - o.lo_).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, lo_.cwiseAbs().maxCoeff());
}

std::string Grid::describe() const {
  std::string ext;
  for (int a = 0; a < dim_; ++a) ext += fmt::format("{}{}", a ? "x" : "", extents_[a]);
  return fmt::format("grid N={} nodes={} h={}", dim_, ext, h_);
}

FarField FarField::power(double exponent, double amplitude) {
  FarField f;
  f.kind = Kind::PowerDecay;
  f.exponent = exponent;
  f.amplitude = amplitude;
  f.name = fmt::format("power({}, {})", exponent, amplitude);
  return f;
}

FarField FarField::function(ScalarFn fn, double growth_exponent, std::string name) {
  FarField f;
  f.kind = Kind::Function;
  f.exponent = growth_exponent;
  f.fn = std::move(fn);
  f.name = std::move(name);
  return f;
}

double FarField::operator()(const Vec& x) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::PowerDecay: return amplitude * std::pow(x.norm(), exponent);
    case Kind::Function: return fn ? fn(x) : 0.0;
  }
  return 0.0;
}

double FarField::growth() const {
  return kind == Kind::Zero ? -std::numeric_limits<double>::infinity() : exponent;
}

DiscreteField::DiscreteField(Grid grid, Eigen::VectorXd values, FarField far)
    : grid_(std::move(grid)), values_(std::move(values)), far_(std::move(far)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size())
    throw Error(Errc::GridMismatch, fmt::format("field has {} values for {} nodes", values_.size(), grid_.size()));
  if (far_.kind != FarField::Kind::Zero && !(far_.exponent > -grid_.dim()))
    throw Error(Errc::InvalidArgument, "far-field exponent must exceed -N");
}

DiscreteField DiscreteField::sample(const Grid& grid, const ScalarFn& f, FarField far) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = f(grid.node(i));
  return DiscreteField(grid, std::move(v), std::move(far));
}

double DiscreteField::value(const Vec& x) const {
  const int n = grid_.dim();
  if (!grid_.contains(x, 1e-12 * grid_.h())) return far_(x);
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int a = 0; a < n; ++a) {
    const double t = (x(a) - grid_.lo()(a)) / grid_.h();
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, grid_.extent(a) - 2);
    base[a] = i;
    frac[a] = std::clamp(t - i, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::array<int, kMaxDim> idx = base;
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const bool up = (corner >> a) & 1;
      idx[a] += up;
      w *= up ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) sum += w * values_[static_cast<Eigen::Index>(grid_.flat(idx))];
  }
  return sum;
}

ScalarFn DiscreteField::as_function() const {
  return [self = *this](const Vec& x) { return self.value(x); };
}

namespace {

YAML::Node vec_node(const Vec& v) {
  YAML::Node n;
  for (Eigen::Index i = 0; i < v.size(); ++i) n.push_back(v(i));
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

}  // namespace

void write_field(const DiscreteField& field, const std::filesystem::path& stem) {
  static_assert(std::endian::native == std::endian::little, "field files are little-endian");
  const Grid& g = field.grid();
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::filesystem::path header = stem;
  header += ".yaml";

  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "format" << YAML::Value << "nlreg-field-1";
  out << YAML::Key << "dim" << YAML::Value << g.dim();
  out << YAML::Key << "extents" << YAML::Value << YAML::Flow << g.extents();
  out << YAML::Key << "lo" << YAML::Value << vec_node(g.lo());
  out << YAML::Key << "h" << YAML::Value << YAML::Precision(17) << g.h();
  out << YAML::Key << "far_field" << YAML::Value << YAML::BeginMap;
  const FarField& far = field.far_field();
  switch (far.kind) {
    case FarField::Kind::Zero: out << YAML::Key << "kind" << YAML::Value << "zero"; break;
    case FarField::Kind::PowerDecay:
      out << YAML::Key << "kind" << YAML::Value << "power";
      out << YAML::Key << "exponent" << YAML::Value << far.exponent;
      out << YAML::Key << "amplitude" << YAML::Value << far.amplitude;
      break;
    case FarField::Kind::Function:
      out << YAML::Key << "kind" << YAML::Value << "function";
      out << YAML::Key << "name" << YAML::Value << far.name;
      out << YAML::Key << "exponent" << YAML::Value << far.exponent;
      break;
  }
  out << YAML::EndMap;
  out << YAML::Key << "data" << YAML::Value << bin.filename().string();
  out << YAML::EndMap;

  std::ofstream h(header);
  if (!h) throw Error(Errc::Io, "cannot write " + header.string());
  h << out.c_str() << '\n';
  std::ofstream b(bin, std::ios::binary);
  if (!b) throw Error(Errc::Io, "cannot write " + bin.string());
  b.write(reinterpret_cast<const char*>(field.values().data()),
          static_cast<std::streamsize>(sizeof(double) * field.values().size()));
}

DiscreteField read_field(const std::filesystem::path& header) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(header.string());
  } catch (const YAML::Exception& e) {
    throw Error(Errc::Io, fmt::format("{}: {}", header.string(), e.what()));
  }
  if (root["format"].as<std::string>("") != "nlreg-field-1")
    throw Error(Errc::Io, header.string() + " is not a field header");
  const int dim = root["dim"].as<int>();
  const auto extents = root["extents"].as<std::vector<int>>();
  const auto lo_vals = root["lo"].as<std::vector<double>>();
  Vec lo(dim);
  for (int a = 0; a < dim; ++a) lo(a) = lo_vals.at(a);
  Grid grid(dim, extents, lo, root["h"].as<double>());

  FarField far;
  if (const YAML::Node ff = root["far_field"]) {
    const std::string kind = ff["kind"].as<std::string>("zero");
    if (kind == "power") {
      far = FarField::power(ff["exponent"].as<double>(), ff["amplitude"].as<double>(1.0));
    } else if (kind == "function") {
      far = FarField::function(nullptr, ff["exponent"].as<double>(0.0), ff["name"].as<std::string>(""));
    }
  }

  const std::filesystem::path bin = header.parent_path() / root["data"].as<std::string>();
  std::ifstream b(bin, std::ios::binary | std::ios::ate);
  if (!b) throw Error(Errc::Io, "cannot read " + bin.string());
  const auto bytes = static_cast<std::size_t>(b.tellg());
  if (bytes != grid.size() * sizeof(double))
    throw Error(Errc::GridMismatch, fmt::format("{} holds {} bytes, header expects {}", bin.string(), bytes,
                                                grid.size() * sizeof(double)));
  b.seekg(0);
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid.size()));
  b.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
  return DiscreteField(std::move(grid), std::move(values), std::move(far));
}

}  // namespace nlreg
