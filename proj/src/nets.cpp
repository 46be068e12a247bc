#include "tailcert/nets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "tailcert/document.hpp"
#include "tailcert/error.hpp"
#include "tailcert/kdtree.hpp"
#include "tailcert/kernels.hpp"
#include "tailcert/lattice.hpp"
#include "tailcert/rng.hpp"

namespace tailcert {

MetricSpaceSpec MetricSpaceSpec::sphere(int d) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
  MetricSpaceSpec s;
  s.kind = Kind::Sphere;
  s.d = d;
  return s;
}

MetricSpaceSpec MetricSpaceSpec::ball(int d, double radius) {
  if (d < 1 || !(radius > 0)) throw Error(ErrorCode::InvalidArgument, "ball needs d >= 1 and R > 0");
  MetricSpaceSpec s;
  s.kind = Kind::Ball;
  s.d = d;
  s.radius = radius;
  return s;
}

MetricSpaceSpec MetricSpaceSpec::product(std::vector<MetricSpaceSpec> parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "product of no spaces");
  MetricSpaceSpec s;
  s.kind = Kind::Product;
  s.parts = std::move(parts);
  s.d = 0;
  for (const auto& p : s.parts) s.d += p.ambient_dim();
  return s;
}

int MetricSpaceSpec::ambient_dim() const { return d; }

double MetricSpaceSpec::diameter() const {
  switch (kind) {
    case Kind::Sphere: return 2.0;
    case Kind::Ball: return 2.0 * radius;
    case Kind::Product: {
      double s = 0.0;
      for (const auto& p : parts) s += p.diameter() * p.diameter();
      return std::sqrt(s);
    }
  }
  return 0.0;
}

double MetricSpaceSpec::cardinality_bound(double eps) const {
  switch (kind) {
    case Kind::Sphere: return std::pow(1.0 + 2.0 / eps, d);
    case Kind::Ball: return std::pow(1.0 + 2.0 * radius / eps, d);
    case Kind::Product: {
      const double part_eps = eps / std::sqrt(static_cast<double>(parts.size()));
      double b = 1.0;
      for (const auto& p : parts) b *= p.cardinality_bound(part_eps);
      return b;
    }
  }
  return 0.0;
}

std::string MetricSpaceSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Sphere: os << "Sphere(" << d << ")"; break;
    case Kind::Ball: os << "Ball(" << d << ", " << radius << ")"; break;
    case Kind::Product:
      for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? " x " : "") << parts[i].describe();
      break;
  }
  return os.str();
}

std::string to_string(NetStrategy s) {
  switch (s) {
    case NetStrategy::GreedyPacking: return "greedy_packing";
    case NetStrategy::AngularLattice: return "angular_lattice";
    case NetStrategy::LatticeShell: return "lattice_shell";
    case NetStrategy::Product: return "product";
  }
  return "unknown";
}

NetStrategy net_strategy_from_string(const std::string& s) {
  if (s == "greedy_packing") return NetStrategy::GreedyPacking;
  if (s == "angular_lattice") return NetStrategy::AngularLattice;
  if (s == "lattice_shell") return NetStrategy::LatticeShell;
  if (s == "product") return NetStrategy::Product;
  throw Error(ErrorCode::ParseError, "unknown net strategy '" + s + "'");
}

namespace {

void draw_point(const MetricSpaceSpec& s, Rng& rng, double* out) {
  switch (s.kind) {
    case MetricSpaceSpec::Kind::Sphere: {
      if (s.d == 1) {
        out[0] = rng.rademacher();
        return;
      }
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (int k = 0; k < s.d; ++k) {
          out[k] = rng.normal();
          norm2 += out[k] * out[k];
        }
      } while (norm2 == 0.0);
      const double inv = 1.0 / std::sqrt(norm2);
      for (int k = 0; k < s.d; ++k) out[k] *= inv;
      return;
    }
    case MetricSpaceSpec::Kind::Ball: {
      MetricSpaceSpec sph = MetricSpaceSpec::sphere(s.d);
      draw_point(sph, rng, out);
      const double r = s.radius * std::pow(rng.uniform(), 1.0 / s.d);
      for (int k = 0; k < s.d; ++k) out[k] *= r;
      return;
    }
    case MetricSpaceSpec::Kind::Product: {
      for (const auto& p : s.parts) {
        draw_point(p, rng, out);
        out += p.ambient_dim();
      }
      return;
    }
  }
}

// Removes rows that agree to ~1e-10 after rounding.
std::vector<double> dedupe_rows(const std::vector<double>& pts, int dim) {
  const std::size_t n = pts.size() / dim;
  std::vector<std::vector<long long>> keys(n, std::vector<long long>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) keys[i][k] = std::llround(pts[i * dim + k] * 1e10);
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<double> out;
  out.reserve(pts.size());
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0 && keys[idx[j]] == keys[idx[j - 1]]) continue;
    out.insert(out.end(), pts.begin() + idx[j] * dim, pts.begin() + (idx[j] + 1) * dim);
  }
  return out;
}

void project_into_ball(std::vector<double>& pts, int dim, double radius) {
  for (std::size_t i = 0; i < pts.size(); i += dim) {
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) n2 += pts[i + k] * pts[i + k];
    const double n = std::sqrt(n2);
    if (n > radius) {
      for (int k = 0; k < dim; ++k) pts[i + k] *= radius / n;
    }
  }
}

Net greedy_packing(const MetricSpaceSpec& space, double eps, std::uint64_t seed, const NetOptions& opt) {
  const int dim = space.ambient_dim();
  Net net;
  net.space = space;
  net.epsilon = eps;
  net.strategy = NetStrategy::GreedyPacking;
  net.seed = seed;

  Rng rng(seed, 0);
  std::vector<double> x(dim);
  KdTree tree;
  std::size_t frozen = 0;
  const double eps2 = eps * eps;
  double streak = 0.0;
  for (;;) {
    const double limit = opt.streak_factor * static_cast<double>(std::max<std::size_t>(1, net.size()));
    if (net.size() > 0 && streak >= limit) break;
    draw_point(space, rng, x.data());
    ++net.proposals;
    bool close = frozen > 0 && tree.any_within(x.data(), eps);
    for (std::size_t i = frozen; !close && i < net.size(); ++i) close = dist2(net.point(i), x.data(), dim) < eps2;
    if (close) {
      streak += 1.0;
      if (streak == 2000.0 && net.size() > frozen) {
        tree = KdTree(net.points, dim);
        frozen = net.size();
      }
      continue;
    }
    net.points.insert(net.points.end(), x.begin(), x.end());
    streak = 0.0;
    if (net.size() > opt.point_cap) {
      throw Error(ErrorCode::BudgetExceeded,
                  "greedy net passed " + std::to_string(opt.point_cap) + " points before the stopping rule");
    }
    if (net.size() - frozen > 32 + frozen / 8) {
      tree = KdTree(net.points, dim);
      frozen = net.size();
    }
  }
  return net;
}

Net angular_lattice(const MetricSpaceSpec& space, double eps) {
  const int dim = space.ambient_dim();
  if (dim > 3) throw Error(ErrorCode::InvalidArgument, "angular lattice nets exist for d <= 3 only");
  Net net;
  net.space = space;
  net.epsilon = eps;
  net.strategy = NetStrategy::AngularLattice;
  auto& pts = net.points;

  if (space.kind == MetricSpaceSpec::Kind::Sphere) {
    if (dim == 1) {
      pts = {-1.0, 1.0};
    } else if (dim == 2) {
      // Neighbouring points sit at most eps apart.
      const int k = static_cast<int>(std::ceil(M_PI / std::asin(std::min(1.0, eps / 2.0)) - 1e-12));
      for (int i = 0; i < k; ++i) {
        const double a = 2.0 * M_PI * i / k;
        pts.push_back(std::cos(a));
        pts.push_back(std::sin(a));
      }
    } else {
      // Latitude rings: each point of the sphere is within alpha/2 of a ring in
      // latitude and within alpha/2 of a ring point along its parallel.
      const double alpha = 2.0 * std::asin(std::min(1.0, eps / 2.0));
      const int bands = static_cast<int>(std::ceil(M_PI / alpha - 1e-12));
      for (int j = 0; j < bands; ++j) {
        const double th0 = M_PI * j / bands, th1 = M_PI * (j + 1) / bands;
        const double theta = 0.5 * (th0 + th1);
        const double smax = (th0 <= M_PI / 2 && th1 >= M_PI / 2) ? 1.0 : std::max(std::sin(th0), std::sin(th1));
        const int k = std::max(1, static_cast<int>(std::ceil(2.0 * M_PI * smax / alpha - 1e-12)));
        for (int i = 0; i < k; ++i) {
          const double phi = 2.0 * M_PI * (i + 0.5 * (j % 2)) / k;
          pts.push_back(std::sin(theta) * std::cos(phi));
          pts.push_back(std::sin(theta) * std::sin(phi));
          pts.push_back(std::cos(theta));
        }
      }
    }
    return net;
  }
  if (space.kind != MetricSpaceSpec::Kind::Ball) {
    throw Error(ErrorCode::InvalidArgument, "angular lattice nets cover spheres and balls");
  }
  // Cubic grid with covering radius eps, pulled into the ball.
  const double h = 2.0 * eps / std::sqrt(static_cast<double>(dim));
  const double reach = space.radius + eps;
  const int m = static_cast<int>(std::floor(reach / h));
  std::vector<int> idx(dim, -m);
  for (;;) {
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) n2 += (idx[k] * h) * (idx[k] * h);
    if (n2 <= reach * reach) {
      for (int k = 0; k < dim; ++k) pts.push_back(idx[k] * h);
    }
    int k = 0;
    while (k < dim && ++idx[k] > m) idx[k++] = -m;
    if (k == dim) break;
  }
  project_into_ball(pts, dim, space.radius);
  pts = dedupe_rows(pts, dim);
  return net;
}

Net lattice_shell_net(const MetricSpaceSpec& space, double eps) {
  const int dim = space.ambient_dim();
  const LatticeKind kind = preferred_lattice(dim);
  const double cov = covering_radius(kind, dim);
  Net net;
  net.space = space;
  net.epsilon = eps;
  net.strategy = NetStrategy::LatticeShell;

  if (space.kind == MetricSpaceSpec::Kind::Sphere) {
    // A point within rho of x sits at angle <= asin(rho) from x, so its radial
    // projection is within chord 2 sin(asin(rho) / 2) = eps.
    const double half = std::asin(std::min(1.0, eps / 2.0));
    if (2.0 * half > M_PI / 2) throw Error(ErrorCode::EpsilonOutOfRange, "lattice shell nets need eps <= sqrt(2)");
    const double rho = std::sin(2.0 * half);
    const double s = rho / cov;
    auto z = lattice_shell(kind, dim, std::max(1.0 - rho, 1e-9) / s, (1.0 + rho) / s);
    for (std::size_t i = 0; i < z.size(); i += dim) {
      double n2 = 0.0;
      for (int k = 0; k < dim; ++k) n2 += z[i + k] * z[i + k];
      const double inv = 1.0 / std::sqrt(n2);
      for (int k = 0; k < dim; ++k) z[i + k] *= inv;
    }
    net.points = dedupe_rows(z, dim);
    return net;
  }
  if (space.kind != MetricSpaceSpec::Kind::Ball) {
    throw Error(ErrorCode::InvalidArgument, "lattice shell nets cover spheres and balls");
  }
  const double s = eps / cov;
  auto z = lattice_shell(kind, dim, 0.0, (space.radius + eps) / s);
  for (auto& v : z) v *= s;
  project_into_ball(z, dim, space.radius);
  net.points = dedupe_rows(z, dim);
  return net;
}

}  // namespace

Net build_net(const MetricSpaceSpec& space, double epsilon, std::uint64_t seed, const NetOptions& options) {
  if (!(epsilon > 0) || !(epsilon < space.diameter())) {
    throw Error(ErrorCode::EpsilonOutOfRange, "eps must lie in (0, diameter)");
  }
  if (space.d > 50) throw Error(ErrorCode::DimensionTooLarge, "nets are limited to d <= 50");

  if (space.kind == MetricSpaceSpec::Kind::Product) {
    const double part_eps = epsilon / std::sqrt(static_cast<double>(space.parts.size()));
    std::vector<Net> parts;
    for (std::size_t i = 0; i < space.parts.size(); ++i) {
      NetOptions o = options;
      if (o.strategy == NetStrategy::Product) o.strategy = NetStrategy::GreedyPacking;
      parts.push_back(build_net(space.parts[i], part_eps, substream_seed(seed, i), o));
    }
    Net out = product_net(parts);
    out.seed = seed;
    return out;
  }

  Net net;
  switch (options.strategy) {
    case NetStrategy::GreedyPacking: net = greedy_packing(space, epsilon, seed, options); break;
    case NetStrategy::AngularLattice: net = angular_lattice(space, epsilon); break;
    case NetStrategy::LatticeShell: net = lattice_shell_net(space, epsilon); break;
    case NetStrategy::Product: throw Error(ErrorCode::InvalidArgument, "product strategy needs a product space");
  }
  net.seed = seed;
  if (static_cast<double>(net.size()) > space.cardinality_bound(epsilon) * (1 + 1e-12)) {
    throw Error(ErrorCode::BudgetExceeded, "net of " + std::to_string(net.size()) +
                                               " points exceeds the volumetric bound");
  }
  return net;
}

std::vector<double> sample_space(const MetricSpaceSpec& space, std::size_t count, std::uint64_t seed) {
  const int dim = space.ambient_dim();
  std::vector<double> out(count * dim);
  const long blocks = static_cast<long>((count + kReplicateBlock - 1) / kReplicateBlock);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (long b = 0; b < blocks; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    const std::size_t end = std::min(count, static_cast<std::size_t>(b + 1) * kReplicateBlock);
    for (std::size_t i = static_cast<std::size_t>(b) * kReplicateBlock; i < end; ++i) {
      draw_point(space, rng, out.data() + i * dim);
    }
  }
  return out;
}

CoverageReport verify_covering(const Net& net, std::uint64_t probe_count, std::uint64_t seed, double tolerance) {
  if (probe_count < 1) throw Error(ErrorCode::InvalidArgument, "need at least one probe");
  if (net.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty net");
  const KdTree tree(net.points, net.dim());
  const auto probes = sample_space(net.space, probe_count, seed);
  CoverageReport r;
  r.probe_count = probe_count;
  r.probe_seed = seed;
  r.tolerance = tolerance;
  r.max_probe_distance = max_nearest_distance(tree, probes);
  r.pass = r.max_probe_distance <= net.epsilon * (1.0 + tolerance);
  return r;
}

Net product_net(const std::vector<Net>& nets) {
  if (nets.empty()) throw Error(ErrorCode::InvalidArgument, "product of no nets");
  if (nets.size() == 1) return nets.front();
  std::vector<MetricSpaceSpec> spaces;
  double eps2 = 0.0, total = 1.0;
  for (const auto& n : nets) {
    spaces.push_back(n.space);
    eps2 += n.epsilon * n.epsilon;
    total *= static_cast<double>(n.size());
  }
  Net out;
  out.space = MetricSpaceSpec::product(spaces);
  out.epsilon = std::sqrt(eps2);
  out.strategy = NetStrategy::Product;
  out.seed = nets.front().seed;
  const int dim = out.dim();
  if (total * dim > 5e7) throw Error(ErrorCode::BudgetExceeded, "product net too large");
  out.points.reserve(static_cast<std::size_t>(total) * dim);
  std::vector<std::size_t> idx(nets.size(), 0);
  for (;;) {
    for (std::size_t j = 0; j < nets.size(); ++j) {
      const double* p = nets[j].point(idx[j]);
      out.points.insert(out.points.end(), p, p + nets[j].dim());
    }
    std::size_t j = nets.size();
    while (j > 0) {
      --j;
      if (++idx[j] < nets[j].size()) break;
      idx[j] = 0;
      if (j == 0) return out;
    }
  }
}

double min_pairwise_distance(const Net& net) {
  const int dim = net.dim();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = i + 1; j < net.size(); ++j) best = std::min(best, dist2(net.point(i), net.point(j), dim));
  }
  return std::sqrt(best);
}

json to_json(const MetricSpaceSpec& s) {
  switch (s.kind) {
    case MetricSpaceSpec::Kind::Sphere: return {{"kind", "sphere"}, {"d", s.d}};
    case MetricSpaceSpec::Kind::Ball: return {{"kind", "ball"}, {"d", s.d}, {"radius", s.radius}};
    case MetricSpaceSpec::Kind::Product: {
      json parts = json::array();
      for (const auto& p : s.parts) parts.push_back(to_json(p));
      return {{"kind", "product"}, {"parts", parts}};
    }
  }
  return nullptr;
}

MetricSpaceSpec space_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sphere") return MetricSpaceSpec::sphere(j.at("d").get<int>());
  if (kind == "ball") return MetricSpaceSpec::ball(j.at("d").get<int>(), j.value("radius", 1.0));
  if (kind == "product") {
    std::vector<MetricSpaceSpec> parts;
    for (const auto& p : j.at("parts")) parts.push_back(space_from_json(p));
    return MetricSpaceSpec::product(parts);
  }
  throw Error(ErrorCode::ParseError, "unknown space kind '" + kind + "'");
}

std::string net_digest(const Net& net) {
  json h{{"space", to_json(net.space)},
         {"epsilon", net.epsilon},
         {"seed", net.seed},
         {"strategy", to_string(net.strategy)},
         {"count", net.size()}};
  const std::uint64_t a = fnv1a64(h.dump());
  const std::uint64_t b = fnv1a64(std::string_view(reinterpret_cast<const char*>(net.points.data()),
                                                   net.points.size() * sizeof(double)));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(a ^ (b * 0x100000001b3ULL)));
  return buf;
}

json net_header(const Net& net) {
  json h{{"space", to_json(net.space)},
         {"epsilon", net.epsilon},
         {"seed", net.seed},
         {"strategy", to_string(net.strategy)},
         {"count", net.size()},
         {"cardinality_bound", net.space.cardinality_bound(net.epsilon)},
         {"digest", net_digest(net)}};
  if (net.strategy == NetStrategy::GreedyPacking) h["proposals"] = net.proposals;
  if (net.verification) {
    const auto& v = *net.verification;
    h["verification"] = {{"probe_count", v.probe_count},
                         {"max_probe_distance", v.max_probe_distance},
                         {"probe_seed", v.probe_seed},
                         {"tolerance", v.tolerance},
                         {"pass", v.pass}};
  }
  return h;
}

std::string net_to_csv(const Net& net) {
  std::string out = "# " + net_header(net).dump() + "\n";
  for (int k = 0; k < net.dim(); ++k) out += (k ? ",x" : "x") + std::to_string(k);
  out += "\n";
  char buf[32];
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (int k = 0; k < net.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", net.point(i)[k]);
      if (k) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace tailcert
