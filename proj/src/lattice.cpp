#include "tailcert/lattice.hpp"

#include <cmath>
#include <functional>

#include "tailcert/error.hpp"

namespace tailcert {

LatticeKind preferred_lattice(int dim) {
  if (dim == 8) return LatticeKind::E8;
  if (dim >= 3) return LatticeKind::Checkerboard;
  return LatticeKind::Integer;
}

double covering_radius(LatticeKind kind, int dim) {
  switch (kind) {
    case LatticeKind::Integer: return std::sqrt(static_cast<double>(dim)) / 2.0;
    case LatticeKind::Checkerboard: return std::max(1.0, std::sqrt(static_cast<double>(dim)) / 2.0);
    case LatticeKind::E8: return 1.0;
  }
  return 0.0;
}

namespace {

std::vector<double> round_all(const std::vector<double>& x) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::nearbyint(x[k]);
  return out;
}

// D_d: round, then fix the parity on the worst-rounded coordinate.
std::vector<double> nearest_checkerboard(const std::vector<double>& x) {
  auto z = round_all(x);
  double sum = 0.0;
  for (double v : z) sum += v;
  if (std::fmod(std::abs(sum), 2.0) == 0.0) return z;
  std::size_t worst = 0;
  double gap = -1.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double g = std::abs(x[k] - z[k]);
    if (g > gap) {
      gap = g;
      worst = k;
    }
  }
  z[worst] += x[worst] >= z[worst] ? 1.0 : -1.0;
  return z;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

std::vector<double> nearest_lattice_point(LatticeKind kind, const std::vector<double>& x) {
  switch (kind) {
    case LatticeKind::Integer: return round_all(x);
    case LatticeKind::Checkerboard: return nearest_checkerboard(x);
    case LatticeKind::E8: {
      if (x.size() != 8) throw Error(ErrorCode::InvalidArgument, "E8 lives in dimension 8");
      auto a = nearest_checkerboard(x);
      std::vector<double> shifted(8);
      for (int k = 0; k < 8; ++k) shifted[k] = x[k] - 0.5;
      auto b = nearest_checkerboard(shifted);
      for (auto& v : b) v += 0.5;
      return sq_dist(a, x) <= sq_dist(b, x) ? a : b;
    }
  }
  return x;
}

std::vector<double> lattice_shell(LatticeKind kind, int dim, double lo, double hi) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (kind == LatticeKind::E8 && dim != 8) throw Error(ErrorCode::InvalidArgument, "E8 lives in dimension 8");
  std::vector<double> out;
  const double lo2 = lo * lo, hi2 = hi * hi;
  std::vector<double> z(dim);
  const bool parity = kind != LatticeKind::Integer;

  const auto run = [&](double offset) {
    std::function<void(int, double, long)> rec = [&](int k, double norm2, long sum) {
      if (k == dim) {
        if (norm2 < lo2 * (1 - 1e-12)) return;
        if (parity && (sum % 2 != 0)) return;
        out.insert(out.end(), z.begin(), z.end());
        return;
      }
      const double room = std::sqrt(std::max(0.0, hi2 - norm2));
      const long m_lo = static_cast<long>(std::ceil(-room - offset - 1e-12));
      const long m_hi = static_cast<long>(std::floor(room - offset + 1e-12));
      for (long m = m_lo; m <= m_hi; ++m) {
        const double v = static_cast<double>(m) + offset;
        const double n2 = norm2 + v * v;
        if (n2 > hi2 * (1 + 1e-12)) continue;
        z[k] = v;
        rec(k + 1, n2, sum + m);
      }
    };
    rec(0, 0.0, 0);
  };
  run(0.0);
  if (kind == LatticeKind::E8) run(0.5);
  return out;
}

}  // namespace tailcert
