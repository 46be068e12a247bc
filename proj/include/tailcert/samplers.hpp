#pragma once

// Distribution families with exact moments, seeded sampling and psi-norms.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tailcert/rng.hpp"
#include "tailcert/sequences.hpp"

namespace tailcert {

enum class Family {
  Gaussian,
  Rademacher,
  UniformBounded,
  Exponential,
  ChiSquare,
  ProductOfGaussians,
  DiscreteAtoms,
  IsotropicGaussianVector,
  ScaledToUnitPsi,
};

struct DistSpec {
  Family family = Family::Gaussian;
  double mu = 0.0, sigma = 1.0;   // Gaussian
  double a = 0.0, b = 1.0;        // UniformBounded
  double lambda = 1.0;            // Exponential
  bool centered = false;          // Exponential
  double k = 1.0;                 // ChiSquare degrees of freedom
  std::vector<double> values, probs;  // DiscreteAtoms
  int dim = 1;                    // IsotropicGaussianVector
  std::shared_ptr<const DistSpec> base;  // ScaledToUnitPsi
  double alpha = 2.0, scale = 1.0;       // ScaledToUnitPsi: X = base / scale
  std::uint64_t stream = 0;

  static DistSpec gaussian(double mu = 0.0, double sigma = 1.0);
  static DistSpec rademacher();
  static DistSpec uniform(double a, double b);
  static DistSpec exponential(double lambda = 1.0, bool centered = false);
  static DistSpec chi_square(double k);
  static DistSpec product_of_gaussians();
  static DistSpec atoms(std::vector<double> values, std::vector<double> probs);
  static DistSpec isotropic_gaussian(int dim);
};

/// Atom count above which DiscreteAtoms is not offered to exact oracles.
inline constexpr std::size_t kExactAtomCap = 64;

/// Throws BadSpec on invalid parameters.
void validate(const DistSpec& spec);

int dimension(const DistSpec& spec);

/// Draws one variate (or the first coordinate-block entry for vectors).
double draw(const DistSpec& spec, Rng& rng);

/// `count` draws (count * dim values for vector families, row-major).
/// Depends only on (spec, count, seed, spec.stream).
std::vector<double> sample(const DistSpec& spec, std::size_t count, std::uint64_t seed);

/// log E|X|^p, exact.  Vector families use a unit direction.
double log_abs_moment(const DistSpec& spec, double p);

/// P(|X| >= x) for scalar families where it has a closed form.
double abs_survival(const DistSpec& spec, double x);

enum class PsiMethod { ClosedForm, MomentFormulaSupremum };

struct PsiNormRecord {
  double alpha = 2.0;
  double value = 0.0;
  PsiMethod method = PsiMethod::MomentFormulaSupremum;
  double p_min = 1.0, p_max = 200.0;
  int grid_points = 400;
  double argmax_p = 1.0;
};

struct PsiGrid {
  double p_min = 1.0;
  double p_max = 200.0;
  int points = 400;
};

/// sup over a geometric p-grid of p^(-1/alpha) (E|X|^p)^(1/p).
PsiNormRecord psi_norm(const DistSpec& spec, double alpha, const PsiGrid& grid = {});

/// spec divided by its psi_alpha norm.
DistSpec scale_to_unit_psi(const DistSpec& spec, double alpha, const PsiGrid& grid = {});

json to_json(const DistSpec& spec);
DistSpec dist_from_json(const json& j);
json to_json(const PsiNormRecord& r);

std::string to_string(Family f);

}  // namespace tailcert
