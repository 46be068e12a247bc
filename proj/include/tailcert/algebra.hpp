#pragma once

// Combinators on certificates.  Each one is an event-inclusion argument:
//
//   add:      {|X+W| >= t(|Y|+|Z|)} in {|X| >= t|Y|} u {|W| >= t|Z|}
//   multiply: {|XW| >= t|YZ|}       in {|X| >= sqrt(t)|Y|} u {|W| >= sqrt(t)|Z|}
//   finite_max: union bound over |Lambda_n| <= exp(kappa r_n) indices
//   covering_supremum: sup <= 2 max_net + 2 eps M under the self-bounding
//   Lipschitz condition, then a union of two events at t/2.
//
// Every output records its inputs in provenance so bind_constants can replay
// the construction after symbolic constants are fitted.

#include <functional>

#include "tailcert/certificate.hpp"

namespace tailcert {

TailCertificate add(const TailCertificate& a, const TailCertificate& b);
TailCertificate multiply(const TailCertificate& a, const TailCertificate& b);
TailCertificate power_transform(const TailCertificate& cert, double alpha);

/// Witness for g(X_n) given a witness for X_n = o^(1; r_n) and a modulus
/// of continuity omega of g at 0 (|g(x)| <= omega(|x|) near 0).
SmallnessWitness continuous_transform_o(const SmallnessWitness& witness,
                                        const std::function<double(double)>& modulus);

struct TruncateOptions {
  double n_probe_max = 1e5;
};

/// Certificate for X from one for Xhat plus P(|X| > |Xhat|) <= p_n.  The
/// result carries the hat flavor with ceiling
/// min(old ceiling, sup{t : f(t) <= -log(p_n)/r_n}).
TailCertificate truncate(const TailCertificate& hat_cert, const DominationEvidence& dom,
                         const TruncateOptions& options = {});

/// Coerces to flavor O with N = 1.  The caller asserts P(Y_n = 0) = 0, under
/// which the small-n cases are absorbed into the constants.
TailCertificate strengthen_to_all_n(const TailCertificate& cert, bool size_never_zero);

/// Flavor O viewed as the hat flavor with an infinite ceiling.
TailCertificate relax_to_hat(const TailCertificate& cert);

TailCertificate finite_max(const UniformCertificate& u, double kappa,
                           const EvalRange& range = EvalRange::standard());

/// `lip_cert` with size Const(0) stands for M_n = 0.
TailCertificate covering_supremum(const UniformCertificate& net_cert, double kappa,
                                  const TailCertificate& lip_cert, const SizeSequence& eps,
                                  bool lipschitz_asserted,
                                  const EvalRange& range = EvalRange::standard());

/// Replaces the size by `new_size` given y_n <= K * new_size_n on `range`.
TailCertificate dominate_size(const TailCertificate& cert, const SizeSequence& new_size, double k,
                              const EvalRange& range = EvalRange::standard());

ThetaCertificate theta_pair(const TailCertificate& upper, const LowerTailCertificate& lower);

/// Substitutes fitted values for symbolic constants and rebuilds every
/// derived quantity (C2 of a finite max, for instance) along the provenance.
TailCertificate bind_constants(const TailCertificate& cert, const Bindings& values);

}  // namespace tailcert
