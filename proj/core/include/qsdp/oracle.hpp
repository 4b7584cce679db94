#pragma once

#include <vector>

#include "qsdp/distribution.hpp"
#include "qsdp/substochastic_matrix.hpp"

namespace qsdp {

struct QsdResult {
    Distribution qsd;
    double lambda0;     // decay rate of the survival probability, -log of the
                        // leading eigenvalue
    long iterations;
    double residual;    // TV change of the last iterate
};

struct MixingReport {
    double gamma;                  // decay rate of d(n); +inf when d vanishes
    std::vector<double> d;         // d[n] = max over Dirac pairs of the TV gap
                                   // between their conditioned laws at step n
    bool underflowed;              // d hit the numerical floor before horizon/2
    bool no_decay;                 // fitted rate indistinguishable from zero
};

// Law of the chain at step n conditioned on survival: n left-multiplications
// by the kernel with renormalization after each.  Renormalizing per step keeps
// the iteration well-scaled for any horizon; the survival mass itself is
// accumulated separately in log space by survival_probability_exact.
Distribution conditional_distribution_exact(const SubstochasticMatrix& matrix,
                                            const Distribution& initial, long steps);

// P(survival past `steps`) from `initial`; product of the per-step mass
// ratios, accumulated in log space.
double survival_probability_exact(const SubstochasticMatrix& matrix,
                                  const Distribution& initial, long steps);

// Quasi-stationary distribution by power iteration on the conditioned
// evolution, started from uniform.  Converged when the TV change of the
// iterate drops below `tol`; the leading eigenvalue is read off the final
// mass ratio (clamped to 1 so stochastic matrices report lambda0 == 0).
// Throws ConvergenceError after max_iterations (periodic kernels oscillate).
QsdResult qsd_exact(const SubstochasticMatrix& matrix, double tol = 1e-12,
                    long max_iterations = 1000000);

// Least-squares fit of -log d(n) over the tail half of the horizon, where
// d(n) is the worst-case TV gap between conditioned laws started from two
// Diracs.  Values at the numerical floor are excluded from the fit.
MixingReport estimate_mixing_rate(const SubstochasticMatrix& matrix, long horizon);

} // namespace qsdp
