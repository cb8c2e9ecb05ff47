#pragma once

#include <vector>

#include "modval/core.hpp"
#include "modval/two_state.hpp"

namespace modval {

/// Uniform position grid. Momentum convention (hbar = 1): the conjugate
/// grid is p_j = 2*pi*j / (n*dq) for j in [-n/2, n/2).
struct PointerGrid {
    double q_min = -16.0;
    double q_max = 16.0;
    int n = 1024;

    void validate() const;
    double dq() const { return (q_max - q_min) / n; }
    double q(int i) const { return q_min + i * dq(); }
};

/// Pointer wavefunction sampled on a grid, with the reference Gaussian
/// width delta it was prepared with. Amplitudes have units length^{-1/2};
/// sum |amps|^2 dq = 1.
struct GaussianPointerState {
    PointerGrid grid;
    double delta = 1.0;
    Vec amps;
};

struct MomentumDistribution {
    std::vector<double> p;        // ascending
    std::vector<double> density;  // integrates to 1 against dp
};

/// Grid wide enough for every shifted branch to stay 8*delta away from the
/// boundaries: [-16*delta - k*rho, 16*delta + k*rho] at n = 1024, where rho
/// bounds the coupled observable's spectral radius.
PointerGrid default_grid(double delta, double k, double spectral_radius);

/// Psi(Q) = (delta^2 pi)^{-1/4} exp(-Q^2 / (2 delta^2)), so Var(Q) =
/// delta^2/2 and Var(P) = 1/(2 delta^2). Requires q_max >= 8*delta and
/// q_min <= -8*delta.
GaussianPointerState init_gaussian(const PointerGrid& grid, double delta);

/// Exact coupled evolution under H = k P C followed by post-selection:
/// the output is sum_j <phi|e_j><e_j|psi> Psi(Q - k lambda_j), normalized,
/// with each shifted branch evaluated analytically on the grid.
GaussianPointerState von_neumann_exact(const TwoStateVector& tsv, const OperatorMatrix& C,
                                       double k, const GaussianPointerState& pointer);

/// The effective weak-coupling picture: Psi(Q - k C_w) with a complex
/// shift, evaluated in closed form. Input must be the unevolved reference
/// Gaussian of its grid and width.
GaussianPointerState effective_shift(const GaussianPointerState& pointer, cplx C_w, double k);

MomentumDistribution momentum_distribution(const GaussianPointerState& pointer);

/// Correlation-based estimate of Re(AB)_w from two local pointers coupled
/// with equal strength k: (<Q_A Q_B> - delta^4 <P_A P_B>) / k^2. The
/// delta^4 coefficient is 1/(4 Var(P)^2) for the Gaussian convention above;
/// it is validated against exact weak values in the tests.
double rs_estimate(const TwoStateVector& tsv, const LocalObservable& A, const LocalObservable& B,
                   double k, double delta, const PointerGrid& grid);

double mean_q(const GaussianPointerState& s);
double var_q(const GaussianPointerState& s);
double mean_p(const MomentumDistribution& d);
double var_p(const MomentumDistribution& d);

}  // namespace modval
