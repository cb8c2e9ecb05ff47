#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "modval/core.hpp"
#include "modval/two_state.hpp"

namespace modval {

// Readout inversion floor: below this |0>-amplitude magnitude the modular
// value amplifies estimation noise beyond usefulness.
inline constexpr double kGammaFloor = 0.05;

// Multinomial resamples used for bootstrap standard errors.
inline constexpr int kBootstrapResamples = 100;

/// Orthonormal measurement basis; column c is the vector of outcome c.
struct MeasurementBasis {
    std::string label;
    Mat vectors;
};

struct MeasurementPlan {
    std::vector<MeasurementBasis> bases;
    long long shots_per_basis = 1;
    std::uint64_t seed = 0;

    void validate(int dim) const;
};

/// Raw outcome counts, one row of counts per basis. Carries the bases and
/// seed so estimation and bootstrap are self-contained.
struct CountsRecord {
    std::vector<MeasurementBasis> bases;
    long long shots_per_basis = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<long long>> counts;

    std::string to_csv() const;  // columns: basis,outcome,count
};

struct ModularEstimate {
    cplx value;
    double std_err = 0.0;
    long long shots_total = 0;
};

// --- deterministic sampling ---------------------------------------------------

/// Stream derivation for substreams: mixes (seed, stream index) into an
/// independent 64-bit seed. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Exact multinomial draw via conditional binomials; deterministic given
/// the engine state, O(sqrt(n)) expected time per category.
std::vector<long long> multinomial_draw(long long n, const std::vector<double>& probs,
                                        std::mt19937_64& eng);

/// Projective measurement simulation: per basis, multinomial over the Born
/// probabilities |<v_c|state>|^2 with a substream derived from (seed, basis
/// index). Identical plans give byte-identical records.
CountsRecord sample_counts(const StateVector& state, const MeasurementPlan& plan);

// --- standard bases and plans --------------------------------------------------

MeasurementBasis pauli_basis(char axis);  // 'x', 'y' or 'z'; outcome 0 is the +1 eigenvector
MeasurementPlan single_qubit_pauli_plan(long long shots, std::uint64_t seed);
MeasurementPlan two_qubit_pauli_plan(long long shots, std::uint64_t seed);  // 9 product bases
MeasurementPlan pm_basis_plan(long long shots, std::uint64_t seed);  // the single (+/-)x(+/-) basis

// --- estimation -----------------------------------------------------------------

/// Least-squares inversion of Born frequencies over a Hermitian operator
/// basis, then eigenvalue clipping and trace renormalization. Requires an
/// informationally complete basis set.
Mat linear_inversion(const CountsRecord& counts);

/// Same, fed exact probabilities (the infinite-shot limit).
Mat linear_inversion_probs(const std::vector<MeasurementBasis>& bases,
                           const std::vector<std::vector<double>>& probs);

/// Reads the modular value off a meter estimate: the dominant eigenvector,
/// interpreted as gamma|idx0> + delta|idx1>, gives C_m = alpha*delta /
/// (beta*gamma). Throws IllConditioned when |gamma| < kGammaFloor.
ModularEstimate extract_modular(const Mat& rho, cplx alpha, cplx beta, int idx0 = 0, int idx1 = 1);

/// Full pipeline from counts, with a bootstrap standard error over
/// kBootstrapResamples multinomial resamples of the counts.
ModularEstimate extract_modular(const CountsRecord& counts, cplx alpha, cplx beta, int idx0 = 0,
                                int idx1 = 1);

// --- single-basis partial tomography ---------------------------------------------

/// Estimated probabilities of the four (+/-,+/-) outcomes on a two-qubit
/// meter, in outcome order ++, +-, -+, --.
std::array<double, 4> partial_tomography_pm(const StateVector& meter_state,
                                            const MeasurementPlan& plan);

/// The same four probabilities in the infinite-shot limit.
std::array<double, 4> pm_probabilities_exact(const StateVector& meter_state);

/// Our reconstruction of real weak values from single-basis statistics of
/// the superposition meter, valid to first order in beta: the three sign
/// correlators E[s1], E[s2], E[s1 s2] estimate 2*beta*Re of the three
/// modular values, which the k=pi projector identities turn into weak
/// values. Carries an O(beta) systematic by construction.
struct PmAnalysis {
    double re_m_a, re_m_b, re_m_sum;     // modular values of A, B, A+B
    double re_w_a, re_w_b, re_w_ab;      // weak values of A, B, AB
};
PmAnalysis pm_weak_value_analysis(const std::array<double, 4>& probs, double beta);

}  // namespace modval
