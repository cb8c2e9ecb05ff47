#pragma once

#include <cmath>
#include <random>

#include "modval/core.hpp"
#include "modval/two_state.hpp"

// Seeded generators shared by the property tests. All randomness flows
// through mt19937_64 raw output so the draws are identical on every
// platform and run.
namespace testutil {

using modval::cplx;
using modval::HilbertDims;
using modval::Mat;
using modval::StateVector;
using modval::TwoStateVector;
using modval::Vec;

inline double urand(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double urand(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * urand(eng);
}

// Standard normal via Box-Muller on the portable uniform above.
inline double nrand(std::mt19937_64& eng) {
    double u1 = urand(eng), u2 = urand(eng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline cplx crand(std::mt19937_64& eng) { return {nrand(eng), nrand(eng)}; }

inline StateVector random_state(std::mt19937_64& eng, const HilbertDims& space) {
    Vec v(space.total());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = crand(eng);
    return modval::normalized(StateVector(space, v));
}

inline TwoStateVector random_tsv(std::mt19937_64& eng, const HilbertDims& space,
                                 double min_overlap) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        StateVector pre = random_state(eng, space), post = random_state(eng, space);
        if (std::abs(modval::inner(post, pre)) >= min_overlap) return {pre, post};
    }
    throw std::runtime_error("random_tsv: could not reach the requested overlap");
}

inline Mat random_hermitian(std::mt19937_64& eng, int d) {
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = crand(eng);
    return 0.5 * (a + a.adjoint());
}

// Random operator with eigenvalues exactly +1 and -1: a unit Bloch vector
// contracted with the Pauli matrices.
inline Mat random_pauli_like(std::mt19937_64& eng) {
    double x = nrand(eng), y = nrand(eng), z = nrand(eng);
    double n = std::sqrt(x * x + y * y + z * z);
    if (n < 1e-12) return modval::pauli_z();
    return (x * modval::pauli_x() + y * modval::pauli_y() + z * modval::pauli_z()) / n;
}

// Random rank-1 projector on a d-level system.
inline Mat random_projector(std::mt19937_64& eng, int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = crand(eng);
    v.normalize();
    return v * v.adjoint();
}

}  // namespace testutil
