#pragma once

#include <vector>

#include "modval/core.hpp"

namespace modval {

// Below this overlap magnitude (on normalized states) the post-selection is
// treated as orthogonal and weak/modular values are undefined.
inline constexpr double kOrthogonalTol = 1e-12;

enum class Provenance { exact, effective, tomographic };

/// A complex value together with how it was obtained. stderr is 0 whenever
/// the value came from a closed-form computation.
struct ValueEstimate {
    cplx value;
    Provenance provenance = Provenance::exact;
    double std_err = 0.0;
};

/// Pre-selected state |psi> and post-selected state <phi| (stored as a ket
/// and conjugated on use). Both may be unnormalized; every functional
/// normalizes internally so coefficient lists can be entered verbatim.
struct TwoStateVector {
    StateVector pre;
    StateVector post;

    TwoStateVector() = default;
    TwoStateVector(StateVector pre_, StateVector post_)
        : pre(std::move(pre_)), post(std::move(post_)) {
        if (!(pre.space == post.space))
            throw DimensionMismatch("TwoStateVector: pre and post live in different spaces");
        if (pre.norm() <= 0.0 || post.norm() <= 0.0)
            throw ValidationError("TwoStateVector: zero-norm state");
    }

    const HilbertDims& space() const { return pre.space; }
};

/// One local observable with its own coupling strength, for linear
/// combinations sum_i k_i C_i.
struct WeightedLocal {
    LocalObservable obs;
    double k = 0.0;
};

/// <phi|psi> on normalized states.
cplx overlap(const TwoStateVector& tsv);

/// C_w = <phi|C|psi> / <phi|psi>. Throws OrthogonalSelection when the
/// overlap magnitude is below kOrthogonalTol.
ValueEstimate weak_value(const TwoStateVector& tsv, const OperatorMatrix& C);

/// C_m = <phi|exp(-ikC)|psi> / <phi|psi>. On orthogonal selection the error
/// carries the evolved numerator amplitude: the only thing tomography of the
/// meter can reveal in that regime is whether it vanishes.
ValueEstimate modular_value(const TwoStateVector& tsv, const OperatorMatrix& C, double k);

/// Modular value of sum_i k_i C_i with each C_i embedded at its site.
/// Sites must be distinct.
ValueEstimate modular_value_combination(const TwoStateVector& tsv,
                                        const std::vector<WeightedLocal>& terms);

}  // namespace modval
