#include "modval/two_state.hpp"

#include <set>

namespace modval {

cplx overlap(const TwoStateVector& tsv) {
    return inner(normalized(tsv.post), normalized(tsv.pre));
}

ValueEstimate weak_value(const TwoStateVector& tsv, const OperatorMatrix& C) {
    if (!(C.space == tsv.space()))
        throw DimensionMismatch("weak_value: observable space does not match the two-state vector");
    StateVector psi = normalized(tsv.pre);
    StateVector phi = normalized(tsv.post);
    cplx ov = inner(phi, psi);
    if (std::abs(ov) < kOrthogonalTol)
        throw OrthogonalSelection("weak_value: post-selection orthogonal to pre-selection",
                                  std::abs(ov));
    return {inner(phi, apply(C, psi)) / ov, Provenance::exact, 0.0};
}

ValueEstimate modular_value(const TwoStateVector& tsv, const OperatorMatrix& C, double k) {
    if (!(C.space == tsv.space()))
        throw DimensionMismatch("modular_value: observable space does not match the two-state vector");
    StateVector psi = normalized(tsv.pre);
    StateVector phi = normalized(tsv.post);
    cplx ov = inner(phi, psi);
    cplx evolved = inner(phi, apply(herm_exp(C, k), psi));
    if (std::abs(ov) < kOrthogonalTol)
        throw OrthogonalSelection(
            "modular_value: post-selection orthogonal to pre-selection; the qubit meter ends in |1>",
            std::abs(ov), evolved);
    return {evolved / ov, Provenance::exact, 0.0};
}

ValueEstimate modular_value_combination(const TwoStateVector& tsv,
                                        const std::vector<WeightedLocal>& terms) {
    std::set<int> sites;
    for (const auto& t : terms)
        if (!sites.insert(t.obs.site).second)
            throw ValidationError("modular_value_combination: duplicate site");

    Mat h = Mat::Zero(tsv.space().total(), tsv.space().total());
    for (const auto& t : terms)
        h += t.k * embed_local(t.obs, tsv.space()).entries;

    StateVector psi = normalized(tsv.pre);
    StateVector phi = normalized(tsv.post);
    cplx ov = inner(phi, psi);
    cplx evolved = phi.amps.dot(herm_exp(h, 1.0) * psi.amps);
    if (std::abs(ov) < kOrthogonalTol)
        throw OrthogonalSelection(
            "modular_value_combination: post-selection orthogonal to pre-selection",
            std::abs(ov), evolved);
    return {evolved / ov, Provenance::exact, 0.0};
}

}  // namespace modval
