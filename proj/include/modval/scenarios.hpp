#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modval/core.hpp"
#include "modval/two_state.hpp"

namespace modval {

/// One reported quantity, optionally checked against a target.
struct ReportEntry {
    std::string name;
    cplx value = 0.0;
    double std_err = 0.0;
    bool has_target = false;
    cplx target = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct ScenarioReport {
    std::string scenario;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<ReportEntry> entries;

    void add(std::string name, cplx value, double std_err = 0.0);
    void check(std::string name, cplx value, cplx target, double tolerance, double std_err = 0.0);
    const ReportEntry& find(const std::string& name) const;
    bool all_pass() const;
    std::string to_json() const;
    std::string to_csv() const;  // quantity,value_re,value_im,stderr,target_re,target_im,pass
};

/// Two entangled qubits at four locations. Encoding: particle 1 basis
/// {|A> -> 0, |C> -> 1}, particle 2 {|B> -> 0, |D> -> 1}. Pre-selection
/// (|AD> + |CD> + |CB>)/sqrt(3), post-selection (<A|-<C|)(<B|-<D|)/2.
TwoStateVector hardy_tsv();

/// Projector onto the occupied branch for each particle: |A><A| on site 0,
/// |B><B| on site 1.
LocalObservable hardy_projector_a();
LocalObservable hardy_projector_b();

/// Singlet pre-selection, post-selection <up_y|_1 <up_x|_2, with
/// |up_x> = (|0>+|1>)/sqrt(2) and |up_y> = (|0>+i|1>)/sqrt(2).
TwoStateVector spin_hardy_tsv();

ScenarioReport hardy_scenario();
ScenarioReport spin_hardy_scenario();

/// Both projector identities at k = pi: P_w = (1 - P_m)/2 for each input,
/// and (P_A P_B)_w = ((P_A+P_B)_m - (P_A)_m - (P_B)_m + 1)/4; the report
/// compares each right-hand side against the directly computed weak value.
ScenarioReport projector_identities_check(const TwoStateVector& tsv, const LocalObservable& P_A,
                                          const LocalObservable& P_B);

/// End-to-end superposition-meter run on the Hardy pair at k = pi:
/// brute-force evolution checked against the closed form, single-basis
/// (+/-) statistics mapped to real weak values, full two-qubit tomography
/// recovering all three modular values, and the split-ensemble alternative
/// with one meter per observable. shots = 0 selects the infinite-shot
/// limit (exact probabilities, no sampling noise).
ScenarioReport osaka_experiment(cplx beta, long long shots, std::uint64_t seed);

}  // namespace modval
