#pragma once

#include <vector>

#include "modval/core.hpp"
#include "modval/two_state.hpp"

namespace modval {

/// Single-qubit meter amplitudes: a0 multiplies |0>, a1 multiplies |1>.
/// `degenerate` is set when the post-selection was orthogonal to the
/// pre-selection, in which case the meter deterministically ends in |1>.
struct QubitMeterState {
    cplx a0 = 1.0;
    cplx a1 = 0.0;
    Provenance provenance = Provenance::exact;
    bool degenerate = false;

    double norm() const { return std::sqrt(std::norm(a0) + std::norm(a1)); }
    StateVector to_state() const;
};

/// Initial n-qubit meter alpha|0...0> + beta|omega-pattern>, where the
/// pattern has |1> exactly on the qubits in omega. Coupling only those
/// qubits picks up the modular value of the partial sum over omega.
struct MultiQubitMeterSpec {
    int n = 1;
    cplx a0 = 1.0;
    cplx a1 = 0.0;
    std::vector<int> omega;

    void validate() const;
    StateVector initial_state() const;
    int omega_pattern_index() const;  // basis index of the second branch
};

/// Spin-1/2 meter. Bloch convention: |spin> = cos(theta/2)|up> +
/// e^{i phi} sin(theta/2)|down>, theta in [0,pi] from +z, phi in [-pi,pi).
struct SpinMeterState {
    cplx a_up = 1.0;
    cplx a_down = 0.0;
    Provenance provenance = Provenance::exact;

    double theta() const;
    double phi() const;
    static SpinMeterState from_angles(double theta, double phi);
};

/// Which meter-side operator a coupling term uses: the qubit meters couple
/// through |1><1| on their meter qubit, the spin meter through sigma_z.
enum class MeterCoupling { projector_one, sigma_z };

/// One term k * (meter-side op on meter_qubit) x (system_op) of the
/// interaction. Only the integrated strength k enters; the time profile of
/// the coupling is idealized as impulsive.
struct CouplingTerm {
    int meter_qubit = 0;
    OperatorMatrix system_op;  // already lifted to the full system space
    double k = 0.0;
    MeterCoupling meter_op = MeterCoupling::projector_one;
};

struct CouplingSpec {
    std::vector<CouplingTerm> terms;
};

/// A meter state after coupling and post-selection, tagged with whether it
/// came from a closed-form modular-value expression (effective) or from
/// exact joint evolution (exact).
struct EvolvedMeter {
    StateVector state;
    Provenance provenance = Provenance::exact;
    bool degenerate = false;
};

/// Closed form for H = k |1><1| C: returns N(a0|0> + a1 C_m |1>). On
/// orthogonal selection returns |1> with the degenerate flag set.
QubitMeterState evolve_qubit_meter(const TwoStateVector& tsv, const OperatorMatrix& C,
                                   double k, const QubitMeterState& meter);

/// The weak-coupling substitution C -> C_w applied naively inside the
/// evolution: N(a0|0> + a1 e^{-ik C_w}|1>). Correct only to first order in
/// k; kept for quantifying exactly how it fails.
QubitMeterState weak_limit_qubit_meter(const TwoStateVector& tsv, const OperatorMatrix& C,
                                       double k, const QubitMeterState& meter);

/// Closed form for H = k sum_i |1><1|_i C_i with locals[i] coupled to meter
/// qubit i: N(a0 |0...0> + a1 (sum_{i in omega} C_i)_m |omega-pattern>).
/// Observables whose meter qubit is outside omega never enter.
EvolvedMeter evolve_multi_qubit_meter(const TwoStateVector& tsv,
                                      const std::vector<LocalObservable>& locals, double k,
                                      const MultiQubitMeterSpec& spec);

/// Closed form for H = k sigma_z C: N(a_up M(+k)|up> + a_down M(-k)|down>)
/// with M(s) = <phi|e^{-isC}|psi>/<phi|psi>. Throws on orthogonal selection
/// (both branches lose their reference amplitude).
SpinMeterState evolve_spin_meter(const TwoStateVector& tsv, const OperatorMatrix& C, double k,
                                 const SpinMeterState& spin);

/// Joint state after U = exp(-i sum_i k_i M_i x C_i) on |psi> x |meter>,
/// before any post-selection. System sites come first (most significant).
StateVector joint_evolve(const StateVector& pre, const CouplingSpec& coupling,
                         const StateVector& meter_init);

/// The oracle: exact joint evolution followed by projection of the system
/// onto the post-selected state; returns the normalized meter state. No
/// approximation anywhere. Throws PostSelectionImpossible if the projected
/// amplitude vanishes identically.
EvolvedMeter brute_force_evolve(const TwoStateVector& tsv, const CouplingSpec& coupling,
                                const StateVector& meter_init);

/// Superposition meter: initial state (|00> + beta(|01>+|10>+|11>)) /
/// sqrt(1+3|beta|^2), coupled at strength k to two local projectors; final
/// state N(|00> + beta(m_B|01> + m_A|10> + m_{A+B}|11>)) where qubit 0
/// couples to locals[0] and qubit 1 to locals[1].
EvolvedMeter osaka_meter(const TwoStateVector& tsv, const std::vector<LocalObservable>& locals,
                         double k, cplx beta);

StateVector osaka_initial_meter(cplx beta);

/// |<a|b>|^2 on normalized states.
double fidelity(const StateVector& a, const StateVector& b);

}  // namespace modval
