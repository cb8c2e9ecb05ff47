#include "modval/meters.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace modval {

StateVector QubitMeterState::to_state() const {
    Vec v(2);
    v << a0, a1;
    return {HilbertDims{2}, std::move(v)};
}

void MultiQubitMeterSpec::validate() const {
    if (n < 1) throw ValidationError("MultiQubitMeterSpec: need at least one meter qubit");
    std::set<int> seen;
    for (int i : omega) {
        if (i < 0 || i >= n) throw ValidationError("MultiQubitMeterSpec: omega index out of range");
        if (!seen.insert(i).second) throw ValidationError("MultiQubitMeterSpec: duplicate omega index");
    }
    double nrm2 = std::norm(a0) + std::norm(a1);
    if (std::abs(nrm2 - 1.0) > 1e-12)
        throw ValidationError("MultiQubitMeterSpec: amplitudes must be normalized");
}

int MultiQubitMeterSpec::omega_pattern_index() const {
    int idx = 0;
    for (int i : omega) idx |= 1 << (n - 1 - i);  // qubit 0 is the most significant digit
    return idx;
}

StateVector MultiQubitMeterSpec::initial_state() const {
    validate();
    Vec v = Vec::Zero(1 << n);
    v[0] += a0;
    v[omega_pattern_index()] += a1;
    return {HilbertDims(std::vector<int>(n, 2)), std::move(v)};
}

double SpinMeterState::theta() const {
    return 2.0 * std::atan2(std::abs(a_down), std::abs(a_up));
}

double SpinMeterState::phi() const {
    if (std::abs(a_up) == 0.0 || std::abs(a_down) == 0.0) return 0.0;  // azimuth undefined at poles
    double ph = std::arg(a_down / a_up);
    if (ph >= M_PI) ph -= 2.0 * M_PI;
    return ph;
}

SpinMeterState SpinMeterState::from_angles(double theta, double phi) {
    return {std::cos(theta / 2.0), std::exp(cplx(0.0, phi)) * std::sin(theta / 2.0),
            Provenance::exact};
}

QubitMeterState evolve_qubit_meter(const TwoStateVector& tsv, const OperatorMatrix& C, double k,
                                   const QubitMeterState& meter) {
    cplx cm;
    try {
        cm = modular_value(tsv, C, k).value;
    } catch (const OrthogonalSelection&) {
        return {0.0, 1.0, Provenance::effective, true};
    }
    cplx u0 = meter.a0, u1 = meter.a1 * cm;
    double n = std::sqrt(std::norm(u0) + std::norm(u1));
    if (n == 0.0) throw PostSelectionImpossible("evolve_qubit_meter: meter amplitude vanished");
    return {u0 / n, u1 / n, Provenance::effective, false};
}

QubitMeterState weak_limit_qubit_meter(const TwoStateVector& tsv, const OperatorMatrix& C,
                                       double k, const QubitMeterState& meter) {
    cplx cw = weak_value(tsv, C).value;
    cplx u0 = meter.a0, u1 = meter.a1 * std::exp(cplx(0.0, -k) * cw);
    double n = std::sqrt(std::norm(u0) + std::norm(u1));
    return {u0 / n, u1 / n, Provenance::effective, false};
}

EvolvedMeter evolve_multi_qubit_meter(const TwoStateVector& tsv,
                                      const std::vector<LocalObservable>& locals, double k,
                                      const MultiQubitMeterSpec& spec) {
    spec.validate();
    if (static_cast<int>(locals.size()) != spec.n)
        throw ValidationError("evolve_multi_qubit_meter: one observable per meter qubit required");
    std::set<int> sites;
    for (const auto& l : locals)
        if (!sites.insert(l.site).second)
            throw ValidationError("evolve_multi_qubit_meter: duplicate system site");

    std::vector<WeightedLocal> coupled;
    for (int i : spec.omega) coupled.push_back({locals[i], k});

    HilbertDims meter_space(std::vector<int>(spec.n, 2));
    int pattern = spec.omega_pattern_index();
    cplx m;
    try {
        m = modular_value_combination(tsv, coupled).value;
    } catch (const OrthogonalSelection&) {
        return {basis_state(meter_space, pattern), Provenance::effective, true};
    }

    Vec v = Vec::Zero(meter_space.total());
    v[0] += spec.a0;
    v[pattern] += spec.a1 * m;
    double n = v.norm();
    if (n == 0.0) throw PostSelectionImpossible("evolve_multi_qubit_meter: meter amplitude vanished");
    return {StateVector(meter_space, v / n), Provenance::effective, false};
}

SpinMeterState evolve_spin_meter(const TwoStateVector& tsv, const OperatorMatrix& C, double k,
                                 const SpinMeterState& spin) {
    cplx m_plus = modular_value(tsv, C, k).value;    // |up> branch: sigma_z eigenvalue +1
    cplx m_minus = modular_value(tsv, C, -k).value;  // |down> branch
    cplx u = spin.a_up * m_plus, d = spin.a_down * m_minus;
    double n = std::sqrt(std::norm(u) + std::norm(d));
    if (n == 0.0) throw PostSelectionImpossible("evolve_spin_meter: meter amplitude vanished");
    return {u / n, d / n, Provenance::effective};
}

namespace {

Mat meter_side_matrix(MeterCoupling mc) {
    switch (mc) {
        case MeterCoupling::projector_one: return basis_projector(1, 2);
        case MeterCoupling::sigma_z: return pauli_z();
    }
    throw ValidationError("unknown meter coupling");
}

}  // namespace

StateVector joint_evolve(const StateVector& pre, const CouplingSpec& coupling,
                         const StateVector& meter_init) {
    for (int d : meter_init.space.dims)
        if (d != 2) throw ValidationError("joint_evolve: meter must be a register of qubits");

    std::vector<int> joint_dims = pre.space.dims;
    joint_dims.insert(joint_dims.end(), meter_init.space.dims.begin(),
                      meter_init.space.dims.end());
    HilbertDims joint_space(joint_dims);
    int n_sys = pre.space.site_count();

    Mat h = Mat::Zero(joint_space.total(), joint_space.total());
    for (const auto& term : coupling.terms) {
        if (!(term.system_op.space == pre.space))
            throw DimensionMismatch("joint_evolve: coupling operator does not act on the system space");
        if (term.meter_qubit < 0 || term.meter_qubit >= meter_init.space.site_count())
            throw ValidationError("joint_evolve: meter qubit index out of range");
        if (!is_hermitian(term.system_op.entries))
            throw NonHermitian("joint_evolve: coupling observable is not Hermitian");
        Mat meter_part =
            embed_local({n_sys + term.meter_qubit, meter_side_matrix(term.meter_op)}, joint_space)
                .entries;
        Mat sys_part = kron(term.system_op.entries,
                            Mat::Identity(meter_init.space.total(), meter_init.space.total()));
        h += term.k * meter_part * sys_part;  // commuting factors: meter ops are diagonal
    }

    Vec joint(joint_space.total());
    for (Eigen::Index s = 0; s < pre.amps.size(); ++s)
        joint.segment(s * meter_init.amps.size(), meter_init.amps.size()) =
            pre.amps[s] * meter_init.amps;

    return {joint_space, herm_exp(h, 1.0) * joint};
}

EvolvedMeter brute_force_evolve(const TwoStateVector& tsv, const CouplingSpec& coupling,
                                const StateVector& meter_init) {
    StateVector joint =
        joint_evolve(normalized(tsv.pre), coupling, normalized(meter_init));
    Vec phi = normalized(tsv.post).amps;

    Eigen::Index md = meter_init.amps.size();
    Vec meter = Vec::Zero(md);
    for (Eigen::Index s = 0; s < phi.size(); ++s)
        meter += std::conj(phi[s]) * joint.amps.segment(s * md, md);

    double n = meter.norm();
    if (n < 1e-14)
        throw PostSelectionImpossible("brute_force_evolve: post-selected amplitude is zero");
    return {StateVector(meter_init.space, meter / n), Provenance::exact, false};
}

StateVector osaka_initial_meter(cplx beta) {
    Vec v(4);
    v << 1.0, beta, beta, beta;
    v /= std::sqrt(1.0 + 3.0 * std::norm(beta));
    return {HilbertDims{2, 2}, std::move(v)};
}

EvolvedMeter osaka_meter(const TwoStateVector& tsv, const std::vector<LocalObservable>& locals,
                         double k, cplx beta) {
    if (locals.size() != 2)
        throw ValidationError("osaka_meter: exactly two local observables required");
    if (locals[0].site == locals[1].site)
        throw ValidationError("osaka_meter: observables must sit at distinct sites");

    cplx m_a = modular_value_combination(tsv, {{locals[0], k}}).value;
    cplx m_b = modular_value_combination(tsv, {{locals[1], k}}).value;
    cplx m_sum = modular_value_combination(tsv, {{locals[0], k}, {locals[1], k}}).value;

    Vec v(4);
    v << 1.0, beta * m_b, beta * m_a, beta * m_sum;  // qubit 0 couples to locals[0]
    double n = v.norm();
    if (n == 0.0) throw PostSelectionImpossible("osaka_meter: meter amplitude vanished");
    return {StateVector(HilbertDims{2, 2}, v / n), Provenance::effective, false};
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (!(a.space == b.space)) throw DimensionMismatch("fidelity: mismatched spaces");
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw ValidationError("fidelity: zero-norm state");
    return std::norm(a.amps.dot(b.amps)) / (na * na * nb * nb);
}

}  // namespace modval
