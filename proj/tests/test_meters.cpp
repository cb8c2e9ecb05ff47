#include <doctest.h>

#include "modval/meters.hpp"
#include "modval/scenarios.hpp"
#include "test_util.hpp"

using namespace modval;

namespace {

StateVector spin_state(const SpinMeterState& s) {
    Vec v(2);
    v << s.a_up, s.a_down;
    return {HilbertDims{2}, std::move(v)};
}

CouplingTerm projector_coupling(int meter_qubit, const TwoStateVector& tsv,
                                const LocalObservable& obs, double k) {
    return {meter_qubit, embed_local(obs, tsv.space()), k, MeterCoupling::projector_one};
}

}  // namespace

TEST_CASE("qubit meter closed form matches exact joint evolution") {
    std::mt19937_64 eng(31);
    std::vector<HilbertDims> spaces = {HilbertDims{2}, HilbertDims{2, 2}, HilbertDims{3}};
    for (int rep = 0; rep < 100; ++rep) {
        const HilbertDims& space = spaces[rep % spaces.size()];
        TwoStateVector tsv = testutil::random_tsv(eng, space, 0.05);
        OperatorMatrix c(space, testutil::random_hermitian(eng, space.total()));
        double k = testutil::urand(eng, 0.1, 2.5);
        QubitMeterState meter{testutil::crand(eng), testutil::crand(eng)};

        QubitMeterState eff = evolve_qubit_meter(tsv, c, k, meter);
        EvolvedMeter exact = brute_force_evolve(tsv, CouplingSpec{{{0, c, k}}}, meter.to_state());

        CHECK(fidelity(eff.to_state(), exact.state) > 1.0 - 1e-10);
        CHECK(eff.provenance == Provenance::effective);
        CHECK(exact.provenance == Provenance::exact);
        CHECK(std::abs(eff.norm() - 1.0) < 1e-12);

        // The closed form is literally N(a0|0> + a1 C_m |1>).
        cplx cm = modular_value(tsv, c, k).value;
        Vec expect(2);
        expect << meter.a0, meter.a1 * cm;
        CHECK(fidelity(eff.to_state(), StateVector(HilbertDims{2}, expect)) > 1.0 - 1e-12);
    }
}

TEST_CASE("naive weak-value substitution fails at fourth order in fidelity") {
    std::mt19937_64 eng(32);
    QubitMeterState meter{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    for (int rep = 0; rep < 5; ++rep) {
        TwoStateVector tsv = testutil::random_tsv(eng, HilbertDims{2}, 0.2);
        OperatorMatrix c(HilbertDims{2}, testutil::random_hermitian(eng, 2));

        auto deficit = [&](double k) {
            QubitMeterState exact = evolve_qubit_meter(tsv, c, k, meter);
            QubitMeterState naive = weak_limit_qubit_meter(tsv, c, k, meter);
            return 1.0 - fidelity(exact.to_state(), naive.to_state());
        };
        double d1 = deficit(0.2), d2 = deficit(0.1), d3 = deficit(0.05);
        CHECK(d1 > 1e-12);  // the substitution really is wrong at finite strength
        CHECK(d1 / d2 > 3.5);
        CHECK(d2 / d3 > 3.5);
    }
}

TEST_CASE("multi-qubit meter matches exact joint evolution") {
    std::mt19937_64 eng(33);
    for (int rep = 0; rep < 40; ++rep) {
        int n = 2 + int(eng() % 2);
        HilbertDims space(std::vector<int>(n, 2));
        TwoStateVector tsv = testutil::random_tsv(eng, space, 0.05);

        std::vector<LocalObservable> locals;
        for (int site = 0; site < n; ++site) locals.push_back({site, testutil::random_pauli_like(eng)});

        MultiQubitMeterSpec spec;
        spec.n = n;
        double mix = testutil::urand(eng, 0.3, 1.2);
        spec.a0 = std::cos(mix);
        spec.a1 = std::sin(mix) * std::exp(cplx(0.0, testutil::urand(eng, -M_PI, M_PI)));
        for (int i = 0; i < n; ++i)
            if (eng() % 2 || i == 0) spec.omega.push_back(i);

        double k = testutil::urand(eng, 0.1, 2.0);
        EvolvedMeter eff = evolve_multi_qubit_meter(tsv, locals, k, spec);

        CouplingSpec coupling;
        for (int i = 0; i < n; ++i) coupling.terms.push_back(projector_coupling(i, tsv, locals[i], k));
        EvolvedMeter exact = brute_force_evolve(tsv, coupling, spec.initial_state());

        CHECK(fidelity(eff.state, exact.state) > 1.0 - 1e-10);
        CHECK(std::abs(eff.state.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("multi-qubit meter ignores observables outside omega") {
    std::mt19937_64 eng(34);
    HilbertDims space{2, 2, 2};
    TwoStateVector tsv = testutil::random_tsv(eng, space, 0.05);
    MultiQubitMeterSpec spec;
    spec.n = 3;
    spec.a0 = std::sqrt(0.7);
    spec.a1 = std::sqrt(0.3);
    spec.omega = {0, 2};

    std::vector<LocalObservable> locals = {{0, testutil::random_pauli_like(eng)},
                                           {1, testutil::random_pauli_like(eng)},
                                           {2, testutil::random_pauli_like(eng)}};
    EvolvedMeter base = evolve_multi_qubit_meter(tsv, locals, 0.8, spec);

    locals[1] = {1, testutil::random_pauli_like(eng)};  // decoupled qubit, must not matter
    EvolvedMeter swapped = evolve_multi_qubit_meter(tsv, locals, 0.8, spec);
    CHECK((base.state.amps - swapped.state.amps).cwiseAbs().maxCoeff() < 1e-14);

    // An empty omega leaves the meter in its initial state.
    spec.omega.clear();
    EvolvedMeter idle = evolve_multi_qubit_meter(tsv, locals, 0.8, spec);
    CHECK(fidelity(idle.state, spec.initial_state()) > 1.0 - 1e-12);
}

TEST_CASE("spin meter matches exact joint evolution with a sigma_z coupling") {
    std::mt19937_64 eng(35);
    std::vector<HilbertDims> spaces = {HilbertDims{2}, HilbertDims{2, 2}};
    for (int rep = 0; rep < 60; ++rep) {
        const HilbertDims& space = spaces[rep % spaces.size()];
        TwoStateVector tsv = testutil::random_tsv(eng, space, 0.05);
        OperatorMatrix c(space, testutil::random_hermitian(eng, space.total()));
        double k = testutil::urand(eng, 0.05, 1.0);
        SpinMeterState spin = SpinMeterState::from_angles(testutil::urand(eng, 0.2, M_PI - 0.2),
                                                          testutil::urand(eng, -M_PI, M_PI));

        SpinMeterState eff = evolve_spin_meter(tsv, c, k, spin);
        EvolvedMeter exact = brute_force_evolve(
            tsv, CouplingSpec{{{0, c, k, MeterCoupling::sigma_z}}}, spin_state(spin));
        CHECK(fidelity(spin_state(eff), exact.state) > 1.0 - 1e-10);
    }
}

TEST_CASE("spin meter tips by the weak value at small strength") {
    Vec pre(2), post(2);
    pre << 1.0, cplx(0.6, 0.3);
    post << 1.0, cplx(-0.2, 0.5);
    TwoStateVector tsv{StateVector(HilbertDims{2}, pre), StateVector(HilbertDims{2}, post)};
    OperatorMatrix c(HilbertDims{2}, pauli_z());
    cplx cw = weak_value(tsv, c).value;

    double theta0 = 1.1, phi0 = 0.4;
    auto angle_errors = [&](double k) {
        SpinMeterState out = evolve_spin_meter(tsv, c, k, SpinMeterState::from_angles(theta0, phi0));
        double ephi = std::abs((out.phi() - phi0) - 2.0 * k * cw.real());
        double etheta = std::abs((out.theta() - theta0) + 2.0 * k * std::sin(theta0) * cw.imag());
        return std::pair{ephi, etheta};
    };

    auto [ephi1, etheta1] = angle_errors(1e-3);
    auto [ephi2, etheta2] = angle_errors(5e-4);
    CHECK(ephi1 < 1e-5);
    CHECK(etheta1 < 1e-5);
    // Halving the strength shrinks the first-order residual about fourfold.
    CHECK(ephi2 < ephi1 / 3.0 + 1e-14);
    CHECK(etheta2 < etheta1 / 3.0 + 1e-14);
}

TEST_CASE("orthogonal selections resolve per meter type") {
    Vec pre(2), post(2);
    pre << 1.0, 0.0;
    post << 0.0, 1.0;
    TwoStateVector orth{StateVector(HilbertDims{2}, pre), StateVector(HilbertDims{2}, post)};
    OperatorMatrix sx(HilbertDims{2}, pauli_x());

    QubitMeterState q = evolve_qubit_meter(orth, sx, M_PI / 2.0, {0.8, 0.6});
    CHECK(q.degenerate);
    CHECK(std::abs(q.a0) < 1e-15);
    CHECK(std::abs(std::abs(q.a1) - 1.0) < 1e-15);

    // The exact evolution agrees: the meter lands in |1> whenever the
    // evolved amplitude survives the projection.
    EvolvedMeter exact = brute_force_evolve(orth, CouplingSpec{{{0, sx, M_PI / 2.0}}},
                                            QubitMeterState{0.8, 0.6}.to_state());
    CHECK(fidelity(exact.state, q.to_state()) > 1.0 - 1e-12);

    MultiQubitMeterSpec spec;
    spec.n = 2;
    spec.a0 = spec.a1 = 1.0 / std::sqrt(2.0);
    spec.omega = {0, 1};
    StateVector pre_q(HilbertDims{2}, pre), post_q(HilbertDims{2}, post);
    TwoStateVector orth2{tensor({pre_q, pre_q}), tensor({post_q, pre_q})};
    EvolvedMeter m = evolve_multi_qubit_meter(
        orth2, {{0, pauli_x()}, {1, pauli_x()}}, M_PI / 2.0, spec);
    CHECK(m.degenerate);
    CHECK(std::abs(m.state.amps[spec.omega_pattern_index()] - cplx(1.0)) < 1e-15);

    CHECK_THROWS_AS(evolve_spin_meter(orth, sx, 0.3, SpinMeterState::from_angles(1.0, 0.0)),
                    OrthogonalSelection);
}

TEST_CASE("coupling disturbs the system quadratically in the excited amplitude") {
    std::mt19937_64 eng(36);
    for (int rep = 0; rep < 20; ++rep) {
        HilbertDims space{2, 2};
        StateVector psi = testutil::random_state(eng, space);
        psi = normalized(psi);
        OperatorMatrix c(space, testutil::random_hermitian(eng, 4));
        double k = testutil::urand(eng, 0.2, 1.5);
        double mix = testutil::urand(eng, 0.1, 1.4);
        cplx a0 = std::cos(mix), a1 = std::sin(mix) * std::exp(cplx(0.0, testutil::urand(eng, -M_PI, M_PI)));
        Vec mv(2);
        mv << a0, a1;
        StateVector meter(HilbertDims{2}, mv);

        StateVector joint = joint_evolve(psi, CouplingSpec{{{0, c, k}}}, meter);

        // Reduced-system fidelity with the pre-coupling state, traced over the meter.
        double f = 0.0;
        for (int m = 0; m < 2; ++m) {
            cplx amp = 0.0;
            for (Eigen::Index s = 0; s < psi.amps.size(); ++s)
                amp += std::conj(psi.amps[s]) * joint.amps[2 * s + m];
            f += std::norm(amp);
        }
        cplx survive = psi.amps.dot(herm_exp(c.entries, k) * psi.amps);
        double expect = 1.0 - std::norm(a1) * (1.0 - std::norm(survive));
        CHECK(std::abs(f - expect) < 1e-12);
    }
}

TEST_CASE("superposition meter matches exact joint evolution") {
    TwoStateVector tsv = hardy_tsv();
    std::vector<LocalObservable> locals = {hardy_projector_a(), hardy_projector_b()};
    for (cplx beta : {cplx(0.3), cplx(0.05), cplx(0.2, 0.1)}) {
        for (double k : {M_PI, 1.3}) {
            EvolvedMeter eff = osaka_meter(tsv, locals, k, beta);
            CouplingSpec coupling{{projector_coupling(0, tsv, locals[0], k),
                                   projector_coupling(1, tsv, locals[1], k)}};
            EvolvedMeter exact = brute_force_evolve(tsv, coupling, osaka_initial_meter(beta));
            CHECK(fidelity(eff.state, exact.state) > 1.0 - 1e-10);
        }
    }

    // At full strength the joint-occupation branch carries m_{A+B} = -3.
    double beta = 0.1;
    EvolvedMeter full = osaka_meter(tsv, locals, M_PI, beta);
    Vec expect(4);
    expect << 1.0, -beta, -beta, -3.0 * beta;
    CHECK(fidelity(full.state, StateVector(HilbertDims{2, 2}, expect)) > 1.0 - 1e-12);

    CHECK_THROWS_AS(osaka_meter(tsv, {locals[0]}, M_PI, beta), ValidationError);
    CHECK_THROWS_AS(osaka_meter(tsv, {locals[0], locals[0]}, M_PI, beta), ValidationError);
}

TEST_CASE("joint evolution validates its inputs") {
    std::mt19937_64 eng(37);
    HilbertDims space{2};
    StateVector psi = testutil::random_state(eng, space);
    StateVector meter = testutil::random_state(eng, HilbertDims{2});
    OperatorMatrix c(space, pauli_z());

    StateVector qutrit_meter = testutil::random_state(eng, HilbertDims{3});
    CHECK_THROWS_AS(joint_evolve(psi, CouplingSpec{{{0, c, 1.0}}}, qutrit_meter), ValidationError);
    CHECK_THROWS_AS(joint_evolve(psi, CouplingSpec{{{1, c, 1.0}}}, meter), ValidationError);

    Mat skew(2, 2);
    skew << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(joint_evolve(psi, CouplingSpec{{{0, {space, skew}, 1.0}}}, meter), NonHermitian);

    OperatorMatrix wrong(HilbertDims{2, 2}, Mat::Identity(4, 4));
    CHECK_THROWS_AS(joint_evolve(psi, CouplingSpec{{{0, wrong, 1.0}}}, meter), DimensionMismatch);
}
