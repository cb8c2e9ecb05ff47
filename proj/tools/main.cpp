#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modval/core.hpp"
#include "modval/errors.hpp"
#include "modval/meters.hpp"
#include "modval/pointer.hpp"
#include "modval/scenarios.hpp"
#include "modval/tomography.hpp"
#include "modval/two_state.hpp"
#include "problem_spec.hpp"
#include "run_output.hpp"

namespace modval::cli {
namespace {

struct Options {
    std::string spec_path;
    std::string out_path;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    bool oracle = false;
    std::string scenario_name;
    std::optional<double> beta_flag;
    std::optional<long long> shots_flag;
};

ProblemSpec load_spec(const Options& opts) {
    if (opts.spec_path.empty()) return ProblemSpec{};
    std::string text;
    std::string origin;
    if (opts.spec_path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        text = ss.str();
        origin = "<stdin>";
    } else {
        std::ifstream f(opts.spec_path, std::ios::binary);
        if (!f) throw ValidationError("cannot open problem file '" + opts.spec_path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
        origin = opts.spec_path;
    }
    return ProblemSpec::parse_text(text, origin);
}

// --- resolution of parsed fields into module inputs -------------------------

HilbertDims need_space(const ProblemSpec& ps) {
    if (!ps.space) throw ValidationError("problem document is missing 'space'");
    return HilbertDims(*ps.space);
}

TwoStateVector need_tsv(const ProblemSpec& ps) {
    const HilbertDims space = need_space(ps);
    if (!ps.pre) throw ValidationError("problem document is missing 'pre'");
    if (!ps.post) throw ValidationError("problem document is missing 'post'");
    return {StateVector(space, *ps.pre), StateVector(space, *ps.post)};
}

/// Materialized observable plus its full-space lift.
struct ResolvedObservable {
    std::optional<int> site;
    Mat op;  // on the site (or the full space when no site was given)
    OperatorMatrix full;
};

ResolvedObservable resolve_observable(const ObservableSpec& os, const HilbertDims& space,
                                      const std::string& path) {
    ResolvedObservable out;
    out.site = os.site;
    if (os.site) {
        if (*os.site >= space.site_count())
            spec_fail(path + ".site", "site " + std::to_string(*os.site) + " is out of range for " +
                                          std::to_string(space.site_count()) + " subsystems");
        out.op = os.materialize(space.dims[*os.site], path);
        out.full = embed_local(LocalObservable(*os.site, out.op), space);
    } else {
        out.op = os.materialize(space.total(), path);
        out.full = OperatorMatrix(space, out.op);
    }
    return out;
}

LocalObservable as_local(const ResolvedObservable& ro, const std::string& path) {
    if (!ro.site) spec_fail(path, "this command needs a site-tagged observable");
    return {*ro.site, ro.op};
}

json observable_json(const ResolvedObservable& ro) {
    json out;
    if (ro.site) out["site"] = *ro.site;
    out["op"] = matrix_json(ro.op);
    return out;
}

double spectral_radius(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

json tsv_echo(const ProblemSpec& ps) {
    json out;
    out["space"] = *ps.space;
    out["pre"] = state_json(*ps.pre);
    out["post"] = state_json(*ps.post);
    return out;
}

const ObservableSpec& single_observable(const ProblemSpec& ps) {
    if (ps.observables.size() != 1)
        throw ValidationError("this command needs exactly one observable, got " +
                              std::to_string(ps.observables.size()));
    return ps.observables.front();
}

double need_k(const ProblemSpec& ps) {
    if (!ps.k) throw ValidationError("problem document is missing 'k'");
    return *ps.k;
}

std::uint64_t resolve_seed(const ProblemSpec& ps, const Options& opts) {
    if (opts.seed) return *opts.seed;
    if (ps.seed) return *ps.seed;
    return 0;
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::exact: return "exact";
        case Provenance::effective: return "effective";
        case Provenance::tomographic: return "tomographic";
    }
    return "unknown";
}

std::string value_csv(std::initializer_list<std::pair<std::string, cplx>> rows) {
    std::string csv = "quantity,value_re,value_im\n";
    for (const auto& [name, z] : rows)
        csv += name + "," + fmt_double(z.real()) + "," + fmt_double(z.imag()) + "\n";
    return csv;
}

// --- commands ----------------------------------------------------------------

RunOutput cmd_weak_value(const ProblemSpec& ps) {
    const auto tsv = need_tsv(ps);
    const auto ro = resolve_observable(single_observable(ps), tsv.pre.space, "observable");
    const auto est = weak_value(tsv, ro.full);

    RunOutput out;
    out.command = "weak-value";
    out.resolved_spec = tsv_echo(ps);
    out.resolved_spec["observable"] = observable_json(ro);
    out.results["weak_value"] = complex_json(est.value);
    out.results["overlap"] = complex_json(overlap(tsv));
    out.results["provenance"] = provenance_name(est.provenance);
    out.csv_text = value_csv({{"weak_value", est.value}, {"overlap", overlap(tsv)}});
    return out;
}

RunOutput cmd_modular_value(const ProblemSpec& ps) {
    const auto tsv = need_tsv(ps);
    if (ps.observables.empty()) throw ValidationError("problem document is missing 'observable'");

    RunOutput out;
    out.command = "modular-value";
    out.resolved_spec = tsv_echo(ps);

    ValueEstimate est;
    if (ps.observables.size() == 1) {
        const auto ro = resolve_observable(ps.observables.front(), tsv.pre.space, "observable");
        est = modular_value(tsv, ro.full, need_k(ps));
        out.resolved_spec["observable"] = observable_json(ro);
        out.resolved_spec["k"] = need_k(ps);
    } else {
        std::vector<double> ks;
        if (ps.strengths) {
            ks = *ps.strengths;
            if (ks.size() != ps.observables.size())
                throw ValidationError("'strengths' must have one entry per observable");
        } else {
            ks.assign(ps.observables.size(), need_k(ps));
        }
        std::vector<WeightedLocal> terms;
        json obs_echo = json::array();
        for (std::size_t i = 0; i < ps.observables.size(); ++i) {
            const std::string path = "observables[" + std::to_string(i) + "]";
            const auto ro = resolve_observable(ps.observables[i], tsv.pre.space, path);
            terms.push_back({as_local(ro, path), ks[i]});
            obs_echo.push_back(observable_json(ro));
        }
        est = modular_value_combination(tsv, terms);
        out.resolved_spec["observables"] = obs_echo;
        out.resolved_spec["strengths"] = ks;
    }
    out.results["modular_value"] = complex_json(est.value);
    out.results["overlap"] = complex_json(overlap(tsv));
    out.results["provenance"] = provenance_name(est.provenance);
    out.csv_text = value_csv({{"modular_value", est.value}, {"overlap", overlap(tsv)}});
    return out;
}

RunOutput cmd_meter_sim(const ProblemSpec& ps, bool oracle) {
    const auto tsv = need_tsv(ps);
    if (!ps.meter_type) throw ValidationError("problem document is missing 'meter.type'");
    const std::string type = *ps.meter_type;
    const double k = need_k(ps);
    const cplx inv_sqrt2 = 1.0 / std::sqrt(2.0);

    RunOutput out;
    out.command = "meter-sim";
    out.resolved_spec = tsv_echo(ps);
    out.resolved_spec["k"] = k;
    json meter_echo;
    meter_echo["type"] = type;

    StateVector final_state;
    StateVector meter_init;
    CouplingSpec coupling;
    Provenance prov = Provenance::effective;
    bool degenerate = false;

    if (type == "qubit") {
        const auto ro = resolve_observable(single_observable(ps), tsv.pre.space, "observable");
        out.resolved_spec["observable"] = observable_json(ro);
        QubitMeterState init;
        init.a0 = ps.a0.value_or(inv_sqrt2);
        init.a1 = ps.a1.value_or(inv_sqrt2);
        meter_echo["a0"] = complex_json(init.a0);
        meter_echo["a1"] = complex_json(init.a1);
        const auto evolved = evolve_qubit_meter(tsv, ro.full, k, init);
        final_state = evolved.to_state();
        prov = evolved.provenance;
        degenerate = evolved.degenerate;
        meter_init = init.to_state();
        coupling.terms.push_back({0, ro.full, k, MeterCoupling::projector_one});
    } else if (type == "multi_qubit") {
        if (ps.observables.empty())
            throw ValidationError("multi-qubit meter needs one observable per meter qubit");
        MultiQubitMeterSpec spec;
        spec.n = ps.meter_n.value_or(static_cast<int>(ps.observables.size()));
        spec.a0 = ps.a0.value_or(inv_sqrt2);
        spec.a1 = ps.a1.value_or(inv_sqrt2);
        if (ps.omega) {
            spec.omega = *ps.omega;
        } else {
            spec.omega.resize(spec.n);
            for (int i = 0; i < spec.n; ++i) spec.omega[i] = i;
        }
        std::vector<LocalObservable> locals;
        json obs_echo = json::array();
        for (std::size_t i = 0; i < ps.observables.size(); ++i) {
            const std::string path = "observables[" + std::to_string(i) + "]";
            const auto ro = resolve_observable(ps.observables[i], tsv.pre.space, path);
            locals.push_back(as_local(ro, path));
            obs_echo.push_back(observable_json(ro));
        }
        out.resolved_spec["observables"] = obs_echo;
        meter_echo["n"] = spec.n;
        meter_echo["a0"] = complex_json(spec.a0);
        meter_echo["a1"] = complex_json(spec.a1);
        meter_echo["omega"] = spec.omega;
        const auto evolved = evolve_multi_qubit_meter(tsv, locals, k, spec);
        final_state = evolved.state;
        prov = evolved.provenance;
        degenerate = evolved.degenerate;
        meter_init = spec.initial_state();
        for (int i : spec.omega) {
            const auto full = embed_local(locals[i], tsv.pre.space);
            coupling.terms.push_back({i, full, k, MeterCoupling::projector_one});
        }
    } else if (type == "spin") {
        const auto ro = resolve_observable(single_observable(ps), tsv.pre.space, "observable");
        out.resolved_spec["observable"] = observable_json(ro);
        SpinMeterState init;
        if (ps.a_up || ps.a_down) {
            if (ps.theta || ps.phi)
                throw ValidationError("give the spin meter either angles or amplitudes, not both");
            init.a_up = ps.a_up.value_or(0.0);
            init.a_down = ps.a_down.value_or(0.0);
        } else {
            init = SpinMeterState::from_angles(ps.theta.value_or(M_PI / 2), ps.phi.value_or(0.0));
        }
        meter_echo["a_up"] = complex_json(init.a_up);
        meter_echo["a_down"] = complex_json(init.a_down);
        const auto evolved = evolve_spin_meter(tsv, ro.full, k, init);
        final_state = StateVector(HilbertDims{2}, (Vec(2) << evolved.a_up, evolved.a_down).finished());
        prov = evolved.provenance;
        out.results["theta"] = evolved.theta();
        out.results["phi"] = evolved.phi();
        const double nrm = std::sqrt(std::norm(init.a_up) + std::norm(init.a_down));
        if (nrm <= 0.0) throw ValidationError("spin meter state has zero norm");
        meter_init = StateVector(HilbertDims{2}, (Vec(2) << init.a_up / nrm, init.a_down / nrm).finished());
        coupling.terms.push_back({0, ro.full, k, MeterCoupling::sigma_z});
    } else {
        throw ValidationError("unknown meter type '" + type +
                              "' (expected qubit, multi_qubit or spin)");
    }

    out.resolved_spec["meter"] = meter_echo;
    out.results["final_meter"] = state_json(final_state.amps);
    out.results["provenance"] = provenance_name(prov);
    out.results["degenerate"] = degenerate;

    std::string csv = "quantity,value_re,value_im\n";
    for (Eigen::Index i = 0; i < final_state.amps.size(); ++i)
        csv += "final_meter[" + std::to_string(i) + "]," + fmt_double(final_state.amps[i].real()) +
               "," + fmt_double(final_state.amps[i].imag()) + "\n";

    if (oracle) {
        const auto exact = brute_force_evolve(tsv, coupling, meter_init);
        const double deficit = 1.0 - fidelity(final_state, exact.state);
        out.results["oracle_fidelity_deficit"] = deficit;
        csv += "oracle_fidelity_deficit," + fmt_double(deficit) + ",0\n";
    }
    out.csv_text = csv;
    return out;
}

RunOutput cmd_pointer_sim(const ProblemSpec& ps) {
    const auto tsv = need_tsv(ps);
    const auto ro = resolve_observable(single_observable(ps), tsv.pre.space, "observable");
    const double k = need_k(ps);
    const double delta = ps.delta.value_or(1.0);
    if (delta <= 0.0) throw ValidationError("pointer.delta must be positive");

    PointerGrid grid;
    const int given = int(bool(ps.grid_q_min)) + int(bool(ps.grid_q_max)) + int(bool(ps.grid_n));
    if (given == 3) {
        grid = {*ps.grid_q_min, *ps.grid_q_max, *ps.grid_n};
        grid.validate();
    } else if (given == 0) {
        grid = default_grid(delta, std::abs(k), spectral_radius(ro.full.entries));
    } else {
        throw ValidationError("pointer.grid needs q_min, q_max and n together");
    }

    const auto initial = init_gaussian(grid, delta);
    const auto exact = von_neumann_exact(tsv, ro.full, k, initial);
    const cplx cw = weak_value(tsv, ro.full).value;
    const auto effective = effective_shift(initial, cw, k);
    const auto exact_p = momentum_distribution(exact);
    const auto effective_p = momentum_distribution(effective);

    cplx ip = 0.0;
    for (Eigen::Index i = 0; i < exact.amps.size(); ++i)
        ip += std::conj(exact.amps[i]) * effective.amps[i];
    const double deficit = 1.0 - std::norm(ip * grid.dq());

    RunOutput out;
    out.command = "pointer-sim";
    out.resolved_spec = tsv_echo(ps);
    out.resolved_spec["observable"] = observable_json(ro);
    out.resolved_spec["k"] = k;
    out.resolved_spec["pointer"] = {
        {"delta", delta}, {"grid", {{"q_min", grid.q_min}, {"q_max", grid.q_max}, {"n", grid.n}}}};

    out.results["weak_value"] = complex_json(cw);
    out.results["q_mean_exact"] = mean_q(exact);
    out.results["q_mean_effective"] = mean_q(effective);
    out.results["q_mean_predicted"] = k * cw.real();
    out.results["q_var_exact"] = var_q(exact);
    out.results["p_mean_exact"] = mean_p(exact_p);
    out.results["p_mean_effective"] = mean_p(effective_p);
    out.results["p_mean_predicted"] = k * cw.imag() / (delta * delta);
    out.results["p_var_exact"] = var_p(exact_p);
    out.results["fidelity_deficit"] = deficit;

    std::string q_csv = "q,exact_density,effective_density\n";
    for (int i = 0; i < grid.n; ++i)
        q_csv += fmt_double(grid.q(i)) + "," + fmt_double(std::norm(exact.amps[i])) + "," +
                 fmt_double(std::norm(effective.amps[i])) + "\n";
    std::string p_csv = "p,exact_density,effective_density\n";
    for (std::size_t i = 0; i < exact_p.p.size(); ++i)
        p_csv += fmt_double(exact_p.p[i]) + "," + fmt_double(exact_p.density[i]) + "," +
                 fmt_double(effective_p.density[i]) + "\n";

    std::string csv = "axis,coordinate,exact_density,effective_density\n";
    for (int i = 0; i < grid.n; ++i)
        csv += "q," + fmt_double(grid.q(i)) + "," + fmt_double(std::norm(exact.amps[i])) + "," +
               fmt_double(std::norm(effective.amps[i])) + "\n";
    for (std::size_t i = 0; i < exact_p.p.size(); ++i)
        csv += "p," + fmt_double(exact_p.p[i]) + "," + fmt_double(exact_p.density[i]) + "," +
               fmt_double(effective_p.density[i]) + "\n";

    out.csv_text = csv;
    out.sidecars.emplace_back("q_density.csv", q_csv);
    out.sidecars.emplace_back("p_density.csv", p_csv);
    return out;
}

RunOutput cmd_rs_estimate(const ProblemSpec& ps) {
    const auto tsv = need_tsv(ps);
    if (ps.observables.size() != 2)
        throw ValidationError("this command needs exactly two site-tagged observables");
    const auto ro_a = resolve_observable(ps.observables[0], tsv.pre.space, "observables[0]");
    const auto ro_b = resolve_observable(ps.observables[1], tsv.pre.space, "observables[1]");
    const auto A = as_local(ro_a, "observables[0]");
    const auto B = as_local(ro_b, "observables[1]");

    const double delta = ps.delta.value_or(1.0);
    if (delta <= 0.0) throw ValidationError("pointer.delta must be positive");
    std::vector<double> sweep = ps.k_sweep.value_or(std::vector<double>{0.2, 0.1, 0.05});

    double k_max = 0.0;
    for (double k : sweep) k_max = std::max(k_max, std::abs(k));
    const double rho =
        std::max(spectral_radius(ro_a.full.entries), spectral_radius(ro_b.full.entries));

    PointerGrid grid;
    const int given = int(bool(ps.grid_q_min)) + int(bool(ps.grid_q_max)) + int(bool(ps.grid_n));
    if (given == 3) {
        grid = {*ps.grid_q_min, *ps.grid_q_max, *ps.grid_n};
        grid.validate();
    } else if (given == 0) {
        grid = default_grid(delta, k_max, rho);
    } else {
        throw ValidationError("pointer.grid needs q_min, q_max and n together");
    }

    const OperatorMatrix product(tsv.pre.space, ro_a.full.entries * ro_b.full.entries);
    const double target = weak_value(tsv, product).value.real();

    RunOutput out;
    out.command = "rs-estimate";
    out.resolved_spec = tsv_echo(ps);
    out.resolved_spec["observables"] = json::array({observable_json(ro_a), observable_json(ro_b)});
    out.resolved_spec["k_sweep"] = sweep;
    out.resolved_spec["pointer"] = {
        {"delta", delta}, {"grid", {{"q_min", grid.q_min}, {"q_max", grid.q_max}, {"n", grid.n}}}};

    json rows = json::array();
    std::string csv = "k,estimate,target,abs_error\n";
    for (double k : sweep) {
        const double est = rs_estimate(tsv, A, B, k, delta, grid);
        rows.push_back({{"k", k}, {"estimate", est}, {"abs_error", std::abs(est - target)}});
        csv += fmt_double(k) + "," + fmt_double(est) + "," + fmt_double(target) + "," +
               fmt_double(std::abs(est - target)) + "\n";
    }
    out.results["target"] = target;
    out.results["sweep"] = rows;
    out.csv_text = csv;
    out.sidecars.emplace_back("sweep.csv", csv);
    return out;
}

RunOutput cmd_tomography(const ProblemSpec& ps, const Options& opts) {
    const auto tsv = need_tsv(ps);
    const auto ro = resolve_observable(single_observable(ps), tsv.pre.space, "observable");
    const double k = need_k(ps);
    const cplx inv_sqrt2 = 1.0 / std::sqrt(2.0);

    QubitMeterState init;
    init.a0 = ps.a0.value_or(inv_sqrt2);
    init.a1 = ps.a1.value_or(inv_sqrt2);
    const long long shots = ps.shots.value_or(100000);
    if (shots < 1) throw ValidationError("'shots' must be at least 1");
    const std::uint64_t seed = resolve_seed(ps, opts);

    const auto evolved = evolve_qubit_meter(tsv, ro.full, k, init);
    const auto counts = sample_counts(evolved.to_state(), single_qubit_pauli_plan(shots, seed));
    const auto est = extract_modular(counts, init.a0, init.a1);
    const cplx exact = modular_value(tsv, ro.full, k).value;

    RunOutput out;
    out.command = "tomography";
    out.seed = seed;
    out.resolved_spec = tsv_echo(ps);
    out.resolved_spec["observable"] = observable_json(ro);
    out.resolved_spec["k"] = k;
    out.resolved_spec["meter"] = {
        {"type", "qubit"}, {"a0", complex_json(init.a0)}, {"a1", complex_json(init.a1)}};
    out.resolved_spec["shots"] = shots;
    out.resolved_spec["seed"] = seed;

    out.results["modular_value"] = complex_json(est.value);
    out.results["std_err"] = est.std_err;
    out.results["shots_total"] = est.shots_total;
    out.results["exact"] = complex_json(exact);
    out.results["abs_error"] = std::abs(est.value - exact);
    out.results["provenance"] = provenance_name(Provenance::tomographic);

    std::string csv = "quantity,value_re,value_im,stderr\n";
    csv += "modular_value," + fmt_double(est.value.real()) + "," + fmt_double(est.value.imag()) +
           "," + fmt_double(est.std_err) + "\n";
    csv += "exact," + fmt_double(exact.real()) + "," + fmt_double(exact.imag()) + ",0\n";
    out.csv_text = csv;
    out.sidecars.emplace_back("counts.csv", counts.to_csv());
    return out;
}

RunOutput cmd_scenario(const ProblemSpec& ps, const Options& opts) {
    const std::string& name = opts.scenario_name;
    RunOutput out;
    out.command = "scenario";
    out.resolved_spec["scenario"] = name;

    ScenarioReport report;
    if (name == "hardy") {
        report = hardy_scenario();
    } else if (name == "spin-hardy") {
        report = spin_hardy_scenario();
    } else if (name == "projector-identities") {
        TwoStateVector tsv = hardy_tsv();
        LocalObservable P_A = hardy_projector_a();
        LocalObservable P_B = hardy_projector_b();
        if (ps.space || ps.pre || ps.post || !ps.observables.empty()) {
            tsv = need_tsv(ps);
            if (ps.observables.size() != 2)
                throw ValidationError("projector-identities needs exactly two projectors");
            P_A = as_local(resolve_observable(ps.observables[0], tsv.pre.space, "observables[0]"),
                           "observables[0]");
            P_B = as_local(resolve_observable(ps.observables[1], tsv.pre.space, "observables[1]"),
                           "observables[1]");
        }
        out.resolved_spec["space"] = tsv.pre.space.dims;
        out.resolved_spec["pre"] = state_json(tsv.pre.amps);
        out.resolved_spec["post"] = state_json(tsv.post.amps);
        out.resolved_spec["observables"] = json::array(
            {json{{"site", P_A.site}, {"op", matrix_json(P_A.op)}},
             json{{"site", P_B.site}, {"op", matrix_json(P_B.op)}}});
        report = projector_identities_check(tsv, P_A, P_B);
    } else if (name == "osaka") {
        cplx beta = ps.scenario_beta.value_or(cplx(0.3, 0.0));
        if (opts.beta_flag) beta = *opts.beta_flag;
        const long long shots = opts.shots_flag.value_or(ps.shots.value_or(0));
        const std::uint64_t seed = resolve_seed(ps, opts);
        out.seed = seed;
        out.resolved_spec["beta"] = complex_json(beta);
        out.resolved_spec["shots"] = shots;
        out.resolved_spec["seed"] = seed;
        report = osaka_experiment(beta, shots, seed);
    } else {
        throw ValidationError("unknown scenario '" + name +
                              "' (expected hardy, spin-hardy, projector-identities or osaka)");
    }

    out.results = json::parse(report.to_json());
    out.csv_text = report.to_csv();
    return out;
}

int run(const std::string& command, const Options& opts) {
    const ProblemSpec ps = load_spec(opts);
    RunOutput out;
    if (command == "weak-value") {
        out = cmd_weak_value(ps);
    } else if (command == "modular-value") {
        out = cmd_modular_value(ps);
    } else if (command == "meter-sim") {
        out = cmd_meter_sim(ps, opts.oracle);
    } else if (command == "pointer-sim") {
        out = cmd_pointer_sim(ps);
    } else if (command == "rs-estimate") {
        out = cmd_rs_estimate(ps);
    } else if (command == "tomography") {
        out = cmd_tomography(ps, opts);
    } else {
        out = cmd_scenario(ps, opts);
    }
    emit(out, opts.out_path, opts.format);
    return 0;
}

}  // namespace
}  // namespace modval::cli

int main(int argc, char** argv) {
    using namespace modval::cli;

    CLI::App app{"weak and modular values of pre- and post-selected systems"};
    app.require_subcommand(1);
    Options opts;

    const auto add_common = [&opts](CLI::App* sub, bool takes_spec) {
        if (takes_spec)
            sub->add_option("--spec", opts.spec_path,
                            "problem document (JSON file, or - for stdin)");
        sub->add_option("--out", opts.out_path, "write the result document to this path");
        sub->add_option("--format", opts.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--seed", opts.seed, "sampling seed (overrides the problem document)");
    };

    add_common(app.add_subcommand("weak-value", "weak value of one observable"), true);
    add_common(app.add_subcommand("modular-value",
                                  "modular value of one observable or a weighted combination"),
               true);
    auto* meter = app.add_subcommand("meter-sim", "couple a qubit, multi-qubit or spin meter");
    add_common(meter, true);
    meter->add_flag("--oracle", opts.oracle,
                    "also run exact joint evolution and report the fidelity deficit");
    add_common(app.add_subcommand("pointer-sim",
                                  "exact continuous pointer vs the effective shifted Gaussian"),
               true);
    add_common(app.add_subcommand("rs-estimate",
                                  "joint-weak-value estimate from two pointer correlators"),
               true);
    add_common(app.add_subcommand("tomography",
                                  "sampled single-qubit meter tomography of a modular value"),
               true);
    auto* scenario = app.add_subcommand("scenario", "run a named worked example");
    scenario->add_option("name", opts.scenario_name, "hardy, spin-hardy, projector-identities or osaka")
        ->required();
    add_common(scenario, true);
    scenario->add_option("--beta", opts.beta_flag, "meter superposition weight (osaka)");
    scenario->add_option("--shots", opts.shots_flag, "sampled shots per run, 0 for exact (osaka)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), opts);
    } catch (const modval::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const modval::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
