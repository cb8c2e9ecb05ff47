#include "modval/tomography.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace modval {

void MeasurementPlan::validate(int dim) const {
    if (bases.empty()) throw ValidationError("MeasurementPlan: no bases");
    if (shots_per_basis < 1) throw ValidationError("MeasurementPlan: shots_per_basis must be >= 1");
    for (const auto& b : bases) {
        if (b.vectors.rows() != dim || b.vectors.cols() != dim)
            throw DimensionMismatch("MeasurementPlan: basis '" + b.label +
                                    "' does not match the state dimension");
        Mat gram = b.vectors.adjoint() * b.vectors;
        if ((gram - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-12)
            throw ValidationError("MeasurementPlan: basis '" + b.label + "' is not orthonormal");
    }
}

std::string CountsRecord::to_csv() const {
    std::ostringstream os;
    os << "basis,outcome,count\n";
    for (size_t b = 0; b < counts.size(); ++b)
        for (size_t o = 0; o < counts[b].size(); ++o)
            os << bases[b].label << ',' << o << ',' << counts[b][o] << '\n';
    return os.str();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

// Uniform in [0,1) built directly from engine output; the distribution
// adapters in <random> are not reproducible across standard libraries.
double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Binomial(n, p) by inverse-CDF search outward from the mode, using the
// pmf ratio recurrence. Expected O(sqrt(n p (1-p))) steps.
long long binomial_draw(long long n, double p, std::mt19937_64& eng) {
    if (n <= 0) return 0;
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;

    long long mode = static_cast<long long>((n + 1) * p);
    if (mode > n) mode = n;
    double log_pmf_mode = std::lgamma(double(n) + 1) - std::lgamma(double(mode) + 1) -
                          std::lgamma(double(n - mode) + 1) + mode * std::log(p) +
                          (n - mode) * std::log1p(-p);
    double pmf_mode = std::exp(log_pmf_mode);

    double u = uniform01(eng);
    double ratio = p / (1.0 - p);

    u -= pmf_mode;
    if (u < 0.0) return mode;
    long long lo = mode - 1, hi = mode + 1;
    double pmf_lo = pmf_mode, pmf_hi = pmf_mode;
    while (lo >= 0 || hi <= n) {
        if (hi <= n) {
            pmf_hi *= ratio * double(n - hi + 1) / double(hi);
            u -= pmf_hi;
            if (u < 0.0) return hi;
            ++hi;
        }
        if (lo >= 0) {
            pmf_lo *= double(lo + 1) / (ratio * double(n - lo));
            u -= pmf_lo;
            if (u < 0.0) return lo;
            --lo;
        }
    }
    return mode;  // u landed in accumulated rounding; the mode is as good as any
}

}  // namespace

std::vector<long long> multinomial_draw(long long n, const std::vector<double>& probs,
                                        std::mt19937_64& eng) {
    std::vector<long long> out(probs.size(), 0);
    double remaining_p = 0.0;
    for (double p : probs) {
        if (p < -1e-12) throw ValidationError("multinomial_draw: negative probability");
        remaining_p += std::max(p, 0.0);
    }
    long long remaining_n = n;
    for (size_t i = 0; i + 1 < probs.size() && remaining_n > 0; ++i) {
        double p = std::max(probs[i], 0.0);
        long long c = binomial_draw(remaining_n, std::min(1.0, p / remaining_p), eng);
        out[i] = c;
        remaining_n -= c;
        remaining_p -= p;
        if (remaining_p <= 0.0) break;
    }
    if (!probs.empty()) out.back() = remaining_n;
    return out;
}

CountsRecord sample_counts(const StateVector& state, const MeasurementPlan& plan) {
    plan.validate(state.space.total());
    Vec psi = normalized(state).amps;

    CountsRecord rec;
    rec.bases = plan.bases;
    rec.shots_per_basis = plan.shots_per_basis;
    rec.seed = plan.seed;
    for (size_t b = 0; b < plan.bases.size(); ++b) {
        const Mat& v = plan.bases[b].vectors;
        std::vector<double> probs(v.cols());
        double total = 0.0;
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            probs[c] = std::norm(v.col(c).dot(psi));
            total += probs[c];
        }
        for (double& p : probs) p /= total;
        std::mt19937_64 eng(derive_seed(plan.seed, b));
        rec.counts.push_back(multinomial_draw(plan.shots_per_basis, probs, eng));
    }
    return rec;
}

MeasurementBasis pauli_basis(char axis) {
    Mat v(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    switch (axis) {
        case 'z': v << 1, 0, 0, 1; break;
        case 'x': v << r, r, r, -r; break;
        case 'y': v << r, r, cplx(0, r), cplx(0, -r); break;
        default: throw ValidationError("pauli_basis: axis must be one of x, y, z");
    }
    return {std::string(1, axis), v};
}

MeasurementPlan single_qubit_pauli_plan(long long shots, std::uint64_t seed) {
    return {{pauli_basis('x'), pauli_basis('y'), pauli_basis('z')}, shots, seed};
}

MeasurementPlan two_qubit_pauli_plan(long long shots, std::uint64_t seed) {
    MeasurementPlan plan;
    for (char a : {'x', 'y', 'z'})
        for (char b : {'x', 'y', 'z'}) {
            MeasurementBasis pa = pauli_basis(a), pb = pauli_basis(b);
            plan.bases.push_back({pa.label + pb.label, kron(pa.vectors, pb.vectors)});
        }
    plan.shots_per_basis = shots;
    plan.seed = seed;
    return plan;
}

MeasurementPlan pm_basis_plan(long long shots, std::uint64_t seed) {
    MeasurementBasis x = pauli_basis('x');
    return {{{"xx", kron(x.vectors, x.vectors)}}, shots, seed};
}

namespace {

// Hermitian operator basis: diagonal units, then symmetric and antisymmetric
// pair combinations, all orthonormal under the trace inner product.
std::vector<Mat> hermitian_basis(int d) {
    std::vector<Mat> es;
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        Mat e = Mat::Zero(d, d);
        e(i, i) = 1.0;
        es.push_back(e);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Mat e = Mat::Zero(d, d);
            e(i, j) = r;
            e(j, i) = r;
            es.push_back(e);
            Mat o = Mat::Zero(d, d);
            o(i, j) = cplx(0, -r);
            o(j, i) = cplx(0, r);
            es.push_back(o);
        }
    return es;
}

Mat clip_to_physical(const Mat& rho_raw) {
    Mat herm = 0.5 * (rho_raw + rho_raw.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(herm);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    double tr = ev.sum();
    if (tr <= 0.0) throw DomainError("linear_inversion: estimate collapsed to zero");
    Vec clipped = (ev / tr).cast<cplx>();
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Mat linear_inversion_probs(const std::vector<MeasurementBasis>& bases,
                           const std::vector<std::vector<double>>& probs) {
    if (bases.empty() || probs.size() != bases.size())
        throw ValidationError("linear_inversion: empty or mismatched inputs");
    int d = static_cast<int>(bases[0].vectors.rows());
    std::vector<Mat> es = hermitian_basis(d);
    int n_rows = 0;
    for (const auto& b : bases) n_rows += static_cast<int>(b.vectors.cols());

    Eigen::MatrixXd design(n_rows, es.size());
    Eigen::VectorXd target(n_rows);
    int row = 0;
    for (size_t b = 0; b < bases.size(); ++b) {
        const Mat& v = bases[b].vectors;
        if (probs[b].size() != static_cast<size_t>(v.cols()))
            throw ValidationError("linear_inversion: outcome count mismatch");
        for (Eigen::Index c = 0; c < v.cols(); ++c, ++row) {
            for (size_t k = 0; k < es.size(); ++k)
                design(row, k) = v.col(c).dot(es[k] * v.col(c)).real();
            target(row) = probs[b][c];
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(es.size()))
        throw IncompleteBasis("linear_inversion: basis set is not informationally complete");
    Eigen::VectorXd x = qr.solve(target);

    Mat rho = Mat::Zero(d, d);
    for (size_t k = 0; k < es.size(); ++k) rho += x[k] * es[k];
    return clip_to_physical(rho);
}

Mat linear_inversion(const CountsRecord& counts) {
    if (counts.shots_per_basis < 1) throw ValidationError("linear_inversion: no shots recorded");
    std::vector<std::vector<double>> freqs;
    for (const auto& row : counts.counts) {
        std::vector<double> f(row.size());
        for (size_t o = 0; o < row.size(); ++o)
            f[o] = static_cast<double>(row[o]) / counts.shots_per_basis;
        freqs.push_back(std::move(f));
    }
    return linear_inversion_probs(counts.bases, freqs);
}

ModularEstimate extract_modular(const Mat& rho, cplx alpha, cplx beta, int idx0, int idx1) {
    if (std::abs(alpha) == 0.0 || std::abs(beta) == 0.0)
        throw ValidationError("extract_modular: meter amplitudes alpha, beta must be nonzero");
    if (idx0 == idx1 || idx0 < 0 || idx1 < 0 || idx0 >= rho.rows() || idx1 >= rho.rows())
        throw ValidationError("extract_modular: bad component indices");

    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    Vec v = es.eigenvectors().col(rho.rows() - 1);  // dominant eigenvector
    cplx gamma = v[idx0], delta = v[idx1];
    if (std::abs(gamma) < kGammaFloor)
        throw IllConditioned(
            "extract_modular: |0>-component below the conditioning floor; the modular value is "
            "too large for these meter amplitudes to resolve");
    return {alpha * delta / (beta * gamma), 0.0, 0};
}

ModularEstimate extract_modular(const CountsRecord& counts, cplx alpha, cplx beta, int idx0,
                                int idx1) {
    ModularEstimate point = extract_modular(linear_inversion(counts), alpha, beta, idx0, idx1);

    std::vector<cplx> resampled;
    int failures = 0;
    for (int r = 0; r < kBootstrapResamples; ++r) {
        CountsRecord boot = counts;
        std::mt19937_64 eng(derive_seed(counts.seed, 0x0B007u + r));
        for (size_t b = 0; b < counts.counts.size(); ++b) {
            std::vector<double> f(counts.counts[b].size());
            for (size_t o = 0; o < f.size(); ++o)
                f[o] = static_cast<double>(counts.counts[b][o]) / counts.shots_per_basis;
            boot.counts[b] = multinomial_draw(counts.shots_per_basis, f, eng);
        }
        try {
            resampled.push_back(extract_modular(linear_inversion(boot), alpha, beta, idx0, idx1).value);
        } catch (const DomainError&) {
            ++failures;
        }
    }
    if (failures > kBootstrapResamples / 5)
        throw IllConditioned("extract_modular: bootstrap unstable near the conditioning floor");

    cplx mean = 0.0;
    for (cplx z : resampled) mean += z;
    mean /= static_cast<double>(resampled.size());
    double var = 0.0;
    for (cplx z : resampled) var += std::norm(z - mean);
    var /= static_cast<double>(resampled.size());

    point.std_err = std::sqrt(var);
    point.shots_total = counts.shots_per_basis * static_cast<long long>(counts.counts.size());
    return point;
}

std::array<double, 4> pm_probabilities_exact(const StateVector& meter_state) {
    if (meter_state.space.total() != 4)
        throw DimensionMismatch("pm_probabilities_exact: need a two-qubit meter state");
    Mat basis = pm_basis_plan(1, 0).bases[0].vectors;
    Vec psi = normalized(meter_state).amps;
    std::array<double, 4> probs{};
    for (int c = 0; c < 4; ++c) probs[c] = std::norm(basis.col(c).dot(psi));
    return probs;
}

std::array<double, 4> partial_tomography_pm(const StateVector& meter_state,
                                            const MeasurementPlan& plan) {
    if (meter_state.space.total() != 4)
        throw DimensionMismatch("partial_tomography_pm: need a two-qubit meter state");
    CountsRecord rec = sample_counts(meter_state, plan);
    std::array<double, 4> probs{};
    long long per_basis = plan.shots_per_basis;
    long long n_bases = static_cast<long long>(rec.counts.size());
    for (const auto& row : rec.counts) {
        if (row.size() != 4)
            throw ValidationError("partial_tomography_pm: plan bases must have four outcomes");
        for (int o = 0; o < 4; ++o) probs[o] += static_cast<double>(row[o]);
    }
    for (int o = 0; o < 4; ++o) probs[o] /= static_cast<double>(per_basis * n_bases);
    return probs;
}

PmAnalysis pm_weak_value_analysis(const std::array<double, 4>& probs, double beta) {
    if (beta == 0.0) throw ValidationError("pm_weak_value_analysis: beta must be nonzero");
    // Outcome order ++, +-, -+, -- ; s1 is the first qubit's sign.
    double e1 = probs[0] + probs[1] - probs[2] - probs[3];
    double e2 = probs[0] - probs[1] + probs[2] - probs[3];
    double e12 = probs[0] - probs[1] - probs[2] + probs[3];

    PmAnalysis a;
    a.re_m_a = e1 / (2.0 * beta);
    a.re_m_b = e2 / (2.0 * beta);
    a.re_m_sum = e12 / (2.0 * beta);
    a.re_w_a = 0.5 * (1.0 - a.re_m_a);
    a.re_w_b = 0.5 * (1.0 - a.re_m_b);
    a.re_w_ab = 0.25 * (a.re_m_sum - a.re_m_a - a.re_m_b + 1.0);
    return a;
}

}  // namespace modval
