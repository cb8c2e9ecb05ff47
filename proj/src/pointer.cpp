#include "modval/pointer.hpp"

#include <unsupported/Eigen/FFT>

#include <Eigen/Eigenvalues>
#include <cmath>

namespace modval {

void PointerGrid::validate() const {
    if (!(q_max > q_min)) throw ValidationError("PointerGrid: q_max must exceed q_min");
    if (n < 64) throw ValidationError("PointerGrid: need at least 64 points");
    if (n & (n - 1)) throw ValidationError("PointerGrid: point count must be a power of two");
}

PointerGrid default_grid(double delta, double k, double spectral_radius) {
    if (delta <= 0.0) throw ValidationError("default_grid: width must be positive");
    double half = 16.0 * delta + std::abs(k) * spectral_radius;
    return {-half, half, 1024};
}

namespace {

// Reference Gaussian, complex center allowed: (d^2 pi)^{-1/4} e^{-(q-c)^2 / (2 d^2)}.
cplx gauss_amp(double q, cplx center, double delta) {
    cplx z = (q - center) / delta;
    return std::pow(delta * delta * M_PI, -0.25) * std::exp(-0.5 * z * z);
}

Vec normalized_on_grid(Vec amps, double dq, const char* who) {
    double nrm = amps.norm() * std::sqrt(dq);
    if (nrm < 1e-14) throw PostSelectionImpossible(std::string(who) + ": state vanished");
    return amps / nrm;
}

void check_margin(const PointerGrid& grid, double center, double delta, const char* who) {
    if (center - grid.q_min < 8.0 * delta || grid.q_max - center < 8.0 * delta)
        throw GridTooNarrow(std::string(who) + ": shifted branch within 8 widths of the boundary");
}

// Forward DFT rescaled to the continuum transform and reordered to
// ascending momentum; fills p with the conjugate grid.
Vec to_momentum(const Vec& amps, const PointerGrid& grid, std::vector<double>* p_out) {
    int n = grid.n;
    double dq = grid.dq();
    Eigen::FFT<double> fft;
    std::vector<cplx> in(amps.data(), amps.data() + n), out(n);
    fft.fwd(out, in);

    Vec shifted(n);
    if (p_out) p_out->resize(n);
    double scale = dq / std::sqrt(2.0 * M_PI);
    for (int m = 0; m < n; ++m) {
        int j = m - n / 2;  // signed frequency index
        shifted[m] = scale * out[(j + n) % n];
        if (p_out) (*p_out)[m] = 2.0 * M_PI * j / (n * dq);
    }
    return shifted;
}

}  // namespace

GaussianPointerState init_gaussian(const PointerGrid& grid, double delta) {
    grid.validate();
    if (delta <= 0.0) throw ValidationError("init_gaussian: width must be positive");
    if (grid.q_max < 8.0 * delta || grid.q_min > -8.0 * delta)
        throw GridTooNarrow("init_gaussian: grid must cover at least 8 widths on both sides");

    Vec amps(grid.n);
    for (int i = 0; i < grid.n; ++i) amps[i] = gauss_amp(grid.q(i), 0.0, delta);
    return {grid, delta, normalized_on_grid(std::move(amps), grid.dq(), "init_gaussian")};
}

GaussianPointerState von_neumann_exact(const TwoStateVector& tsv, const OperatorMatrix& C,
                                       double k, const GaussianPointerState& pointer) {
    if (!(C.space == tsv.space()))
        throw DimensionMismatch("von_neumann_exact: observable space does not match the system");
    if (!is_hermitian(C.entries)) throw NonHermitian("von_neumann_exact: observable not Hermitian");

    Eigen::SelfAdjointEigenSolver<Mat> es(C.entries);
    Vec psi = normalized(tsv.pre).amps, phi = normalized(tsv.post).amps;

    Vec amps = Vec::Zero(pointer.grid.n);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        Vec ej = es.eigenvectors().col(j);
        cplx w = phi.dot(ej) * ej.dot(psi);  // <phi|e_j><e_j|psi>
        if (std::abs(w) < 1e-15) continue;
        double shift = k * es.eigenvalues()[j];
        check_margin(pointer.grid, shift, pointer.delta, "von_neumann_exact");
        for (int i = 0; i < pointer.grid.n; ++i)
            amps[i] += w * gauss_amp(pointer.grid.q(i), shift, pointer.delta);
    }
    return {pointer.grid, pointer.delta,
            normalized_on_grid(std::move(amps), pointer.grid.dq(), "von_neumann_exact")};
}

GaussianPointerState effective_shift(const GaussianPointerState& pointer, cplx C_w, double k) {
    GaussianPointerState ref = init_gaussian(pointer.grid, pointer.delta);
    cplx ov = ref.amps.dot(pointer.amps) * pointer.grid.dq();
    if (std::abs(std::norm(ov) - 1.0) > 1e-8)
        throw ValidationError("effective_shift: pointer is not the reference Gaussian of its grid");

    cplx center = k * C_w;
    check_margin(pointer.grid, center.real(), pointer.delta, "effective_shift");
    Vec amps(pointer.grid.n);
    for (int i = 0; i < pointer.grid.n; ++i)
        amps[i] = gauss_amp(pointer.grid.q(i), center, pointer.delta);
    return {pointer.grid, pointer.delta,
            normalized_on_grid(std::move(amps), pointer.grid.dq(), "effective_shift")};
}

MomentumDistribution momentum_distribution(const GaussianPointerState& pointer) {
    MomentumDistribution dist;
    Vec tilde = to_momentum(pointer.amps, pointer.grid, &dist.p);

    // Normalize against the position-space mass so that the discrete
    // Parseval identity stays an observable property of the transform.
    double total_in = pointer.amps.squaredNorm() * pointer.grid.dq();
    if (total_in < 1e-300) throw ValidationError("momentum_distribution: zero-norm pointer");
    dist.density.resize(pointer.grid.n);
    for (int i = 0; i < pointer.grid.n; ++i) dist.density[i] = std::norm(tilde[i]) / total_in;
    return dist;
}

double rs_estimate(const TwoStateVector& tsv, const LocalObservable& A, const LocalObservable& B,
                   double k, double delta, const PointerGrid& grid) {
    if (A.site == B.site) throw ValidationError("rs_estimate: observables must sit at distinct sites");
    if (k <= 0.0) throw ValidationError("rs_estimate: coupling strength must be positive");
    if (!is_hermitian(A.op) || !is_hermitian(B.op))
        throw NonHermitian("rs_estimate: observables must be Hermitian");
    grid.validate();

    const HilbertDims& space = tsv.space();
    Eigen::SelfAdjointEigenSolver<Mat> ea(A.op), eb(B.op);
    int da = static_cast<int>(ea.eigenvalues().size()), db = static_cast<int>(eb.eigenvalues().size());

    Vec psi = normalized(tsv.pre).amps, phi = normalized(tsv.post).amps;

    // Branch weights f_ij = <phi| Pi^A_i Pi^B_j |psi> over joint eigenspaces.
    Mat f(da, db);
    std::vector<Mat> proj_b(db);
    for (int j = 0; j < db; ++j) {
        Mat pj = eb.eigenvectors().col(j) * eb.eigenvectors().col(j).adjoint();
        proj_b[j] = embed_local({B.site, pj}, space).entries;
    }
    for (int i = 0; i < da; ++i) {
        Mat pi = ea.eigenvectors().col(i) * ea.eigenvectors().col(i).adjoint();
        Mat pa = embed_local({A.site, pi}, space).entries;
        for (int j = 0; j < db; ++j) f(i, j) = phi.dot(pa * (proj_b[j] * psi));
    }

    // Shifted Gaussian branches for each eigenvalue, in position and momentum.
    int n = grid.n;
    double dq = grid.dq(), dp = 2.0 * M_PI / (n * dq);
    auto branches = [&](const Eigen::VectorXd& evs, Mat& pos, Mat& mom) {
        pos.resize(n, evs.size());
        mom.resize(n, evs.size());
        for (Eigen::Index c = 0; c < evs.size(); ++c) {
            double shift = k * evs[c];
            check_margin(grid, shift, delta, "rs_estimate");
            Vec u(n);
            for (int i = 0; i < n; ++i) u[i] = gauss_amp(grid.q(i), shift, delta);
            pos.col(c) = u;
            mom.col(c) = to_momentum(u, grid, nullptr);
        }
    };
    Mat ua, ub, ta, tb;
    branches(ea.eigenvalues(), ua, ta);
    branches(eb.eigenvalues(), ub, tb);

    Eigen::VectorXd qv(n), pv(n);
    for (int i = 0; i < n; ++i) {
        qv[i] = grid.q(i);
        pv[i] = 2.0 * M_PI * (i - n / 2) / (n * dq);
    }

    // <x_A x_B> over the joint density |sum_ij f_ij u_i(x_A) u_j(x_B)|^2.
    auto correlator = [&](const Mat& u, const Mat& v, const Eigen::VectorXd& axis, double dx) {
        Eigen::MatrixXd rho = (u * f * v.transpose()).cwiseAbs2();
        double total = rho.sum() * dx * dx;
        if (total < 1e-14)
            throw PostSelectionImpossible("rs_estimate: post-selected amplitude is zero");
        return axis.dot(rho * axis) * dx * dx / total;
    };

    double qq = correlator(ua, ub, qv, dq);
    double pp = correlator(ta, tb, pv, dp);

    double d4 = delta * delta * delta * delta;
    return (qq - d4 * pp) / (k * k);
}

double mean_q(const GaussianPointerState& s) {
    double m = 0.0;
    for (int i = 0; i < s.grid.n; ++i) m += s.grid.q(i) * std::norm(s.amps[i]);
    return m * s.grid.dq();
}

double var_q(const GaussianPointerState& s) {
    double mu = mean_q(s), v = 0.0;
    for (int i = 0; i < s.grid.n; ++i) {
        double d = s.grid.q(i) - mu;
        v += d * d * std::norm(s.amps[i]);
    }
    return v * s.grid.dq();
}

double mean_p(const MomentumDistribution& d) {
    double dp = d.p[1] - d.p[0], m = 0.0;
    for (size_t i = 0; i < d.p.size(); ++i) m += d.p[i] * d.density[i];
    return m * dp;
}

double var_p(const MomentumDistribution& d) {
    double dp = d.p[1] - d.p[0], mu = mean_p(d), v = 0.0;
    for (size_t i = 0; i < d.p.size(); ++i) {
        double x = d.p[i] - mu;
        v += x * x * d.density[i];
    }
    return v * dp;
}

}  // namespace modval
