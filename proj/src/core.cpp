#include "modval/core.hpp"

#include <Eigen/Eigenvalues>

namespace modval {

StateVector basis_state(const HilbertDims& space, int index) {
    if (index < 0 || index >= space.total())
        throw ValidationError("basis_state: index out of range");
    Vec v = Vec::Zero(space.total());
    v[index] = 1.0;
    return {space, std::move(v)};
}

StateVector normalized(const StateVector& s) {
    double n = s.norm();
    if (n <= 0.0) throw ValidationError("normalized: zero-norm state");
    return {s.space, s.amps / n};
}

OperatorMatrix identity_op(const HilbertDims& space) {
    return {space, Mat::Identity(space.total(), space.total())};
}

Mat pauli_x() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Mat pauli_y() {
    Mat m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

Mat pauli_z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Mat basis_projector(int index, int dim) {
    if (index < 0 || index >= dim) throw ValidationError("basis_projector: index out of range");
    Mat m = Mat::Zero(dim, dim);
    m(index, index) = 1.0;
    return m;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

StateVector tensor(const std::vector<StateVector>& states) {
    if (states.empty()) throw ValidationError("tensor: empty state list");
    std::vector<int> dims = states[0].space.dims;
    Vec amps = states[0].amps;
    for (size_t s = 1; s < states.size(); ++s) {
        const Vec& b = states[s].amps;
        Vec next(amps.size() * b.size());
        for (Eigen::Index i = 0; i < amps.size(); ++i)
            next.segment(i * b.size(), b.size()) = amps[i] * b;
        amps = std::move(next);
        dims.insert(dims.end(), states[s].space.dims.begin(), states[s].space.dims.end());
    }
    return {HilbertDims(dims), std::move(amps)};
}

OperatorMatrix embed_local(const LocalObservable& obs, const HilbertDims& space) {
    if (obs.site < 0 || obs.site >= space.site_count())
        throw ValidationError("embed_local: site out of range");
    if (obs.op.rows() != space.dims[obs.site])
        throw DimensionMismatch("embed_local: operator dimension does not match site dimension");

    int before = 1, after = 1;
    for (int j = 0; j < obs.site; ++j) before *= space.dims[j];
    for (int j = obs.site + 1; j < space.site_count(); ++j) after *= space.dims[j];

    Mat m = kron(kron(Mat::Identity(before, before), obs.op), Mat::Identity(after, after));
    return {space, std::move(m)};
}

cplx inner(const StateVector& bra, const StateVector& ket) {
    if (!(bra.space == ket.space)) throw DimensionMismatch("inner: mismatched spaces");
    return bra.amps.dot(ket.amps);  // Eigen's dot conjugates the left argument
}

StateVector apply(const OperatorMatrix& op, const StateVector& state) {
    if (!(op.space == state.space)) throw DimensionMismatch("apply: mismatched spaces");
    return {state.space, op.entries * state.amps};
}

bool is_hermitian(const Mat& m, double rel_tol) {
    double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Mat herm_exp(const Mat& m, double k) {
    if (!is_hermitian(m)) throw NonHermitian("herm_exp: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    const Eigen::VectorXd& ev = es.eigenvalues();
    Vec phases(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        phases[i] = std::exp(cplx(0.0, -k * ev[i]));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

OperatorMatrix herm_exp(const OperatorMatrix& op, double k) {
    return {op.space, herm_exp(op.entries, k)};
}

}  // namespace modval
