#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "modval/errors.hpp"

namespace modval {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Tolerance for the relative Hermiticity check in herm_exp.
inline constexpr double kHermTol = 1e-10;

/// Ordered subsystem dimensions of a tensor-product Hilbert space.
///
/// Basis convention, fixed once for the whole library: subsystem 0 is the
/// most significant digit, i.e. the basis index of (b_0, ..., b_{N-1}) is
/// sum_i b_i * prod_{j>i} dims[j]. Kronecker products follow the same order.
struct HilbertDims {
    std::vector<int> dims;

    HilbertDims() = default;
    HilbertDims(std::initializer_list<int> d) : dims(d) { validate(); }
    explicit HilbertDims(std::vector<int> d) : dims(std::move(d)) { validate(); }

    int total() const {
        int t = 1;
        for (int d : dims) t *= d;
        return t;
    }
    int site_count() const { return static_cast<int>(dims.size()); }
    bool operator==(const HilbertDims& o) const { return dims == o.dims; }

private:
    void validate() const {
        if (dims.empty()) throw ValidationError("HilbertDims: no subsystems");
        for (int d : dims)
            if (d < 2) throw ValidationError("HilbertDims: every subsystem dimension must be >= 2");
    }
};

/// A (possibly unnormalized) pure state. Normalization is performed
/// explicitly by the operations that need it, never implicitly.
struct StateVector {
    HilbertDims space;
    Vec amps;

    StateVector() = default;
    StateVector(HilbertDims s, Vec a) : space(std::move(s)), amps(std::move(a)) {
        if (amps.size() != space.total())
            throw DimensionMismatch("StateVector: amplitude count does not match space dimension");
    }

    double norm() const { return amps.norm(); }
};

/// Dense operator on the full space.
struct OperatorMatrix {
    HilbertDims space;
    Mat entries;

    OperatorMatrix() = default;
    OperatorMatrix(HilbertDims s, Mat m) : space(std::move(s)), entries(std::move(m)) {
        if (entries.rows() != entries.cols() || entries.rows() != space.total())
            throw DimensionMismatch("OperatorMatrix: matrix must be square with side = space dimension");
    }
};

/// Operator acting on a single subsystem, tagged with its site.
struct LocalObservable {
    int site = 0;
    Mat op;

    LocalObservable() = default;
    LocalObservable(int site, Mat m) : site(site), op(std::move(m)) {
        if (op.rows() != op.cols()) throw DimensionMismatch("LocalObservable: operator must be square");
    }
};

// --- construction helpers ---------------------------------------------------

StateVector basis_state(const HilbertDims& space, int index);
StateVector normalized(const StateVector& s);
OperatorMatrix identity_op(const HilbertDims& space);

Mat pauli_x();
Mat pauli_y();
Mat pauli_z();
Mat basis_projector(int index, int dim);  // |index><index| on a dim-level system

/// Kronecker product with subsystem 0 most significant.
Mat kron(const Mat& a, const Mat& b);

// --- operations --------------------------------------------------------------

/// Product state; dims are concatenated in argument order.
StateVector tensor(const std::vector<StateVector>& states);

/// Lift a single-site operator to the full space (identity elsewhere).
OperatorMatrix embed_local(const LocalObservable& obs, const HilbertDims& space);

/// <bra|ket>, conjugate-linear in the first argument.
cplx inner(const StateVector& bra, const StateVector& ket);

StateVector apply(const OperatorMatrix& op, const StateVector& state);

/// exp(-i k op) for Hermitian op, via eigendecomposition. Rejects
/// non-Hermitian input (relative tolerance kHermTol).
OperatorMatrix herm_exp(const OperatorMatrix& op, double k);

/// Same, on a bare matrix.
Mat herm_exp(const Mat& m, double k);

bool is_hermitian(const Mat& m, double rel_tol = kHermTol);

}  // namespace modval
