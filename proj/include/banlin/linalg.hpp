#pragma once

#include <cstddef>
#include <vector>

#include "banlin/errors.hpp"

// Dense symmetric linear algebra for small dimensions (d up to a few
// hundred). One numerical pathway: a cyclic Jacobi eigensolver; the
// pseudo-inverse, matrix roots and minimum eigenvalue all derive from it.

namespace banlin {

using Vec = std::vector<double>;

// Vector helpers ------------------------------------------------------------

double dot(const Vec& a, const Vec& b);
double norm1(const Vec& a);
double norm_inf(const Vec& a);
// Two-pass Euclidean norm: rescales by the largest magnitude first so that
// entries of order d/gamma (~ d*sqrt(n)) do not overflow when squared.
double norm2(const Vec& a);

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);
void add_scaled(Vec& a, double s, const Vec& b);  // a += s*b

Vec zeros(int d);
Vec basis_vector(int d, int i, double sign = 1.0);

// Matrix --------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}

    static Matrix identity(int d);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    Matrix transposed() const;
    Vec apply(const Vec& x) const;            // A x
    Vec apply_transposed(const Vec& x) const; // A^T x
    Matrix operator*(const Matrix& other) const;
    Matrix operator+(const Matrix& other) const;
    Matrix operator-(const Matrix& other) const;
    Matrix scaled(double s) const;

    double frobenius() const;
    double max_abs() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix outer(const Vec& a, const Vec& b);  // a b^T
double frobenius_distance(const Matrix& a, const Matrix& b);

// Symmetric matrices and spectral operations ---------------------------------

// A d x d matrix validated to be symmetric on construction (relative
// asymmetry above `tol` raises NotSymmetric) and then exactly symmetrized.
class SymMatrix {
public:
    explicit SymMatrix(Matrix m, double tol = 1e-9);
    static SymMatrix identity(int d);
    static SymMatrix diagonal(const Vec& entries);

    int dim() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }
    double operator()(int r, int c) const { return mat_(r, c); }

private:
    Matrix mat_;
};

struct SpectralDecomp {
    Vec eigenvalues;      // descending
    Matrix eigenvectors;  // orthonormal columns; input = V diag(lambda) V^T

    Matrix reconstruct() const;
};

SpectralDecomp sym_eig(const SymMatrix& m);

// Moore-Penrose pseudo-inverse of a PSD matrix. Eigenvalues at or below
// rel_tol * lambda_max are treated as exact zeros; an eigenvalue below
// -rel_tol * lambda_max raises NotPSD.
SymMatrix psd_pinv(const SymMatrix& m, double rel_tol = 1e-10);

double min_eig(const SymMatrix& m);

// PSD matrix power via the spectral decomposition (used for H^{1/2} and
// H^{-1/2}); negative exponents pseudo-invert the nonzero part.
SymMatrix psd_power(const SymMatrix& m, double exponent, double rel_tol = 1e-10);

}  // namespace banlin
