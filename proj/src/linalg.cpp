#include "banlin/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace banlin {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm1(const Vec& a) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
}

double norm_inf(const Vec& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

double norm2(const Vec& a) {
    double m = norm_inf(a);
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double v : a) {
        double r = v / m;
        s += r * r;
    }
    return m * std::sqrt(s);
}

Vec operator+(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec operator-(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec operator*(double s, const Vec& a) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

void add_scaled(Vec& a, double s, const Vec& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

Vec zeros(int d) { return Vec(static_cast<size_t>(d), 0.0); }

Vec basis_vector(int d, int i, double sign) {
    Vec e = zeros(d);
    e[static_cast<size_t>(i)] = sign;
    return e;
}

Matrix Matrix::identity(int d) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Vec Matrix::apply(const Vec& x) const {
    Vec y(static_cast<size_t>(rows_), 0.0);
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int c = 0; c < cols_; ++c) s += (*this)(r, c) * x[static_cast<size_t>(c)];
        y[static_cast<size_t>(r)] = s;
    }
    return y;
}

Vec Matrix::apply_transposed(const Vec& x) const {
    Vec y(static_cast<size_t>(cols_), 0.0);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) y[static_cast<size_t>(c)] += (*this)(r, c) * x[static_cast<size_t>(r)];
    return y;
}

Matrix Matrix::operator*(const Matrix& other) const {
    Matrix out(rows_, other.cols_);
    for (int r = 0; r < rows_; ++r)
        for (int k = 0; k < cols_; ++k) {
            double v = (*this)(r, k);
            if (v == 0.0) continue;
            for (int c = 0; c < other.cols_; ++c) out(r, c) += v * other(k, c);
        }
    return out;
}

Matrix Matrix::operator+(const Matrix& other) const {
    Matrix out(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c) + other(r, c);
    return out;
}

Matrix Matrix::operator-(const Matrix& other) const {
    Matrix out(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c) - other(r, c);
    return out;
}

Matrix Matrix::scaled(double s) const {
    Matrix out(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out(r, c) = s * (*this)(r, c);
    return out;
}

double Matrix::frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::max_abs() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
}

Matrix outer(const Vec& a, const Vec& b) {
    Matrix m(static_cast<int>(a.size()), static_cast<int>(b.size()));
    for (size_t r = 0; r < a.size(); ++r)
        for (size_t c = 0; c < b.size(); ++c) m(static_cast<int>(r), static_cast<int>(c)) = a[r] * b[c];
    return m;
}

double frobenius_distance(const Matrix& a, const Matrix& b) { return (a - b).frobenius(); }

SymMatrix::SymMatrix(Matrix m, double tol) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols() || mat_.rows() < 1)
        throw NotSymmetric("SymMatrix: matrix must be square with dim >= 1");
    const double scale = std::max(mat_.max_abs(), 1e-300);
    for (int r = 0; r < mat_.rows(); ++r)
        for (int c = r + 1; c < mat_.cols(); ++c) {
            if (std::abs(mat_(r, c) - mat_(c, r)) > tol * scale)
                throw NotSymmetric("SymMatrix: asymmetry exceeds tolerance");
            double avg = 0.5 * (mat_(r, c) + mat_(c, r));
            mat_(r, c) = avg;
            mat_(c, r) = avg;
        }
}

SymMatrix SymMatrix::identity(int d) { return SymMatrix(Matrix::identity(d)); }

SymMatrix SymMatrix::diagonal(const Vec& entries) {
    Matrix m(static_cast<int>(entries.size()), static_cast<int>(entries.size()));
    for (size_t i = 0; i < entries.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = entries[i];
    return SymMatrix(std::move(m));
}

Matrix SpectralDecomp::reconstruct() const {
    const int d = eigenvectors.rows();
    Matrix out(d, d);
    for (int k = 0; k < d; ++k) {
        double lam = eigenvalues[static_cast<size_t>(k)];
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) out(r, c) += lam * eigenvectors(r, k) * eigenvectors(c, k);
    }
    return out;
}

SpectralDecomp sym_eig(const SymMatrix& m) {
    const int d = m.dim();
    Matrix a = m.mat();
    Matrix v = Matrix::identity(d);

    // Cyclic Jacobi sweeps; terminates when every off-diagonal entry is
    // negligible relative to the matrix scale.
    const double scale = std::max(a.max_abs(), 1e-300);
    const double stop = 1e-15 * scale;
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d - 1; ++p)
            for (int q = p + 1; q < d; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= stop) break;

        for (int p = 0; p < d - 1; ++p) {
            for (int q = p + 1; q < d; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= stop * 1e-2) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);

                double app = a(p, p);
                double aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int k = 0; k < d; ++k) {
                    if (k == p || k == q) continue;
                    double akp = a(k, p);
                    double akq = a(k, q);
                    a(k, p) = akp - s * (akq + tau * akp);
                    a(p, k) = a(k, p);
                    a(k, q) = akq + s * (akp - tau * akq);
                    a(q, k) = a(k, q);
                }
                for (int k = 0; k < d; ++k) {
                    double vkp = v(k, p);
                    double vkq = v(k, q);
                    v(k, p) = vkp - s * (vkq + tau * vkp);
                    v(k, q) = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    std::vector<int> order(static_cast<size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

    SpectralDecomp out;
    out.eigenvalues.resize(static_cast<size_t>(d));
    out.eigenvectors = Matrix(d, d);
    for (int k = 0; k < d; ++k) {
        out.eigenvalues[static_cast<size_t>(k)] = a(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
        for (int r = 0; r < d; ++r) out.eigenvectors(r, k) = v(r, order[static_cast<size_t>(k)]);
    }
    return out;
}

SymMatrix psd_pinv(const SymMatrix& m, double rel_tol) {
    return psd_power(m, -1.0, rel_tol);
}

double min_eig(const SymMatrix& m) {
    SpectralDecomp d = sym_eig(m);
    return d.eigenvalues.back();
}

SymMatrix psd_power(const SymMatrix& m, double exponent, double rel_tol) {
    SpectralDecomp dec = sym_eig(m);
    const int d = m.dim();
    const double lam_max = std::max(dec.eigenvalues.front(), 0.0);
    const double cutoff = rel_tol * lam_max;
    if (dec.eigenvalues.back() < -std::max(cutoff, 1e-300))
        throw NotPSD("psd_power: significantly negative eigenvalue");

    Vec powered(static_cast<size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        double lam = dec.eigenvalues[static_cast<size_t>(i)];
        if (lam <= cutoff) continue;  // treated as exact zero rank
        powered[static_cast<size_t>(i)] = std::pow(lam, exponent);
    }

    Matrix out(d, d);
    for (int k = 0; k < d; ++k) {
        double w = powered[static_cast<size_t>(k)];
        if (w == 0.0) continue;
        for (int r = 0; r < d; ++r)
            for (int c = r; c < d; ++c) {
                double v = w * dec.eigenvectors(r, k) * dec.eigenvectors(c, k);
                out(r, c) += v;
            }
    }
    for (int r = 0; r < d; ++r)
        for (int c = r + 1; c < d; ++c) out(c, r) = out(r, c);
    return SymMatrix(std::move(out), 1e-6);
}

}  // namespace banlin
