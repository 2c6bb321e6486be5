// Small dense linear algebra: vectors as std::vector<double>, a row-major
// matrix, and an LU solve with partial pivoting. Systems here are desk-scale
// (a handful of unknowns), so no sparse or blocked machinery.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dln {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2_sq(const Vec& a) { return dot(a, a); }

inline double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline double norm_inf_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// c2*u + c1*v + c0*w, componentwise.
inline Vec blend3(double c2, const Vec& u, double c1, const Vec& v, double c0, const Vec& w) {
    Vec r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = c2 * u[i] + c1 * v[i] + c0 * w[i];
    return r;
}

inline Vec blend2(double c1, const Vec& u, double c0, const Vec& v) {
    Vec r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = c1 * u[i] + c0 * v[i];
    return r;
}

class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws std::runtime_error when a pivot vanishes (singular matrix).
inline Vec lu_solve(Mat a, Vec b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw std::invalid_argument("lu_solve: dimension mismatch");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-300)
            throw std::runtime_error("lu_solve: singular matrix");
        if (piv != col) {
            for (std::size_t j = col; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            a(r, col) = 0.0;
            for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    // back substitution
    Vec x(n, 0.0);
    for (std::size_t ir = n; ir-- > 0;) {
        double s = b[ir];
        for (std::size_t j = ir + 1; j < n; ++j) s -= a(ir, j) * x[j];
        x[ir] = s / a(ir, ir);
    }
    return x;
}

}  // namespace dln
