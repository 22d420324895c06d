#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "opkf/errors.hpp"

namespace opkf {

using Vec = std::vector<double>;

/// Dense real matrix, row-major storage, value semantics.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    /// Column vector view of a Vec (n x 1).
    static Matrix column(const Vec& v) {
        Matrix m(v.size(), 1);
        m.data_ = v;
        return m;
    }

    /// Diagonal matrix from entries.
    static Matrix diagonal(const Vec& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& entries() const { return data_; }

    Matrix transposed() const;

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s);

    double frobenius_norm() const {
        double sum = 0.0;
        for (double x : data_) sum += x * x;
        return std::sqrt(sum);
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::abs(x));
        return m;
    }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    /// Copies `src` into this matrix with top-left corner at (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const Matrix& src);

    /// Extracts an h x w block with top-left corner at (r0, c0).
    Matrix block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix m, double s);
Matrix operator*(double s, Matrix m);
Matrix operator*(const Matrix& a, const Matrix& b);
Vec operator*(const Matrix& m, const Vec& v);

/// rank-one update: m += scale * u v^T
void add_outer(Matrix& m, const Vec& u, const Vec& v, double scale = 1.0);

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(op) + ": shape mismatch");
}

// Vec helpers
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator*(double s, Vec v);

}  // namespace opkf
