#include "opkf/matrix.hpp"

#include "opkf/kernels.hpp"

namespace opkf {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r > 0 ? rows.begin()->size() : 0;
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("from_rows: ragged rows");
        std::size_t j = 0;
        for (double x : row) m(i, j++) = x;
        ++i;
    }
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
    check_same_shape(*this, rhs, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    check_same_shape(*this, rhs, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& src) {
    if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_)
        throw DimensionError("set_block: block exceeds matrix bounds");
    for (std::size_t i = 0; i < src.rows(); ++i)
        for (std::size_t j = 0; j < src.cols(); ++j) (*this)(r0 + i, c0 + j) = src(i, j);
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
    if (r0 + h > rows_ || c0 + w > cols_) throw DimensionError("block: exceeds matrix bounds");
    Matrix out(h, w);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) {
    lhs += rhs;
    return lhs;
}

Matrix operator-(Matrix lhs, const Matrix& rhs) {
    lhs -= rhs;
    return lhs;
}

Matrix operator*(Matrix m, double s) {
    m *= s;
    return m;
}

Matrix operator*(double s, Matrix m) {
    m *= s;
    return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) { return kernels::matmul(a, b); }

Vec operator*(const Matrix& m, const Vec& v) {
    if (m.cols() != v.size()) throw DimensionError("matrix-vector product: shape mismatch");
    Vec out(m.rows(), 0.0);
    const double* md = m.data();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        const double* row = md + i * m.cols();
        for (std::size_t j = 0; j < m.cols(); ++j) sum += row[j] * v[j];
        out[i] = sum;
    }
    return out;
}

void add_outer(Matrix& m, const Vec& u, const Vec& v, double scale) {
    if (m.rows() != u.size() || m.cols() != v.size())
        throw DimensionError("add_outer: shape mismatch");
    double* md = m.data();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ui = scale * u[i];
        double* row = md + i * v.size();
        for (std::size_t j = 0; j < v.size(); ++j) row[j] += ui * v[j];
    }
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec operator+(Vec a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("vec+: length mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

Vec operator-(Vec a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("vec-: length mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

Vec operator*(double s, Vec v) {
    for (double& x : v) x *= s;
    return v;
}

}  // namespace opkf
