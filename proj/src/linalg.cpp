#include "qpower/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpower/error.hpp"

namespace qpower {

namespace {

constexpr double kSingularRelTol = 1e-13;
constexpr std::size_t kMaxInverseSize = 8;

std::string dims(const CMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

double CVector::norm() const {
    double s = 0.0;
    for (const auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw DimensionError("CMatrix: " + std::to_string(data_.size()) +
                             " entries for shape " + std::to_string(rows) + "x" +
                             std::to_string(cols));
}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("CMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::diagonal(std::span<const double> d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

CVector CMatrix::column(std::size_t c) const {
    CVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

void CMatrix::set_column(std::size_t c, const CVector& v) {
    if (v.size() != rows_) throw DimensionError("set_column: length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

bool CMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

CMatrix matmul(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: " + dims(a) + " times " + dims(b));
    CMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

CMatrix hermitian(const CMatrix& a) {
    CMatrix h(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) h(j, i) = std::conj(a(i, j));
    return h;
}

CMatrix inverse_small(const CMatrix& a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw DimensionError("inverse_small: non-square " + dims(a));
    if (n == 0 || n > kMaxInverseSize)
        throw DimensionError("inverse_small: size " + std::to_string(n) + " outside 1..8");
    if (!a.all_finite()) throw DimensionError("inverse_small: non-finite entry");

    const double scale = max_abs(a);
    const double tol = kSingularRelTol * scale;

    CMatrix work = a;
    CMatrix inv = CMatrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(work(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double mag = std::abs(work(r, col));
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (best < tol || best == 0.0)
            throw SingularMatrixError("inverse_small: pivot " + std::to_string(best) +
                                      " below tolerance in column " + std::to_string(col));
        if (pivot != col)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(work(col, j), work(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
        const cplx d = work(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            work(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = work(r, col);
            if (f == cplx{}) continue;
            for (std::size_t j = 0; j < n; ++j) {
                work(r, j) -= f * work(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

cplx trace(const CMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("trace: non-square " + dims(a));
    cplx t{};
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

cplx dot(const CVector& a, const CVector& b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double max_abs(const CMatrix& a) {
    double m = 0.0;
    for (const auto& z : a.values()) m = std::max(m, std::abs(z));
    return m;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("max_abs_diff: " + dims(a) + " vs " + dims(b));
    double m = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
    return m;
}

CMatrix orthonormalize_columns(const CMatrix& a) {
    if (a.cols() > a.rows())
        throw DimensionError("orthonormalize_columns: more columns than rows in " + dims(a));
    CMatrix q = a;
    for (std::size_t j = 0; j < q.cols(); ++j) {
        CVector v = q.column(j);
        for (std::size_t i = 0; i < j; ++i) {
            const CVector qi = q.column(i);
            const cplx proj = dot(qi, v);
            for (std::size_t r = 0; r < v.size(); ++r) v[r] -= proj * qi[r];
        }
        const double n = v.norm();
        if (n == 0.0) throw SingularMatrixError("orthonormalize_columns: dependent columns");
        for (std::size_t r = 0; r < v.size(); ++r) v[r] /= n;
        q.set_column(j, v);
    }
    return q;
}

}  // namespace qpower
