#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace qpower {

using cplx = std::complex<double>;

/// Dense complex vector.
class CVector {
public:
    CVector() = default;
    explicit CVector(std::size_t n, cplx fill = {}) : data_(n, fill) {}
    CVector(std::initializer_list<cplx> init) : data_(init) {}
    explicit CVector(std::vector<cplx> data) : data_(std::move(data)) {}

    std::size_t size() const { return data_.size(); }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }
    std::span<const cplx> values() const { return data_; }

    double norm() const;

private:
    std::vector<cplx> data_;
};

/// Dense complex matrix, row-major.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols, cplx fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);
    CMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static CMatrix identity(std::size_t n);
    static CMatrix diagonal(std::span<const double> d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const cplx> values() const { return data_; }

    CVector column(std::size_t c) const;
    void set_column(std::size_t c, const CVector& v);

    bool all_finite() const;

    friend bool operator==(const CMatrix&, const CMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

CMatrix matmul(const CMatrix& a, const CMatrix& b);
CMatrix hermitian(const CMatrix& a);

/// Gauss-Jordan inverse with partial pivoting for matrices up to 8x8. Throws
/// SingularMatrixError when a pivot falls below 1e-13 * max|a_ij|.
CMatrix inverse_small(const CMatrix& a);

cplx trace(const CMatrix& a);

/// Inner product a^H b.
cplx dot(const CVector& a, const CVector& b);

double max_abs(const CMatrix& a);
double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Modified Gram-Schmidt over the columns of a (cols <= rows).
CMatrix orthonormalize_columns(const CMatrix& a);

}  // namespace qpower
