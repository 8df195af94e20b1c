#pragma once

// Small dense linear algebra for n <= ~10 systems: owning vectors, square
// row-major matrices and LU with partial pivoting. All routines are written
// against a generic real scalar so an extended-precision type can be swapped
// in for the whole integrator stack.

#include "stiffstep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stiffstep {

using ComplexScalar = std::complex<double>;

template <typename T>
class Vector {
public:
    using value_type = T;

    Vector() = default;
    explicit Vector(std::size_t n, T fill = T(0)) : data_(n, fill) {}
    Vector(std::initializer_list<T> values) : data_(values) {}
    explicit Vector(std::vector<T> values) : data_(std::move(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    [[nodiscard]] T* data() noexcept { return data_.data(); }
    [[nodiscard]] const T* data() const noexcept { return data_.data(); }
    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    [[nodiscard]] std::span<T> span() noexcept { return data_; }
    [[nodiscard]] std::span<const T> span() const noexcept { return data_; }

    void assign(std::size_t n, T fill) { data_.assign(n, fill); }

    Vector& operator+=(const Vector& other) noexcept {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }
    Vector& operator-=(const Vector& other) noexcept {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return *this;
    }
    Vector& operator*=(T s) noexcept {
        for (auto& x : data_) x *= s;
        return *this;
    }

    /// this += s * x
    Vector& axpy(T s, const Vector& x) noexcept {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * x.data_[i];
        return *this;
    }

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<T> data_;
};

template <typename T>
[[nodiscard]] Vector<T> operator+(Vector<T> a, const Vector<T>& b) { return a += b; }
template <typename T>
[[nodiscard]] Vector<T> operator-(Vector<T> a, const Vector<T>& b) { return a -= b; }
template <typename T>
[[nodiscard]] Vector<T> operator*(T s, Vector<T> a) { return a *= s; }
template <typename T>
[[nodiscard]] Vector<T> operator-(Vector<T> a) { return a *= T(-1); }

/// Square n x n matrix, row-major.
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    explicit Matrix(std::size_t n, T fill = T(0)) : n_(n), data_(n * n, fill) {}
    Matrix(std::initializer_list<std::initializer_list<T>> rows) : n_(rows.size()) {
        data_.reserve(n_ * n_);
        for (const auto& row : rows) {
            if (row.size() != n_) throw ConfigError("Matrix: rows must form a square matrix");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    [[nodiscard]] static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return n_; }

    T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    Matrix& operator+=(const Matrix& other) noexcept {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& other) noexcept {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
        return *this;
    }
    Matrix& operator*=(T s) noexcept {
        for (auto& x : data_) x *= s;
        return *this;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<T> data_;
};

template <typename T>
[[nodiscard]] Matrix<T> operator+(Matrix<T> a, const Matrix<T>& b) { return a += b; }
template <typename T>
[[nodiscard]] Matrix<T> operator-(Matrix<T> a, const Matrix<T>& b) { return a -= b; }
template <typename T>
[[nodiscard]] Matrix<T> operator*(T s, Matrix<T> a) { return a *= s; }

template <typename T>
void multiply(const Matrix<T>& a, const Vector<T>& x, Vector<T>& out) {
    const std::size_t n = a.dim();
    out.assign(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
        T acc(0);
        for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * x[j];
        out[i] = acc;
    }
}

template <typename T>
[[nodiscard]] Vector<T> operator*(const Matrix<T>& a, const Vector<T>& x) {
    Vector<T> out;
    multiply(a, x, out);
    return out;
}

template <typename T>
[[nodiscard]] Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
    const std::size_t n = a.dim();
    Matrix<T> c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const T aik = a(i, k);
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

template <typename T>
[[nodiscard]] T norm_l2(const Vector<T>& v) {
    using std::sqrt;
    // Scaled accumulation keeps tiny (Robertson u2 ~ 1e-5, errors ~ 1e-19)
    // and huge entries from under/overflowing the sum of squares.
    T scale(0);
    for (const T& x : v) {
        using std::abs;
        scale = std::max(scale, T(abs(x)));
    }
    if (scale == T(0) || !std::isfinite(static_cast<double>(scale))) return scale;
    T sum(0);
    for (const T& x : v) {
        const T r = x / scale;
        sum += r * r;
    }
    return scale * sqrt(sum);
}

template <typename T>
[[nodiscard]] T norm_linf(const Vector<T>& v) {
    using std::abs;
    T m(0);
    for (const T& x : v) {
        const T a = abs(x);
        if (a != a) return a;  // NaN
        m = std::max(m, a);
    }
    return m;
}

template <typename T>
[[nodiscard]] bool all_finite(std::span<const T> values) {
    return std::all_of(values.begin(), values.end(),
                       [](const T& x) { return std::isfinite(static_cast<double>(x)); });
}

template <typename T>
[[nodiscard]] bool all_finite(const Vector<T>& v) { return all_finite(v.span()); }

template <typename T>
[[nodiscard]] bool all_finite(const Matrix<T>& m) { return all_finite(m.values()); }

/// Pivots smaller than this fraction of their original row's max-abs entry
/// are treated as zero.
inline constexpr double kSingularPivotRatio = 1e-14;

/// LU factorization with partial (row) pivoting, P·A = L·U.
template <typename T>
class LuDecomposition {
public:
    explicit LuDecomposition(Matrix<T> a) : lu_(std::move(a)), perm_(lu_.dim()) {
        using std::abs;
        const std::size_t n = lu_.dim();
        if (n == 0) throw SingularMatrix("LU: empty matrix");

        std::vector<T> row_scale(n, T(0));
        for (std::size_t i = 0; i < n; ++i) {
            perm_[i] = i;
            for (std::size_t j = 0; j < n; ++j) row_scale[i] = std::max(row_scale[i], T(abs(lu_(i, j))));
        }

        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            T best = abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const T cand = abs(lu_(i, k));
                if (cand > best) {
                    best = cand;
                    p = i;
                }
            }
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
                std::swap(perm_[k], perm_[p]);
            }
            const T scale = row_scale[perm_[k]];
            if (!(best > T(kSingularPivotRatio) * scale)) {
                throw SingularMatrix("LU: pivot " + std::to_string(static_cast<double>(best)) +
                                     " in column " + std::to_string(k) +
                                     " below singularity threshold");
            }
            const T pivot = lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const T factor = lu_(i, k) / pivot;
                lu_(i, k) = factor;
                if (factor == T(0)) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
            }
        }
    }

    [[nodiscard]] Vector<T> solve(const Vector<T>& b) const {
        const std::size_t n = lu_.dim();
        if (b.size() != n) throw ConfigError("LU solve: dimension mismatch");
        Vector<T> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            T acc = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
            x[i] = acc;
        }
        for (std::size_t i = n; i-- > 0;) {
            T acc = x[i];
            for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
            x[i] = acc / lu_(i, i);
        }
        return x;
    }

private:
    Matrix<T> lu_;
    std::vector<std::size_t> perm_;
};

template <typename T>
[[nodiscard]] Vector<T> lu_solve(Matrix<T> a, const Vector<T>& b) {
    if (a.dim() != b.size()) throw ConfigError("lu_solve: matrix and right-hand side dimensions differ");
    return LuDecomposition<T>(std::move(a)).solve(b);
}

}  // namespace stiffstep
