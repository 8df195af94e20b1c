#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace stiffstep {

/// Dense real polynomial, coefficients in ascending powers.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<double> c) : coeffs_(c) {}
    explicit Polynomial(std::vector<double> c) : coeffs_(std::move(c)) {}

    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] double coefficient(std::size_t k) const noexcept { return k < coeffs_.size() ? coeffs_[k] : 0.0; }

    /// Index of the highest nonzero coefficient; -1 for the zero polynomial.
    [[nodiscard]] int degree() const noexcept {
        for (std::size_t k = coeffs_.size(); k-- > 0;)
            if (coeffs_[k] != 0.0) return static_cast<int>(k);
        return -1;
    }

    template <typename S>
    [[nodiscard]] S operator()(S z) const {
        S acc(0);
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + S(coeffs_[k]);
        return acc;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coefficient(k) + b.coefficient(k);
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.coeffs_.empty() || b.coeffs_.empty()) return {};
        std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(double s, const Polynomial& a) {
        std::vector<double> c = a.coeffs_;
        for (auto& x : c) x *= s;
        return Polynomial(std::move(c));
    }

private:
    std::vector<double> coeffs_;
};

/// First `terms` Maclaurin coefficients of num/den (den(0) != 0), by
/// long division of the power series.
[[nodiscard]] inline std::vector<double> power_series_quotient(const Polynomial& num, const Polynomial& den,
                                                               std::size_t terms) {
    std::vector<double> q(terms, 0.0);
    const double d0 = den.coefficient(0);
    for (std::size_t k = 0; k < terms; ++k) {
        double acc = num.coefficient(k);
        for (std::size_t j = 1; j <= k; ++j) acc -= den.coefficient(j) * q[k - j];
        q[k] = acc / d0;
    }
    return q;
}

}  // namespace stiffstep
