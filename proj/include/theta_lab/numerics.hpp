// Copyright 2026 The theta_lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Numeric substrate: small dense vectors and matrices, lattice enumeration
// inside an ellipsoid, compensated summation and the Pfaffian.

#ifndef THETA_LAB_NUMERICS_HPP
#define THETA_LAB_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace theta_lab
{

using cplx = std::complex<double>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<cplx>;
using IntVector = std::vector<int>;

inline constexpr double pi = std::numbers::pi;

// Dense row-major matrix. Only what the theta code needs.
template <typename T>
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = T{1};
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    friend bool operator==(const Matrix &, const Matrix &) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;

template <typename T>
Matrix<T> operator*(const Matrix<T> &m, T s)
{
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = m(i, j) * s;
        }
    }
    return out;
}

inline bool is_finite(double x) noexcept { return std::isfinite(x); }
inline bool is_finite(const cplx &z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <typename T>
bool all_finite(std::span<const T> v) noexcept
{
    return std::all_of(v.begin(), v.end(), [](const T &x) { return is_finite(x); });
}

namespace detail
{

inline void require_same_dim(std::size_t n, std::size_t m, const char *what)
{
    if (n != m) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(n) + " vs "
                                    + std::to_string(m) + ")");
    }
}

} // namespace detail

// Bilinear (unconjugated) pairing sum_j x_j y_j.
template <typename X, typename Y>
auto scalar_product(std::span<const X> x, std::span<const Y> y)
{
    detail::require_same_dim(x.size(), y.size(), "scalar_product");
    using R = decltype(X{} * Y{});
    R acc{};
    for (std::size_t j = 0; j < x.size(); ++j) {
        acc += x[j] * y[j];
    }
    return acc;
}

template <typename X, typename Y>
auto scalar_product(const std::vector<X> &x, const std::vector<Y> &y)
{
    return scalar_product(std::span<const X>(x), std::span<const Y>(y));
}

template <typename T, typename V>
auto mat_vec(const Matrix<T> &m, const std::vector<V> &v)
{
    detail::require_same_dim(m.cols(), v.size(), "mat_vec");
    using R = decltype(T{} * V{});
    std::vector<R> out(m.rows(), R{});
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out[i] += m(i, j) * v[j];
        }
    }
    return out;
}

// Quadratic form x^T M x.
template <typename T, typename V>
auto quadratic_form(const Matrix<T> &m, std::span<const V> x)
{
    detail::require_same_dim(m.cols(), x.size(), "quadratic_form");
    using R = decltype(T{} * V{});
    R acc{};
    for (std::size_t i = 0; i < m.rows(); ++i) {
        R row{};
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row += m(i, j) * x[j];
        }
        acc += x[i] * row;
    }
    return acc;
}

// Neumaier's variant of Kahan summation, applied to the real and imaginary
// parts independently. Order of the input is the order of accumulation.
class CompensatedAccumulator
{
public:
    void add(const cplx &z) noexcept
    {
        add_part(re_, re_c_, z.real());
        add_part(im_, im_c_, z.imag());
    }

    cplx value() const noexcept { return {re_ + re_c_, im_ + im_c_}; }

private:
    static void add_part(double &sum, double &comp, double x) noexcept
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    double re_ = 0.0;
    double re_c_ = 0.0;
    double im_ = 0.0;
    double im_c_ = 0.0;
};

inline cplx compensated_sum(std::span<const cplx> terms) noexcept
{
    CompensatedAccumulator acc;
    for (const auto &t : terms) {
        acc.add(t);
    }
    return acc.value();
}

inline cplx compensated_sum(const std::vector<cplx> &terms) noexcept
{
    return compensated_sum(std::span<const cplx>(terms));
}

// Lower Cholesky factor L with Y = L L^T. Returns false if Y is not
// (numerically) positive definite.
inline bool cholesky(const RealMatrix &y, RealMatrix &l)
{
    if (!y.square()) {
        return false;
    }
    const std::size_t n = y.rows();
    l = RealMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = y(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            d -= l(j, k) * l(j, k);
        }
        if (!(d > 0.0) || !std::isfinite(d)) {
            return false;
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = y(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

inline bool is_positive_definite(const RealMatrix &y)
{
    RealMatrix l;
    return cholesky(y, l);
}

// Solves Y x = rhs given the Cholesky factor of Y.
inline RealVector cholesky_solve(const RealMatrix &l, const RealVector &rhs)
{
    const std::size_t n = l.rows();
    detail::require_same_dim(n, rhs.size(), "cholesky_solve");
    RealVector z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= l(i, k) * z[k];
        }
        z[i] = s / l(i, i);
    }
    RealVector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = z[ii];
        for (std::size_t k = ii + 1; k < n; ++k) {
            s -= l(k, ii) * x[k];
        }
        x[ii] = s / l(ii, ii);
    }
    return x;
}

// Lower bound on the smallest eigenvalue of a symmetric positive-definite
// matrix, found by bisection on "Y - lambda I is positive definite". The
// returned value always passes that predicate (or is 0).
inline double smallest_eigenvalue_lower_bound(const RealMatrix &y, int iterations = 80)
{
    if (!is_positive_definite(y)) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = y(0, 0);
    for (std::size_t i = 1; i < y.rows(); ++i) {
        hi = std::min(hi, y(i, i));
    }
    RealMatrix shifted = y;
    const auto pd_at = [&](double lambda) {
        for (std::size_t i = 0; i < y.rows(); ++i) {
            shifted(i, i) = y(i, i) - lambda;
        }
        return is_positive_definite(shifted);
    };
    for (int it = 0; it < iterations && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (pd_at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

struct LatticeShell
{
    std::vector<IntVector> points; // ascending quadratic-form value, lexicographic tie-break
    RealVector values;             // <Y(k+center), k+center> for each point
    double radius = 0.0;
};

// All k in Z^g with <Y(k+center), k+center> <= radius^2, enumerated by
// Fincke-Pohst style coordinate bounding: the outermost coordinate first,
// each subsequent interval from the remaining budget.
inline LatticeShell enumerate_lattice(const RealVector &center, const RealMatrix &y, double radius)
{
    const std::size_t g = center.size();
    if (g == 0 || !y.square() || y.rows() != g) {
        throw std::invalid_argument("enumerate_lattice: dimension mismatch");
    }
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("enumerate_lattice: radius must be finite and >= 0");
    }

    // Q(x) = sum_i q(i,i) * (x_i + sum_{j>i} q(i,j) x_j)^2
    RealMatrix q = y;
    for (std::size_t i = 0; i < g; ++i) {
        if (!(q(i, i) > 0.0)) {
            throw std::domain_error("enumerate_lattice: matrix is not positive definite");
        }
        for (std::size_t j = i + 1; j < g; ++j) {
            q(j, i) = q(i, j);
            q(i, j) /= q(i, i);
        }
        for (std::size_t k = i + 1; k < g; ++k) {
            for (std::size_t l = k; l < g; ++l) {
                q(k, l) -= q(k, i) * q(i, l);
            }
        }
    }

    const double r2 = radius * radius;
    // Coordinate intervals are widened slightly; the exact test below decides
    // membership.
    const double slack = 1e-9 * (1.0 + r2);

    LatticeShell shell;
    shell.radius = radius;
    IntVector k(g, 0);
    RealVector x(g, 0.0);

    std::function<void(std::size_t, double)> descend = [&](std::size_t level, double budget) {
        const std::size_t i = level - 1;
        double shift = 0.0;
        for (std::size_t j = i + 1; j < g; ++j) {
            shift += q(i, j) * x[j];
        }
        const double half_width = std::sqrt(std::max(0.0, budget + slack) / q(i, i));
        // x_i = k_i + center_i must lie in [-shift - half_width, -shift + half_width]
        const double lo = std::ceil(-shift - half_width - center[i]);
        const double hi = std::floor(-shift + half_width - center[i]);
        for (double ki = lo; ki <= hi; ki += 1.0) {
            k[i] = static_cast<int>(ki);
            x[i] = ki + center[i];
            const double t = x[i] + shift;
            const double rest = budget - q(i, i) * t * t;
            if (i == 0) {
                const double value = quadratic_form(y, std::span<const double>(x));
                if (value <= r2) {
                    shell.points.push_back(k);
                    shell.values.push_back(value);
                }
            } else {
                descend(i, rest);
            }
        }
    };
    descend(g, r2);

    std::vector<std::size_t> order(shell.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        if (shell.values[lhs] != shell.values[rhs]) {
            return shell.values[lhs] < shell.values[rhs];
        }
        return shell.points[lhs] < shell.points[rhs];
    });
    LatticeShell sorted;
    sorted.radius = radius;
    sorted.points.reserve(order.size());
    sorted.values.reserve(order.size());
    for (const auto idx : order) {
        sorted.points.push_back(std::move(shell.points[idx]));
        sorted.values.push_back(shell.values[idx]);
    }
    return sorted;
}

// Skew-symmetric matrix; only the strict upper triangle is stored, the
// lower triangle and diagonal are derived.
class SkewMatrix
{
public:
    explicit SkewMatrix(std::size_t n) : n_(n), upper_(n * (n > 0 ? n - 1 : 0) / 2) {}

    // From the row-major strict upper triangle (a12, a13, ..., a(n-1)n).
    static SkewMatrix from_upper(std::size_t n, std::span<const cplx> upper)
    {
        SkewMatrix m(n);
        detail::require_same_dim(m.upper_.size(), upper.size(), "SkewMatrix::from_upper");
        std::copy(upper.begin(), upper.end(), m.upper_.begin());
        return m;
    }

    std::size_t size() const noexcept { return n_; }

    cplx operator()(std::size_t i, std::size_t j) const
    {
        if (i == j) {
            return {};
        }
        return i < j ? upper_[index(i, j)] : -upper_[index(j, i)];
    }

    // Sets A(i,j) = value and A(j,i) = -value.
    void set(std::size_t i, std::size_t j, cplx value)
    {
        if (i == j) {
            throw std::invalid_argument("SkewMatrix::set: diagonal is identically zero");
        }
        if (i < j) {
            upper_[index(i, j)] = value;
        } else {
            upper_[index(j, i)] = -value;
        }
    }

    ComplexMatrix dense() const
    {
        ComplexMatrix m(n_, n_);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                m(i, j) = (*this)(i, j);
            }
        }
        return m;
    }

    std::span<const cplx> upper() const noexcept { return upper_; }

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept
    {
        // row i starts after sum_{r<i} (n-1-r) entries
        return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
    }

    std::size_t n_;
    std::vector<cplx> upper_;
};

// Pfaffian by skew-symmetric Parlett-Reid (L T L^T) reduction with partial
// pivoting. Each pivot swap flips the sign.
inline cplx pfaffian(const SkewMatrix &skew)
{
    const std::size_t n = skew.size();
    if (n % 2 != 0) {
        throw std::invalid_argument("pfaffian: matrix dimension must be even, got " + std::to_string(n));
    }
    if (n == 0) {
        return cplx{1.0};
    }
    ComplexMatrix a = skew.dense();
    cplx pf{1.0};
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        std::size_t kp = k + 1;
        double best = std::abs(a(k + 1, k));
        for (std::size_t i = k + 2; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                kp = i;
            }
        }
        if (kp != k + 1) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(k + 1, j), a(kp, j));
            }
            for (std::size_t i = 0; i < n; ++i) {
                std::swap(a(i, k + 1), a(i, kp));
            }
            pf = -pf;
        }
        if (a(k + 1, k) == cplx{}) {
            return cplx{};
        }
        const cplx pivot = a(k, k + 1);
        pf *= pivot;
        if (k + 2 < n) {
            std::vector<cplx> tau(n - k - 2);
            for (std::size_t j = k + 2; j < n; ++j) {
                tau[j - k - 2] = a(k, j) / pivot;
            }
            for (std::size_t i = k + 2; i < n; ++i) {
                for (std::size_t j = k + 2; j < n; ++j) {
                    a(i, j) += tau[i - k - 2] * a(j, k + 1) - a(i, k + 1) * tau[j - k - 2];
                }
            }
        }
    }
    return pf;
}

// Determinant by LU with partial pivoting.
inline cplx determinant(ComplexMatrix a)
{
    if (!a.square()) {
        throw std::invalid_argument("determinant: matrix must be square");
    }
    const std::size_t n = a.rows();
    cplx det{1.0};
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > std::abs(a(p, k))) {
                p = i;
            }
        }
        if (a(p, k) == cplx{}) {
            return cplx{};
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(p, j), a(k, j));
            }
            det = -det;
        }
        det *= a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) {
                a(i, j) -= f * a(k, j);
            }
        }
    }
    return det;
}

// exp(2 pi i t), exact for multiples of a quarter turn.
inline cplx unit_phase(double turns)
{
    const double frac = turns - std::floor(turns);
    const double quarters = frac * 4.0;
    if (quarters == std::floor(quarters)) {
        switch (static_cast<int>(quarters)) {
        case 0:
            return {1.0, 0.0};
        case 1:
            return {0.0, 1.0};
        case 2:
            return {-1.0, 0.0};
        case 3:
            return {0.0, -1.0};
        default:
            break;
        }
    }
    const double angle = 2.0 * pi * frac;
    return {std::cos(angle), std::sin(angle)};
}

} // namespace theta_lab

#endif
