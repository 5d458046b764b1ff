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

// g-dimensional theta functions with real characteristics
//
//   theta[a;b](u|tau) = sum_{k in Z^g} exp{ pi i <tau(k+a),k+a> + 2 pi i <k+a,u+b> }
//
// evaluated as a truncated lattice sum over an ellipsoid that contains the
// Gaussian envelope of the terms, plus the exact characteristic bookkeeping
// (integer shifts, reflection, quasi-periodicity) and half-period tables.

#ifndef THETA_LAB_THETA_HPP
#define THETA_LAB_THETA_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "theta_lab/numerics.hpp"

namespace theta_lab
{

// Symmetric g x g complex matrix with positive-definite imaginary part.
class RiemannMatrix
{
public:
    // Builds from a full matrix. Entries (i,j) and (j,i) may differ by at most
    // sym_tol (absolute); the upper triangle is kept and mirrored.
    static RiemannMatrix from_full(const ComplexMatrix &m, double sym_tol = 0.0)
    {
        if (!m.square() || m.rows() == 0) {
            throw std::invalid_argument("RiemannMatrix: tau must be a non-empty square matrix");
        }
        const std::size_t g = m.rows();
        ComplexMatrix tau(g, g);
        for (std::size_t i = 0; i < g; ++i) {
            for (std::size_t j = i; j < g; ++j) {
                if (!is_finite(m(i, j)) || !is_finite(m(j, i))) {
                    throw std::invalid_argument("RiemannMatrix: tau has non-finite entries");
                }
                if (std::abs(m(i, j) - m(j, i)) > sym_tol) {
                    throw std::invalid_argument("RiemannMatrix: tau is not symmetric at (" + std::to_string(i) + ","
                                                + std::to_string(j) + ")");
                }
                tau(i, j) = m(i, j);
                tau(j, i) = m(i, j);
            }
        }
        return RiemannMatrix(std::move(tau));
    }

    static RiemannMatrix scalar(cplx t) { return from_full(ComplexMatrix(1, 1, t)); }

    std::size_t genus() const noexcept { return tau_.rows(); }
    const ComplexMatrix &tau() const noexcept { return tau_; }
    const RealMatrix &imag_part() const noexcept { return y_; }
    const RealMatrix &imag_cholesky() const noexcept { return chol_; }
    double lambda_min() const noexcept { return lambda_min_; }

    // n * tau, for the identities relating tau, 2 tau, n^2 tau, ...
    RiemannMatrix scaled(double n) const
    {
        if (!(n > 0.0)) {
            throw std::invalid_argument("RiemannMatrix::scaled: factor must be positive");
        }
        return RiemannMatrix(tau_ * cplx{n});
    }

private:
    explicit RiemannMatrix(ComplexMatrix tau) : tau_(std::move(tau))
    {
        const std::size_t g = tau_.rows();
        y_ = RealMatrix(g, g);
        for (std::size_t i = 0; i < g; ++i) {
            for (std::size_t j = 0; j < g; ++j) {
                y_(i, j) = tau_(i, j).imag();
            }
        }
        if (!cholesky(y_, chol_)) {
            throw std::domain_error("RiemannMatrix: Im(tau) is not positive definite");
        }
        lambda_min_ = smallest_eigenvalue_lower_bound(y_);
        if (!(lambda_min_ > 0.0)) {
            throw std::domain_error("RiemannMatrix: Im(tau) is numerically singular");
        }
    }

    ComplexMatrix tau_;
    RealMatrix y_;
    RealMatrix chol_;
    double lambda_min_ = 0.0;
};

struct Characteristic
{
    RealVector a;
    RealVector b;

    Characteristic() = default;
    Characteristic(RealVector a_, RealVector b_) : a(std::move(a_)), b(std::move(b_))
    {
        detail::require_same_dim(a.size(), b.size(), "Characteristic");
        if (!all_finite(std::span<const double>(a)) || !all_finite(std::span<const double>(b))) {
            throw std::invalid_argument("Characteristic: entries must be finite");
        }
    }

    static Characteristic zero(std::size_t g) { return {RealVector(g, 0.0), RealVector(g, 0.0)}; }

    std::size_t genus() const noexcept { return a.size(); }

    friend bool operator==(const Characteristic &, const Characteristic &) = default;
};

struct ThetaPoint
{
    ComplexVector u;

    ThetaPoint() = default;
    explicit ThetaPoint(ComplexVector u_) : u(std::move(u_))
    {
        if (u.empty()) {
            throw std::invalid_argument("ThetaPoint: dimension must be >= 1");
        }
        if (!all_finite(std::span<const cplx>(u))) {
            throw std::invalid_argument("ThetaPoint: entries must be finite");
        }
    }

    static ThetaPoint zero(std::size_t g) { return ThetaPoint(ComplexVector(g, cplx{})); }

    std::size_t genus() const noexcept { return u.size(); }

    friend bool operator==(const ThetaPoint &, const ThetaPoint &) = default;
};

// epsilon bounds the discarded tail, measured in units of the envelope peak
// exp(pi <Im u, Y^{-1} Im u>) (equal to 1 for real u).
struct EvalSettings
{
    double epsilon = 1e-12;
    double radius_margin = 0.0;

    void validate() const
    {
        if (!(epsilon > 0.0) || epsilon > 1e-3) {
            throw std::invalid_argument("EvalSettings: epsilon must lie in (0, 1e-3]");
        }
        if (!(radius_margin >= 0.0) || !std::isfinite(radius_margin)) {
            throw std::invalid_argument("EvalSettings: radius_margin must be finite and >= 0");
        }
    }
};

struct ThetaValue
{
    cplx value;
    double radius = 0.0;     // ellipsoid radius actually summed over
    std::size_t terms = 0;   // lattice points summed
    double log_envelope = 0; // pi <Im u, Y^{-1} Im u>
};

// Radius R with sum_{Q(x) > R^2} exp(-pi Q(x)) <= epsilon over any shifted
// lattice, Q(x) = <Yx,x>. Splitting exp(-pi Q) = exp(-pi Q/2)^2 and bounding
// the one-dimensional Gaussian sums by (peak + integral) gives
//   tail <= exp(-pi R^2 / 2) * (1 + sqrt(2 / lambda_min))^g.
inline double truncation_radius(std::size_t g, double lambda_min, double epsilon)
{
    const double per_axis = std::log1p(std::sqrt(2.0 / lambda_min));
    const double r2 = (2.0 / pi) * (static_cast<double>(g) * per_axis + std::log(1.0 / epsilon));
    return std::sqrt(std::max(0.0, r2));
}

namespace detail
{

inline void require_genus(std::size_t expected, std::size_t got, const char *what)
{
    if (expected != got) {
        throw std::invalid_argument(std::string(what) + ": genus mismatch (expected " + std::to_string(expected)
                                    + ", got " + std::to_string(got) + ")");
    }
}

inline RealVector imag_part(const ComplexVector &u)
{
    RealVector v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        v[i] = u[i].imag();
    }
    return v;
}

} // namespace detail

// The term magnitudes are exp(pi <Im u,Y^{-1}Im u>) * exp(-pi Q(k + a + Y^{-1} Im u)),
// so the ellipsoid is centred on the Gaussian peak. Terms are accumulated
// from the smallest to the largest.
inline ThetaValue theta_eval(const ThetaPoint &u, const RiemannMatrix &tau, const Characteristic &ch,
                             const EvalSettings &s = {})
{
    const std::size_t g = tau.genus();
    detail::require_genus(g, u.genus(), "theta_eval(u)");
    detail::require_genus(g, ch.genus(), "theta_eval(characteristic)");
    s.validate();

    const RealVector v = detail::imag_part(u.u);
    const RealVector w = cholesky_solve(tau.imag_cholesky(), v);
    RealVector center(g);
    for (std::size_t i = 0; i < g; ++i) {
        center[i] = ch.a[i] + w[i];
    }

    const double radius = truncation_radius(g, tau.lambda_min(), s.epsilon) + s.radius_margin;
    const LatticeShell shell = enumerate_lattice(center, tau.imag_part(), radius);

    ComplexVector shifted_u(g);
    for (std::size_t i = 0; i < g; ++i) {
        shifted_u[i] = u.u[i] + ch.b[i];
    }

    const cplx two_pi_i{0.0, 2.0 * pi};
    const cplx pi_i{0.0, pi};
    CompensatedAccumulator acc;
    RealVector x(g);
    for (auto it = shell.points.rbegin(); it != shell.points.rend(); ++it) {
        for (std::size_t i = 0; i < g; ++i) {
            x[i] = (*it)[i] + ch.a[i];
        }
        const cplx quad = quadratic_form(tau.tau(), std::span<const double>(x));
        const cplx lin = scalar_product(x, shifted_u);
        acc.add(std::exp(pi_i * quad + two_pi_i * lin));
    }

    ThetaValue out;
    out.value = acc.value();
    out.radius = radius;
    out.terms = shell.points.size();
    out.log_envelope = pi * scalar_product(v, w);
    return out;
}

inline cplx theta(const ThetaPoint &u, const RiemannMatrix &tau, const Characteristic &ch, const EvalSettings &s = {})
{
    return theta_eval(u, tau, ch, s).value;
}

struct ShiftedCharacteristic
{
    Characteristic ch;
    cplx factor; // theta at ch == factor * theta at the original
};

inline ShiftedCharacteristic shift_characteristic(const Characteristic &ch, const IntVector &m, const IntVector &n)
{
    const std::size_t g = ch.genus();
    detail::require_genus(g, m.size(), "shift_characteristic(m)");
    detail::require_genus(g, n.size(), "shift_characteristic(n)");
    RealVector a = ch.a;
    RealVector b = ch.b;
    double turns = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        a[i] += m[i];
        b[i] += n[i];
        turns += ch.a[i] * n[i];
    }
    return {Characteristic(std::move(a), std::move(b)), unit_phase(turns)};
}

struct ReflectedArgument
{
    Characteristic ch;
    ThetaPoint u;
};

inline ReflectedArgument reflect(const Characteristic &ch, const ThetaPoint &u)
{
    detail::require_genus(ch.genus(), u.genus(), "reflect");
    RealVector a = ch.a;
    RealVector b = ch.b;
    ComplexVector z = u.u;
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = -a[i];
        b[i] = -b[i];
        z[i] = -z[i];
    }
    return {Characteristic(std::move(a), std::move(b)), ThetaPoint(std::move(z))};
}

struct QuasiShift
{
    Characteristic ch;
    ThetaPoint u;
    cplx prefactor;
};

// theta[a;b](u + tau a' + b') = prefactor * theta[a+a';b+b'](u)
inline QuasiShift quasi_shift(const Characteristic &ch, const ThetaPoint &u, const RiemannMatrix &tau,
                              const RealVector &a_shift, const RealVector &b_shift)
{
    const std::size_t g = tau.genus();
    detail::require_genus(g, ch.genus(), "quasi_shift(characteristic)");
    detail::require_genus(g, u.genus(), "quasi_shift(u)");
    detail::require_genus(g, a_shift.size(), "quasi_shift(a')");
    detail::require_genus(g, b_shift.size(), "quasi_shift(b')");

    const cplx quad = quadratic_form(tau.tau(), std::span<const double>(a_shift));
    ComplexVector arg(g);
    RealVector a = ch.a;
    RealVector b = ch.b;
    for (std::size_t i = 0; i < g; ++i) {
        arg[i] = u.u[i] + ch.b[i] + b_shift[i];
        a[i] += a_shift[i];
        b[i] += b_shift[i];
    }
    const cplx lin = scalar_product(a_shift, arg);
    const cplx prefactor = std::exp(cplx{0.0, -pi} * quad + cplx{0.0, -2.0 * pi} * lin);
    return {Characteristic(std::move(a), std::move(b)), u, prefactor};
}

// u + tau a' + b'
inline ThetaPoint quasi_shifted_argument(const ThetaPoint &u, const RiemannMatrix &tau, const RealVector &a_shift,
                                         const RealVector &b_shift)
{
    ComplexVector z = mat_vec(tau.tau(), a_shift);
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] += u.u[i] + b_shift[i];
    }
    return ThetaPoint(std::move(z));
}

// Representative with entries in [0,1); original == factor * reduced.
inline ShiftedCharacteristic reduce_characteristic(const Characteristic &ch)
{
    const std::size_t g = ch.genus();
    RealVector a(g);
    RealVector b(g);
    double turns = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        const double fa = std::floor(ch.a[i]);
        const double fb = std::floor(ch.b[i]);
        a[i] = ch.a[i] - fa;
        b[i] = ch.b[i] - fb;
        turns += a[i] * fb;
    }
    return {Characteristic(std::move(a), std::move(b)), unit_phase(turns)};
}

enum class Parity
{
    even,
    odd
};

inline const char *to_string(Parity p) noexcept { return p == Parity::even ? "even" : "odd"; }

// Characteristic with all entries in {0, 1/2}, stored as bit masks
// (bit g-1-i set <=> entry i is 1/2, so integer order is lexicographic).
// Supports g <= 31.
class HalfPeriod
{
public:
    HalfPeriod(std::size_t g, std::uint32_t a_bits, std::uint32_t b_bits) : g_(g), a_(a_bits), b_(b_bits)
    {
        if (g == 0 || g > 31) {
            throw std::invalid_argument("HalfPeriod: genus must be in [1, 31]");
        }
        const std::uint32_t mask = (std::uint32_t{1} << g) - 1;
        if ((a_bits & ~mask) != 0 || (b_bits & ~mask) != 0) {
            throw std::invalid_argument("HalfPeriod: bit pattern exceeds genus");
        }
    }

    static HalfPeriod from_characteristic(const Characteristic &ch)
    {
        const std::size_t g = ch.genus();
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        for (std::size_t i = 0; i < g; ++i) {
            a |= bit(ch.a[i], g - 1 - i);
            b |= bit(ch.b[i], g - 1 - i);
        }
        return HalfPeriod(g, a, b);
    }

    std::size_t genus() const noexcept { return g_; }
    std::uint32_t a_bits() const noexcept { return a_; }
    std::uint32_t b_bits() const noexcept { return b_; }

    // parity of 4<a,b>
    Parity parity() const noexcept
    {
        return (std::popcount(a_ & b_) % 2 == 0) ? Parity::even : Parity::odd;
    }

    Characteristic characteristic() const
    {
        RealVector a(g_);
        RealVector b(g_);
        for (std::size_t i = 0; i < g_; ++i) {
            a[i] = ((a_ >> (g_ - 1 - i)) & 1U) ? 0.5 : 0.0;
            b[i] = ((b_ >> (g_ - 1 - i)) & 1U) ? 0.5 : 0.0;
        }
        return {std::move(a), std::move(b)};
    }

    friend bool operator==(const HalfPeriod &, const HalfPeriod &) = default;

private:
    static std::uint32_t bit(double x, std::size_t i)
    {
        if (x == 0.0) {
            return 0;
        }
        if (x == 0.5) {
            return std::uint32_t{1} << i;
        }
        throw std::invalid_argument("HalfPeriod: entries must be exactly 0 or 1/2");
    }

    std::size_t g_;
    std::uint32_t a_;
    std::uint32_t b_;
};

inline Parity parity(const HalfPeriod &hp) noexcept { return hp.parity(); }

inline Parity parity(const Characteristic &ch) { return HalfPeriod::from_characteristic(ch).parity(); }

struct HalfPeriodTable
{
    std::vector<HalfPeriod> even;
    std::vector<HalfPeriod> odd;
};

// All 4^g half-periods, a-major then b, split by parity.
inline HalfPeriodTable enumerate_half_periods(std::size_t g)
{
    if (g == 0 || g > 15) {
        throw std::invalid_argument("enumerate_half_periods: genus must be in [1, 15]");
    }
    HalfPeriodTable table;
    const std::uint32_t count = std::uint32_t{1} << g;
    for (std::uint32_t a = 0; a < count; ++a) {
        for (std::uint32_t b = 0; b < count; ++b) {
            HalfPeriod hp(g, a, b);
            (hp.parity() == Parity::even ? table.even : table.odd).push_back(hp);
        }
    }
    return table;
}

} // namespace theta_lab

#endif
