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

// Residual evaluators for the theta identity families: linear (tau vs n^2 tau),
// Schroter binary (n1 tau, n2 tau), standard/inverse/shifted binary (tau vs
// 2 tau), quartic Jacobi and Riemann identities in Whittaker-Watson and Jacobi
// dual variables, the naive Weierstrass relations, the odd-theta product
// decomposition and the vanishing Weierstrass Pfaffian.
//
// Each evaluator computes both sides summand by summand. The reported residual
// is |lhs - rhs| / max(1, scale) with scale the largest |summand| on either
// side.

#ifndef THETA_LAB_IDENTITIES_HPP
#define THETA_LAB_IDENTITIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "theta_lab/duals.hpp"
#include "theta_lab/numerics.hpp"
#include "theta_lab/theta.hpp"

namespace theta_lab
{

// Representative of Z^g / n Z^g with entries in {0, ..., n-1}.
struct CosetVector
{
    IntVector v;
    int modulus = 1;

    friend bool operator==(const CosetVector &, const CosetVector &) = default;
};

// All n^g representatives in lexicographic order.
inline std::vector<CosetVector> coset_enumerate(std::size_t g, int n)
{
    if (g == 0 || n < 1) {
        throw std::invalid_argument("coset_enumerate: need g >= 1 and n >= 1");
    }
    std::vector<CosetVector> out;
    IntVector v(g, 0);
    while (true) {
        out.push_back({v, n});
        std::size_t i = g;
        while (i > 0) {
            --i;
            if (++v[i] < n) {
                break;
            }
            v[i] = 0;
            if (i == 0) {
                return out;
            }
        }
    }
}

// sum_{q mod 2} (-1)^{<p,q>} in exact integer arithmetic.
inline long long sign_character_sum(const IntVector &p)
{
    long long total = 0;
    for (const auto &q : coset_enumerate(p.size(), 2)) {
        const long long dot = scalar_product(p, q.v);
        total += (dot % 2 == 0) ? 1 : -1;
    }
    return total;
}

// sum_{q mod n} exp(sign * 2 pi i <p,q> / n)
inline cplx root_of_unity_sum(const IntVector &p, int n, int sign)
{
    CompensatedAccumulator acc;
    for (const auto &q : coset_enumerate(p.size(), n)) {
        long long dot = scalar_product(p, q.v);
        dot = ((dot % n) + n) % n;
        acc.add(unit_phase(sign * static_cast<double>(dot) / n));
    }
    return acc.value();
}

// Largest deviation of the root-of-unity sums from n^g delta_{p,0} over all
// p mod n and both signs.
inline double orthogonality_deviation(std::size_t g, int n)
{
    double worst = 0.0;
    const double full = std::pow(static_cast<double>(n), static_cast<double>(g));
    for (const auto &p : coset_enumerate(g, n)) {
        const bool zero = std::all_of(p.v.begin(), p.v.end(), [](int e) { return e == 0; });
        const cplx expected = zero ? cplx{full} : cplx{};
        for (int sign : {-1, 1}) {
            worst = std::max(worst, std::abs(root_of_unity_sum(p.v, n, sign) - expected));
        }
    }
    return worst;
}

// For n = 2 the summands are +-1 and the check is exact; otherwise the sums
// must match to 1e-12.
inline bool orthogonality_check(std::size_t g, int n)
{
    if (n == 2) {
        const long long full = 1LL << g;
        for (const auto &p : coset_enumerate(g, 2)) {
            const bool zero = std::all_of(p.v.begin(), p.v.end(), [](int e) { return e == 0; });
            if (sign_character_sum(p.v) != (zero ? full : 0)) {
                return false;
            }
        }
        return true;
    }
    return orthogonality_deviation(g, n) < 1e-12;
}

struct IdentityInstance
{
    std::size_t g = 0;
    RiemannMatrix tau;
    std::vector<ThetaPoint> points;
    std::vector<Characteristic> chars;
    IntVector extra;
    EvalSettings eval;
    std::string digest;
};

struct ResidualReport
{
    std::string identity_name;
    cplx lhs;
    cplx rhs;
    double scale = 0.0;
    double residual = 0.0;
    std::string instance_digest;
};

namespace detail
{

// One side of an identity: compensated running sum plus the largest summand.
class SideSum
{
public:
    void add(const cplx &term)
    {
        acc_.add(term);
        largest_ = std::max(largest_, std::abs(term));
    }
    cplx value() const { return acc_.value(); }
    double largest() const { return largest_; }

private:
    CompensatedAccumulator acc_;
    double largest_ = 0.0;
};

inline double normalized_residual(const cplx &lhs, const cplx &rhs, double scale)
{
    return std::abs(lhs - rhs) / std::max(1.0, scale);
}

inline ResidualReport make_report(std::string name, const SideSum &lhs, const SideSum &rhs, const std::string &digest)
{
    ResidualReport r;
    r.identity_name = std::move(name);
    r.lhs = lhs.value();
    r.rhs = rhs.value();
    r.scale = std::max(lhs.largest(), rhs.largest());
    r.residual = normalized_residual(r.lhs, r.rhs, r.scale);
    if (!std::isfinite(r.residual)) {
        r.residual = std::numeric_limits<double>::infinity();
    }
    r.instance_digest = digest;
    return r;
}

inline void require_arity(const IdentityInstance &inst, std::size_t points, std::size_t chars, std::size_t extra,
                          const char *what)
{
    if (inst.points.size() != points || inst.chars.size() != chars || inst.extra.size() < extra) {
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(points) + " point(s), "
                                    + std::to_string(chars) + " characteristic(s) and " + std::to_string(extra)
                                    + " integer parameter(s)");
    }
    for (std::size_t i = 0; i < extra; ++i) {
        if (inst.extra[i] < 1) {
            throw std::invalid_argument(std::string(what) + ": integer parameters must be >= 1");
        }
    }
    for (const auto &p : inst.points) {
        require_genus(inst.g, p.genus(), what);
    }
    for (const auto &c : inst.chars) {
        require_genus(inst.g, c.genus(), what);
    }
    require_genus(inst.g, inst.tau.genus(), what);
}

// Linear combinations used to build characteristics and arguments.
template <typename T>
std::vector<T> lin(double s1, const std::vector<T> &x1, double s2, const std::vector<T> &x2)
{
    require_same_dim(x1.size(), x2.size(), "lin");
    std::vector<T> out(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) {
        out[i] = s1 * x1[i] + s2 * x2[i];
    }
    return out;
}

template <typename T>
std::vector<T> scaled(double s, const std::vector<T> &x)
{
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = s * x[i];
    }
    return out;
}

// x + coset / divisor
inline RealVector plus_coset(const RealVector &x, const IntVector &p, double divisor)
{
    require_same_dim(x.size(), p.size(), "plus_coset");
    RealVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] + p[i] / divisor;
    }
    return out;
}

inline RealVector to_real(const IntVector &p)
{
    return RealVector(p.begin(), p.end());
}

inline cplx th(const RealVector &a, const RealVector &b, const ComplexVector &u, const RiemannMatrix &tau,
               const EvalSettings &s)
{
    return theta(ThetaPoint(u), tau, Characteristic(a, b), s);
}

// exp(-pi i <x, q>) = unit_phase(-<x,q>/2)
inline cplx half_phase(const RealVector &x, const IntVector &q)
{
    return unit_phase(-0.5 * scalar_product(x, to_real(q)));
}

inline int int_dot(const IntVector &p, const IntVector &q)
{
    return scalar_product(p, q);
}

struct QuarticData
{
    Quadruple<double> a;
    Quadruple<double> b;
    Quadruple<cplx> u;
};

inline QuarticData quartic_from(const IdentityInstance &inst)
{
    QuarticData d;
    for (std::size_t k = 0; k < 4; ++k) {
        d.a[k] = inst.chars[k].a;
        d.b[k] = inst.chars[k].b;
        d.u[k] = inst.points[k].u;
    }
    return d;
}

inline QuarticData ww_of(const QuarticData &d) { return {ww_dual(d.a), ww_dual(d.b), ww_dual(d.u)}; }
inline QuarticData jacobi_of(const QuarticData &d) { return {jacobi_dual(d.a), jacobi_dual(d.b), jacobi_dual(d.u)}; }

// sum_q prod_k exp(-pi i <a_k,q>) theta[a_k; b_k + q/2](u_k)
inline void add_b_coset_side(SideSum &side, const QuarticData &d, const RiemannMatrix &tau, const EvalSettings &s)
{
    const std::size_t g = tau.genus();
    for (const auto &q : coset_enumerate(g, 2)) {
        cplx term{1.0};
        for (std::size_t k = 0; k < 4; ++k) {
            term *= half_phase(d.a[k], q.v) * th(d.a[k], plus_coset(d.b[k], q.v, 2.0), d.u[k], tau, s);
        }
        side.add(term);
    }
}

// sum_p prod_k theta[a_k + p/2; b_k](u_k)
inline void add_a_coset_side(SideSum &side, const QuarticData &d, const RiemannMatrix &tau, const EvalSettings &s)
{
    const std::size_t g = tau.genus();
    for (const auto &p : coset_enumerate(g, 2)) {
        cplx term{1.0};
        for (std::size_t k = 0; k < 4; ++k) {
            term *= th(plus_coset(d.a[k], p.v, 2.0), d.b[k], d.u[k], tau, s);
        }
        side.add(term);
    }
}

inline cplx quartic_product(const QuarticData &d, const RiemannMatrix &tau, const EvalSettings &s)
{
    cplx term{1.0};
    for (std::size_t k = 0; k < 4; ++k) {
        term *= th(d.a[k], d.b[k], d.u[k], tau, s);
    }
    return term;
}

enum class PairPhase
{
    with_pq,    // weight exp(-pi i <p,q>)
    without_pq, // weight 1
    naive       // weight 1 - exp(-pi i <p,q>)
};

// 2^{-g} sum_{p,q} weight(p,q) prod_k exp(-pi i <a_k,q>) theta[a_k + p/2; b_k + q/2](u_k)
inline void add_double_coset_side(SideSum &side, const QuarticData &d, const RiemannMatrix &tau,
                                  const EvalSettings &s, PairPhase phase)
{
    const std::size_t g = tau.genus();
    const double norm = std::ldexp(1.0, -static_cast<int>(g));
    const auto cosets = coset_enumerate(g, 2);
    for (const auto &p : cosets) {
        for (const auto &q : cosets) {
            const bool odd = int_dot(p.v, q.v) % 2 != 0;
            cplx weight{1.0};
            if (phase == PairPhase::with_pq) {
                weight = odd ? cplx{-1.0} : cplx{1.0};
            } else if (phase == PairPhase::naive) {
                if (!odd) {
                    continue;
                }
                weight = cplx{2.0};
            }
            cplx term = norm * weight;
            for (std::size_t k = 0; k < 4; ++k) {
                term *= half_phase(d.a[k], q.v)
                        * th(plus_coset(d.a[k], p.v, 2.0), plus_coset(d.b[k], q.v, 2.0), d.u[k], tau, s);
            }
            side.add(term);
        }
    }
}

} // namespace detail

enum class LinearKind
{
    to_scaled,   // theta(u|tau) as a coset sum of theta(nu|n^2 tau)
    from_scaled  // theta(nu|n^2 tau) as a coset sum of theta(u|tau)
};

// One point, one characteristic, extra = {n}.
inline ResidualReport linear_identity_residual(LinearKind kind, const IdentityInstance &inst)
{
    detail::require_arity(inst, 1, 1, 1, "linear_identity_residual");
    const int n = inst.extra[0];
    const double nd = n;
    const auto &a = inst.chars[0].a;
    const auto &b = inst.chars[0].b;
    const auto &u = inst.points[0].u;
    const RiemannMatrix big = inst.tau.scaled(nd * nd);
    const auto nu = detail::scaled(nd, u);
    detail::SideSum lhs;
    detail::SideSum rhs;
    if (kind == LinearKind::to_scaled) {
        lhs.add(detail::th(a, b, u, inst.tau, inst.eval));
        for (const auto &p : coset_enumerate(inst.g, n)) {
            const RealVector ap = detail::scaled(1.0 / nd, detail::plus_coset(a, p.v, 1.0));
            rhs.add(detail::th(ap, detail::scaled(nd, b), nu, big, inst.eval));
        }
        return detail::make_report("linear_a", lhs, rhs, inst.digest);
    }
    lhs.add(detail::th(a, b, nu, big, inst.eval));
    const double norm = std::pow(nd, -static_cast<double>(inst.g));
    for (const auto &q : coset_enumerate(inst.g, n)) {
        const RealVector bq = detail::scaled(1.0 / nd, detail::plus_coset(b, q.v, 1.0));
        const cplx phase = unit_phase(-scalar_product(a, detail::to_real(q.v)));
        rhs.add(norm * phase * detail::th(detail::scaled(nd, a), bq, u, inst.tau, inst.eval));
    }
    return detail::make_report("linear_b", lhs, rhs, inst.digest);
}

// theta[a1;b1](u1|n1 tau) theta[a2;b2](u2|n2 tau) expanded over p mod (n1+n2)
// into thetas with Riemann matrices (n1+n2) tau and n1 n2 (n1+n2) tau.
// Two points, two characteristics, extra = {n1, n2}.
inline ResidualReport schroter_residual(const IdentityInstance &inst)
{
    detail::require_arity(inst, 2, 2, 2, "schroter_residual");
    const int n1 = inst.extra[0];
    const int n2 = inst.extra[1];
    const int m = n1 + n2;
    const auto &c1 = inst.chars[0];
    const auto &c2 = inst.chars[1];
    const auto &u1 = inst.points[0].u;
    const auto &u2 = inst.points[1].u;

    detail::SideSum lhs;
    detail::SideSum rhs;
    lhs.add(detail::th(c1.a, c1.b, u1, inst.tau.scaled(n1), inst.eval)
            * detail::th(c2.a, c2.b, u2, inst.tau.scaled(n2), inst.eval));

    const RiemannMatrix tau_sum = inst.tau.scaled(m);
    const RiemannMatrix tau_prod = inst.tau.scaled(static_cast<double>(n1) * n2 * m);
    const auto u_sum = detail::lin(1.0, u1, 1.0, u2);
    const auto u_diff = detail::lin(static_cast<double>(n2), u1, -static_cast<double>(n1), u2);
    const auto b_sum = detail::lin(1.0, c1.b, 1.0, c2.b);
    const auto b_diff = detail::lin(static_cast<double>(n2), c1.b, -static_cast<double>(n1), c2.b);
    const auto a_sum = detail::lin(static_cast<double>(n1), c1.a, static_cast<double>(n2), c2.a);
    const auto a_diff = detail::lin(1.0, c1.a, -1.0, c2.a);
    for (const auto &p : coset_enumerate(inst.g, m)) {
        RealVector first(inst.g);
        RealVector second(inst.g);
        for (std::size_t i = 0; i < inst.g; ++i) {
            first[i] = (a_sum[i] + n1 * p.v[i]) / m;
            second[i] = (a_diff[i] + p.v[i]) / m;
        }
        rhs.add(detail::th(first, b_sum, u_sum, tau_sum, inst.eval)
                * detail::th(second, b_diff, u_diff, tau_prod, inst.eval));
    }
    return detail::make_report("schroter", lhs, rhs, inst.digest);
}

enum class BinaryDirection
{
    forward, // product at tau -> 2^g products at 2 tau
    inverse, // product at 2 tau -> 2^g products at tau
    shifted  // forward with b_k -> b_k + q/2, q = extra
};

namespace detail
{

// sum_p weight(p) theta[(a1+a2+p)/2; b1+b2](u1+u2|2tau) theta[(a1-a2+p)/2; b1-b2](u1-u2|2tau)
// with weight exp(pi i <p,q>) (q empty: weight 1).
inline void add_binary_forward_rhs(SideSum &rhs, const Characteristic &c1, const Characteristic &c2,
                                   const ComplexVector &u1, const ComplexVector &u2, const RiemannMatrix &tau,
                                   const EvalSettings &s, const IntVector &q = {})
{
    const std::size_t g = tau.genus();
    const RiemannMatrix tau2 = tau.scaled(2.0);
    const auto a_sum = lin(1.0, c1.a, 1.0, c2.a);
    const auto a_diff = lin(1.0, c1.a, -1.0, c2.a);
    const auto b_sum = lin(1.0, c1.b, 1.0, c2.b);
    const auto b_diff = lin(1.0, c1.b, -1.0, c2.b);
    const auto u_sum = lin(1.0, u1, 1.0, u2);
    const auto u_diff = lin(1.0, u1, -1.0, u2);
    for (const auto &p : coset_enumerate(g, 2)) {
        cplx weight{1.0};
        if (!q.empty()) {
            weight = (int_dot(p.v, q) % 2 == 0) ? cplx{1.0} : cplx{-1.0};
        }
        rhs.add(weight * th(scaled(0.5, plus_coset(a_sum, p.v, 1.0)), b_sum, u_sum, tau2, s)
                * th(scaled(0.5, plus_coset(a_diff, p.v, 1.0)), b_diff, u_diff, tau2, s));
    }
}

} // namespace detail

// Two points, two characteristics; the shifted variant takes q in extra
// (g entries, each 0 or 1).
inline ResidualReport binary_residual(BinaryDirection direction, const IdentityInstance &inst)
{
    const std::size_t need_extra = direction == BinaryDirection::shifted ? inst.g : 0;
    if (direction == BinaryDirection::shifted) {
        detail::require_arity(inst, 2, 2, 0, "binary_residual");
        if (inst.extra.size() != inst.g
            || std::any_of(inst.extra.begin(), inst.extra.end(), [](int e) { return e != 0 && e != 1; })) {
            throw std::invalid_argument("binary_residual: shifted variant needs q in {0,1}^g as extra");
        }
    } else {
        detail::require_arity(inst, 2, 2, need_extra, "binary_residual");
    }
    const auto &c1 = inst.chars[0];
    const auto &c2 = inst.chars[1];
    const auto &u1 = inst.points[0].u;
    const auto &u2 = inst.points[1].u;
    detail::SideSum lhs;
    detail::SideSum rhs;

    switch (direction) {
    case BinaryDirection::forward:
        lhs.add(detail::th(c1.a, c1.b, u1, inst.tau, inst.eval) * detail::th(c2.a, c2.b, u2, inst.tau, inst.eval));
        detail::add_binary_forward_rhs(rhs, c1, c2, u1, u2, inst.tau, inst.eval);
        return detail::make_report("binary_forward", lhs, rhs, inst.digest);
    case BinaryDirection::shifted: {
        const IntVector &q = inst.extra;
        const cplx phase = detail::half_phase(detail::lin(1.0, c1.a, 1.0, c2.a), q);
        lhs.add(phase * detail::th(c1.a, detail::plus_coset(c1.b, q, 2.0), u1, inst.tau, inst.eval)
                * detail::th(c2.a, detail::plus_coset(c2.b, q, 2.0), u2, inst.tau, inst.eval));
        detail::add_binary_forward_rhs(rhs, c1, c2, u1, u2, inst.tau, inst.eval, q);
        return detail::make_report("binary_shifted", lhs, rhs, inst.digest);
    }
    case BinaryDirection::inverse: {
        const RiemannMatrix tau2 = inst.tau.scaled(2.0);
        lhs.add(detail::th(c1.a, c1.b, detail::lin(1.0, u1, 1.0, u2), tau2, inst.eval)
                * detail::th(c2.a, c2.b, detail::lin(1.0, u1, -1.0, u2), tau2, inst.eval));
        const double norm = std::ldexp(1.0, -static_cast<int>(inst.g));
        const auto a_sum = detail::lin(1.0, c1.a, 1.0, c2.a);
        const auto a_diff = detail::lin(1.0, c1.a, -1.0, c2.a);
        const auto b_sum = detail::lin(1.0, c1.b, 1.0, c2.b);
        const auto b_diff = detail::lin(1.0, c1.b, -1.0, c2.b);
        for (const auto &p : coset_enumerate(inst.g, 2)) {
            const cplx phase = unit_phase(-scalar_product(c1.a, detail::to_real(p.v)));
            rhs.add(norm * phase
                    * detail::th(a_sum, detail::scaled(0.5, detail::plus_coset(b_sum, p.v, 1.0)), u1, inst.tau,
                                 inst.eval)
                    * detail::th(a_diff, detail::scaled(0.5, detail::plus_coset(b_diff, p.v, 1.0)), u2, inst.tau,
                                 inst.eval));
        }
        return detail::make_report("binary_inverse", lhs, rhs, inst.digest);
    }
    }
    throw std::logic_error("binary_residual: unknown direction");
}

// Inverse binary relation with every tau-product on its right side replaced
// by its forward binary expansion at 2 tau. Agrees with binary_residual(inverse)
// when both directions hold.
inline ResidualReport binary_inverse_via_forward(const IdentityInstance &inst)
{
    detail::require_arity(inst, 2, 2, 0, "binary_inverse_via_forward");
    const auto &c1 = inst.chars[0];
    const auto &c2 = inst.chars[1];
    const auto &u1 = inst.points[0].u;
    const auto &u2 = inst.points[1].u;
    const RiemannMatrix tau2 = inst.tau.scaled(2.0);
    detail::SideSum lhs;
    lhs.add(detail::th(c1.a, c1.b, detail::lin(1.0, u1, 1.0, u2), tau2, inst.eval)
            * detail::th(c2.a, c2.b, detail::lin(1.0, u1, -1.0, u2), tau2, inst.eval));
    const double norm = std::ldexp(1.0, -static_cast<int>(inst.g));
    const auto a_sum = detail::lin(1.0, c1.a, 1.0, c2.a);
    const auto a_diff = detail::lin(1.0, c1.a, -1.0, c2.a);
    const auto b_sum = detail::lin(1.0, c1.b, 1.0, c2.b);
    const auto b_diff = detail::lin(1.0, c1.b, -1.0, c2.b);
    detail::SideSum rhs;
    for (const auto &p : coset_enumerate(inst.g, 2)) {
        const cplx phase = unit_phase(-scalar_product(c1.a, detail::to_real(p.v)));
        const Characteristic first(a_sum, detail::scaled(0.5, detail::plus_coset(b_sum, p.v, 1.0)));
        const Characteristic second(a_diff, detail::scaled(0.5, detail::plus_coset(b_diff, p.v, 1.0)));
        detail::SideSum expansion;
        detail::add_binary_forward_rhs(expansion, first, second, u1, u2, inst.tau, inst.eval);
        rhs.add(norm * phase * expansion.value());
    }
    return detail::make_report("binary_inverse_via_forward", lhs, rhs, inst.digest);
}

enum class JacobiKind
{
    first,        // b-coset sums, Whittaker-Watson duals
    second,       // a-coset sums, Whittaker-Watson duals
    tilde_first,  // b-coset sums, Jacobi duals
    tilde_second  // a-coset sums, Jacobi duals
};

inline const char *to_string(JacobiKind k) noexcept
{
    switch (k) {
    case JacobiKind::first:
        return "jacobi_first";
    case JacobiKind::second:
        return "jacobi_second";
    case JacobiKind::tilde_first:
        return "jacobi_tilde_first";
    case JacobiKind::tilde_second:
        return "jacobi_tilde_second";
    }
    return "jacobi";
}

// Four points, four characteristics.
inline ResidualReport jacobi_residual(JacobiKind kind, const IdentityInstance &inst)
{
    detail::require_arity(inst, 4, 4, 0, "jacobi_residual");
    const auto orig = detail::quartic_from(inst);
    const bool tilde = kind == JacobiKind::tilde_first || kind == JacobiKind::tilde_second;
    const auto dual = tilde ? detail::jacobi_of(orig) : detail::ww_of(orig);
    detail::SideSum lhs;
    detail::SideSum rhs;
    if (kind == JacobiKind::first || kind == JacobiKind::tilde_first) {
        detail::add_b_coset_side(lhs, orig, inst.tau, inst.eval);
        detail::add_b_coset_side(rhs, dual, inst.tau, inst.eval);
    } else {
        detail::add_a_coset_side(lhs, orig, inst.tau, inst.eval);
        detail::add_a_coset_side(rhs, dual, inst.tau, inst.eval);
    }
    return detail::make_report(to_string(kind), lhs, rhs, inst.digest);
}

enum class RiemannKind
{
    ww,            // prod in WW duals = double coset sum in originals
    ww_inverse,    // prod in originals = double coset sum in WW duals
    tilde,         // prod in Jacobi duals = double coset sum in originals (no <p,q> phase)
    tilde_inverse  // prod in originals = double coset sum in Jacobi duals (no <p,q> phase)
};

inline const char *to_string(RiemannKind k) noexcept
{
    switch (k) {
    case RiemannKind::ww:
        return "riemann_ww";
    case RiemannKind::ww_inverse:
        return "riemann_ww_inverse";
    case RiemannKind::tilde:
        return "riemann_tilde";
    case RiemannKind::tilde_inverse:
        return "riemann_tilde_inverse";
    }
    return "riemann";
}

inline ResidualReport riemann_residual(RiemannKind kind, const IdentityInstance &inst)
{
    detail::require_arity(inst, 4, 4, 0, "riemann_residual");
    const auto orig = detail::quartic_from(inst);
    detail::SideSum lhs;
    detail::SideSum rhs;
    switch (kind) {
    case RiemannKind::ww:
        lhs.add(detail::quartic_product(detail::ww_of(orig), inst.tau, inst.eval));
        detail::add_double_coset_side(rhs, orig, inst.tau, inst.eval, detail::PairPhase::with_pq);
        break;
    case RiemannKind::ww_inverse:
        lhs.add(detail::quartic_product(orig, inst.tau, inst.eval));
        detail::add_double_coset_side(rhs, detail::ww_of(orig), inst.tau, inst.eval, detail::PairPhase::with_pq);
        break;
    case RiemannKind::tilde:
        lhs.add(detail::quartic_product(detail::jacobi_of(orig), inst.tau, inst.eval));
        detail::add_double_coset_side(rhs, orig, inst.tau, inst.eval, detail::PairPhase::without_pq);
        break;
    case RiemannKind::tilde_inverse:
        lhs.add(detail::quartic_product(orig, inst.tau, inst.eval));
        detail::add_double_coset_side(rhs, detail::jacobi_of(orig), inst.tau, inst.eval,
                                      detail::PairPhase::without_pq);
        break;
    }
    return detail::make_report(to_string(kind), lhs, rhs, inst.digest);
}

enum class NaiveWeierstrassKind
{
    general, // any g: 2^{-g} sum over <p,q> odd
    onedim   // g = 1: single product on the right
};

// prod theta(u_k) - prod theta(u'_k) expressed through the Jacobi duals.
inline ResidualReport naive_weierstrass_residual(NaiveWeierstrassKind kind, const IdentityInstance &inst)
{
    detail::require_arity(inst, 4, 4, 0, "naive_weierstrass_residual");
    if (kind == NaiveWeierstrassKind::onedim && inst.g != 1) {
        throw std::invalid_argument("naive_weierstrass_residual: the one-dimensional form requires g = 1");
    }
    const auto orig = detail::quartic_from(inst);
    const auto tilde = detail::jacobi_of(orig);
    detail::SideSum lhs;
    detail::SideSum rhs;
    lhs.add(detail::quartic_product(orig, inst.tau, inst.eval));
    lhs.add(-detail::quartic_product(detail::ww_of(orig), inst.tau, inst.eval));
    if (kind == NaiveWeierstrassKind::general) {
        detail::add_double_coset_side(rhs, tilde, inst.tau, inst.eval, detail::PairPhase::naive);
        return detail::make_report("weierstrass_naive", lhs, rhs, inst.digest);
    }
    detail::QuarticData shifted = tilde;
    for (std::size_t k = 0; k < 4; ++k) {
        shifted.a[k][0] += 0.5;
        shifted.b[k][0] += 0.5;
    }
    rhs.add(unit_phase(-orig.a[0][0]) * detail::quartic_product(shifted, inst.tau, inst.eval));
    return detail::make_report("weierstrass_naive_onedim", lhs, rhs, inst.digest);
}

// theta_1 = -theta[1/2;1/2] at g = 1
inline cplx theta1(cplx w, const RiemannMatrix &tau, const EvalSettings &s)
{
    return -detail::th({0.5}, {0.5}, {w}, tau, s);
}

// Three-term addition formula for theta_1 at w1..w4 (g = 1, four points).
inline ResidualReport weierstrass_sigma_residual(const IdentityInstance &inst)
{
    if (inst.g != 1 || inst.points.size() != 4) {
        throw std::invalid_argument("weierstrass_sigma_residual: needs g = 1 and four points w1..w4");
    }
    const cplx w1 = inst.points[0].u[0];
    const cplx w2 = inst.points[1].u[0];
    const cplx w3 = inst.points[2].u[0];
    const cplx w4 = inst.points[3].u[0];
    const auto t = [&](cplx w) { return theta1(w, inst.tau, inst.eval); };
    detail::SideSum lhs;
    detail::SideSum rhs;
    lhs.add(t(w1 + w2) * t(w1 - w2) * t(w3 + w4) * t(w3 - w4));
    lhs.add(-(t(w3 - w2) * t(w3 + w2) * t(w1 - w4) * t(w1 + w4)));
    rhs.add(t(w1 + w3) * t(w1 - w3) * t(w2 + w4) * t(w2 - w4));
    return detail::make_report("weierstrass_sigma", lhs, rhs, inst.digest);
}

// theta(w1+w2) theta(w1-w2) = sum_k { A_k(w1) B_k(w2) - B_k(w1) A_k(w2) } for an
// odd half-period [a;b], with A_k(w) = c_k theta[a + p_k/2; 0](2w|2tau) and
// B_k(w) = theta[p_k/2; 0](2w|2tau). The 2^g terms of the binary expansion pair
// up as p <-> p + 2a (mod 2) with opposite coefficients.
struct LemmaTerm
{
    cplx coefficient;
    Characteristic a_char;
    Characteristic b_char;
};

inline std::vector<LemmaTerm> lemma_decomposition(const HalfPeriod &hp)
{
    if (hp.parity() != Parity::odd) {
        throw std::invalid_argument("lemma_decomposition: half-period must be odd");
    }
    const std::size_t g = hp.genus();
    const Characteristic ch = hp.characteristic();
    const RealVector zero(g, 0.0);
    const cplx global = unit_phase(2.0 * scalar_product(ch.a, ch.b));
    std::vector<LemmaTerm> terms;
    for (const auto &p : coset_enumerate(g, 2)) {
        IntVector partner(g);
        for (std::size_t i = 0; i < g; ++i) {
            partner[i] = (p.v[i] + static_cast<int>(2.0 * ch.a[i])) % 2;
        }
        if (!(p.v < partner)) {
            continue;
        }
        const cplx c = global * unit_phase(scalar_product(ch.b, detail::to_real(p.v)));
        terms.push_back({c, Characteristic(detail::plus_coset(ch.a, p.v, 2.0), zero),
                         Characteristic(detail::plus_coset(zero, p.v, 2.0), zero)});
    }
    return terms;
}

namespace detail
{

inline cplx lemma_value(const std::vector<LemmaTerm> &terms, const ComplexVector &w1, const ComplexVector &w2,
                        const RiemannMatrix &tau2, const EvalSettings &s, SideSum *side = nullptr)
{
    const auto w1x2 = scaled(2.0, w1);
    const auto w2x2 = scaled(2.0, w2);
    SideSum local;
    SideSum &out = side ? *side : local;
    for (const auto &t : terms) {
        const cplx a1 = t.coefficient * th(t.a_char.a, t.a_char.b, w1x2, tau2, s);
        const cplx a2 = t.coefficient * th(t.a_char.a, t.a_char.b, w2x2, tau2, s);
        const cplx b1 = th(t.b_char.a, t.b_char.b, w1x2, tau2, s);
        const cplx b2 = th(t.b_char.a, t.b_char.b, w2x2, tau2, s);
        out.add(a1 * b2);
        out.add(-(b1 * a2));
    }
    return out.value();
}

// e^{4 pi i <a,b>} sum_p e^{2 pi i <p,b>} theta[a + p/2; 0](2w1|2tau) theta[p/2; 0](2w2|2tau)
inline cplx product_expansion(const Characteristic &ch, const ComplexVector &w1, const ComplexVector &w2,
                              const RiemannMatrix &tau2, const EvalSettings &s, SideSum *side = nullptr)
{
    const std::size_t g = ch.genus();
    const RealVector zero(g, 0.0);
    const cplx global = unit_phase(2.0 * scalar_product(ch.a, ch.b));
    SideSum local;
    SideSum &out = side ? *side : local;
    for (const auto &p : coset_enumerate(g, 2)) {
        out.add(global * unit_phase(scalar_product(ch.b, to_real(p.v)))
                * th(plus_coset(ch.a, p.v, 2.0), zero, scaled(2.0, w1), tau2, s)
                * th(plus_coset(zero, p.v, 2.0), zero, scaled(2.0, w2), tau2, s));
    }
    return out.value();
}

} // namespace detail

// theta(w1+w2) theta(w1-w2) against both its 2^g-term binary expansion and
// the paired A/B form; the residual is the worse of the two.
inline ResidualReport lemma_decomposition_residual(const HalfPeriod &hp, const ThetaPoint &w1, const ThetaPoint &w2,
                                                   const RiemannMatrix &tau, const EvalSettings &s,
                                                   const std::string &digest = {})
{
    const auto terms = lemma_decomposition(hp);
    detail::require_genus(tau.genus(), hp.genus(), "lemma_decomposition_residual");
    detail::require_genus(tau.genus(), w1.genus(), "lemma_decomposition_residual");
    detail::require_genus(tau.genus(), w2.genus(), "lemma_decomposition_residual");
    const Characteristic ch = hp.characteristic();
    const RiemannMatrix tau2 = tau.scaled(2.0);
    detail::SideSum lhs;
    lhs.add(detail::th(ch.a, ch.b, detail::lin(1.0, w1.u, 1.0, w2.u), tau, s)
            * detail::th(ch.a, ch.b, detail::lin(1.0, w1.u, -1.0, w2.u), tau, s));
    detail::SideSum expansion;
    detail::product_expansion(ch, w1.u, w2.u, tau2, s, &expansion);
    detail::SideSum paired;
    detail::lemma_value(terms, w1.u, w2.u, tau2, s, &paired);

    ResidualReport r = detail::make_report("lemma_decomposition", lhs, paired, digest);
    r.scale = std::max(r.scale, expansion.largest());
    r.residual = std::max(detail::normalized_residual(r.lhs, r.rhs, r.scale),
                          detail::normalized_residual(r.lhs, expansion.value(), r.scale));
    return r;
}

// The binary expansion of theta(w1+w2) theta(w1-w2), summed term by term as
// written, must change sign under w1 <-> w2 for odd half-periods.
inline ResidualReport lemma_antisymmetry_residual(const HalfPeriod &hp, const ThetaPoint &w1, const ThetaPoint &w2,
                                                  const RiemannMatrix &tau, const EvalSettings &s,
                                                  const std::string &digest = {})
{
    if (hp.parity() != Parity::odd) {
        throw std::invalid_argument("lemma_antisymmetry_residual: half-period must be odd");
    }
    const Characteristic ch = hp.characteristic();
    const RiemannMatrix tau2 = tau.scaled(2.0);
    detail::SideSum forward;
    detail::product_expansion(ch, w1.u, w2.u, tau2, s, &forward);
    detail::SideSum swapped;
    detail::product_expansion(ch, w2.u, w1.u, tau2, s, &swapped);
    ResidualReport r;
    r.identity_name = "lemma_antisymmetry";
    r.lhs = forward.value();
    r.rhs = -swapped.value();
    r.scale = std::max(forward.largest(), swapped.largest());
    r.residual = detail::normalized_residual(r.lhs, r.rhs, r.scale);
    r.instance_digest = digest;
    return r;
}

// Largest |prod_{(i,j) in M} A(i,j)| over perfect matchings M.
inline double max_matching_product(const SkewMatrix &a)
{
    const std::size_t n = a.size();
    std::vector<bool> used(n, false);
    double best = 0.0;
    const auto recurse = [&](auto &&self, double acc) -> void {
        std::size_t i = 0;
        while (i < n && used[i]) {
            ++i;
        }
        if (i == n) {
            best = std::max(best, acc);
            return;
        }
        used[i] = true;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!used[j]) {
                used[j] = true;
                self(self, acc * std::abs(a(i, j)));
                used[j] = false;
            }
        }
        used[i] = false;
    };
    recurse(recurse, 1.0);
    return best;
}

// Skew matrix A(i,j) = theta(w_i + w_j) theta(w_i - w_j), i < j, for the
// theta function with the given characteristic.
inline SkewMatrix weierstrass_matrix(const Characteristic &ch, std::span<const ThetaPoint> w, const RiemannMatrix &tau,
                                     const EvalSettings &s)
{
    SkewMatrix a(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            a.set(i, j,
                  detail::th(ch.a, ch.b, detail::lin(1.0, w[i].u, 1.0, w[j].u), tau, s)
                      * detail::th(ch.a, ch.b, detail::lin(1.0, w[i].u, -1.0, w[j].u), tau, s));
        }
    }
    return a;
}

// |Pf A| / (largest matching product) for the 2^g + 2 points w. The Pfaffian
// vanishes identically for odd theta functions.
inline ResidualReport weierstrass_pfaffian_residual(const HalfPeriod &hp, std::span<const ThetaPoint> w,
                                                    const RiemannMatrix &tau, const EvalSettings &s,
                                                    const std::string &digest = {})
{
    const std::size_t g = tau.genus();
    detail::require_genus(g, hp.genus(), "weierstrass_pfaffian_residual");
    if (hp.parity() != Parity::odd) {
        throw std::invalid_argument("weierstrass_pfaffian_residual: half-period must be odd");
    }
    const std::size_t n = (std::size_t{1} << g) + 2;
    if (w.size() != n) {
        throw std::invalid_argument("weierstrass_pfaffian_residual: expected " + std::to_string(n) + " points, got "
                                    + std::to_string(w.size()));
    }
    for (const auto &p : w) {
        detail::require_genus(g, p.genus(), "weierstrass_pfaffian_residual");
    }
    const SkewMatrix a = weierstrass_matrix(hp.characteristic(), w, tau, s);
    ResidualReport r;
    r.identity_name = "weierstrass_pfaffian";
    r.lhs = pfaffian(a);
    r.rhs = cplx{};
    r.scale = max_matching_product(a);
    r.residual = r.scale > 0.0 ? std::abs(r.lhs) / r.scale : std::abs(r.lhs);
    if (!std::isfinite(r.residual)) {
        r.residual = std::numeric_limits<double>::infinity();
    }
    r.instance_digest = digest;
    return r;
}

// Jacobi first and second, Riemann (WW) and the naive Weierstrass relation
// on one shared instance.
inline std::vector<ResidualReport> equivalence_suite(const IdentityInstance &inst)
{
    detail::require_arity(inst, 4, 4, 0, "equivalence_suite");
    return {jacobi_residual(JacobiKind::first, inst), jacobi_residual(JacobiKind::second, inst),
            riemann_residual(RiemannKind::ww, inst),
            naive_weierstrass_residual(NaiveWeierstrassKind::general, inst)};
}

} // namespace theta_lab

#endif
