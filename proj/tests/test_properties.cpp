// Randomised properties over many seeded draws.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "theta_lab/duals.hpp"
#include "theta_lab/harness.hpp"

using namespace theta_lab;

namespace
{

constexpr int draws = 40;

double rel(cplx x, cplx y, double scale) { return std::abs(x - y) / std::max(1.0, scale); }

} // namespace

TEST(Property, ReflectionSymmetryForRationalCharacteristics)
{
    for (std::size_t g = 1; g <= 3; ++g) {
        for (int t = 0; t < draws; ++t) {
            detail::InstanceRng rng(cell_stream_seed(1, "reflect", g, static_cast<std::uint64_t>(t)));
            const auto tau = random_riemann_matrix(rng, g);
            const auto u = random_point(rng, g);
            const auto ch = random_rational_characteristic(rng, g);
            const auto r = reflect(ch, u);
            const auto v = theta_eval(u, tau, ch);
            EXPECT_LT(rel(theta(r.u, tau, r.ch), v.value, std::exp(v.log_envelope)), 1e-13);
        }
    }
}

TEST(Property, IntegerTranslationOfArgument)
{
    for (std::size_t g = 1; g <= 3; ++g) {
        for (int t = 0; t < draws; ++t) {
            detail::InstanceRng rng(cell_stream_seed(2, "translate", g, static_cast<std::uint64_t>(t)));
            const auto tau = random_riemann_matrix(rng, g);
            const auto u = random_point(rng, g);
            const auto ch = random_rational_characteristic(rng, g);
            ComplexVector moved = u.u;
            double turns = 0.0;
            for (std::size_t i = 0; i < g; ++i) {
                const int n = rng.integer(-3, 3);
                moved[i] += static_cast<double>(n);
                turns += ch.a[i] * n;
            }
            const auto v = theta_eval(u, tau, ch);
            EXPECT_LT(rel(theta(ThetaPoint(moved), tau, ch), unit_phase(turns) * v.value, std::exp(v.log_envelope)),
                      1e-12);
        }
    }
}

TEST(Property, EvenIntegerShiftOfModulusWithZeroLowerCharacteristic)
{
    for (std::size_t g = 1; g <= 3; ++g) {
        for (int t = 0; t < draws; ++t) {
            detail::InstanceRng rng(cell_stream_seed(3, "modular", g, static_cast<std::uint64_t>(t)));
            const auto tau = random_riemann_matrix(rng, g);
            const auto u = random_point(rng, g);
            RealVector b(g);
            for (auto &x : b) {
                x = rng.uniform(-1, 1);
            }
            const Characteristic ch(RealVector(g, 0.0), b);
            ComplexMatrix shifted = tau.tau();
            for (std::size_t i = 0; i < g; ++i) {
                shifted(i, i) += 2.0 * rng.integer(-2, 2);
                for (std::size_t j = i + 1; j < g; ++j) {
                    const double s = rng.integer(-2, 2);
                    shifted(i, j) += s;
                    shifted(j, i) += s;
                }
            }
            const auto v = theta_eval(u, tau, ch);
            EXPECT_LT(rel(theta(u, RiemannMatrix::from_full(shifted), ch), v.value, std::exp(v.log_envelope)), 1e-12);
        }
    }
}

TEST(Property, TighterToleranceNeverShrinksTheSum)
{
    for (std::size_t g = 1; g <= 3; ++g) {
        detail::InstanceRng rng(cell_stream_seed(4, "monotone", g, 0));
        const auto tau = random_riemann_matrix(rng, g);
        const auto u = random_point(rng, g);
        std::size_t previous = 0;
        for (double eps : {1e-3, 1e-6, 1e-9, 1e-12, 1e-15}) {
            EvalSettings s;
            s.epsilon = eps;
            const auto v = theta_eval(u, tau, Characteristic::zero(g), s);
            EXPECT_GE(v.terms, previous);
            previous = v.terms;
        }
    }
}

TEST(Property, DualMapsAreLinear)
{
    detail::InstanceRng rng(5);
    for (int t = 0; t < 200; ++t) {
        Quadruple<double> x;
        Quadruple<double> y;
        Quadruple<double> sum;
        for (std::size_t k = 0; k < 4; ++k) {
            for (int i = 0; i < 3; ++i) {
                x[k].push_back(rng.integer(-1000, 1000) / 64.0);
                y[k].push_back(rng.integer(-1000, 1000) / 64.0);
                sum[k].push_back(x[k].back() + y[k].back());
            }
        }
        for (auto map : {&ww_dual<double>, &jacobi_dual<double>}) {
            const auto dx = map(x);
            const auto dy = map(y);
            const auto ds = map(sum);
            for (std::size_t k = 0; k < 4; ++k) {
                for (std::size_t i = 0; i < 3; ++i) {
                    EXPECT_EQ(ds[k][i], dx[k][i] + dy[k][i]);
                }
            }
        }
    }
}

TEST(Property, PfaffianCongruenceAndPermutation)
{
    detail::InstanceRng rng(6);
    for (std::size_t n = 2; n <= 8; n += 2) {
        for (int t = 0; t < 10; ++t) {
            SkewMatrix a(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    a.set(i, j, {rng.normal(), rng.normal()});
                }
            }
            ComplexMatrix b(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    b(i, j) = {rng.normal(), rng.normal()};
                }
            }
            const ComplexMatrix ad = a.dense();
            SkewMatrix c(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    cplx s{};
                    for (std::size_t k = 0; k < n; ++k) {
                        for (std::size_t l = 0; l < n; ++l) {
                            s += b(k, i) * ad(k, l) * b(l, j);
                        }
                    }
                    c.set(i, j, s);
                }
            }
            const cplx expected = determinant(b) * pfaffian(a);
            EXPECT_LT(std::abs(pfaffian(c) - expected), 1e-10 * std::max(1.0, std::abs(expected)));

            SkewMatrix swapped(n);
            const auto perm = [](std::size_t i) { return i == 0 ? 1 : (i == 1 ? 0 : i); };
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    swapped.set(i, j, a(perm(i), perm(j)));
                }
            }
            EXPECT_LT(std::abs(pfaffian(swapped) + pfaffian(a)), 1e-12 * std::max(1.0, std::abs(pfaffian(a))));
        }
    }
}

TEST(Property, CompensatedSumIsOrderInsensitive)
{
    detail::InstanceRng rng(7);
    std::vector<cplx> terms;
    for (int i = 0; i < 2000; ++i) {
        terms.emplace_back(std::ldexp(rng.normal(), rng.integer(-40, 40)), rng.normal());
    }
    const cplx reference = compensated_sum(terms);
    for (int t = 0; t < 20; ++t) {
        for (std::size_t i = terms.size() - 1; i > 0; --i) {
            std::swap(terms[i], terms[static_cast<std::size_t>(rng.integer(0, static_cast<int>(i)))]);
        }
        const cplx s = compensated_sum(terms);
        EXPECT_LE(std::abs(s.real() - reference.real()), 4 * std::numeric_limits<double>::epsilon()
                                                              * std::abs(reference.real()));
    }
}

TEST(Property, IdentityResidualsAcrossManySeeds)
{
    for (const auto &info : identity_table) {
        for (std::size_t g = 1; g <= 2; ++g) {
            if (!supports_genus(info.kind, g)) {
                continue;
            }
            for (std::uint64_t seed = 100; seed < 104; ++seed) {
                const auto inst = generate_instance(seed, info.kind, g, 0);
                const double bound = info.kind == IdentityKind::weierstrass_pfaffian ? 1e-7 : 1e-9;
                EXPECT_LT(worst_residual(evaluate_identity(info.kind, inst)), bound) << inst.digest;
            }
        }
    }
}
