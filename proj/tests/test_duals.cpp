#include <gtest/gtest.h>

#include <random>

#include "theta_lab/duals.hpp"
#include "theta_lab/numerics.hpp"

using namespace theta_lab;

namespace
{

Quadruple<double> dyadic_quadruple(std::mt19937_64 &rng, std::size_t dim)
{
    std::uniform_int_distribution<int> mantissa(-1 << 20, 1 << 20);
    std::uniform_int_distribution<int> exponent(0, 30);
    Quadruple<double> q;
    for (auto &x : q.x) {
        x.resize(dim);
        for (auto &e : x) {
            e = std::ldexp(mantissa(rng), -exponent(rng));
        }
    }
    return q;
}

} // namespace

TEST(Duals, WhittakerWatsonFormula)
{
    const Quadruple<double> q{{{{1.0}, {2.0}, {3.0}, {4.0}}}};
    const auto d = ww_dual(q);
    EXPECT_EQ(d[0], (RealVector{4.0}));
    EXPECT_EQ(d[1], (RealVector{3.0}));
    EXPECT_EQ(d[2], (RealVector{2.0}));
    EXPECT_EQ(d[3], (RealVector{1.0}));
}

TEST(Duals, JacobiFormula)
{
    const Quadruple<double> q{{{{1.0}, {2.0}, {3.0}, {4.0}}}};
    const auto d = jacobi_dual(q);
    EXPECT_EQ(d[0], (RealVector{5.0}));
    EXPECT_EQ(d[1], (RealVector{-2.0}));
    EXPECT_EQ(d[2], (RealVector{-1.0}));
    EXPECT_EQ(d[3], (RealVector{0.0}));
}

TEST(Duals, ExactInvolutionsOnDyadicInputs)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto q = dyadic_quadruple(rng, 1 + trial % 4);
        EXPECT_EQ(ww_dual(ww_dual(q)), q);
        EXPECT_EQ(jacobi_dual(jacobi_dual(q)), q);
    }
}

TEST(Duals, SignRelationBetweenDuals)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const auto q = dyadic_quadruple(rng, 2);
        EXPECT_EQ(ww_to_jacobi_sign_relation(q), sign_flipped_jacobi_dual(q));
    }
}

TEST(Duals, EqualInputsAreFixedByWhittakerWatson)
{
    const ComplexVector u{{0.25, -0.5}, {1.0, 2.0}};
    const Quadruple<cplx> q{{u, u, u, u}};
    EXPECT_EQ(ww_dual(q), q);
}

TEST(Duals, ComplexArgumentsAreHandledComponentwise)
{
    Quadruple<cplx> q;
    q[0] = {cplx(1.0, 1.0)};
    q[1] = {cplx(0.0, 2.0)};
    q[2] = {cplx(-1.0, 0.0)};
    q[3] = {cplx(0.5, -0.5)};
    const auto d = jacobi_dual(q);
    EXPECT_EQ(d[0][0], cplx(0.25, 1.25));
    EXPECT_EQ(jacobi_dual(d), q);
}

TEST(Duals, MismatchedDimensionsAreRejected)
{
    const Quadruple<double> q{{{{1.0}, {2.0, 3.0}, {3.0}, {4.0}}}};
    EXPECT_THROW(ww_dual(q), std::invalid_argument);
    EXPECT_THROW(jacobi_dual(q), std::invalid_argument);
}
