#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "theta_lab/harness.hpp"
#include "theta_lab/theta.hpp"

using namespace theta_lab;

namespace
{

RiemannMatrix genus_two_tau()
{
    ComplexMatrix m(2, 2);
    m(0, 0) = {0.2, 1.1};
    m(0, 1) = m(1, 0) = {0.3, 0.4};
    m(1, 1) = {-0.1, 0.9};
    return RiemannMatrix::from_full(m);
}

} // namespace

// Reference values computed independently at 30 significant digits.
TEST(ThetaOracle, ThetaNullAtI)
{
    const cplx v = theta(ThetaPoint::zero(1), RiemannMatrix::scalar({0, 1}), Characteristic::zero(1));
    EXPECT_NEAR(v.real(), 1.08643481121330801457531612151, 2e-15);
    EXPECT_NEAR(v.imag(), 0.0, 1e-16);
    EXPECT_NEAR(v.real() * v.real(), 1.18034059901609622604533794056, 4e-15);
}

TEST(ThetaOracle, ThetaNullAtTwoI)
{
    const cplx v = theta(ThetaPoint::zero(1), RiemannMatrix::scalar({0, 2}), Characteristic::zero(1));
    EXPECT_NEAR(v.real(), 1.00373488548773909104767959507, 2e-15);
}

TEST(ThetaOracle, GenusOneWithCharacteristic)
{
    const cplx v = theta(ThetaPoint(ComplexVector{{0.3, 0.2}}), RiemannMatrix::scalar({0.1, 0.8}), Characteristic({0.5}, {0.0}));
    EXPECT_NEAR(v.real(), 0.785616135970640829994162224786, 2e-15);
    EXPECT_NEAR(v.imag(), -0.537598023832290143864083527699, 2e-15);
}

TEST(ThetaOracle, GenusTwoWithRationalCharacteristic)
{
    const cplx v = theta(ThetaPoint(ComplexVector{{0.3, -0.2}, {-0.4, 0.5}}), genus_two_tau(),
                         Characteristic({0.25, 0.5}, {0.125, -0.5}));
    EXPECT_NEAR(v.real(), -3.6400844333322321172810391274, 1e-14);
    EXPECT_NEAR(v.imag(), 0.50360168985784309191855499884, 1e-14);
}

TEST(ThetaOracle, AgreesWithLongDoubleBoxSum)
{
    for (std::size_t g = 1; g <= 3; ++g) {
        for (std::uint64_t trial = 0; trial < 4; ++trial) {
            detail::InstanceRng rng(cell_stream_seed(17, "box", g, trial));
            const RiemannMatrix tau = random_riemann_matrix(rng, g);
            const ThetaPoint u = random_point(rng, g);
            const Characteristic ch = random_rational_characteristic(rng, g);
            const ThetaValue v = theta_eval(u, tau, ch);
            const cplx ref = oracle::theta_box(u.u, tau.tau(), ch.a, ch.b, g == 3 ? 9 : 14);
            EXPECT_LT(std::abs(v.value - ref), 1e-13 * std::max(1.0, std::exp(v.log_envelope)))
                << "g=" << g << " trial=" << trial;
        }
    }
}

TEST(Theta, OddHalfPeriodVanishesAtOrigin)
{
    const cplx v = theta(ThetaPoint::zero(1), RiemannMatrix::scalar({0, 1}), Characteristic({0.5}, {0.5}));
    EXPECT_LT(std::abs(v), 1e-15);
    for (const auto &hp : enumerate_half_periods(2).odd) {
        EXPECT_LT(std::abs(theta(ThetaPoint::zero(2), genus_two_tau(), hp.characteristic())), 1e-14);
    }
}

TEST(Theta, LooserToleranceStaysWithinTolerance)
{
    const ThetaPoint u({{0.3, -0.2}, {-0.4, 0.5}});
    const Characteristic ch({0.25, 0.5}, {0.125, -0.5});
    EvalSettings loose;
    loose.epsilon = 1e-6;
    const ThetaValue a = theta_eval(u, genus_two_tau(), ch, loose);
    const ThetaValue b = theta_eval(u, genus_two_tau(), ch);
    EXPECT_LT(std::abs(a.value - b.value), 1e-6);
    EXPECT_LT(a.terms, b.terms);
    EXPECT_LT(a.radius, b.radius);
}

TEST(Theta, TruncationRadiusGrowsWithPrecisionAndDimension)
{
    EXPECT_LT(truncation_radius(1, 1.0, 1e-6), truncation_radius(1, 1.0, 1e-12));
    EXPECT_LT(truncation_radius(1, 1.0, 1e-12), truncation_radius(3, 1.0, 1e-12));
    EXPECT_LT(truncation_radius(2, 1.0, 1e-12), truncation_radius(2, 0.3, 1e-12));
}

TEST(Theta, RiemannMatrixValidation)
{
    ComplexMatrix asym(2, 2);
    asym(0, 0) = {0, 1};
    asym(1, 1) = {0, 1};
    asym(0, 1) = {0.1, 0};
    EXPECT_THROW(RiemannMatrix::from_full(asym), std::invalid_argument);
    EXPECT_NO_THROW(RiemannMatrix::from_full(asym, 0.2));
    EXPECT_THROW(RiemannMatrix::scalar({0, -1}), std::domain_error);
    EXPECT_THROW(RiemannMatrix::scalar({0, 0}), std::domain_error);
    EXPECT_THROW(RiemannMatrix::from_full(ComplexMatrix(2, 3)), std::invalid_argument);
    EXPECT_THROW(RiemannMatrix::scalar({std::nan(""), 1}), std::invalid_argument);
    EXPECT_NEAR(RiemannMatrix::scalar({0.5, 2}).lambda_min(), 2.0, 1e-12);
    EXPECT_EQ(genus_two_tau().scaled(3.0).tau()(0, 1), cplx(0.3, 0.4) * 3.0);
}

TEST(Theta, InputValidation)
{
    EXPECT_THROW(Characteristic({0.0}, {0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(Characteristic({INFINITY}, {0.0}), std::invalid_argument);
    EXPECT_THROW(ThetaPoint(ComplexVector{}), std::invalid_argument);
    EvalSettings bad;
    bad.epsilon = 0.1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad.epsilon = 1e-12;
    bad.radius_margin = -1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    EXPECT_THROW(theta(ThetaPoint::zero(2), RiemannMatrix::scalar({0, 1}), Characteristic::zero(1)),
                 std::invalid_argument);
    EXPECT_THROW(theta(ThetaPoint::zero(1), RiemannMatrix::scalar({0, 1}), Characteristic::zero(2)),
                 std::invalid_argument);
}

TEST(Theta, CharacteristicShiftByIntegers)
{
    const Characteristic ch({0.25, 0.5}, {0.125, -0.5});
    const ThetaPoint u({{0.3, -0.2}, {-0.4, 0.5}});
    const auto s = shift_characteristic(ch, {1, -2}, {3, 1});
    const cplx base = theta(u, genus_two_tau(), ch);
    EXPECT_LT(std::abs(theta(u, genus_two_tau(), s.ch) - s.factor * base), 1e-13);

    const auto r = reduce_characteristic(Characteristic({-0.75, 1.5}, {2.25, -0.5}));
    EXPECT_EQ(r.ch.a, (RealVector{0.25, 0.5}));
    EXPECT_EQ(r.ch.b, (RealVector{0.25, 0.5}));
    EXPECT_LT(std::abs(theta(u, genus_two_tau(), Characteristic({-0.75, 1.5}, {2.25, -0.5}))
                       - r.factor * theta(u, genus_two_tau(), r.ch)),
              1e-12);
}

TEST(Theta, QuasiPeriodicity)
{
    const RiemannMatrix tau = genus_two_tau();
    const Characteristic ch({0.25, 0.5}, {0.125, -0.5});
    const ThetaPoint u({{0.3, -0.2}, {-0.4, 0.5}});
    const RealVector m{1, -1};
    const RealVector n{2, 0};
    const auto q = quasi_shift(ch, u, tau, m, n);
    const ThetaValue lhs = theta_eval(quasi_shifted_argument(u, tau, m, n), tau, ch);
    const cplx rhs = q.prefactor * theta(u, tau, q.ch);
    EXPECT_LT(std::abs(lhs.value - rhs) / std::max(1.0, std::abs(rhs)), 1e-12);
}

TEST(Theta, ReflectionAndParity)
{
    const RiemannMatrix tau = genus_two_tau();
    const ThetaPoint u({{0.3, -0.2}, {-0.4, 0.5}});
    const auto table = enumerate_half_periods(2);
    for (const auto &hp : table.even) {
        const auto r = reflect(hp.characteristic(), u);
        EXPECT_LT(std::abs(theta(r.u, tau, hp.characteristic()) - theta(u, tau, hp.characteristic())), 1e-13);
    }
    for (const auto &hp : table.odd) {
        const auto r = reflect(hp.characteristic(), u);
        EXPECT_LT(std::abs(theta(r.u, tau, hp.characteristic()) + theta(u, tau, hp.characteristic())), 1e-13);
    }
}

TEST(HalfPeriods, CountsFollowClosedForm)
{
    for (std::size_t g = 1; g <= 6; ++g) {
        const auto t = enumerate_half_periods(g);
        const std::size_t even = (std::size_t{1} << (g - 1)) * ((std::size_t{1} << g) + 1);
        EXPECT_EQ(t.even.size(), even);
        EXPECT_EQ(t.odd.size(), (std::size_t{1} << (2 * g)) - even);
    }
    EXPECT_EQ(enumerate_half_periods(1).even.size(), 3u);
    EXPECT_EQ(enumerate_half_periods(1).odd.size(), 1u);
    EXPECT_THROW(enumerate_half_periods(0), std::invalid_argument);
}

TEST(HalfPeriods, BitsRoundTripAndParity)
{
    const HalfPeriod hp(3, 0b101, 0b100);
    const Characteristic ch = hp.characteristic();
    EXPECT_EQ(ch.a, (RealVector{0.5, 0.0, 0.5}));
    EXPECT_EQ(ch.b, (RealVector{0.5, 0.0, 0.0}));
    EXPECT_EQ(parity(hp), Parity::odd);
    EXPECT_EQ(HalfPeriod::from_characteristic(ch).a_bits(), hp.a_bits());
    EXPECT_EQ(HalfPeriod::from_characteristic(ch).b_bits(), hp.b_bits());
    EXPECT_EQ(parity(Characteristic({0.5, 0.5}, {0.5, 0.5})), Parity::even);
    EXPECT_THROW(HalfPeriod::from_characteristic(Characteristic({0.25}, {0.0})), std::invalid_argument);
    EXPECT_THROW(HalfPeriod(2, 4, 0), std::invalid_argument);
    EXPECT_STREQ(to_string(Parity::odd), "odd");
}
