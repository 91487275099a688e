#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace omsim;

namespace {

/// Monic polynomial with the given roots, descending powers.
std::array<double, 7> from_roots(const std::array<cplx, 6>& roots) {
    std::vector<cplx> c{1.0};
    for (const auto& r : roots) {
        std::vector<cplx> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= r * c[i];
        }
        c = next;
    }
    std::array<double, 7> out{};
    for (std::size_t i = 0; i < 7; ++i) out[i] = c[i].real();
    return out;
}

} // namespace

TEST(Stability, RouthOnKnownPolynomials) {
    const auto stable = from_roots({cplx(-1, 0), cplx(-2, 0), cplx(-0.5, 3), cplx(-0.5, -3), cplx(-0.1, 1), cplx(-0.1, -1)});
    EXPECT_EQ(routh_hurwitz(stable).verdict, StabilityVerdict::stable);
    EXPECT_GT(routh_hurwitz(stable).margin, 0.0);

    const auto unstable = from_roots({cplx(-1, 0), cplx(-2, 0), cplx(0.05, 3), cplx(0.05, -3), cplx(-0.1, 1), cplx(-0.1, -1)});
    EXPECT_EQ(routh_hurwitz(unstable).verdict, StabilityVerdict::unstable);

    const auto real_positive = from_roots({cplx(1, 0), cplx(-2, 0), cplx(-3, 0), cplx(-1, 1), cplx(-1, -1), cplx(-4, 0)});
    EXPECT_EQ(routh_hurwitz(real_positive).verdict, StabilityVerdict::unstable);
}

TEST(Stability, RouthMarginalOnImaginaryPair) {
    // (s^2 + 1)(s + 1)^4: a row of zeros appears in the Routh array.
    const std::array<double, 7> marginal{1, 4, 7, 8, 7, 4, 1};
    EXPECT_EQ(routh_hurwitz(marginal).verdict, StabilityVerdict::marginal);
}

TEST(Stability, CharacteristicPolynomialInvariants) {
    const auto p = reference_system();
    const auto op = solve_operating_point(p, reference_drives(1e-3, 0.5e-3, 0.0));
    const auto sys = linearize(p, op);
    const Matrix6 A = sys.jacobian / sys.omega_scale;
    const auto c = characteristic_polynomial(A);
    EXPECT_EQ(c[0], 1.0);
    EXPECT_NEAR(c[1], -A.trace(), 1e-12 * std::abs(A.trace()));
    EXPECT_NEAR(c[6], A.determinant(), 1e-9 * std::abs(A.determinant()));
}

TEST(Stability, JacobianTraceIsTotalDamping) {
    const auto p = reference_system();
    const auto op = solve_operating_point(p, reference_drives(1e-3, 0.5e-3, 0.0));
    const auto sys = linearize(p, op);
    EXPECT_DOUBLE_EQ(sys.jacobian.trace(), -(p.gamma_m + 2.0 * p.kappa1 + 2.0 * p.kappa2));
}

TEST(Stability, RedDetunedReferenceIsStable) {
    const auto p = reference_system();
    const auto sys = linearize(p, solve_operating_point(p, reference_drives(1e-3, 0.0, 0.0)));
    EXPECT_EQ(is_stable_routh_hurwitz(sys).verdict, StabilityVerdict::stable);
    const auto eig = is_stable_eigen(sys);
    EXPECT_TRUE(eig.stable);
    // Optical damping broadens the mechanical mode well beyond gamma_m / 2.
    EXPECT_LT(eig.max_real, -10.0 * p.gamma_m);
}

TEST(Stability, BlueDetunedPumpIsUnstable) {
    auto p = reference_system();
    const auto d = reference_drives(1e-3, 0.0, 0.0);
    p.omega1 = d.omega_L - p.omega_m;
    const auto sys = linearize(p, solve_operating_point(p, d));
    EXPECT_EQ(is_stable_routh_hurwitz(sys).verdict, StabilityVerdict::unstable);
    EXPECT_FALSE(is_stable_eigen(sys).stable);
}

TEST(Stability, UndrivenSystemIsStable) {
    const auto p = reference_system();
    const auto sys = linearize(p, OperatingPoint{});
    const auto eig = is_stable_eigen(sys);
    EXPECT_TRUE(eig.stable);
    EXPECT_NEAR(eig.max_real, -p.gamma_m / 2.0, 1e-6 * p.gamma_m);
    EXPECT_EQ(is_stable_routh_hurwitz(sys).verdict, StabilityVerdict::stable);
}

TEST(Stability, EigenvaluesSortedByRealPart) {
    const auto p = reference_system();
    const auto eig = is_stable_eigen(linearize(p, solve_operating_point(p, reference_drives(1e-3, 1e-3, 0.0))));
    for (std::size_t i = 1; i < eig.eigenvalues.size(); ++i)
        EXPECT_GE(eig.eigenvalues[i - 1].real(), eig.eigenvalues[i].real());
    EXPECT_EQ(eig.max_real, eig.eigenvalues[0].real());
}

TEST(Stability, RouthAgreesWithEigenOnRandomDraws) {
    const auto st = compare_routh_eigen(reference_system(), reference_drives(1e-3, 1e-3, 0.0), 200, 3);
    EXPECT_EQ(st.draws, 200);
    EXPECT_EQ(st.disagreements, 0);
    EXPECT_GT(st.stable, 0);
    EXPECT_GT(st.unstable, 0);
}
