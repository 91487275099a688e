#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace omsim;

namespace {

struct Synthetic {
    std::vector<double> t;
    std::vector<cplx> x;
};

Synthetic synthetic(double delta, double span, int per_period, std::function<cplx(double)> a0,
                    std::function<cplx(double)> ap, std::function<cplx(double)> am) {
    Synthetic s;
    const double h = two_pi / delta / per_period;
    const auto n = static_cast<std::size_t>(span / h);
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = h * static_cast<double>(k);
        s.t.push_back(t);
        s.x.push_back(a0(t) + ap(t) * std::polar(1.0, -delta * t) + am(t) * std::polar(1.0, delta * t));
    }
    return s;
}

} // namespace

TEST(FullModel, DemodulatesConstantHarmonics) {
    const double delta = 2.0;
    const auto s = synthetic(delta, 60.0, 100, [](double) { return cplx(3, 1); }, [](double) { return cplx(0.2, -0.1); },
                             [](double) { return cplx(-0.05, 0.02); });
    const auto d = demodulate(s.t, s.x, delta, 3.0 * two_pi / delta);
    ASSERT_FALSE(d.t.empty());
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        EXPECT_LT(std::abs(d.plus[i] - cplx(0.2, -0.1)), 1e-9);
        EXPECT_LT(std::abs(d.minus[i] - cplx(-0.05, 0.02)), 1e-9);
        EXPECT_LT(std::abs(d.zero[i] - cplx(3, 1)), 1e-9);
    }
    EXPECT_EQ(d.t.front(), s.t[d.first_index]);
}

TEST(FullModel, CancellationSuppressesCarrierLeakage) {
    const double delta = 2.0;
    auto a0 = [](double t) { return cplx(10.0 * std::exp(-std::pow((t - 100.0) / 40.0, 2)), 0.0); };
    auto ap = [](double t) { return cplx(0.0, std::exp(-std::pow((t - 100.0) / 40.0, 2))); };
    auto am = [](double) { return cplx(0.0, 0.0); };
    const auto s = synthetic(delta, 200.0, 100, a0, ap, am);
    const double window = 3.0 * two_pi / delta;
    const auto plain = demodulate(s.t, s.x, delta, window);
    const auto refined = separate_sidebands(s.t, s.x, delta, window);
    auto worst = [&](const Demodulated& d) {
        double e = 0.0;
        for (std::size_t i = 0; i < d.t.size(); ++i)
            if (d.t[i] > 60.0 && d.t[i] < 140.0) e = std::max(e, std::abs(d.plus[i] - ap(d.t[i])));
        return e;
    };
    EXPECT_LT(worst(refined), 0.2 * worst(plain));
    EXPECT_LT(worst(refined), 0.01);
}

TEST(FullModel, DemodulationGuards) {
    const double delta = 2.0;
    const auto s = synthetic(delta, 20.0, 50, [](double) { return cplx(1, 0); }, [](double) { return cplx(0, 0); },
                             [](double) { return cplx(0, 0); });
    EXPECT_THROW(demodulate(s.t, s.x, delta, 2.0 * two_pi / delta), InvalidParameter);
    EXPECT_THROW(demodulate(s.t, s.x, 0.0, 1.0), InvalidParameter);
    EXPECT_THROW(separate_sidebands(s.t, s.x, delta, 3.0 * two_pi / delta, 5), InvalidParameter);
    auto t = s.t;
    t[3] += 1e-3;
    EXPECT_THROW(demodulate(t, s.x, delta, 3.0 * two_pi / delta), InvalidParameter);
}

TEST(FullModel, StepMustResolveBeat) {
    const auto p = reference_system();
    const auto d = reference_drives(1e-3, 0.0, 1e-7);
    EXPECT_THROW(simulate_full(p, d, two_pi / (40.0 * d.delta), 0.0, 1e-8), InvalidParameter);
    EXPECT_NO_THROW(simulate_full(p, d, default_full_dt(d), 0.0, 1e-8));
}

TEST(FullModel, ConstantPumpSettlesToOperatingPoint) {
    const auto p = reference_system();
    const auto d = reference_drives(1e-3, 0.0, 0.0);
    const auto op = solve_operating_point(p, d);
    const double decay = -is_stable_eigen(linearize(p, op)).max_real;
    const auto s = simulate_full(p, d, default_full_dt(d), 0.0, 30.0 / decay, 1000);
    EXPECT_LT(std::abs(s.a1.back() - op.a10), 1e-6 * std::abs(op.a10));
    EXPECT_LT(std::abs(s.Q.back() - op.Q0), 1e-6 * op.Q0);
}

TEST(FullModel, SidebandsMatchEnvelopeDuringWrite) {
    const auto p = reference_system();
    const auto d = omsim::testing::pulsed(reference_drives(1e-3, 0.0, 1e-7), 0.3e-6, 0.3e-6, 1.5e-6);
    const auto cmp = compare_envelope_full(p, d);
    for (const auto& s : cmp.sidebands) {
        if (s.component == "a1minus") continue;
        EXPECT_LT(s.max_error, 0.01) << s.component;
    }
}
