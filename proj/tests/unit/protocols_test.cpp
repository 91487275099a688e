#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace omsim;
using omsim::testing::pulsed;

namespace {

ProtocolOptions sparse() {
    ProtocolOptions o;
    o.integration.record_every = std::size_t{1} << 40;
    return o;
}

} // namespace

TEST(Protocols, MemoryStoresAndRetrieves) {
    const auto p = reference_system();
    const auto d = pulsed(reference_drives(1e-3, 0.0, 1e-7), 0.3e-6, 0.3e-6, 1.5e-6);
    const auto r = run_memory(p, d, sparse());
    EXPECT_GT(r.retrieval_efficiency, 0.5);
    EXPECT_LT(r.retrieval_efficiency, 1.2);
    EXPECT_GT(r.storage_peak, 0.0);
    EXPECT_DOUBLE_EQ(r.read_window_start, 1.5e-6 - 0.9e-6);
    EXPECT_TRUE(r.warnings.empty());
    ASSERT_EQ(r.stability.size(), 1u);
    EXPECT_EQ(r.stability[0].routh.verdict, StabilityVerdict::stable);
}

TEST(Protocols, MemoryWithoutReadLobeRetrievesNothing) {
    const auto p = reference_system();
    auto d = pulsed(reference_drives(1e-3, 0.0, 1e-7), 0.3e-6, 0.3e-6, 1.5e-6);
    const auto with_read = run_memory(p, d, sparse());
    d.pulse_L->t_read = 50e-6; // read lobe far outside the window
    d.pulse_L->t_read.reset();
    EXPECT_THROW(run_memory(p, d, sparse()), InvalidParameter);
    EXPECT_GT(with_read.retrieval_efficiency, 0.0);
}

TEST(Protocols, MemoryDecaysWithDelay) {
    const auto p = reference_system();
    const auto base = pulsed(reference_drives(1e-3, 0.0, 1e-7), 0.3e-6, 0.3e-6, 1.5e-6);
    auto later = base;
    later.pulse_L->t_read = 2.0e-6;
    const double e1 = run_memory(p, base, sparse()).retrieval_efficiency;
    const double e2 = run_memory(p, later, sparse()).retrieval_efficiency;
    EXPECT_NEAR(e2 / e1, std::exp(-p.gamma_m * 0.5e-6), 0.01);
}

TEST(Protocols, MemoryRejectsCavityTwoDrive) {
    const auto p = reference_system();
    const auto d = pulsed(reference_drives(1e-3, 1e-3, 1e-7), 0.3e-6, 0.3e-6, 1.5e-6);
    EXPECT_THROW(run_memory(p, d), InvalidParameter);
}

TEST(Protocols, WideProbeIsFlagged) {
    const auto p = reference_system();
    const auto d = pulsed(reference_drives(1e-3, 0.0, 1e-7), 0.3e-6, 0.05e-6, 1.5e-6);
    const auto r = run_memory(p, d, sparse());
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Protocols, BlueDetunedLongPulseRefused) {
    auto p = reference_system();
    const auto d = pulsed(reference_drives(2e-3, 0.0, 1e-7), 3e-6, 3e-6, 15e-6);
    p.omega1 = d.omega_L - p.omega_m;
    EXPECT_THROW(run_memory(p, d, sparse()), UnstableError);
}

TEST(Protocols, TransductionAsymmetry) {
    const auto p = reference_system();
    auto d = pulsed(reference_drives(1e-3, 1e-3, 1e-7), 0.3e-6, 0.3e-6, 1.5e-6);
    const auto red = run_transduction(p, d, DetuningCase::red, sparse());
    const auto blue = run_transduction(p, d, DetuningCase::blue, sparse());
    EXPECT_GT(red.antistokes_peak, 100.0 * red.stokes_peak);
    EXPECT_GT(blue.stokes_peak, 100.0 * blue.antistokes_peak);
    EXPECT_DOUBLE_EQ(red.omega_antistokes, d.omega_R + d.delta);
    EXPECT_DOUBLE_EQ(red.omega_stokes, d.omega_R - d.delta);
    ASSERT_EQ(red.stability.size(), 2u);
    EXPECT_GT(red.phonon_peak_write, red.phonon_at_read_start);
}

TEST(Protocols, CaseDetunings) {
    const auto p = reference_system();
    EXPECT_EQ(case_detuning(DetuningCase::red, p), p.omega_m);
    EXPECT_EQ(case_detuning(DetuningCase::resonant, p), 0.0);
    EXPECT_EQ(case_detuning(DetuningCase::blue, p), -p.omega_m);
    EXPECT_EQ(parse_detuning_case("blue"), DetuningCase::blue);
    EXPECT_FALSE(parse_detuning_case("green").has_value());
}

TEST(Protocols, StageGainFromOnTime) {
    auto p = reference_system();
    const auto d = reference_drives(1e-3, 0.0, 0.0);
    p.omega1 = d.omega_L - p.omega_m;
    const auto amp = peak_amplitudes(p, d);
    const PulseShape pulse{0.0, std::nullopt, 0.3e-6, 2};
    const auto s = check_stage("write", p, bare_detunings(p, d), amp.left, 0.0, pulse);
    EXPECT_GT(s.eigen.max_real, 0.0);
    EXPECT_DOUBLE_EQ(s.gain_exponent, s.eigen.max_real * std::sqrt(M_PI) * 0.3e-6);
    const auto cw = check_stage("write", p, bare_detunings(p, d), amp.left, 0.0, std::nullopt);
    EXPECT_THROW(enforce_stability(cw, 5.0), UnstableError);
}
