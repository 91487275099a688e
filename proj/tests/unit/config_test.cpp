#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace omsim;
using omsim::testing::minimal_config;

namespace {

std::string config_error(const std::string& text) {
    try {
        RunConfig cfg = RunConfig::parse(text);
        cfg.validate();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, MinimalConfigBuildsReferenceSystem) {
    RunConfig cfg = RunConfig::parse(minimal_config);
    cfg.validate();
    const auto p = cfg.system();
    const auto ref = reference_system();
    EXPECT_DOUBLE_EQ(p.omega_m, ref.omega_m);
    EXPECT_DOUBLE_EQ(p.kappa1, ref.kappa1);
    EXPECT_DOUBLE_EQ(p.g1, ref.g1);
    EXPECT_DOUBLE_EQ(p.mass, 20e-12);
    const auto d = cfg.drives();
    EXPECT_DOUBLE_EQ(d.omega_L, angular_frequency_from_wavelength(775e-9));
    // Absolute optical frequencies carry an ulp of about 0.5 rad/s.
    EXPECT_NEAR(bare_detunings(p, d).cavity1, ref.omega_m, 1.0);
    EXPECT_FALSE(d.pulsed());
}

TEST(Config, ResolvedEchoRoundTrips) {
    RunConfig cfg = detail::resolve(RunConfig::parse(minimal_config));
    const std::string once = cfg.resolved_text();
    RunConfig again = detail::resolve(RunConfig::parse(once));
    EXPECT_EQ(again.resolved_text(), once);
    EXPECT_EQ(again.number("dt_s"), cfg.number("dt_s"));
    EXPECT_EQ(again.system().omega1, cfg.system().omega1);
    EXPECT_TRUE(again.has("sweep_start_hz"));
    EXPECT_EQ(again.text("lambda_r_m"), "775e-9");
}

TEST(Config, NegativeKappaRejectedWithLine) {
    std::string text = minimal_config;
    text.replace(text.find("kappa1_hz    = 1.5e6"), 20, "kappa1_hz = -1");
    const auto msg = config_error(text);
    EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("> 0"), std::string::npos) << msg;
}

TEST(Config, UnknownKeySuggestsClosest) {
    const auto msg = config_error(minimal_config + "kapa1_hz = 2\n");
    EXPECT_NE(msg.find("unknown key 'kapa1_hz'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("kappa1_hz"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 16"), std::string::npos) << msg;
}

TEST(Config, UnitSuffixMismatch) {
    std::string text = minimal_config;
    text.replace(text.find("kappa1_hz"), 9, "kappa1_s ");
    const auto msg = config_error(text);
    EXPECT_NE(msg.find("unit suffix mismatch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("kappa1_hz"), std::string::npos) << msg;
}

TEST(Config, UnparsableNumber) {
    const auto msg = config_error(minimal_config + "tau_l_s = 0.3us\n");
    EXPECT_NE(msg.find("cannot parse number"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 16"), std::string::npos) << msg;
}

TEST(Config, MissingRequiredKey) {
    std::string text = minimal_config;
    text.erase(text.find("gamma_m_hz"), text.find('\n', text.find("gamma_m_hz")) - text.find("gamma_m_hz") + 1);
    EXPECT_NE(config_error(text).find("missing required key 'gamma_m_hz'"), std::string::npos);
}

TEST(Config, DuplicateAndMalformedLines) {
    EXPECT_NE(config_error(minimal_config + "mass_kg = 1e-12\n").find("duplicate"), std::string::npos);
    EXPECT_NE(config_error(minimal_config + "just words\n").find("key = value"), std::string::npos);
}

TEST(Config, TextChoicesAndBeta) {
    EXPECT_NE(config_error(minimal_config + "shape = square\n").find("one of"), std::string::npos);
    EXPECT_NE(config_error(minimal_config + "beta = 4\n").find("beta = 2"), std::string::npos);
    EXPECT_NE(config_error(minimal_config + "shape = supergaussian\nbeta = 3\n").find("even"), std::string::npos);
    RunConfig cfg = RunConfig::parse(minimal_config + "shape = supergaussian\n");
    cfg.validate();
    EXPECT_EQ(cfg.integer("beta"), 4);
}

TEST(Config, PulsedDrivesNeedBothWidths) {
    EXPECT_NE(config_error(minimal_config + "tau_l_s = 0.3e-6\n").find("tau_p_s"), std::string::npos);
    RunConfig cfg = RunConfig::parse(minimal_config + "tau_l_s = 0.3e-6\ntau_p_s = 0.2e-6\n");
    cfg.validate();
    const auto d = cfg.drives();
    ASSERT_TRUE(d.pulse_L && d.pulse_L->t_read);
    EXPECT_DOUBLE_EQ(*d.pulse_L->t_read, 1.5e-6);
    EXPECT_DOUBLE_EQ(d.pulse_p->tau, 0.2e-6);
    EXPECT_DOUBLE_EQ(d.pulse_R->tau, 0.3e-6);
}

TEST(Config, OverridesReplaceFileValues) {
    RunConfig cfg = RunConfig::parse(minimal_config);
    cfg.apply_override("power_l_w=2e-3");
    cfg.validate();
    EXPECT_DOUBLE_EQ(cfg.drives().power_L, 2e-3);
    EXPECT_THROW(cfg.apply_override("power_l_w"), ConfigError);
    EXPECT_THROW(cfg.apply_override("powr_l_w=1"), ConfigError);
}

TEST(Config, ScanKeyMustBeNumeric) {
    EXPECT_NE(config_error(minimal_config + "scan_key = shape\nscan_values = 1,2\n").find("scan_key"),
              std::string::npos);
    EXPECT_NE(config_error(minimal_config + "scan_values = 1, x\n").find("list entry"), std::string::npos);
    RunConfig cfg = RunConfig::parse(minimal_config + "scan_key = power_l_w\nscan_values = 1e-3, 2e-3 ,3e-3\n");
    cfg.validate();
    EXPECT_EQ(cfg.numbers("scan_values"), (std::vector<double>{1e-3, 2e-3, 3e-3}));
}

TEST(Config, CommentsAndBlankLinesIgnored) {
    RunConfig cfg = RunConfig::parse("# header\n\n" + minimal_config + "  # trailing\nseed = 9 # inline\n");
    cfg.validate();
    EXPECT_EQ(cfg.integer("seed"), 9);
}

TEST(Config, ShippedConfigsResolve) {
    for (const char* name : {"memory_gaussian.cfg", "memory_short_probe.cfg", "memory_supergaussian.cfg",
                             "transduction.cfg", "spectrum.cfg", "delay_scan.cfg"}) {
        EXPECT_NO_THROW(detail::resolve(RunConfig::load(omsim::testing::config_file(name)))) << name;
    }
}
