#include <gtest/gtest.h>

#include <random>

#include "spinsim/config.hpp"
#include "spinsim/fitting.hpp"

using namespace spinsim;
using nlohmann::json;

TEST(FitTest, ExactExponential) {
    std::vector<double> t, y;
    for (int i = 0; i < 30; ++i) {
        t.push_back(0.1 * i);
        y.push_back(2.5 * std::exp(-t.back() / 0.7));
    }
    const auto f = fit_exponential_decay(t, y);
    EXPECT_NEAR(f.amplitude, 2.5, 1e-9);
    EXPECT_NEAR(f.time_constant, 0.7, 1e-9);
    EXPECT_LT(f.rms_residual, 1e-9);
}

TEST(FitTest, NoisyExponential) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 0.005);
    std::vector<double> t, y;
    for (int i = 0; i < 60; ++i) {
        t.push_back(0.05 * i);
        y.push_back(std::exp(-t.back() / 0.9) + g(rng));
    }
    EXPECT_NEAR(fit_exponential_decay(t, y).time_constant, 0.9, 0.03);
}

TEST(FitTest, Degenerate) {
    const std::vector<double> t = {0.0, 1.0, 2.0, 3.0}, flat = {1.0, 1.0, 1.0, 1.0};
    EXPECT_THROW(fit_exponential_decay(t, flat), FitError);
    EXPECT_THROW(fit_exponential_decay(std::span(t).first(1), std::span(flat).first(1)), FitError);
    EXPECT_THROW(fit_exponential_decay(t, std::span(flat).first(3)), std::exception);
}

TEST(FitTest, InversionRecovery) {
    std::vector<double> t, m;
    for (int i = 0; i < 12; ++i) {
        t.push_back(2.0 + 5.0 * i);
        m.push_back(0.3 * (1 - 2 * std::exp(-t.back() / 19.0)));
    }
    const auto f = fit_inversion_recovery(t, m);
    EXPECT_NEAR(f.t1, 19.0, 1e-8);
    EXPECT_NEAR(f.m_eq, 0.3, 1e-10);
}

TEST(ConfigTest, Defaults) {
    const AppConfig c = app_config_from_json(json::object());
    EXPECT_EQ(c.experiment.oracle, Oracle::f1);
    EXPECT_EQ(c.experiment.input_mode, InputMode::pure);
    EXPECT_EQ(c.experiment.system.size(), 2u);
    EXPECT_EQ(c.experiment.system.j_hz(0, 1), 215.0);
    EXPECT_FALSE(c.noise.enabled);
    EXPECT_EQ(c.noise.ensemble_size, 21u);
    EXPECT_FALSE(c.acquisition_options().relaxation.has_value());
    EXPECT_FALSE(c.tomography_settings().noise.has_value());
}

TEST(ConfigTest, FullDocument) {
    const json j = json::parse(R"({
        "spins": [{"label": "H", "offset_hz": 3.0, "t1_s": 10, "t2_s": 2},
                  {"label": "C", "t1_s": 20, "t2_s": 0.5}],
        "j_hz": {"H-C": 200},
        "experiment": {"oracle": "f4", "input": "pure", "pure_state": "10", "tau_s": 0.0025},
        "noise": {"enabled": true, "seed": 12, "t2_s": [1.5, 0.4], "receiver_snr": [100, 10]},
        "acquisition": {"n_samples": 2048, "dwell_s": 0.001, "window_bins": 3}
    })");
    const AppConfig c = app_config_from_json(j);
    const SpinSystem& s = c.experiment.system;
    EXPECT_EQ(s.spin(0).label, "H");
    EXPECT_EQ(s.spin(0).offset_hz, 3.0);
    EXPECT_EQ(s.spin(0).t2_s, 1.5);
    EXPECT_EQ(s.spin(1).t2_s, 0.4);
    EXPECT_EQ(s.j_hz(1, 0), 200.0);
    EXPECT_EQ(c.experiment.oracle, Oracle::f4);
    EXPECT_EQ(c.experiment.pure_index, 2u);
    EXPECT_EQ(*c.experiment.tau_s, 0.0025);
    EXPECT_TRUE(c.experiment.noise_enabled);
    EXPECT_EQ(*c.noise.seed, 12u);
    EXPECT_EQ(c.acquisition.n_samples, 2048u);
    ASSERT_TRUE(c.acquisition_options().relaxation.has_value());
    const auto ts = c.tomography_settings();
    ASSERT_TRUE(ts.noise.has_value());
    EXPECT_EQ(ts.noise->snr, (std::vector<double>{100, 10}));
    EXPECT_EQ(ts.window_bins, 3u);
}

TEST(ConfigTest, SystemRoundTrip) {
    const SpinSystem s = SpinSystem::chloroform();
    const SpinSystem back = spin_system_from_json(spin_system_to_json(s));
    EXPECT_EQ(back.labels(), s.labels());
    EXPECT_EQ(back.j_hz(), s.j_hz());
}

TEST(ConfigTest, Rejections) {
    const auto bad = [](const char* text) {
        EXPECT_THROW(app_config_from_json(json::parse(text)), ConfigError) << text;
    };
    bad(R"({"extra": 1})");
    bad(R"({"experiment": {"oracle": "f5"}})");
    bad(R"({"experiment": {"input": "hot"}})");
    bad(R"({"experiment": {"pure_state": "2"}})");
    bad(R"({"experiment": {"pure_state": "000"}})");
    bad(R"({"experiment": {"polarization": [0.5, 0.1]}})");
    bad(R"({"experiment": {"temperature_k": -1}})");
    bad(R"({"noise": {"t2_s": [7.0, 0.0]}})");
    bad(R"({"noise": {"t1_s": [1.0, 1.0], "t2_s": [3.0, 0.3]}})");
    bad(R"({"noise": {"t1_s": [1.0]}})");
    bad(R"({"noise": {"ensemble_size": 0}})");
    bad(R"({"noise": {"enabled": "yes"}})");
    bad(R"({"acquisition": {"dwell_s": 0}})");
    bad(R"({"spins": [{"label": "A"}, {"label": "A"}]})");
    bad(R"({"spins": [{"label": "A"}, {"label": "B"}], "j_hz": {"A-Q": 5}})");
    EXPECT_THROW(app_config_from_json(json::object({{"noise", {{"enabled", true}}}})).tomography_settings(),
                 ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}
