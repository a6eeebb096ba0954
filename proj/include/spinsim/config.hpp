// JSON configuration: spin system, experiment, noise and acquisition.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "spinsim/experiment.hpp"
#include "spinsim/noise.hpp"
#include "spinsim/readout.hpp"
#include "spinsim/tomography.hpp"

namespace spinsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NoiseConfig {
    bool enabled = false;
    std::vector<double> t1_s;  // per-spin overrides; empty keeps the system's
    std::vector<double> t2_s;
    double envelope_time_constant_s = 200e-6;
    std::size_t ensemble_size = 21;
    double pulse_width_s = 12.5e-6;
    double flip_calibration = 0.96;
    std::vector<double> receiver_snr = {4300.0, 35.0};
    std::optional<std::uint64_t> seed;
    std::vector<double> offsets_hz;  // per-spin carrier offsets; empty keeps the system's
};

struct AcquisitionConfig {
    std::size_t n_samples = 4096;
    double dwell_s = 5e-4;
    std::size_t window_bins = 5;
    double line_broadening_hz = 0.0;
};

struct AppConfig {
    ExperimentConfig experiment;
    NoiseConfig noise;
    AcquisitionConfig acquisition;

    /// Acquisition options; FIDs decay with the system's T2 when noise is on.
    AcquisitionOptions acquisition_options() const;
    TomographySettings tomography_settings() const;
};

/// {"spins": [{"label","offset_hz","t1_s","t2_s"}, ...], "j_hz": {"A-B": 215}}
SpinSystem spin_system_from_json(const nlohmann::json& j);
nlohmann::json spin_system_to_json(const SpinSystem& system);

/// Missing sections keep their defaults (chloroform, f1, pure |00>, noise off).
/// Unknown keys and invalid values throw ConfigError.
AppConfig app_config_from_json(const nlohmann::json& j);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace spinsim
