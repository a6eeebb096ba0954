#include "spinsim/config.hpp"

#include <algorithm>
#include <fstream>

namespace spinsim {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
T get(const json& j, std::string_view key, std::string_view where) {
    try {
        return j.at(std::string(key)).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + "." + std::string(key) + ": " + e.what());
    }
}

template <typename T>
void maybe(const json& j, std::string_view key, std::string_view where, T& out) {
    if (j.contains(std::string(key))) {
        out = get<T>(j, key, where);
    }
}

std::size_t pure_index_from(const json& v, std::size_t n_spins) {
    if (v.is_number_unsigned()) {
        return v.get<std::size_t>();
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s.size() != n_spins || s.find_first_not_of("01") != std::string::npos) {
            throw ConfigError("experiment.pure_state: expected " + std::to_string(n_spins) +
                              " bits like \"00\"");
        }
        return std::stoul(s, nullptr, 2);
    }
    throw ConfigError("experiment.pure_state: expected a bit string or an index");
}

}  // namespace

SpinSystem spin_system_from_json(const json& j) {
    if (!j.contains("spins") || !j.at("spins").is_array()) {
        throw ConfigError("spin system: 'spins' array is required");
    }
    std::vector<SpinSystem::Spin> spins;
    for (const auto& s : j.at("spins")) {
        reject_unknown(s, "spins[]", {"label", "offset_hz", "t1_s", "t2_s"});
        SpinSystem::Spin spin;
        spin.label = get<std::string>(s, "label", "spins[]");
        spin.offset_hz = s.contains("offset_hz") ? get<double>(s, "offset_hz", "spins[]") : 0.0;
        spin.t1_s = get<double>(s, "t1_s", "spins[]");
        spin.t2_s = get<double>(s, "t2_s", "spins[]");
        spins.push_back(std::move(spin));
    }
    const auto n = static_cast<Eigen::Index>(spins.size());
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
    if (j.contains("j_hz")) {
        const json& couplings = j.at("j_hz");
        if (!couplings.is_object()) {
            throw ConfigError("j_hz must be an object like {\"A-B\": 215}");
        }
        for (const auto& [key, value] : couplings.items()) {
            const auto dash = key.find('-');
            if (dash == std::string::npos) {
                throw ConfigError("j_hz key '" + key + "' must look like \"A-B\"");
            }
            const auto find = [&](const std::string& label) {
                for (Eigen::Index k = 0; k < n; ++k) {
                    if (spins[static_cast<std::size_t>(k)].label == label) {
                        return k;
                    }
                }
                throw ConfigError("j_hz key '" + key + "' names unknown spin '" + label + "'");
            };
            const Eigen::Index a = find(key.substr(0, dash));
            const Eigen::Index b = find(key.substr(dash + 1));
            if (a == b) {
                throw ConfigError("j_hz key '" + key + "' couples a spin to itself");
            }
            if (!value.is_number()) {
                throw ConfigError("j_hz['" + key + "'] must be a number");
            }
            jm(a, b) = jm(b, a) = value.get<double>();
        }
    }
    try {
        return SpinSystem(std::move(spins), jm);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("spin system: ") + e.what());
    }
}

json spin_system_to_json(const SpinSystem& system) {
    json j;
    j["spins"] = json::array();
    for (const auto& s : system.spins()) {
        j["spins"].push_back({{"label", s.label}, {"offset_hz", s.offset_hz}, {"t1_s", s.t1_s}, {"t2_s", s.t2_s}});
    }
    j["j_hz"] = json::object();
    for (std::size_t a = 0; a < system.size(); ++a) {
        for (std::size_t b = a + 1; b < system.size(); ++b) {
            if (system.j_hz(a, b) != 0.0) {
                j["j_hz"][system.spin(a).label + "-" + system.spin(b).label] = system.j_hz(a, b);
            }
        }
    }
    return j;
}

AcquisitionOptions AppConfig::acquisition_options() const {
    AcquisitionOptions o;
    o.n_samples = acquisition.n_samples;
    o.dwell_s = acquisition.dwell_s;
    o.line_broadening_hz = acquisition.line_broadening_hz;
    if (noise.enabled) {
        o.relaxation = experiment.relaxation();
    }
    return o;
}

TomographySettings AppConfig::tomography_settings() const {
    TomographySettings s;
    s.acquisition = acquisition_options();
    s.window_bins = acquisition.window_bins;
    if (noise.enabled) {
        if (!noise.seed) {
            throw ConfigError("noise is enabled but no RNG seed was given");
        }
        s.noise = ReceiverNoise{noise.receiver_snr, 1.0, *noise.seed};
    }
    return s;
}

AppConfig app_config_from_json(const json& j) {
    reject_unknown(j, "config", {"spins", "j_hz", "experiment", "noise", "acquisition"});
    AppConfig c;

    json system_json = j.contains("spins") ? json{{"spins", j.at("spins")}} : spin_system_to_json(SpinSystem::chloroform());
    if (j.contains("j_hz")) {
        system_json["j_hz"] = j.at("j_hz");
    } else if (j.contains("spins")) {
        system_json.erase("j_hz");
    }

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        reject_unknown(n, "noise",
                       {"enabled", "t1_s", "t2_s", "envelope_time_constant_s", "ensemble_size", "pulse_width_s",
                        "flip_calibration", "receiver_snr", "seed", "offsets_hz"});
        maybe(n, "enabled", "noise", c.noise.enabled);
        maybe(n, "t1_s", "noise", c.noise.t1_s);
        maybe(n, "t2_s", "noise", c.noise.t2_s);
        maybe(n, "envelope_time_constant_s", "noise", c.noise.envelope_time_constant_s);
        maybe(n, "ensemble_size", "noise", c.noise.ensemble_size);
        maybe(n, "pulse_width_s", "noise", c.noise.pulse_width_s);
        maybe(n, "flip_calibration", "noise", c.noise.flip_calibration);
        maybe(n, "receiver_snr", "noise", c.noise.receiver_snr);
        if (n.contains("seed")) {
            c.noise.seed = get<std::uint64_t>(n, "seed", "noise");
        }
        maybe(n, "offsets_hz", "noise", c.noise.offsets_hz);
    }
    auto& spins = system_json["spins"];
    const auto override_field = [&](const std::vector<double>& values, const char* field) {
        if (values.empty()) {
            return;
        }
        if (values.size() != spins.size()) {
            throw ConfigError(std::string("noise.") + field + " needs one entry per spin");
        }
        for (std::size_t k = 0; k < values.size(); ++k) {
            spins[k][field] = values[k];
        }
    };
    override_field(c.noise.t1_s, "t1_s");
    override_field(c.noise.t2_s, "t2_s");
    override_field(c.noise.offsets_hz, "offset_hz");
    c.experiment.system = spin_system_from_json(system_json);

    if (!(c.noise.envelope_time_constant_s > 0.0)) {
        throw ConfigError("noise.envelope_time_constant_s must be > 0");
    }
    if (c.noise.ensemble_size == 0) {
        throw ConfigError("noise.ensemble_size must be >= 1");
    }
    if (!(c.noise.pulse_width_s >= 0.0)) {
        throw ConfigError("noise.pulse_width_s must be >= 0");
    }
    if (!(c.noise.flip_calibration > 0.0)) {
        throw ConfigError("noise.flip_calibration must be > 0");
    }
    for (double snr : c.noise.receiver_snr) {
        if (!(snr > 0.0)) {
            throw ConfigError("noise.receiver_snr entries must be > 0");
        }
    }

    if (j.contains("experiment")) {
        const json& e = j.at("experiment");
        reject_unknown(e, "experiment", {"oracle", "input", "pure_state", "temperature_k", "polarization", "tau_s"});
        try {
            if (e.contains("oracle")) {
                c.experiment.oracle = oracle_from_name(get<std::string>(e, "oracle", "experiment"));
            }
            if (e.contains("input")) {
                c.experiment.input_mode = input_mode_from_name(get<std::string>(e, "input", "experiment"));
            }
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(std::string("experiment: ") + ex.what());
        }
        if (e.contains("pure_state")) {
            c.experiment.pure_index = pure_index_from(e.at("pure_state"), c.experiment.system.size());
        }
        maybe(e, "temperature_k", "experiment", c.experiment.temperature_k);
        maybe(e, "polarization", "experiment", c.experiment.polarization);
        if (e.contains("tau_s")) {
            c.experiment.tau_s = get<double>(e, "tau_s", "experiment");
        }
    }
    c.experiment.noise_enabled = c.noise.enabled;
    c.experiment.pulse_width_s = c.noise.pulse_width_s;

    if (j.contains("acquisition")) {
        const json& a = j.at("acquisition");
        reject_unknown(a, "acquisition", {"n_samples", "dwell_s", "window_bins", "line_broadening_hz"});
        maybe(a, "n_samples", "acquisition", c.acquisition.n_samples);
        maybe(a, "dwell_s", "acquisition", c.acquisition.dwell_s);
        maybe(a, "window_bins", "acquisition", c.acquisition.window_bins);
        maybe(a, "line_broadening_hz", "acquisition", c.acquisition.line_broadening_hz);
    }
    try {
        c.experiment.validate();
        c.acquisition_options().validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    return c;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return app_config_from_json(j);
}

}  // namespace spinsim
