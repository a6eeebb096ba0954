#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "artifacts.hpp"
#include "spinsim/config.hpp"

namespace spinsim::cli {

using nlohmann::json;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    bool noise = false;
    bool no_noise = false;
};

struct ExperimentFlags {
    std::string oracle;
    std::string input;
    std::string pure_state;
};

/// Config with command-line overrides applied.
struct Context {
    AppConfig config;
    std::optional<std::string> config_path;
    json manifest;
};

Context load_context(const Globals& g, const std::string& command, const ExperimentFlags* flags,
                     bool needs_rng) {
    Context ctx;
    if (!g.config_path.empty()) {
        ctx.config_path = g.config_path;
    } else if (const char* env = std::getenv("SPINSIM_CONFIG"); env != nullptr && *env != '\0') {
        ctx.config_path = env;
    }
    json j = json::object();
    if (ctx.config_path) {
        std::ifstream in(*ctx.config_path);
        if (!in) {
            throw ConfigError("cannot open config '" + *ctx.config_path + "'");
        }
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw ConfigError("config '" + *ctx.config_path + "' is not valid JSON: " + e.what());
        }
        if (!j.is_object()) {
            throw ConfigError("config must be a JSON object");
        }
    }
    if (flags != nullptr) {
        json& e = j["experiment"];
        if (e.is_null()) {
            e = json::object();
        }
        if (!flags->oracle.empty()) {
            e["oracle"] = flags->oracle;
        }
        if (!flags->input.empty()) {
            e["input"] = flags->input;
        }
        if (!flags->pure_state.empty()) {
            e["pure_state"] = flags->pure_state;
        }
    }
    if (g.noise || g.no_noise || g.seed) {
        json& n = j["noise"];
        if (n.is_null()) {
            n = json::object();
        }
        if (g.noise || g.no_noise) {
            n["enabled"] = g.noise;
        }
        if (g.seed) {
            n["seed"] = *g.seed;
        }
    }
    ctx.config = app_config_from_json(j);
    if (needs_rng && ctx.config.noise.enabled && !ctx.config.noise.seed) {
        throw ConfigError("noise is enabled but no seed was given (use --seed N)");
    }
    ctx.manifest = {{"command", command},
                    {"config", ctx.config_path ? json(*ctx.config_path) : json(nullptr)},
                    {"seed", ctx.config.noise.seed ? json(*ctx.config.noise.seed) : json(nullptr)},
                    {"noise", ctx.config.noise.enabled},
                    {"output_dir", g.out_dir}};
    return ctx;
}

RfInhomogeneityModel noise_model(const AppConfig& c) {
    return calibrate_inhomogeneity(c.noise.envelope_time_constant_s, kNominalPulsePower, c.noise.flip_calibration,
                                   c.noise.ensemble_size);
}

/// Pre-acquisition state for each readout pair: the ensemble with its own
/// imperfect pulses when noise is on, ideal pulses otherwise.
Preparation preparation(const AppConfig& c) {
    if (c.experiment.noise_enabled) {
        return ensemble_preparation(c.experiment, noise_model(c));
    }
    return ideal_readout(run_experiment(c.experiment), c.experiment.system);
}

int input_bit(const ExperimentConfig& e) {
    if (e.input_mode != InputMode::pure) {
        return 0;
    }
    return static_cast<int>((e.pure_index >> (e.system.size() - 1)) & 1U);
}

/// Ratio of the input deviation to that of a pure basis state, used to put
/// receiver noise on the scale of the actual signal.
double signal_scale(const ExperimentConfig& e) {
    const auto inputs = prepare_inputs(e);
    Matrix mean = Matrix::Zero(inputs.front().matrix().rows(), inputs.front().matrix().cols());
    for (const auto& rho : inputs) {
        mean += rho.matrix();
    }
    mean /= static_cast<double>(inputs.size());
    const DensityMatrix avg(mean, DensityMatrix::Form::full);
    return avg.deviation().matrix().norm() /
           DensityMatrix::basis_state(e.system.dim(), 0).deviation().matrix().norm();
}

struct Acquired {
    Fid fid;
    Spectrum spec;
    LineIntegrals lines;
    double noise_floor = 1e-12;
};

Acquired acquire(const AppConfig& c, const Preparation& prep, std::size_t spin, const ReadoutPair& pair) {
    const SpinSystem& sys = c.experiment.system;
    const std::string label = sys.spin(spin).label;
    const AcquisitionOptions opts = c.acquisition_options();
    Acquired a;
    a.fid = acquire_fid(prep(pair), sys, label, opts);
    if (c.noise.enabled) {
        if (c.noise.receiver_snr.size() != sys.size()) {
            throw ConfigError("noise.receiver_snr needs one entry per spin");
        }
        const double sigma = reference_peak_height(sys, label, opts) / c.noise.receiver_snr[spin] *
                             signal_scale(c.experiment);
        std::mt19937_64 rng(*c.noise.seed + spin);
        add_receiver_noise(a.fid, sigma, rng);
        // Five standard deviations of a window sum of independent bins.
        a.noise_floor = 5.0 * sigma * std::sqrt(2.0 * static_cast<double>(c.acquisition.window_bins) + 1.0);
    }
    a.spec = spectrum(a.fid, opts.line_broadening_hz);
    a.lines = line_integrals(a.spec, sys.j_hz(0, 1), c.acquisition.window_bins);
    return a;
}

std::string state_label(const ExperimentConfig& e) {
    switch (e.input_mode) {
        case InputMode::pure: {
            std::string bits;
            for (std::size_t k = e.system.size(); k-- > 0;) {
                bits += ((e.pure_index >> k) & 1U) ? '1' : '0';
            }
            return "pure |" + bits + ">";
        }
        case InputMode::thermal:
            return "thermal";
        case InputMode::temporal_average:
            return "temporal_average";
    }
    return "?";
}

int cmd_run_dj(const Globals& g, const ExperimentFlags& flags, std::ostream& out) {
    Context ctx = load_context(g, "run-dj", &flags, true);
    const AppConfig& c = ctx.config;
    const ExperimentConfig& e = c.experiment;
    const Preparation prep = preparation(c);
    const Acquired a = acquire(c, prep, 0, {ReadoutPulse::x, ReadoutPulse::none});
    const int bit = input_bit(e);

    std::string verdict = "inconclusive";
    int code = kOk;
    try {
        verdict = std::string(verdict_name(classify_spectrum(a.lines.low, a.lines.high, a.noise_floor, bit)));
    } catch (const InconclusiveError&) {
        code = kInconclusive;
    }
    const DensityMatrix final_state = prep({ReadoutPulse::none, ReadoutPulse::none});
    std::string dm_verdict = "inconclusive";
    try {
        dm_verdict = std::string(verdict_name(classify(final_state, bit)));
    } catch (const InconclusiveError&) {
    }

    std::ostringstream summary;
    summary << "oracle: " << oracle_name(e.oracle) << "\n"
            << "input: " << state_label(e) << "\n"
            << "noise: " << (c.noise.enabled ? "on" : "off") << "\n"
            << "low line (A, work qubit |0>): " << format_double(a.lines.low.real()) << " "
            << format_double(a.lines.low.imag()) << "i\n"
            << "high line (A, work qubit |1>): " << format_double(a.lines.high.real()) << " "
            << format_double(a.lines.high.imag()) << "i\n"
            << "work-qubit-|0> polarization of A: " << format_double(work_zero_polarization(final_state)) << "\n"
            << "verdict (spectrum): " << verdict << "\n"
            << "verdict (density matrix): " << dm_verdict << "\n";

    ArtifactWriter w;
    w.add("spectrum.csv", spectrum_csv(a.spec));
    w.add("fid.csv", fid_csv(a.fid));
    w.add_json("verdict.json", json{{"oracle", oracle_name(e.oracle)}, {"verdict", verdict}});
    w.add("summary.txt", summary.str());
    w.commit(g.out_dir, ctx.manifest);
    out << summary.str();
    return code;
}

int cmd_tomography(const Globals& g, const ExperimentFlags& flags, std::ostream& out) {
    Context ctx = load_context(g, "tomography", &flags, true);
    const AppConfig& c = ctx.config;
    ExperimentConfig ideal = c.experiment;
    ideal.noise_enabled = false;
    const DensityMatrix theory = run_experiment(ideal);
    TomographySettings settings = c.tomography_settings();
    if (settings.noise) {
        settings.noise->signal_scale = signal_scale(c.experiment);
    }
    const TomographyResult r = tomography(preparation(c), c.experiment.system, theory, settings);

    ArtifactWriter w;
    w.add_json("tomography.json", tomography_json(r, oracle_name(c.experiment.oracle)));
    w.add("tomography_bars.csv", tomography_bars_csv(r));
    w.commit(g.out_dir, ctx.manifest);
    out << "oracle: " << oracle_name(c.experiment.oracle) << "\n"
        << "epsilon: " << format_double(r.epsilon) << "\n"
        << "pure population: " << format_double(r.pure_population) << "\n"
        << "max other element: " << format_double(r.max_other_element) << "\n";
    return kOk;
}

int cmd_calibrate(const Globals& g, std::ostream& out) {
    Context ctx = load_context(g, "calibrate", nullptr, false);
    const AppConfig& c = ctx.config;
    const SpinSystem& sys = c.experiment.system;
    const auto pol = c.experiment.resolved_polarization();

    const RfInhomogeneityModel model = noise_model(c);
    json members = json::array();
    for (const auto& m : model.members) {
        members.push_back({{"scale", m.scale}, {"weight", m.weight}});
    }
    json result;
    result["envelope"] = {{"target_s", c.noise.envelope_time_constant_s},
                          {"fitted_s", model.envelope_time_constant_s},
                          {"flip_calibration", model.flip_calibration},
                          {"members", std::move(members)}};
    result["t1"] = json::array();
    result["t2"] = json::array();
    for (const auto& s : sys.spins()) {
        std::vector<double> delays;
        for (int i = 0; i < 12; ++i) {
            delays.push_back(s.t1_s * (0.1 + (3.0 - 0.1) * i / 11.0));
        }
        const auto ir = inversion_recovery(sys, s.label, delays, pol);
        result["t1"].push_back({{"spin", s.label}, {"configured_s", s.t1_s}, {"fitted_s", ir.t1_s}});

        std::vector<int> counts;
        for (int n = 0; n <= 100; n += 5) {
            counts.push_back(n);
        }
        const auto cp = cpmg(sys, s.label, s.t2_s / 50.0, counts, pol);
        result["t2"].push_back({{"spin", s.label}, {"configured_s", s.t2_s}, {"fitted_s", cp.t2_s}});
    }
    json durations = json::object();
    for (Oracle o : kAllOracles) {
        PulseProgram p = dj_program(o);
        p.tau_s = c.experiment.tau_s;
        durations[std::string(oracle_name(o))] = duration(p, sys, c.noise.pulse_width_s);
    }
    result["pulse_width_s"] = c.noise.pulse_width_s;
    result["algorithm_duration_s"] = std::move(durations);

    ArtifactWriter w;
    w.add_json("calibration.json", result);
    w.commit(g.out_dir, ctx.manifest);
    out << result.dump(2) << "\n";
    return kOk;
}

int cmd_spectrum(const Globals& g, const ExperimentFlags& flags, const std::string& spin,
                 const std::string& readout, std::ostream& out) {
    Context ctx = load_context(g, "spectrum", &flags, true);
    const AppConfig& c = ctx.config;
    const SpinSystem& sys = c.experiment.system;
    const std::size_t k = sys.index_of(spin);
    if (k > 1) {
        throw ConfigError("spectrum: detected spin must be one of the first two spins");
    }
    ReadoutPulse pulse = ReadoutPulse::none;
    if (readout == "X") {
        pulse = ReadoutPulse::x;
    } else if (readout == "Y") {
        pulse = ReadoutPulse::y;
    } else if (readout != "none") {
        throw ConfigError("spectrum: --readout must be X, Y or none");
    }
    ReadoutPair pair;
    (k == 0 ? pair.a : pair.b) = pulse;
    const Acquired a = acquire(c, preparation(c), k, pair);
    const json lines = {{"spin", spin}, {"readout", readout}, {"lines", lines_json(a.lines)}};

    ArtifactWriter w;
    w.add("spectrum.csv", spectrum_csv(a.spec));
    w.add("fid.csv", fid_csv(a.fid));
    w.add_json("lines.json", lines);
    w.commit(g.out_dir, ctx.manifest);
    out << lines.dump(2) << "\n";
    return kOk;
}

int cmd_parse(const Globals& g, bool out_given, const std::string& text, const std::string& file,
              const std::string& preset, std::ostream& out) {
    Context ctx = load_context(g, "parse", nullptr, false);
    const int sources = !text.empty() + !file.empty() + !preset.empty();
    if (sources != 1) {
        throw ConfigError("parse: give exactly one of PROGRAM, --file or --preset");
    }
    std::string source = text;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) {
            throw ConfigError("cannot open program file '" + file + "'");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        source = ss.str();
    } else if (!preset.empty()) {
        source = std::string(oracle_preset(preset));
    }
    const auto labels = ctx.config.experiment.system.labels();
    PulseProgram p = parse(source, labels);
    p.tau_s = ctx.config.experiment.tau_s;
    const json ir = program_json(p, ctx.config.experiment.system);
    if (out_given) {
        ArtifactWriter w;
        w.add_json("program.json", ir);
        w.commit(g.out_dir, ctx.manifest);
    }
    out << ir.dump(2) << "\n";
    return kOk;
}

void add_experiment_flags(CLI::App* sub, ExperimentFlags& f) {
    sub->add_option("--oracle", f.oracle, "Oracle preset f1..f4");
    sub->add_option("--input", f.input, "pure, thermal or temporal_average");
    sub->add_option("--pure-state", f.pure_state, "Basis state for pure input, e.g. 00");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-spin NMR Deutsch-Jozsa simulator", "spinsim"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON config (falls back to $SPINSIM_CONFIG)");
    app.add_option("--seed", g.seed, "RNG seed, required for noisy runs");
    auto* out_opt = app.add_option("--out", g.out_dir, "Output directory");
    auto* noise = app.add_flag("--noise", g.noise, "Enable the noise model");
    auto* no_noise = app.add_flag("--no-noise", g.no_noise, "Disable the noise model");
    noise->excludes(no_noise);

    ExperimentFlags dj_flags, tomo_flags, spec_flags;
    auto* run_dj = app.add_subcommand("run-dj", "Run the algorithm and classify the oracle");
    add_experiment_flags(run_dj, dj_flags);
    auto* tomo = app.add_subcommand("tomography", "Nine-experiment state tomography");
    add_experiment_flags(tomo, tomo_flags);
    auto* calib = app.add_subcommand("calibrate", "Fit envelope, T1 and T2 from simulated sequences");
    auto* spec = app.add_subcommand("spectrum", "Acquire one FID and its spectrum");
    add_experiment_flags(spec, spec_flags);
    std::string spin = "A";
    std::string readout = "X";
    spec->add_option("--spin", spin, "Detected spin label");
    spec->add_option("--readout", readout, "Readout pulse on the detected spin: X, Y or none");
    auto* parse_cmd = app.add_subcommand("parse", "Dump the IR of a pulse program as JSON");
    std::string text, file, preset;
    parse_cmd->add_option("program", text, "Pulse program text");
    parse_cmd->add_option("--file", file, "Read the program from a file");
    parse_cmd->add_option("--preset", preset, "Oracle preset f1..f4");
    for (auto* sub : {run_dj, tomo, calib, spec, parse_cmd}) {
        sub->fallthrough();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*run_dj) {
            return cmd_run_dj(g, dj_flags, out);
        }
        if (*tomo) {
            return cmd_tomography(g, tomo_flags, out);
        }
        if (*calib) {
            return cmd_calibrate(g, out);
        }
        if (*spec) {
            return cmd_spectrum(g, spec_flags, spin, readout, out);
        }
        return cmd_parse(g, out_opt->count() > 0, text, file, preset, out);
    } catch (const InconclusiveError& e) {
        err << "inconclusive: " << e.what() << "\n";
        return kInconclusive;
    } catch (const FitError& e) {
        err << "fit failure: " << e.what() << "\n";
        return kInconclusive;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace spinsim::cli
