// Serialization of CLI outputs and the run manifest.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsim/pulse_seq.hpp"
#include "spinsim/readout.hpp"
#include "spinsim/tomography.hpp"

namespace spinsim::cli {

/// Shortest round-trip decimal form.
std::string format_double(double v);

std::string sha256_hex(std::string_view data);

std::string spectrum_csv(const Spectrum& s);
std::string fid_csv(const Fid& f);

nlohmann::json matrix_json(const Matrix& m);
nlohmann::json lines_json(const LineIntegrals& l);
nlohmann::json tomography_json(const TomographyResult& r, std::string_view oracle);

/// 16 rows "row,col" label with signed magnitudes of the displayed
/// (deviation + I/4) experimental and theoretical matrices.
std::string tomography_bars_csv(const TomographyResult& r);

nlohmann::json program_json(const PulseProgram& p, const SpinSystem& system);

/// Collects artifacts in memory, then writes each one atomically
/// (temporary file + rename) followed by manifest.json.
class ArtifactWriter {
public:
    void add(std::string name, std::string content);
    void add_json(std::string name, const nlohmann::json& j);

    /// `manifest` receives an "artifacts" object mapping names to SHA-256.
    void commit(const std::filesystem::path& dir, nlohmann::json manifest) const;

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace spinsim::cli
