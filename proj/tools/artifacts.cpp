#include "artifacts.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace spinsim::cli {

using nlohmann::json;

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

std::string spectrum_csv(const Spectrum& s) {
    std::string out = "freq_hz,real,imag\n";
    for (std::size_t k = 0; k < s.amplitudes.size(); ++k) {
        out += format_double(s.frequency_hz[k]) + "," + format_double(s.amplitudes[k].real()) + "," +
               format_double(s.amplitudes[k].imag()) + "\n";
    }
    return out;
}

std::string fid_csv(const Fid& f) {
    std::string out = "t_s,real,imag\n";
    for (std::size_t n = 0; n < f.samples.size(); ++n) {
        out += format_double(static_cast<double>(n) * f.dwell_s) + "," + format_double(f.samples[n].real()) +
               "," + format_double(f.samples[n].imag()) + "\n";
    }
    return out;
}

json matrix_json(const Matrix& m) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        json c = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            r.push_back(m(i, j).real());
            c.push_back(m(i, j).imag());
        }
        re.push_back(std::move(r));
        im.push_back(std::move(c));
    }
    return {{"real", std::move(re)}, {"imag", std::move(im)}};
}

json lines_json(const LineIntegrals& l) {
    return {{"low", {l.low.real(), l.low.imag()}}, {"high", {l.high.real(), l.high.imag()}}};
}

namespace {

std::string basis_label(Eigen::Index i) {
    return std::string{static_cast<char>('0' + ((i >> 1) & 1)), static_cast<char>('0' + (i & 1))};
}

double signed_magnitude(Complex z) {
    const double sign = z.real() != 0.0 ? (z.real() > 0.0 ? 1.0 : -1.0) : (z.imag() >= 0.0 ? 1.0 : -1.0);
    return sign * std::abs(z);
}

}  // namespace

json tomography_json(const TomographyResult& r, std::string_view oracle) {
    json experiments = json::array();
    for (const auto& e : r.data) {
        experiments.push_back({{"readout", e.pair.label()},
                               {"lines", {{"A", lines_json(e.lines[0])}, {"B", lines_json(e.lines[1])}}}});
    }
    return {{"oracle", oracle},
            {"epsilon", r.epsilon},
            {"target_state", basis_label(static_cast<Eigen::Index>(r.target_index))},
            {"pure_population", r.pure_population},
            {"max_other_element", r.max_other_element},
            {"experiment", matrix_json(r.normalized_experiment())},
            {"theory", matrix_json(r.normalized_theory())},
            {"experiments", std::move(experiments)}};
}

std::string tomography_bars_csv(const TomographyResult& r) {
    const Matrix e = r.normalized_experiment();
    const Matrix t = r.normalized_theory();
    std::string out = "element,experiment,theory\n";
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            out += basis_label(i) + "|" + basis_label(j) + "," + format_double(signed_magnitude(e(i, j))) + "," +
                   format_double(signed_magnitude(t(i, j))) + "\n";
        }
    }
    return out;
}

json program_json(const PulseProgram& p, const SpinSystem& system) {
    const double tau = resolve_tau(p, system);
    json groups = json::array();
    for (const auto& group : p.groups) {
        json g = json::array();
        for (const auto& ev : group) {
            if (const auto* r = std::get_if<Rotation>(&ev)) {
                g.push_back({{"type", "rotation"},
                             {"spin", r->spin},
                             {"axis", axis_name(r->axis)},
                             {"phase_rad", phase_of(r->axis)},
                             {"flip_rad", r->flip}});
            } else {
                const auto& d = std::get<Delay>(ev);
                const char* symbol = d.kind == Delay::Kind::tau ? "tau"
                                     : d.kind == Delay::Kind::half_tau ? "tau/2"
                                                                       : "literal";
                g.push_back({{"type", "delay"}, {"symbol", symbol}, {"seconds", d.seconds(tau)}});
            }
        }
        groups.push_back(std::move(g));
    }
    return {{"program", render(p)}, {"tau_s", tau}, {"groups", std::move(groups)}};
}

void ArtifactWriter::add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
}

void ArtifactWriter::add_json(std::string name, const json& j) {
    add(std::move(name), j.dump(2) + "\n");
}

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void ArtifactWriter::commit(const std::filesystem::path& dir, json manifest) const {
    std::filesystem::create_directories(dir);
    json sums = json::object();
    for (const auto& [name, content] : files_) {
        sums[name] = sha256_hex(content);
    }
    for (const auto& [name, content] : files_) {
        write_atomic(dir / name, content);
    }
    manifest["artifacts"] = std::move(sums);
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace spinsim::cli
