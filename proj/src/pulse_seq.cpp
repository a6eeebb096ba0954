#include "spinsim/pulse_seq.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace spinsim {

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

double phase_of(PulseAxis axis) {
    switch (axis) {
        case PulseAxis::x:
            return 0.0;
        case PulseAxis::y:
            return kPi / 2.0;
        case PulseAxis::xbar:
            return kPi;
        case PulseAxis::ybar:
            return 3.0 * kPi / 2.0;
    }
    return 0.0;
}

std::string_view axis_name(PulseAxis axis) {
    switch (axis) {
        case PulseAxis::x:
            return "X";
        case PulseAxis::y:
            return "Y";
        case PulseAxis::xbar:
            return "Xbar";
        case PulseAxis::ybar:
            return "Ybar";
    }
    return "?";
}

double Delay::seconds(double tau_s) const {
    switch (kind) {
        case Kind::tau:
            return tau_s;
        case Kind::half_tau:
            return tau_s / 2.0;
        case Kind::literal:
            switch (unit) {
                case TimeUnit::s:
                    return value;
                case TimeUnit::ms:
                    return value * 1e-3;
                case TimeUnit::us:
                    return value * 1e-6;
            }
    }
    return 0.0;
}

bool PulseProgram::has_symbolic_delay() const {
    for (const auto& group : groups) {
        for (const auto& ev : group) {
            if (const auto* d = std::get_if<Delay>(&ev); d && d->kind != Delay::Kind::literal) {
                return true;
            }
        }
    }
    return false;
}

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string> known)
        : text_(text), known_(known) {}

    PulseProgram run() {
        PulseProgram program;
        PulseGroup current;
        std::size_t group_start = 0;
        bool seen_separator = false;
        skip_space();
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '-') {
                if (current.empty()) {
                    throw ParseError("empty group before '-'", pos_);
                }
                program.groups.push_back(std::move(current));
                current.clear();
                seen_separator = true;
                ++pos_;
                group_start = pos_;
            } else if (is_ident_start(c)) {
                current.push_back(word());
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                current.push_back(literal_delay());
            } else {
                throw ParseError(std::string("unexpected character '") + c + "'", pos_);
            }
            skip_space();
        }
        if (current.empty()) {
            if (seen_separator) {
                throw ParseError("empty group after '-'", group_start);
            }
        } else {
            program.groups.push_back(std::move(current));
        }
        return program;
    }

private:
    void skip_space() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    PulseEvent word() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "tau") {
            if (text_.substr(pos_, 2) == "/2") {
                pos_ += 2;
                return Delay::half_tau();
            }
            if (pos_ < text_.size() && text_[pos_] == '/') {
                throw ParseError("only tau/2 is supported as a fraction of tau", pos_);
            }
            return Delay::tau();
        }
        static constexpr std::array<PulseAxis, 4> kAxes = {PulseAxis::x, PulseAxis::y,
                                                           PulseAxis::xbar, PulseAxis::ybar};
        for (PulseAxis axis : kAxes) {
            if (name == axis_name(axis)) {
                return Rotation{spin_label(), axis, kPi / 2.0};
            }
        }
        throw ParseError("unknown token '" + std::string(name) + "'", start);
    }

    std::string spin_label() {
        if (pos_ >= text_.size() || text_[pos_] != '(') {
            throw ParseError("expected '(' after rotation name", pos_);
        }
        ++pos_;
        const std::size_t start = pos_;
        if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) {
            throw ParseError("expected spin label", pos_);
        }
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
            ++pos_;
        }
        std::string label(text_.substr(start, pos_ - start));
        if (pos_ >= text_.size() || text_[pos_] != ')') {
            throw ParseError("expected ')' after spin label", pos_);
        }
        ++pos_;
        if (!known_.empty() && std::find(known_.begin(), known_.end(), label) == known_.end()) {
            throw ParseError("unknown spin '" + label + "'", start);
        }
        return label;
    }

    PulseEvent literal_delay() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
            ++pos_;
        }
        const std::string_view digits = text_.substr(start, pos_ - start);
        double value = 0.0;
        const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value,
                                         std::chars_format::fixed);
        if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size()) {
            throw ParseError("malformed duration '" + std::string(digits) + "'", start);
        }
        const std::size_t unit_start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        const std::string_view unit = text_.substr(unit_start, pos_ - unit_start);
        if (unit == "s") {
            return Delay::literal(value, TimeUnit::s);
        }
        if (unit == "ms") {
            return Delay::literal(value, TimeUnit::ms);
        }
        if (unit == "us") {
            return Delay::literal(value, TimeUnit::us);
        }
        throw ParseError("malformed duration: expected unit ms, us or s", unit_start);
    }

    std::string_view text_;
    std::span<const std::string> known_;
    std::size_t pos_ = 0;
};

std::string_view unit_name(TimeUnit unit) {
    switch (unit) {
        case TimeUnit::s:
            return "s";
        case TimeUnit::ms:
            return "ms";
        case TimeUnit::us:
            return "us";
    }
    return "s";
}

std::string render_event(const PulseEvent& ev) {
    if (const auto* r = std::get_if<Rotation>(&ev)) {
        if (r->flip != kPi / 2.0) {
            throw std::invalid_argument("render: only pi/2 rotations have a notation");
        }
        return std::string(axis_name(r->axis)) + "(" + r->spin + ")";
    }
    const auto& d = std::get<Delay>(ev);
    switch (d.kind) {
        case Delay::Kind::tau:
            return "tau";
        case Delay::Kind::half_tau:
            return "tau/2";
        case Delay::Kind::literal: {
            if (!(d.value >= 0.0) || !std::isfinite(d.value)) {
                throw std::invalid_argument("render: delay must be finite and >= 0");
            }
            std::array<char, 64> buf{};
            const auto res =
                std::to_chars(buf.data(), buf.data() + buf.size(), d.value, std::chars_format::fixed);
            return std::string(buf.data(), res.ptr) + std::string(unit_name(d.unit));
        }
    }
    return {};
}

}  // namespace

PulseProgram parse(std::string_view text, std::span<const std::string> known_spins) {
    return Parser(text, known_spins).run();
}

std::string render(const PulseProgram& program) {
    std::string out;
    for (std::size_t g = 0; g < program.groups.size(); ++g) {
        if (g > 0) {
            out += " - ";
        }
        const auto& group = program.groups[g];
        for (std::size_t e = 0; e < group.size(); ++e) {
            if (e > 0) {
                out += ' ';
            }
            out += render_event(group[e]);
        }
    }
    return out;
}

PulseProgram concat(const PulseProgram& first, const PulseProgram& second) {
    PulseProgram out = first;
    out.groups.insert(out.groups.end(), second.groups.begin(), second.groups.end());
    if (!out.tau_s) {
        out.tau_s = second.tau_s;
    }
    return out;
}

double resolve_tau(const PulseProgram& program, const SpinSystem& system) {
    if (program.tau_s) {
        if (!(*program.tau_s > 0.0)) {
            throw std::invalid_argument("tau override must be > 0");
        }
        return *program.tau_s;
    }
    const double j = system.size() >= 2 ? system.j_hz(0, 1) : 0.0;
    if (j != 0.0) {
        return 1.0 / (2.0 * std::abs(j));
    }
    if (program.has_symbolic_delay()) {
        throw std::invalid_argument("tau is unresolved: program uses tau but J = 0");
    }
    return 0.0;
}

OperatorMatrix compile(const PulseProgram& program, const SpinSystem& system,
                       const CompileOptions& options) {
    const double tau = resolve_tau(program, system);
    const OperatorMatrix h = hamiltonian(system);
    OperatorMatrix u = OperatorMatrix::identity(system.dim());
    for (const auto& group : program.groups) {
        for (const auto& ev : group) {
            if (const auto* r = std::get_if<Rotation>(&ev)) {
                u = rf_rotation(system, r->spin, phase_of(r->axis), r->flip * options.flip_scale) * u;
            } else {
                u = free_propagator(h, std::get<Delay>(ev).seconds(tau)) * u;
            }
        }
    }
    return u;
}

double duration(const PulseProgram& program, const SpinSystem& system, double pulse_width_s) {
    if (!(pulse_width_s >= 0.0)) {
        throw std::invalid_argument("pulse width must be >= 0");
    }
    const double tau = resolve_tau(program, system);
    double total = 0.0;
    for (const auto& group : program.groups) {
        for (const auto& ev : group) {
            if (const auto* d = std::get_if<Delay>(&ev)) {
                total += d->seconds(tau);
            } else {
                total += pulse_width_s;
            }
        }
    }
    return total;
}

std::string_view oracle_preset(std::string_view name) {
    if (name == "f1") {
        return "tau/2 - X(B) X(B) - tau/2 - X(B) X(B)";
    }
    if (name == "f2") {
        return "tau/2 - X(B) X(B) - tau/2";
    }
    if (name == "f3") {
        return "Y(B) - tau - Ybar(B) X(B) - Ybar(A) Xbar(A) Y(A)";
    }
    if (name == "f4") {
        return "Y(B) - tau - Ybar(B) Xbar(B) - Ybar(A) Xbar(A) Y(A)";
    }
    throw std::invalid_argument("unknown oracle '" + std::string(name) + "' (expected f1..f4)");
}

PulseProgram oracle_program(std::string_view name) {
    return parse(oracle_preset(name));
}

}  // namespace spinsim
