// Pulse-sequence notation: parsing, rendering and compilation to propagators.
//
//   program := group ('-' group)*
//   group   := token+
//   token   := rot | delay
//   rot     := ('X' | 'Y' | 'Xbar' | 'Ybar') '(' spin ')'
//   delay   := 'tau' | 'tau/2' | number ('ms' | 'us' | 's')
//
// Events are read left to right; the leftmost event acts first on the state.
// '#' starts a comment that runs to the end of the line.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spinsim/spin_core.hpp"

namespace spinsim {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

enum class PulseAxis { x, y, xbar, ybar };

double phase_of(PulseAxis axis);
std::string_view axis_name(PulseAxis axis);

struct Rotation {
    std::string spin;
    PulseAxis axis = PulseAxis::x;
    double flip = kPi / 2.0;

    bool operator==(const Rotation&) const = default;
};

enum class TimeUnit { s, ms, us };

struct Delay {
    enum class Kind { tau, half_tau, literal };
    Kind kind = Kind::tau;
    double value = 0.0;  // in `unit`, literal delays only
    TimeUnit unit = TimeUnit::s;

    static Delay tau() { return {Kind::tau, 0.0, TimeUnit::s}; }
    static Delay half_tau() { return {Kind::half_tau, 0.0, TimeUnit::s}; }
    static Delay literal(double value, TimeUnit unit) { return {Kind::literal, value, unit}; }

    /// Duration in seconds given the resolved value of tau.
    double seconds(double tau_s) const;

    bool operator==(const Delay&) const = default;
};

using PulseEvent = std::variant<Rotation, Delay>;
using PulseGroup = std::vector<PulseEvent>;

struct PulseProgram {
    std::vector<PulseGroup> groups;
    std::optional<double> tau_s;  // overrides the default 1/(2 J)

    bool empty() const { return groups.empty(); }
    bool has_symbolic_delay() const;
    bool operator==(const PulseProgram&) const = default;
};

/// Parse pulse notation. When `known_spins` is non-empty, rotation labels must
/// be one of them. Throws ParseError carrying the character offset.
PulseProgram parse(std::string_view text, std::span<const std::string> known_spins = {});

/// Render back to canonical notation; render(parse(s)) reparses to the same IR.
/// Throws std::invalid_argument for rotations whose flip angle is not pi/2.
std::string render(const PulseProgram& program);

/// Groups of `first` followed by groups of `second`. The tau override of
/// `first` wins when both carry one.
PulseProgram concat(const PulseProgram& first, const PulseProgram& second);

/// Resolved tau: the program's override, else 1/(2 J) of the first two spins.
/// Throws std::invalid_argument if the program needs tau and none is defined.
double resolve_tau(const PulseProgram& program, const SpinSystem& system);

struct CompileOptions {
    double flip_scale = 1.0;  // multiplies every flip angle
};

/// Product of event propagators in temporal order: U = U_n ... U_2 U_1.
OperatorMatrix compile(const PulseProgram& program, const SpinSystem& system,
                       const CompileOptions& options = {});

/// Sum of delays, plus `pulse_width_s` for every rotation (0 = ideal pulses).
double duration(const PulseProgram& program, const SpinSystem& system,
                double pulse_width_s = 0.0);

/// The oracle sequences f1..f4 as text.
std::string_view oracle_preset(std::string_view name);
PulseProgram oracle_program(std::string_view name);

}  // namespace spinsim
