#pragma once

// Quantity strings for config files: "<2pi*><number><unit>", e.g. "2pi*520 MHz",
// "0.1 uW", "2pi*2.0GHz". A leading "2pi*" (or "2*pi*") multiplies by 2*pi,
// which is how angular rates are written; "rad/s" is angular with no further
// conversion. The parse reports the unit's dimension and whether the text was
// already angular, so config loading can convert cyclic frequencies once and
// exactly once — the 2pi pitfall is the dominant reproduction risk.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace bistab {

enum class Dimension { None, Frequency, Power, Time };

// Parsed quantity before any angular-frequency convention is applied: `value`
// is in the unit's base scale (Hz, W, s) times the optional 2pi prefactor.
struct QuantityParts {
    double value = 0;
    bool angular_prefix = false; // text carried "2pi*" / "2*pi*"
    bool angular_unit = false;   // unit itself is angular ("rad/s")
    Dimension dim = Dimension::None;
};

namespace detail {

inline std::string_view strip_spaces(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool unit_scale(std::string_view u, double& scale, Dimension& dim, bool& angular) {
    struct Entry { const char* name; double scale; Dimension dim; bool angular; };
    // frequencies in Hz, powers in W, times in s; bare prefixes not accepted.
    // "rad/s" is angular as-is — no 2pi conversion applies on top of it.
    static constexpr Entry table[] = {
        {"Hz", 1.0, Dimension::Frequency, false},   {"kHz", 1e3, Dimension::Frequency, false},
        {"MHz", 1e6, Dimension::Frequency, false},  {"GHz", 1e9, Dimension::Frequency, false},
        {"THz", 1e12, Dimension::Frequency, false},
        {"rad/s", 1.0, Dimension::Frequency, true},
        {"W", 1.0, Dimension::Power, false},        {"mW", 1e-3, Dimension::Power, false},
        {"uW", 1e-6, Dimension::Power, false},      {"nW", 1e-9, Dimension::Power, false},
        {"pW", 1e-12, Dimension::Power, false},
        {"s", 1.0, Dimension::Time, false},         {"ms", 1e-3, Dimension::Time, false},
        {"us", 1e-6, Dimension::Time, false},       {"ns", 1e-9, Dimension::Time, false},
        {"ps", 1e-12, Dimension::Time, false},
    };
    for (const auto& e : table) {
        if (u == e.name) { scale = e.scale; dim = e.dim; angular = e.angular; return true; }
    }
    return false;
}

} // namespace detail

// Parse a quantity string, keeping the unit dimension and whether the angular
// "2pi*" prefix was written. Throws ConfigError on malformed input.
inline QuantityParts parse_quantity_parts(std::string_view text) {
    using detail::strip_spaces;
    std::string_view s = strip_spaces(text);
    if (s.empty()) throw ConfigError("empty quantity string");

    QuantityParts q;
    double prefactor = 1.0;
    for (std::string_view tag : {std::string_view("2pi*"), std::string_view("2*pi*")}) {
        if (s.size() > tag.size() && s.substr(0, tag.size()) == tag) {
            prefactor = 2.0 * M_PI;
            q.angular_prefix = true;
            s = strip_spaces(s.substr(tag.size()));
            break;
        }
    }

    std::string buf(s);
    char* end = nullptr;
    double value = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str())
        throw ConfigError("cannot parse number in quantity '" + std::string(text) + "'");

    std::string_view rest = strip_spaces(std::string_view(end));
    double scale = 1.0;
    if (!rest.empty() && !detail::unit_scale(rest, scale, q.dim, q.angular_unit))
        throw ConfigError("unknown unit '" + std::string(rest) + "' in quantity '" +
                          std::string(text) + "'");

    q.value = prefactor * value * scale;
    return q;
}

// Plain scale-factor parse: "2pi*520 MHz" -> 2*pi*520e6, "0.1 uW" -> 1e-7.
inline double parse_quantity(std::string_view text) {
    return parse_quantity_parts(text).value;
}

} // namespace bistab
