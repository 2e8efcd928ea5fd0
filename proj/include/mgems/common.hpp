#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mgems {

constexpr int kPhases = 3;

// Error with a stable machine-readable code plus a human message.
// Codes are dotted paths such as "series.coverage" or "grids.divisibility".
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

// Minutes since the Unix epoch for an ISO-8601 local timestamp
// ("YYYY-MM-DDTHH:MM" with optional ":SS"; a space also accepted as the
// date/time separator). Seconds must be zero: all grids here are minute-based.
int64_t parse_iso_minutes(const std::string& iso);

std::string format_iso_minutes(int64_t minutes_since_epoch);

// Fixed-format double used everywhere a file is written, so that identical
// runs produce identical bytes.
std::string format_double(double v);

}  // namespace mgems
