#include "mgems/common.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>

namespace mgems {

namespace {

// Days from civil date, Howard Hinnant's algorithm. Valid far beyond any
// restoration window we care about.
int64_t days_from_civil(int64_t y, int64_t m, int64_t d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int64_t& y, int64_t& m, int64_t& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = yoe + era * 400;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

}  // namespace

int64_t parse_iso_minutes(const std::string& iso) {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    char sep = 0;
    int got = std::sscanf(iso.c_str(), "%d-%d-%d%c%d:%d:%d", &year, &month, &day,
                          &sep, &hour, &minute, &second);
    if (got < 6 || (sep != 'T' && sep != ' '))
        throw ScenarioError("time.format", "not an ISO-8601 timestamp: '" + iso + "'");
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59)
        throw ScenarioError("time.range", "timestamp field out of range: '" + iso + "'");
    if (got == 7 && second != 0)
        throw ScenarioError("time.resolution", "sub-minute timestamp: '" + iso + "'");
    return days_from_civil(year, month, day) * 1440 + hour * 60 + minute;
}

std::string format_iso_minutes(int64_t minutes_since_epoch) {
    int64_t days = minutes_since_epoch / 1440;
    int64_t rem = minutes_since_epoch % 1440;
    if (rem < 0) {
        rem += 1440;
        days -= 1;
    }
    int64_t y, m, d;
    civil_from_days(days, y, m, d);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lldT%02lld:%02lld:00",
                  static_cast<long long>(y), static_cast<long long>(m),
                  static_cast<long long>(d), static_cast<long long>(rem / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace mgems
