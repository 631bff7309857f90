#include "airfare/date.hpp"

#include <charconv>
#include <cstdio>

#include "airfare/errors.hpp"

namespace airfare {

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ValidationError("not a calendar date: " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
    }
    days_ = std::chrono::sys_days{ymd};
}

namespace {

bool parse_uint(std::string_view text, unsigned& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw ParseError("expected YYYY-MM-DD, got '" + std::string(iso) + "'");
    }
    unsigned y, m, d;
    if (!parse_uint(iso.substr(0, 4), y) || !parse_uint(iso.substr(5, 2), m) ||
        !parse_uint(iso.substr(8, 2), d)) {
        throw ParseError("expected YYYY-MM-DD, got '" + std::string(iso) + "'");
    }
    try {
        return Date(int(y), m, d);
    } catch (const ValidationError& e) {
        throw ParseError(std::string(e.what()));
    }
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

std::string Date::month_string() const {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02u", year(), month());
    return buf;
}

}  // namespace airfare
