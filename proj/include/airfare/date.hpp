#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace airfare {

/**
 * @brief Calendar date backed by a civil day count.
 *
 * Thin wrapper over std::chrono::sys_days so that day arithmetic,
 * ordering and month bucketing are exact integer operations. Parsing
 * and formatting are fixed to ISO-8601 (YYYY-MM-DD), locale independent.
 */
class Date {
public:
    Date() = default;

    /// Builds a date from civil components; throws ValidationError if the
    /// triple is not a real calendar day (e.g. 2009-02-30).
    Date(int year, unsigned month, unsigned day);

    /// Parses "YYYY-MM-DD". Throws ParseError on any deviation.
    static Date parse(std::string_view iso);

    int year() const { return int(ymd().year()); }
    unsigned month() const { return unsigned(ymd().month()); }
    unsigned day() const { return unsigned(ymd().day()); }

    /// Months elapsed since year 0; adjacent months differ by exactly 1.
    int month_index() const { return year() * 12 + int(month()) - 1; }

    std::string to_string() const;

    /// "YYYY-MM", the month-granularity period label.
    std::string month_string() const;

    Date operator+(int days_delta) const {
        return Date(days_ + std::chrono::days{days_delta});
    }
    Date operator-(int days_delta) const { return *this + (-days_delta); }

    /// Calendar-day difference (positive when *this is later).
    long operator-(Date other) const { return (days_ - other.days_).count(); }

    auto operator<=>(const Date&) const = default;

private:
    explicit Date(std::chrono::sys_days d) : days_(d) {}
    std::chrono::year_month_day ymd() const {
        return std::chrono::year_month_day{days_};
    }

    std::chrono::sys_days days_{};
};

}  // namespace airfare
