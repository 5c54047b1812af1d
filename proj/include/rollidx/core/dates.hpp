#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <vector>

namespace rollidx {

// Calendar date backed by a serial day count (days since 1970-01-01).
// The engine quotes all maturities as dates and converts to year fractions
// with ACT/365F, so Date arithmetic stays integral and exact.
class Date {
public:
    Date() : serial_(0) {}
    explicit Date(int serial) : serial_(serial) {}
    Date(int year, unsigned month, unsigned day);

    static Date parse_iso(const std::string& text); // "YYYY-MM-DD"

    int serial() const noexcept { return serial_; }
    int year() const;
    unsigned month() const;     // 1..12
    unsigned day() const;       // 1..31
    int weekday() const;        // 0 = Sunday ... 6 = Saturday

    std::string to_iso() const;

    Date operator+(int days) const { return Date(serial_ + days); }
    Date operator-(int days) const { return Date(serial_ - days); }
    int operator-(const Date& rhs) const { return serial_ - rhs.serial_; }
    auto operator<=>(const Date&) const = default;

private:
    int serial_;
};

// ACT/365F: day count / 365, the convention used for every year fraction in
// the engine (curves, vol expiries, simulation steps).
inline double year_fraction(Date from, Date to) {
    return static_cast<double>(to - from) / 365.0;
}

// Business calendar: weekdays only, no holiday schedule.
bool is_business_day(Date d);
Date next_business_day(Date d);              // strictly after d
Date previous_business_day(Date d);          // strictly before d
Date add_business_days(Date d, int n);       // n >= 0, d itself not counted

// All business days in [from, to] inclusive, ascending.
std::vector<Date> business_day_grid(Date from, Date to);

// n-th business day of the given month, 1-based.  Throws ValidationError if
// the month has fewer than n business days.
Date nth_business_day_of_month(int year, unsigned month, int n);

} // namespace rollidx
