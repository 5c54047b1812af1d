#include "rollidx/core/dates.hpp"

#include "rollidx/core/errors.hpp"

#include <charconv>

namespace rollidx {

namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(int serial) {
    return chr::year_month_day(chr::sys_days(chr::days(serial)));
}

} // namespace

Date::Date(int year, unsigned month, unsigned day) {
    const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok())
        throw ValidationError("invalid calendar date: " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
    serial_ = static_cast<int>(chr::sys_days(ymd).time_since_epoch().count());
}

Date Date::parse_iso(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ValidationError("expected ISO date YYYY-MM-DD, got '" + text + "'");
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse_field = [&text](int lo, int hi, auto& out) {
        auto res = std::from_chars(text.data() + lo, text.data() + hi, out);
        if (res.ec != std::errc() || res.ptr != text.data() + hi)
            throw ValidationError("expected ISO date YYYY-MM-DD, got '" + text + "'");
    };
    parse_field(0, 4, y);
    parse_field(5, 7, m);
    parse_field(8, 10, d);
    return Date(y, m, d);
}

int Date::year() const { return static_cast<int>(to_ymd(serial_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(serial_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(serial_).day()); }

int Date::weekday() const {
    const chr::weekday wd{chr::sys_days(chr::days(serial_))};
    return static_cast<int>(wd.c_encoding());
}

std::string Date::to_iso() const {
    const auto ymd = to_ymd(serial_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return std::string(buf);
}

bool is_business_day(Date d) {
    const int wd = d.weekday();
    return wd != 0 && wd != 6;
}

Date next_business_day(Date d) {
    Date out = d + 1;
    while (!is_business_day(out)) out = out + 1;
    return out;
}

Date previous_business_day(Date d) {
    Date out = d - 1;
    while (!is_business_day(out)) out = out - 1;
    return out;
}

Date add_business_days(Date d, int n) {
    if (n < 0) throw ValidationError("add_business_days: n must be non-negative");
    Date out = d;
    for (int i = 0; i < n; ++i) out = next_business_day(out);
    return out;
}

std::vector<Date> business_day_grid(Date from, Date to) {
    if (to < from) throw ValidationError("business_day_grid: 'to' before 'from'");
    std::vector<Date> grid;
    grid.reserve(static_cast<std::size_t>(to - from) * 5 / 7 + 2);
    for (Date d = from; d <= to; d = d + 1)
        if (is_business_day(d)) grid.push_back(d);
    return grid;
}

Date nth_business_day_of_month(int year, unsigned month, int n) {
    if (n < 1) throw ValidationError("nth_business_day_of_month: n must be >= 1");
    Date d(year, month, 1);
    int count = 0;
    while (d.month() == month) {
        if (is_business_day(d) && ++count == n) return d;
        d = d + 1;
    }
    throw ValidationError("month " + std::to_string(year) + "-" + std::to_string(month) +
                          " has fewer than " + std::to_string(n) + " business days");
}

} // namespace rollidx
