#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "voxpop/core.hpp"

namespace voxpop {

// UTC calendar date stored as days since the civil epoch (1970-01-01).
class Date {
public:
    Date() = default;
    explicit Date(int32_t days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int year, unsigned month, unsigned day) {
        using namespace std::chrono;
        const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                 std::chrono::day{day}};
        return Date(static_cast<int32_t>(sys_days(ymd).time_since_epoch().count()));
    }

    static std::optional<Date> parse(std::string_view s) {
        int y = 0, m = 0, d = 0;
        char dash1 = 0, dash2 = 0;
        if (std::sscanf(std::string(s).c_str(), "%d%c%d%c%d", &y, &dash1, &m, &dash2, &d) != 5)
            return std::nullopt;
        if (dash1 != '-' || dash2 != '-') return std::nullopt;
        if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
        using namespace std::chrono;
        const year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                 std::chrono::day{unsigned(d)}};
        if (!ymd.ok()) return std::nullopt;
        return Date::from_ymd(y, unsigned(m), unsigned(d));
    }

    std::string str() const {
        using namespace std::chrono;
        const year_month_day ymd{sys_days{days{days_}}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                      unsigned(ymd.day()));
        return buf;
    }

    int32_t days() const { return days_; }

    Date operator+(int32_t n) const { return Date(days_ + n); }
    Date operator-(int32_t n) const { return Date(days_ - n); }
    int32_t operator-(Date other) const { return days_ - other.days_; }
    Date& operator++() { ++days_; return *this; }

    auto operator<=>(const Date&) const = default;

private:
    int32_t days_ = 0;
};

// Second-resolution UTC instant.
struct Timestamp {
    int64_t seconds_since_epoch = 0;

    Date date() const {
        // Floor division handles pre-epoch instants, not that the corpus has any.
        int64_t d = seconds_since_epoch / 86400;
        if (seconds_since_epoch % 86400 < 0) --d;
        return Date(static_cast<int32_t>(d));
    }

    // Accepts "YYYY-MM-DDTHH:MM:SS" with optional trailing "Z"; a space may
    // replace the 'T'.
    static std::optional<Timestamp> parse(std::string_view s) {
        int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
        char sep = 0;
        const int n =
            std::sscanf(std::string(s).c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &sec);
        if (n != 7 || (sep != 'T' && sep != ' ')) return std::nullopt;
        if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
        if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) return std::nullopt;
        using namespace std::chrono;
        const year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                 std::chrono::day{unsigned(d)}};
        if (!ymd.ok()) return std::nullopt;
        const int64_t days = sys_days(ymd).time_since_epoch().count();
        return Timestamp{days * 86400 + h * 3600 + mi * 60 + sec};
    }

    std::string str() const {
        const Date d = date();
        int64_t rem = seconds_since_epoch - int64_t(d.days()) * 86400;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", d.str().c_str(), int(rem / 3600),
                      int((rem / 60) % 60), int(rem % 60));
        return buf;
    }
};

}  // namespace voxpop
