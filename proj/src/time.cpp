/*
   Copyright 2026 The minicube Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "minicube/time.hpp"

#include <cstdio>

#include "minicube/error.hpp"

namespace minicube {

namespace {

bool read_digits(std::string_view text, std::size_t& pos, int count, int& out) {
    if (pos + count > text.size()) return false;
    int v = 0;
    for (int i = 0; i < count; ++i) {
        char ch = text[pos + i];
        if (ch < '0' || ch > '9') return false;
        v = v * 10 + (ch - '0');
    }
    pos += count;
    out = v;
    return true;
}

instant assemble(int year, int month, int day, int day_of_year, int hour, int minute, int second,
                 std::string_view text) {
    using namespace std::chrono;
    sys_days date;
    if (day_of_year > 0) {
        if (day_of_year > 366) throw error(errc::invalid_argument, "day of year out of range in '" + std::string(text) + "'");
        date = sys_days(std::chrono::year(year) / January / 1) + days(day_of_year - 1);
    } else {
        year_month_day ymd{std::chrono::year(year), std::chrono::month(static_cast<unsigned>(month)),
                           std::chrono::day(static_cast<unsigned>(day))};
        if (!ymd.ok()) throw error(errc::invalid_argument, "invalid calendar date in '" + std::string(text) + "'");
        date = sys_days(ymd);
    }
    if (hour > 23 || minute > 59 || second > 60) {
        throw error(errc::invalid_argument, "invalid time of day in '" + std::string(text) + "'");
    }
    return instant(date) + hours(hour) + minutes(minute) + seconds(second);
}

}  // namespace

std::string format_iso(instant t) {
    using namespace std::chrono;
    auto day = floor<days>(t);
    year_month_day ymd(day);
    hh_mm_ss hms(t - day);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

instant parse_iso(std::string_view text) {
    std::string_view t = text;
    if (!t.empty() && (t.back() == 'Z' || t.back() == 'z')) t.remove_suffix(1);
    if (t.size() == 10) return parse_timestamp(t, "%Y-%m-%d");
    if (t.size() == 19 && t[10] == ' ') return parse_timestamp(t, "%Y-%m-%d %H:%M:%S");
    return parse_timestamp(t, "%Y-%m-%dT%H:%M:%S");
}

instant parse_timestamp(std::string_view text, std::string_view format) {
    int year = 1970, month = 1, day = 1, doy = 0, hour = 0, minute = 0, second = 0;
    std::size_t pos = 0;
    auto fail = [&]() {
        return error(errc::invalid_argument,
                     "timestamp '" + std::string(text) + "' does not match format '" + std::string(format) + "'");
    };
    for (std::size_t i = 0; i < format.size(); ++i) {
        char f = format[i];
        if (f != '%') {
            if (pos >= text.size() || text[pos] != f) throw fail();
            ++pos;
            continue;
        }
        if (++i >= format.size()) throw error(errc::invalid_argument, "dangling '%' in format");
        bool ok = true;
        switch (format[i]) {
            case 'Y': ok = read_digits(text, pos, 4, year); break;
            case 'm': ok = read_digits(text, pos, 2, month); break;
            case 'd': ok = read_digits(text, pos, 2, day); break;
            case 'j': ok = read_digits(text, pos, 3, doy); break;
            case 'H': ok = read_digits(text, pos, 2, hour); break;
            case 'M': ok = read_digits(text, pos, 2, minute); break;
            case 'S': ok = read_digits(text, pos, 2, second); break;
            case '%': ok = pos < text.size() && text[pos++] == '%'; break;
            default:
                throw error(errc::invalid_argument, std::string("unsupported format directive %") + format[i]);
        }
        if (!ok) throw fail();
    }
    if (pos != text.size()) throw fail();
    return assemble(year, month, day, doy, hour, minute, second, text);
}

instant now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

}  // namespace minicube
