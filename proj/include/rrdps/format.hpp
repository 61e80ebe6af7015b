#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace rrdps {

// 12 significant digits, shortest form ("%.12g"). Every number we
// serialize goes through here so repeated runs stay byte-identical.
inline std::string format_g12(double x) {
    if (x == 0.0)
        x = 0.0;  // collapse -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// strict full-string double parse
inline double parse_double(const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    if (pos != text.size())
        throw std::invalid_argument("trailing characters in number: '" + text +
                                    "'");
    return v;
}

// strict full-string unsigned parse (64-bit range)
inline unsigned long long parse_uint(const std::string& text) {
    if (!text.empty() && text[0] == '-')
        throw std::invalid_argument("expected unsigned integer: '" + text +
                                    "'");
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("not an integer: '" + text + "'");
    }
    if (pos != text.size())
        throw std::invalid_argument("trailing characters in integer: '" +
                                    text + "'");
    return v;
}

// strict full-string integer parse
inline long long parse_int(const std::string& text) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("not an integer: '" + text + "'");
    }
    if (pos != text.size())
        throw std::invalid_argument("trailing characters in integer: '" +
                                    text + "'");
    return v;
}

}  // namespace rrdps
