#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace nccw {

using Dyadic = boost::rational<std::int64_t>;

inline const Dyadic kZero{0};
inline const Dyadic kHalf{1, 2};
inline const Dyadic kOne{1};

inline bool is_dyadic(const Dyadic& v) {
    std::int64_t d = v.denominator();
    return d > 0 && (d & (d - 1)) == 0;
}

// 0, 1/2 and 1 are the values where paths have to pause.
inline bool is_key(const Dyadic& v) { return v == kZero || v == kHalf || v == kOne; }

inline bool in_open_unit(const Dyadic& v) { return v > kZero && v < kOne; }

inline std::string to_string(const Dyadic& v) {
    if (v.denominator() == 1) return std::to_string(v.numerator());
    return std::to_string(v.numerator()) + "/" + std::to_string(v.denominator());
}

// Parses "a" or "a/b"; throws on malformed text.
inline Dyadic parse_dyadic(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Dyadic(std::stoll(s));
    return Dyadic(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

}  // namespace nccw
