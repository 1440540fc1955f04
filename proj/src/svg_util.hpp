#pragma once

#include <cstdio>
#include <string>

namespace aumap::detail {

// Fixed two-decimal formatting keeps SVG output byte-stable.
inline std::string fmt2(double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Ten-class categorical palette indexed by label % 10.
inline const char* class_color(int label) {
    static const char* palette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const int i = label % 10;
    return palette[i < 0 ? i + 10 : i];
}

}  // namespace aumap::detail
