#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tsc/report.hpp"
#include "tsc/time_scale.hpp"

namespace tsc {

/// 17 significant digits: enough to round-trip any double, and -- more to
/// the point here -- byte-stable across runs. Non-finite values (possible
/// in failed-cell residuals) become JSON null.
inline std::string fmt_double(double v) {
    if (!std::isfinite(v)) return "null";
    if (v == 0.0) v = 0.0; // flush the sign of a negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string json_string(const std::string& s) {
    return "\"" + json_escape(s) + "\"";
}

/// Scale literal in the config format: a JSON array of [lo, hi] pairs.
inline std::string scale_to_literal(const TimeScale& T) {
    std::string out = "[";
    bool first = true;
    for (const Segment& s : T.segments()) {
        if (!first) out += ",";
        first = false;
        out += "[" + fmt_double(s.lo) + "," + fmt_double(s.hi) + "]";
    }
    out += "]";
    return out;
}

/// One report as a JSON object; field order matches the declaration.
inline std::string report_to_json(const IdentityReport& r) {
    std::string out = "{";
    out += "\"identity_name\":" + json_string(r.identity_name) + ",";
    out += "\"scale_id\":" + json_string(r.scale_id) + ",";
    out += "\"points_checked\":" + std::to_string(r.points_checked) + ",";
    out += "\"max_residual\":" + fmt_double(r.max_residual) + ",";
    out += "\"tolerance\":" + fmt_double(r.tolerance) + ",";
    out += std::string("\"passed\":") + (r.passed ? "true" : "false");
    out += "}";
    return out;
}

/// Emit a sequence of JSON objects: one per line, or a single array.
inline std::string emit_objects(const std::vector<std::string>& objects,
                                bool as_array) {
    std::string out;
    if (as_array) {
        out += "[";
        for (std::size_t i = 0; i < objects.size(); ++i) {
            if (i) out += ",";
            out += objects[i];
        }
        out += "]\n";
        return out;
    }
    for (const std::string& o : objects) out += o + "\n";
    return out;
}

} // namespace tsc
