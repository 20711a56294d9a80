#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "postsel/regions.hpp"

namespace postsel {

/// 17 significant digits: enough for exact double round-trips in CSV output.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline nlohmann::json json_endpoint(double v) {
    if (std::isinf(v)) return v > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
    return nlohmann::json(v);
}

} // namespace detail

/// JSON form of a region: {"kind": ..., "lo": ..., "hi": ...} with +-inf
/// rendered as the strings "inf"/"-inf". Intervals and half-lines carry
/// their openness flags; for null_complement lo/hi are the null bounds.
inline nlohmann::json region_to_json(const confidence_region& r) {
    nlohmann::json j;
    switch (r.kind()) {
    case region_kind::full_space:
        j["kind"] = "full";
        j["lo"] = "-inf";
        j["hi"] = "inf";
        break;
    case region_kind::empty_set:
        j["kind"] = "empty";
        j["lo"] = nullptr;
        j["hi"] = nullptr;
        break;
    case region_kind::interval:
        j["kind"] = "interval";
        j["lo"] = detail::json_endpoint(r.lo());
        j["hi"] = detail::json_endpoint(r.hi());
        j["lo_open"] = r.lo_open();
        j["hi_open"] = r.hi_open();
        break;
    case region_kind::half_line_above:
        j["kind"] = "half_line_above";
        j["lo"] = detail::json_endpoint(r.lo());
        j["hi"] = "inf";
        j["lo_open"] = r.lo_open();
        break;
    case region_kind::null_complement:
        j["kind"] = "null_complement";
        j["lo"] = detail::json_endpoint(r.lo());
        j["hi"] = detail::json_endpoint(r.hi());
        break;
    }
    return j;
}

/// Quote a CSV field when it contains separators or quotes.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_escape(fields[i]);
    }
    line += '\n';
    return line;
}

/// FNV-1a 64-bit digest, hex-encoded. Used to fingerprint canonicalized
/// JSON configs in run manifests.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace postsel
