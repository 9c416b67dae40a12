// Helpers for the command-line tool: angle parsing (plain radians or
// fractions of pi), comma-separated vectors, fixed-width float formatting,
// and the CSV/JSON document writers shared by all subcommands.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dualdress/types.hpp"

namespace cli {

inline constexpr const char* kToolName = "dualdress";
inline constexpr const char* kToolVersion = "1.0.0";

// All floats are echoed with 17 significant digits in scientific notation so
// that re-parsing an output file reproduces every double bit-exactly.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Parses a full string as a double; rejects trailing junk.
inline double parse_double(const std::string& s) {
    const std::string t = trimmed(s);
    if (t.empty()) throw dualdress::DomainError("empty number");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw dualdress::DomainError("cannot parse number: '" + s + "'");
    }
    if (used != t.size())
        throw dualdress::DomainError("trailing characters in number: '" + s + "'");
    return v;
}

// Angles are radians; "pi", "pi/2", "-3pi/4", "0.5pi" fractions are accepted
// as a convenience and converted here.
inline double parse_angle(const std::string& s) {
    std::string t = trimmed(s);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    const std::size_t pos = t.find("pi");
    if (pos == std::string::npos) return parse_double(t);

    const std::string pre = t.substr(0, pos);
    const std::string post = t.substr(pos + 2);
    double coef = 1.0;
    if (pre == "-")
        coef = -1.0;
    else if (!pre.empty() && pre != "+")
        coef = parse_double(pre);
    double den = 1.0;
    if (!post.empty()) {
        if (post[0] != '/')
            throw dualdress::DomainError("malformed angle: '" + s + "'");
        den = parse_double(post.substr(1));
        if (den == 0.0)
            throw dualdress::DomainError("zero denominator in angle: '" + s + "'");
    }
    return coef * dualdress::kPi / den;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t b = 0;
    while (true) {
        const std::size_t e = s.find(sep, b);
        if (e == std::string::npos) {
            out.push_back(s.substr(b));
            return out;
        }
        out.push_back(s.substr(b, e - b));
        b = e + 1;
    }
}

inline dualdress::Vec3 parse_vec3(const std::string& s) {
    const std::vector<std::string> parts = split(s, ',');
    if (parts.size() != 3)
        throw dualdress::DomainError("expected three comma-separated values: '" +
                                     s + "'");
    return {parse_double(parts[0]), parse_double(parts[1]),
            parse_double(parts[2])};
}

// One machine-readable result document. CSV output carries '#'-prefixed
// metadata (parameter echo + tool version), a header row, then data rows;
// JSON output carries the same parameters plus a typed payload.
struct Document {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json payload = nlohmann::json::object();

    void param(const std::string& key, const std::string& value) {
        params.emplace_back(key, value);
    }
    void param(const std::string& key, double value) {
        params.emplace_back(key, fmt(value));
    }
    void param(const std::string& key, int value) {
        params.emplace_back(key, std::to_string(value));
    }

    void row(std::vector<std::string> r) { rows.push_back(std::move(r)); }

    // Two-column convenience for scalar reports.
    void scalar(const std::string& name, double v) {
        rows.push_back({name, fmt(v)});
    }

    void write_csv(std::ostream& os) const {
        os << "# tool = " << kToolName << " " << kToolVersion << "\n";
        os << "# subcommand = " << subcommand << "\n";
        for (const auto& [k, v] : params) os << "# " << k << " = " << v << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                os << (i ? "," : "") << r[i];
            os << "\n";
        }
    }

    void write_json(std::ostream& os) const {
        nlohmann::json j;
        j["tool"] = kToolName;
        j["version"] = kToolVersion;
        j["subcommand"] = subcommand;
        nlohmann::json p = nlohmann::json::object();
        for (const auto& [k, v] : params) p[k] = v;
        j["params"] = p;
        j["result"] = payload;
        os << j.dump(2) << "\n";
    }

    void write(const std::string& path, const std::string& format) const {
        std::ofstream os(path);
        if (!os)
            throw dualdress::DomainError("cannot open output file: " + path);
        if (format == "json")
            write_json(os);
        else
            write_csv(os);
    }
};

// json helpers ---------------------------------------------------------------

inline nlohmann::json to_json(const dualdress::Vec3& v) {
    return nlohmann::json::array({v.x, v.y, v.z});
}

inline nlohmann::json to_json(const dualdress::Mat3& m) {
    nlohmann::json r = nlohmann::json::array();
    for (int i = 0; i < 3; ++i)
        r.push_back(nlohmann::json::array(
            {m(i, 0), m(i, 1), m(i, 2)}));
    return r;
}

inline nlohmann::json to_json(const dualdress::Tensor3& t) {
    nlohmann::json r = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        nlohmann::json plane = nlohmann::json::array();
        for (int j = 0; j < 3; ++j)
            plane.push_back(nlohmann::json::array(
                {t(i, j, 0), t(i, j, 1), t(i, j, 2)}));
        r.push_back(plane);
    }
    return r;
}

}  // namespace cli
