#pragma once

// Run configuration: flat key-value text with [section] headers prefixing
// the keys below them, '#' comments, scalars or space-separated lists.
// Unknown and duplicate keys are refused with their position, so a config
// cannot silently misspell a knob. Every field has a default; a config file
// only states what it changes.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "warpscat/io.hpp"
#include "warpscat/profile.hpp"
#include "warpscat/stability.hpp"
#include "warpscat/warped_geometry.hpp"

namespace warpscat {

struct ConfigError : std::runtime_error {
    std::size_t line = 0;    // 1-based; 0 when no position applies
    std::size_t column = 0;

    explicit ConfigError(const std::string& what, std::size_t line_ = 0, std::size_t col_ = 0)
        : std::runtime_error(what), line(line_), column(col_) {}
};

namespace detail {

struct RawItem {
    std::string key;
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0;
};

inline bool key_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '.';
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

inline std::vector<RawItem> parse_flat(const std::string& text) {
    std::vector<RawItem> items;
    std::string prefix;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::size_t hash = raw.find('#');
        std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
        const std::string stripped = trim(body);
        if (stripped.empty()) continue;

        if (stripped.front() == '[') {
            if (stripped.back() != ']' || stripped.size() < 3)
                throw ConfigError("malformed section header", lineno, body.find('[') + 1);
            prefix = trim(stripped.substr(1, stripped.size() - 2)) + ".";
            continue;
        }

        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", lineno, 1);
        std::size_t kb = 0;
        while (kb < eq && (body[kb] == ' ' || body[kb] == '\t')) ++kb;
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key", lineno, kb + 1);
        for (char c : key)
            if (!key_char(c))
                throw ConfigError("bad character in key '" + key + "'", lineno, kb + 1);

        RawItem item;
        item.key = prefix + key;
        item.value = trim(body.substr(eq + 1));
        item.line = lineno;
        item.column = kb + 1;
        if (item.value.empty()) throw ConfigError("empty value for '" + item.key + "'",
                                                  lineno, kb + 1);
        items.push_back(std::move(item));
    }
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = i + 1; j < items.size(); ++j)
            if (items[i].key == items[j].key)
                throw ConfigError("duplicate key '" + items[j].key + "'", items[j].line,
                                  items[j].column);
    return items;
}

inline double item_double(const RawItem& it, const std::string& token) {
    double v = 0.0;
    const char* b = token.data();
    const char* e = b + token.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ConfigError("'" + it.key + "': not a number: '" + token + "'", it.line,
                          it.column);
    return v;
}

inline double item_double(const RawItem& it) { return item_double(it, it.value); }

inline long item_int(const RawItem& it) {
    long v = 0;
    const char* b = it.value.data();
    const char* e = b + it.value.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ConfigError("'" + it.key + "': not an integer: '" + it.value + "'", it.line,
                          it.column);
    return v;
}

inline std::vector<double> item_list(const RawItem& it) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(it.value);
    while (in >> token) {
        if (!token.empty() && token.back() == ',') token.pop_back();
        if (token.empty()) continue;
        out.push_back(item_double(it, token));
    }
    if (out.empty())
        throw ConfigError("'" + it.key + "': empty list", it.line, it.column);
    return out;
}

}  // namespace detail

struct RunConfig {
    // profile: inline power law, or a two-column s,r table from a file
    int dim = 2;
    PowerLawSpec law{1.0, 1.0, -1.0, 0.5};
    double grid_step = 0.01;
    double half_length = 200.0;
    std::string profile_file;  // empty means inline

    int m_max = 0;

    double k_min = 0.7;
    double k_max = 1.7;
    int k_count = 25;
    bool k_log = false;

    std::vector<double> velocities{1.2};
    double packet_width = 0.4;
    double packet_center = -15.0;
    double box = 120.0;
    int points = 12001;
    double time = 25.0;
    double dt = 0.005;
    double split = 10.0;

    DeformKind family_kind = DeformKind::warp;
    double bump_center = 2.5;
    double bump_halfwidth = 1.5;
    double bump_amp = 0.6;
    std::vector<double> eps{0.1, 0.01, 0.001};

    double gamma = 1.0;
    double eps_budget = 1.0;

    GeometryConstants constants;
    double threshold = 0.5;

    std::string out_dir = "out";
    int stride = 10;

    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);

    std::vector<double> k_grid() const {
        std::vector<double> k(static_cast<std::size_t>(k_count));
        const double n1 = static_cast<double>(k_count - 1);
        for (int i = 0; i < k_count; ++i) {
            const double f = static_cast<double>(i) / n1;
            k[static_cast<std::size_t>(i)] =
                k_log ? k_min * std::pow(k_max / k_min, f) : k_min + (k_max - k_min) * f;
        }
        return k;
    }

    Profile build_profile() const {
        if (profile_file.empty())
            return build_power_law(dim, law, grid_step, half_length);
        std::ifstream in(profile_file);
        if (!in) throw ConfigError("cannot open profile file '" + profile_file + "'");
        std::vector<double> s, r;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string body = detail::trim(line);
            if (body.empty() || body.front() == '#') continue;
            if (lineno == 1 && body.find_first_not_of("0123456789+-.eE, \t") !=
                                   std::string::npos)
                continue;  // header row
            std::istringstream row(body);
            std::string a, b;
            if (!std::getline(row, a, ',') || !std::getline(row, b))
                throw ConfigError("profile file row needs 's,r'", lineno, 1);
            const detail::RawItem fake{"profile.file row", "", lineno, 1};
            s.push_back(detail::item_double(fake, detail::trim(a)));
            r.push_back(detail::item_double(fake, detail::trim(b)));
        }
        return Profile::sampled(dim, std::move(s), std::move(r));
    }

    // reproducibility header stamped into every output file
    std::string header_comment() const;
};

namespace detail {

inline void require(bool ok, const RawItem& it, const std::string& what) {
    if (!ok) throw ConfigError("'" + it.key + "': " + what, it.line, it.column);
}

inline bool apply_item(RunConfig& c, const RawItem& it) {
    const std::string& k = it.key;
    if (k == "profile.dim") {
        const long v = item_int(it);
        require(v >= 2, it, "dimension must be >= 2");
        c.dim = static_cast<int>(v);
    } else if (k == "profile.beta_minus") {
        c.law.beta_minus = item_double(it);
    } else if (k == "profile.tau_minus") {
        c.law.tau_minus = item_double(it);
        require(c.law.tau_minus > 0.0, it, "must be positive");
    } else if (k == "profile.beta_plus") {
        c.law.beta_plus = item_double(it);
    } else if (k == "profile.tau_plus") {
        c.law.tau_plus = item_double(it);
        require(c.law.tau_plus > 0.0, it, "must be positive");
    } else if (k == "profile.grid_step") {
        c.grid_step = item_double(it);
        require(c.grid_step > 0.0, it, "must be positive");
    } else if (k == "profile.half_length") {
        c.half_length = item_double(it);
        require(c.half_length > 1.0, it, "must exceed 1");
    } else if (k == "profile.file") {
        c.profile_file = it.value;
    } else if (k == "channels.m_max") {
        const long v = item_int(it);
        require(v >= 0, it, "must be nonnegative");
        c.m_max = static_cast<int>(v);
    } else if (k == "k.min") {
        c.k_min = item_double(it);
        require(c.k_min > 0.0, it, "must be positive");
    } else if (k == "k.max") {
        c.k_max = item_double(it);
        require(c.k_max > 0.0, it, "must be positive");
    } else if (k == "k.count") {
        const long v = item_int(it);
        require(v >= 4, it, "need at least 4 grid points");
        c.k_count = static_cast<int>(v);
    } else if (k == "k.scale") {
        require(it.value == "linear" || it.value == "log", it, "must be linear or log");
        c.k_log = it.value == "log";
    } else if (k == "packets.velocities") {
        c.velocities = item_list(it);
        for (double v : c.velocities) require(v > 0.0, it, "velocities must be positive");
    } else if (k == "packets.width") {
        c.packet_width = item_double(it);
        require(c.packet_width > 0.0, it, "must be positive");
    } else if (k == "packets.center") {
        c.packet_center = item_double(it);
    } else if (k == "packets.box") {
        c.box = item_double(it);
        require(c.box > 0.0, it, "must be positive");
    } else if (k == "packets.points") {
        const long v = item_int(it);
        require(v >= 8, it, "need at least 8 grid points");
        c.points = static_cast<int>(v);
    } else if (k == "packets.time") {
        c.time = item_double(it);
        require(c.time > 0.0, it, "must be positive");
    } else if (k == "packets.dt") {
        c.dt = item_double(it);
        require(c.dt > 0.0, it, "must be positive");
    } else if (k == "packets.split") {
        c.split = item_double(it);
        require(c.split > 0.0, it, "must be positive");
    } else if (k == "family.kind") {
        require(it.value == "warp" || it.value == "conformal", it,
                "must be warp or conformal");
        c.family_kind = it.value == "warp" ? DeformKind::warp : DeformKind::conformal;
    } else if (k == "family.center") {
        c.bump_center = item_double(it);
    } else if (k == "family.halfwidth") {
        c.bump_halfwidth = item_double(it);
        require(c.bump_halfwidth > 0.0, it, "must be positive");
    } else if (k == "family.amp") {
        c.bump_amp = item_double(it);
        require(c.bump_amp != 0.0, it, "must be nonzero");
    } else if (k == "family.eps") {
        c.eps = item_list(it);
        for (std::size_t i = 0; i < c.eps.size(); ++i) {
            require(c.eps[i] > 0.0, it, "eps values must be positive");
            if (i > 0) require(c.eps[i] < c.eps[i - 1], it, "eps must strictly decrease");
        }
    } else if (k == "gate.gamma") {
        c.gamma = item_double(it);
        require(c.gamma > 0.0, it, "must be positive");
    } else if (k == "gate.eps_budget") {
        c.eps_budget = item_double(it);
        require(c.eps_budget > 0.0, it, "must be positive");
    } else if (k == "constants.C0") {
        c.constants.C0 = item_double(it);
        require(c.constants.C0 > 0.0, it, "must be positive");
    } else if (k == "constants.c") {
        c.constants.c = item_double(it);
        require(c.constants.c > 0.0, it, "must be positive");
    } else if (k == "constants.C1") {
        c.constants.C1 = item_double(it);
        require(c.constants.C1 > 0.0, it, "must be positive");
    } else if (k == "constants.threshold") {
        c.threshold = item_double(it);
        require(c.threshold > 0.0 && c.threshold < 1.0, it, "must lie in (0, 1)");
    } else if (k == "output.dir") {
        c.out_dir = it.value;
    } else if (k == "output.stride") {
        const long v = item_int(it);
        require(v >= 1, it, "must be at least 1");
        c.stride = static_cast<int>(v);
    } else {
        return false;
    }
    return true;
}

}  // namespace detail

inline RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    bool inline_law = false, file_law = false;
    for (const auto& item : detail::parse_flat(text)) {
        if (!detail::apply_item(cfg, item))
            throw ConfigError("unknown key '" + item.key + "'", item.line, item.column);
        if (item.key.rfind("profile.", 0) == 0)
            (item.key == "profile.file" ? file_law : inline_law) = true;
    }
    if (file_law && inline_law)
        throw ConfigError("profile.file excludes the inline power-law keys");
    if (!(cfg.k_min < cfg.k_max)) throw ConfigError("k.min must be below k.max");
    return cfg;
}

inline std::string RunConfig::header_comment() const {
    return "constants C0=" + io::num(constants.C0) + " c=" + io::num(constants.c) +
           " C1=" + io::num(constants.C1) + " threshold=" + io::num(threshold);
}

inline RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse(buf.str());
    if (!cfg.profile_file.empty()) {
        const std::filesystem::path p(cfg.profile_file);
        if (p.is_relative()) cfg.profile_file = (path.parent_path() / p).string();
    }
    return cfg;
}

}  // namespace warpscat
