#include "motorlab/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace motorlab {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    // strtod accepts forms like "11.2e-3" and "1e6"; reject trailing garbage.
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
        throw ConfigError(key, "expected a number, got '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw ConfigError(key, "expected an integer, got '" + text + "'");
    return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& origin) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("", origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", origin + ":" + std::to_string(line_no) + ": empty key");
        cfg.values_[std::string(key)] = std::string(value);
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

double KeyValueConfig::require_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw ConfigError(key, "missing required key");
    return parse_double(key, *v);
}

int KeyValueConfig::require_int(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw ConfigError(key, "missing required key");
    return static_cast<int>(parse_integer(key, *v));
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_double(key, *v) : fallback;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    const auto v = get(key);
    return v ? static_cast<int>(parse_integer(key, *v)) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const auto n = parse_integer(key, *v);
    if (n < 0) throw ConfigError(key, "expected a non-negative integer");
    return static_cast<std::uint64_t>(n);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "1" || *v == "true" || *v == "on" || *v == "yes") return true;
    if (*v == "0" || *v == "false" || *v == "off" || *v == "no") return false;
    throw ConfigError(key, "expected a boolean, got '" + *v + "'");
}

std::string KeyValueConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

MotorParams motor_params_from_config(const KeyValueConfig& cfg) {
    MotorParams p;
    p.R = cfg.require_double("R");
    p.L_d = cfg.require_double("Ld");
    p.L_q = cfg.require_double("Lq");
    p.Phi = cfg.require_double("Phi");
    p.P = cfg.require_int("P");
    p.J = cfg.require_double("J");
    p.D = cfg.require_double("D");
    p.V_max = cfg.require_double("Vmax");
    p.I_max = cfg.require_double("Imax");
    p.P_max = cfg.require_double("Pmax");
    p.f_min = cfg.require_double("fmin");
    p.f_max = cfg.require_double("fmax");
    p.T_Lmin = cfg.require_double("TLmin");
    p.T_Lmax = cfg.require_double("TLmax");
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError("", e.what());
    }
    return p;
}

void motor_params_to_config(const MotorParams& p, KeyValueConfig& cfg) {
    auto num = [](double v) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    };
    cfg.set("R", num(p.R));
    cfg.set("Ld", num(p.L_d));
    cfg.set("Lq", num(p.L_q));
    cfg.set("Phi", num(p.Phi));
    cfg.set("P", std::to_string(p.P));
    cfg.set("J", num(p.J));
    cfg.set("D", num(p.D));
    cfg.set("Vmax", num(p.V_max));
    cfg.set("Imax", num(p.I_max));
    cfg.set("Pmax", num(p.P_max));
    cfg.set("fmin", num(p.f_min));
    cfg.set("fmax", num(p.f_max));
    cfg.set("TLmin", num(p.T_Lmin));
    cfg.set("TLmax", num(p.T_Lmax));
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace motorlab
