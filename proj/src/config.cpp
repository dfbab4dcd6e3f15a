#include "qkdsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qkdsim::config {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError(key, "expected a number, got '" + text + "'");
    }
    return value;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

KeyValues KeyValues::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

KeyValues KeyValues::from_string(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(line_no) +
                                      ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
        }
        kv.values_[key] = value;
    }
    return kv;
}

void KeyValues::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

void KeyValues::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty()) {
        throw ConfigError("", "override must be key=value, got '" + assignment + "'");
    }
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool KeyValues::has(const std::string& key) const { return values_.count(key) != 0; }

double KeyValues::get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double(key, it->second);
}

long long KeyValues::get_int(const std::string& key, long long fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const double value = parse_double(key, it->second);
    if (value != std::floor(value)) {
        throw ConfigError(key, "expected an integer, got '" + it->second + "'");
    }
    return static_cast<long long>(value);
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const char* begin = it->second.c_str();
    char* end = nullptr;
    const unsigned long long value = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0') {
        throw ConfigError(key, "expected an unsigned integer, got '" + it->second + "'");
    }
    return value;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError(key, "expected true/false, got '" + it->second + "'");
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::vector<int> KeyValues::get_int_list(const std::string& key, std::vector<int> fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<int>(parse_double(key, item)));
    }
    return out;
}

std::vector<std::string> KeyValues::unknown_keys() const {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : values_) {
        if (consumed_.count(key) == 0) unknown.push_back(key);
    }
    return unknown;
}

namespace {

optics::JonesVector parse_polarisation(const std::string& key, const std::string& text) {
    if (text == "te") return {{1.0, 0.0}, {0.0, 0.0}};
    if (text == "tm") return {{0.0, 0.0}, {1.0, 0.0}};
    std::vector<double> parts;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(parse_double(key, trim(item)));
    if (parts.size() != 4) {
        throw ConfigError(key, "expected te, tm, or h_re,h_im,v_re,v_im");
    }
    return {{parts[0], parts[1]}, {parts[2], parts[3]}};
}

devices::SwitchMode parse_switch_mode(const std::string& key, const std::string& text) {
    if (text == "bar") return devices::SwitchMode::Bar;
    if (text == "cross") return devices::SwitchMode::Cross;
    if (text == "split") return devices::SwitchMode::Split;
    throw ConfigError(key, "expected bar, cross or split, got '" + text + "'");
}

void read_mzi(KeyValues& kv, const std::string& prefix, devices::MziSpec& mzi,
              double& birefringence_rad) {
    mzi.delay_slots = static_cast<int>(kv.get_int(prefix + ".delay_slots", mzi.delay_slots));
    mzi.r_in = kv.get_double(prefix + ".r_in", mzi.r_in);
    mzi.r_out = kv.get_double(prefix + ".r_out", mzi.r_out);
    mzi.t_short = devices::db_to_transmission(kv.get_double(prefix + ".t_short_db", 0.0));
    mzi.t_long = devices::db_to_transmission(kv.get_double(prefix + ".t_long_db", 8.0));
    mzi.overlap = kv.get_double(prefix + ".overlap", 0.995);
    mzi.thermal.t_ref_k = kv.get_double(prefix + ".thermal.t_ref_k", mzi.thermal.t_ref_k);
    mzi.thermal.dn_dt_per_k = kv.get_double(prefix + ".thermal.dn_dt_per_k", mzi.thermal.dn_dt_per_k);
    mzi.thermal.delta_l_m = kv.get_double(prefix + ".thermal.delta_l_m", mzi.thermal.delta_l_m);
    mzi.thermal.lambda_m = kv.get_double(prefix + ".thermal.lambda_m", mzi.thermal.lambda_m);
    mzi.temperature_k = kv.get_double(prefix + ".temperature_k", mzi.thermal.t_ref_k);
    birefringence_rad = kv.get_double(prefix + ".birefringence_delta_rad", 0.0);
    mzi.u_short = optics::JonesMatrix::identity();
    mzi.u_long = optics::JonesMatrix::retarder(birefringence_rad);
}

void read_detector(KeyValues& kv, const std::string& prefix, devices::DetectorSpec& det) {
    det.efficiency = kv.get_double(prefix + ".efficiency", det.efficiency);
    det.dark_prob_per_gate = kv.get_double(prefix + ".dark_prob_per_gate", det.dark_prob_per_gate);
    det.gate_width_s = kv.get_double(prefix + ".gate_width_s", det.gate_width_s);
    det.gated_slots = kv.get_int_list(prefix + ".gated_slots", det.gated_slots);
}

}  // namespace

RunConfig RunConfig::from_keyvalues(KeyValues& kv) {
    RunConfig rc;
    link::LinkConfig& lc = rc.link;

    lc.seed = kv.get_u64("seed", lc.seed);
    lc.threads = static_cast<int>(kv.get_int("threads", lc.threads));
    lc.scramble_samples = static_cast<int>(kv.get_int("scramble_samples", lc.scramble_samples));
    lc.slot_pitch_s = kv.get_double("slot_pitch_s", lc.slot_pitch_s);

    lc.source.mean_photons = kv.get_double("source.mu", lc.source.mean_photons);
    lc.source.rep_rate_hz = kv.get_double("source.rep_rate_hz", lc.source.rep_rate_hz);
    lc.source.polarisation =
        parse_polarisation("source.polarisation",
                           kv.get_string("source.polarisation", "te"));

    lc.switch_default.mode =
        parse_switch_mode("switch.mode", kv.get_string("switch.mode", "split"));
    lc.switch_default.pm_phase_rad = kv.get_double("switch.pm_phase_rad", 0.0);

    double alice_delta = 0.0;
    double bob_delta = 0.0;
    read_mzi(kv, "alice_mzi", lc.alice_mzi, alice_delta);
    read_mzi(kv, "bob_mzi", lc.bob_mzi, bob_delta);
    rc.alice_birefringence_rad = alice_delta;
    rc.bob_birefringence_rad = bob_delta;

    lc.fibre.length_km = kv.get_double("fibre.length_km", lc.fibre.length_km);
    lc.fibre.atten_db_per_km = kv.get_double("fibre.atten_db_per_km", lc.fibre.atten_db_per_km);
    lc.fibre.scramble = kv.get_bool("fibre.scramble", lc.fibre.scramble);

    read_detector(kv, "det0", lc.detector0);
    read_detector(kv, "det1", lc.detector1);

    rc.scan_duration_s = kv.get_double("scan.duration_s", rc.scan_duration_s);
    if (!(rc.scan_duration_s > 0.0)) {
        throw ConfigError("scan.duration_s", "must be > 0");
    }
    lc.pulses_per_point = kv.get_int(
        "pulses_per_point",
        std::llround(lc.source.rep_rate_hz * rc.scan_duration_s));

    const double period = devices::temperature_fringe_period_k(lc.alice_mzi.thermal);
    rc.scan.start_k = kv.get_double("scan.t1_start_k", lc.alice_mzi.thermal.t_ref_k);
    rc.scan.stop_k = kv.get_double("scan.t1_stop_k", rc.scan.start_k + 2.0 * period);
    rc.scan.steps = static_cast<int>(kv.get_int("scan.steps", 49));
    rc.scramble_per_pulse = kv.get_bool("scan.scramble_per_pulse", rc.scramble_per_pulse);

    const auto unknown = kv.unknown_keys();
    if (!unknown.empty()) {
        throw ConfigError(unknown.front(), "unknown key");
    }
    if (rc.scan.steps < 2) {
        throw ConfigError("scan.steps", "must be >= 2");
    }
    if (!(rc.scan.stop_k > rc.scan.start_k)) {
        throw ConfigError("scan.t1_stop_k", "must exceed scan.t1_start_k");
    }
    try {
        lc.validate();
    } catch (const std::exception& e) {
        throw ConfigError("", e.what());
    }
    return rc;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&out](const std::string& key, const std::string& value) {
        out.emplace_back(key, value);
    };
    auto add_d = [&add](const std::string& key, double value) { add(key, format_double(value)); };

    add("seed", std::to_string(link.seed));
    add("threads", std::to_string(link.threads));
    add("pulses_per_point", std::to_string(link.pulses_per_point));
    add("scramble_samples", std::to_string(link.scramble_samples));
    add_d("slot_pitch_s", link.slot_pitch_s);
    add_d("source.mu", link.source.mean_photons);
    add_d("source.rep_rate_hz", link.source.rep_rate_hz);
    {
        const auto& p = link.source.polarisation;
        add("source.polarisation", format_double(p.h.real()) + "," + format_double(p.h.imag()) +
                                       "," + format_double(p.v.real()) + "," +
                                       format_double(p.v.imag()));
    }
    switch (link.switch_default.mode) {
        case devices::SwitchMode::Bar:
            add("switch.mode", "bar");
            break;
        case devices::SwitchMode::Cross:
            add("switch.mode", "cross");
            break;
        case devices::SwitchMode::Split:
            add("switch.mode", "split");
            break;
    }
    add_d("switch.pm_phase_rad", link.switch_default.pm_phase_rad);

    auto add_mzi = [&](const std::string& prefix, const devices::MziSpec& mzi, double delta) {
        add(prefix + ".delay_slots", std::to_string(mzi.delay_slots));
        add_d(prefix + ".r_in", mzi.r_in);
        add_d(prefix + ".r_out", mzi.r_out);
        add_d(prefix + ".t_short_db", -10.0 * std::log10(mzi.t_short));
        add_d(prefix + ".t_long_db", -10.0 * std::log10(mzi.t_long));
        add_d(prefix + ".overlap", mzi.overlap);
        add_d(prefix + ".temperature_k", mzi.temperature_k);
        add_d(prefix + ".thermal.t_ref_k", mzi.thermal.t_ref_k);
        add_d(prefix + ".thermal.dn_dt_per_k", mzi.thermal.dn_dt_per_k);
        add_d(prefix + ".thermal.delta_l_m", mzi.thermal.delta_l_m);
        add_d(prefix + ".thermal.lambda_m", mzi.thermal.lambda_m);
        add_d(prefix + ".birefringence_delta_rad", delta);
    };
    add_mzi("alice_mzi", link.alice_mzi, alice_birefringence_rad);
    add_mzi("bob_mzi", link.bob_mzi, bob_birefringence_rad);

    add_d("fibre.length_km", link.fibre.length_km);
    add_d("fibre.atten_db_per_km", link.fibre.atten_db_per_km);
    add("fibre.scramble", link.fibre.scramble ? "true" : "false");

    auto add_det = [&](const std::string& prefix, const devices::DetectorSpec& det) {
        add_d(prefix + ".efficiency", det.efficiency);
        add_d(prefix + ".dark_prob_per_gate", det.dark_prob_per_gate);
        add_d(prefix + ".gate_width_s", det.gate_width_s);
        std::string slots;
        for (std::size_t i = 0; i < det.gated_slots.size(); ++i) {
            if (i) slots += ",";
            slots += std::to_string(det.gated_slots[i]);
        }
        add(prefix + ".gated_slots", slots);
    };
    add_det("det0", link.detector0);
    add_det("det1", link.detector1);

    add_d("scan.t1_start_k", scan.start_k);
    add_d("scan.t1_stop_k", scan.stop_k);
    add("scan.steps", std::to_string(scan.steps));
    add_d("scan.duration_s", scan_duration_s);
    add("scan.scramble_per_pulse", scramble_per_pulse ? "true" : "false");
    return out;
}

}  // namespace qkdsim::config
