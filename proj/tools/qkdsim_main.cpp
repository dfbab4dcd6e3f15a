#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "qkdsim/bb84.hpp"
#include "qkdsim/config.hpp"
#include "qkdsim/link.hpp"

namespace fs = std::filesystem;
using qkdsim::SplitMix64;
using qkdsim::config::ConfigError;
using qkdsim::config::KeyValues;
using qkdsim::config::RunConfig;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

RunConfig load_config(const GlobalOptions& opts) {
    KeyValues kv =
        opts.config_path.empty() ? KeyValues{} : KeyValues::from_file(opts.config_path);
    for (const std::string& assignment : opts.overrides) {
        kv.apply_override(assignment);
    }
    if (opts.seed_given) {
        kv.set("seed", std::to_string(opts.seed));
    }
    return RunConfig::from_keyvalues(kv);
}

std::ofstream open_output(const GlobalOptions& opts, const std::string& name) {
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + opts.out_dir + "': " + ec.message());
    }
    const fs::path path = fs::path(opts.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    return out;
}

void write_config_echo(std::ostream& os, const RunConfig& rc) {
    os << "[config]\n";
    for (const auto& [key, value] : rc.echo()) {
        os << key << " = " << value << "\n";
    }
}

// The central-slot port probability is a pure single harmonic in the
// temperature phase, so three equally spaced samples recover the fringe mean
// and amplitude exactly.
double expected_fringe_visibility(const qkdsim::link::LinkConfig& config,
                                  const qkdsim::devices::SwitchSetting& setting,
                                  const qkdsim::optics::JonesMatrix* rotation = nullptr) {
    const double period = qkdsim::devices::temperature_fringe_period_k(config.alice_mzi.thermal);
    double mean = 0.0;
    std::complex<double> harmonic{0.0, 0.0};
    for (int j = 0; j < 3; ++j) {
        qkdsim::link::LinkConfig probe = config;
        probe.alice_mzi.temperature_k += period * j / 3.0;
        const auto probs = qkdsim::link::chain_probabilities(probe, setting, rotation);
        const double p = probs.at(1, 0);
        mean += p / 3.0;
        harmonic += p * std::polar(1.0, -2.0 * std::numbers::pi * j / 3.0);
    }
    if (mean <= 0.0) return 0.0;
    const double amplitude = 2.0 / 3.0 * std::abs(harmonic);
    return amplitude / mean;
}

int cmd_fringe_scan(const GlobalOptions& opts) {
    const RunConfig rc = load_config(opts);
    const auto rows =
        qkdsim::link::fringe_scan(rc.link, rc.scan, rc.link.switch_default, rc.scramble_per_pulse);

    {
        auto csv = open_output(opts, "fringe.csv");
        qkdsim::link::write_scan_csv(csv, rows);
    }

    std::vector<long long> counts0, counts1;
    std::vector<double> expected0, expected1;
    long long total_counts = 0;
    for (const auto& row : rows) {
        counts0.push_back(row.counts_p0);
        counts1.push_back(row.counts_p1);
        expected0.push_back(row.expected_p0);
        expected1.push_back(row.expected_p1);
        total_counts += row.counts_p0 + row.counts_p1;
    }
    const double v0 = qkdsim::link::visibility(counts0);
    const double v1 = qkdsim::link::visibility(counts1);
    const double ve0 = qkdsim::link::visibility(expected0);
    const double ve1 = qkdsim::link::visibility(expected1);

    auto summary = open_output(opts, "summary.txt");
    summary << "points = " << rows.size() << "\n";
    summary << "pulses_per_point = " << rc.link.pulses_per_point << "\n";
    summary << "total_counts = " << total_counts << "\n";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "visibility_p0 = %.6f\nvisibility_p1 = %.6f\n"
                  "expected_visibility_p0 = %.6f\nexpected_visibility_p1 = %.6f\n",
                  v0, v1, ve0, ve1);
    summary << buf;
    write_config_echo(summary, rc);

    std::printf("fringe scan: %zu points, visibility p0 = %.4f, p1 = %.4f\n", rows.size(), v0, v1);
    return 0;
}

int cmd_bb84(const GlobalOptions& opts, long long n_pulses) {
    const RunConfig rc = load_config(opts);
    SplitMix64 rng(qkdsim::derive_seed(rc.link.seed, 0xb84));
    const auto records = qkdsim::bb84::run_session(rc.link, n_pulses, rng);
    const auto key = qkdsim::bb84::sift(records);

    {
        auto csv = open_output(opts, "records.csv");
        qkdsim::bb84::write_records_csv(csv, records);
    }
    {
        auto keys = open_output(opts, "keys.txt");
        keys << "alice " << qkdsim::bb84::bits_to_hex(key.bits_alice) << "\n";
        keys << "bob " << qkdsim::bb84::bits_to_hex(key.bits_bob) << "\n";
    }

    long long singles = 0, doubles = 0;
    for (const auto& rec : records) {
        if (rec.result == qkdsim::bb84::PulseRecord::Result::Single) ++singles;
        if (rec.result == qkdsim::bb84::PulseRecord::Result::Double) ++doubles;
    }
    const double v_expected =
        expected_fringe_visibility(rc.link, qkdsim::bb84::prepare(0, qkdsim::bb84::Basis::Phase));

    auto report = open_output(opts, "report.txt");
    report << "pulses = " << records.size() << "\n";
    report << "single_clicks = " << singles << "\n";
    report << "double_clicks = " << doubles << "\n";
    report << "kept_bits = " << key.bits_alice.size() << "\n";
    report << "kept_time = " << key.kept_time << "\n";
    report << "kept_phase = " << key.kept_phase << "\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "sift_ratio = %.8f\n", key.sift_ratio);
    report << buf;
    auto put_qber = [&report, &buf](const char* name, const std::optional<double>& q) {
        if (q.has_value()) {
            std::snprintf(buf, sizeof buf, "%s = %.8f\n", name, *q);
        } else {
            std::snprintf(buf, sizeof buf, "%s = undefined\n", name);
        }
        report << buf;
    };
    put_qber("qber_time", key.qber_time);
    put_qber("qber_phase", key.qber_phase);
    std::snprintf(buf, sizeof buf, "expected_visibility = %.8f\npredicted_qber_phase = %.8f\n",
                  v_expected, qkdsim::bb84::qber_phase_prediction(v_expected));
    report << buf;
    write_config_echo(report, rc);

    std::printf("bb84: %lld pulses, sift ratio %.5f, qber time %s, qber phase %s\n", n_pulses,
                key.sift_ratio,
                key.qber_time ? std::to_string(*key.qber_time).c_str() : "undefined",
                key.qber_phase ? std::to_string(*key.qber_phase).c_str() : "undefined");
    return 0;
}

int cmd_pol_sweep(const GlobalOptions& opts, int delta_steps, int samples) {
    RunConfig rc = load_config(opts);
    // Measure the polarisation-balance law in isolation: perfect temporal
    // overlap, explicit fibre rotations.
    rc.link.alice_mzi.overlap = 1.0;
    rc.link.bob_mzi.overlap = 1.0;
    rc.link.fibre.scramble = false;

    auto csv = open_output(opts, "polsweep.csv");
    csv << "delta_rad,v_min_measured,v_min_analytic\n";

    const auto setting = qkdsim::bb84::prepare(0, qkdsim::bb84::Basis::Phase);
    char buf[160];
    double worst_gap = 0.0;
    for (int k = 0; k < delta_steps; ++k) {
        const double delta = 0.5 * std::numbers::pi * k / (delta_steps - 1);
        rc.link.bob_mzi.u_short = qkdsim::optics::JonesMatrix::identity();
        rc.link.bob_mzi.u_long = qkdsim::optics::JonesMatrix::retarder(delta);

        SplitMix64 rng(qkdsim::derive_seed(rc.link.seed, 0x901, static_cast<std::uint64_t>(k)));
        double v_min = 1.0;
        for (int s = 0; s < samples; ++s) {
            const auto rot = qkdsim::optics::haar_random_unitary(rng);
            v_min = std::min(v_min, expected_fringe_visibility(rc.link, setting, &rot));
        }
        const double analytic = qkdsim::link::min_visibility_over_polarisation(
            rc.link.bob_mzi.u_short, rc.link.bob_mzi.u_long);
        worst_gap = std::max(worst_gap, std::abs(v_min - analytic));
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", delta, v_min, analytic);
        csv << buf;
    }
    std::printf("pol sweep: %d deltas, %d polarisation samples, worst |measured - analytic| = %.2e\n",
                delta_steps, samples, worst_gap);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator of a one-way time-bin phase-coding QKD link"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Key-value config file");
    app.add_option("--out", opts.out_dir, "Output directory (default: current)");
    app.add_option("--set", opts.overrides, "Override a config key, key=value (repeatable)");
    auto* seed_opt = app.add_option("--seed", opts.seed, "Override the RNG seed");

    auto* fringe = app.add_subcommand("fringe-scan", "Temperature fringe scan with gated counts");

    long long n_pulses = 1'000'000;
    auto* bb84 = app.add_subcommand("bb84", "Run a BB84 session and sift the key");
    bb84->add_option("--pulses", n_pulses, "Number of pulses")->check(CLI::PositiveNumber);

    int delta_steps = 19;
    int sweep_samples = 10'000;
    auto* sweep = app.add_subcommand("pol-sweep", "Sweep receiver arm unbalance against the balance law");
    sweep->add_option("--steps", delta_steps, "Number of delta points in [0, pi/2]")
        ->check(CLI::Range(2, 10'000));
    sweep->add_option("--samples", sweep_samples, "Random polarisations per point")
        ->check(CLI::Range(10, 10'000'000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    opts.seed_given = seed_opt->count() > 0;

    try {
        if (fringe->parsed()) return cmd_fringe_scan(opts);
        if (bb84->parsed()) return cmd_bb84(opts, n_pulses);
        if (sweep->parsed()) return cmd_pol_sweep(opts, delta_steps, sweep_samples);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return 0;
}
