#pragma once

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "qkd/config.hpp"
#include "qkd/experiment.hpp"
#include "qkd/rng.hpp"
#include "qkd/version.hpp"

namespace qkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;

/// Per-round CSV. bob_bit is empty for inconclusive rounds, error is 0 for
/// them, and the cumulative columns restart the running ratios from row one,
/// so the file alone reconstructs the whole run. No timestamps: two runs with
/// equal config and seed give byte-identical bytes.
inline std::string rounds_csv(std::span<const PulseRecord> records) {
    std::string out = "round,conclusive,alice_bit,bob_bit,error,cum_qber,cum_efficiency\n";
    std::int64_t sifted = 0;
    std::int64_t errors = 0;
    std::int64_t rounds = 0;
    for (const PulseRecord& rec : records) {
        ++rounds;
        int error = 0;
        if (rec.conclusive) {
            ++sifted;
            error = (*rec.bob_bit != rec.alice_bit) ? 1 : 0;
            errors += error;
        }
        const double cum_qber =
            sifted == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(sifted);
        const double cum_efficiency =
            static_cast<double>(sifted) / static_cast<double>(rounds);
        char row[160];
        std::snprintf(row, sizeof(row), "%lld,%d,%d,%s,%d,%.17g,%.17g\n",
                      static_cast<long long>(rec.round), rec.conclusive ? 1 : 0, rec.alice_bit,
                      rec.conclusive ? std::to_string(*rec.bob_bit).c_str() : "", error,
                      cum_qber, cum_efficiency);
        out += row;
    }
    return out;
}

/// Summary document: aggregates plus everything needed to reproduce the run
/// (config echo and seed). Deliberately timestamp-free.
inline nlohmann::ordered_json summary_json(const ExperimentConfig& cfg, const RunStats& stats) {
    nlohmann::ordered_json doc;
    doc["protocol"] = protocol_name(cfg.protocol);
    doc["dimension"] = cfg.dimension;
    doc["seed"] = cfg.seed;
    doc["rounds"] = stats.rounds;
    doc["sifted"] = stats.sifted;
    doc["errors"] = stats.errors;
    doc["qber"] = stats.qber;
    doc["efficiency"] = stats.efficiency;
    doc["config_echo"] = serialize_config(cfg);
    return doc;
}

inline std::string iso8601_utc(std::time_t t) {
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

/// Run manifest. The config echo is the canonical serialized form, so parsing
/// it back yields a config equal to the one that produced the run.
inline nlohmann::ordered_json manifest_json(const ExperimentConfig& cfg, const RunStats& stats,
                                            std::time_t started, std::time_t finished) {
    nlohmann::ordered_json doc;
    doc["tool"] = kToolName;
    doc["tool_version"] = kToolVersion;
    doc["seed"] = cfg.seed;
    doc["started"] = iso8601_utc(started);
    doc["finished"] = iso8601_utc(finished);
    doc["config_echo"] = serialize_config(cfg);
    doc["summary"]["rounds"] = stats.rounds;
    doc["summary"]["sifted"] = stats.sifted;
    doc["summary"]["errors"] = stats.errors;
    doc["summary"]["qber"] = stats.qber;
    doc["summary"]["efficiency"] = stats.efficiency;
    return doc;
}

namespace detail {

inline bool write_text_file(const std::filesystem::path& path, const std::string& content,
                            std::ostream& err) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out.good()) {
        err << "error: failed to write " << path.string() << "\n";
        return false;
    }
    return true;
}

} // namespace detail

namespace detail {

inline int write_run_outputs(const ExperimentConfig& cfg, std::span<const PulseRecord> records,
                             const RunStats& stats, std::time_t started, std::time_t finished,
                             const std::filesystem::path& out_dir, std::ostream& err) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        err << "error: cannot create output directory " << out_dir.string() << ": "
            << ec.message() << "\n";
        return kExitIo;
    }
    if (!write_text_file(out_dir / "rounds.csv", rounds_csv(records), err)) {
        return kExitIo;
    }
    if (!write_text_file(out_dir / "summary.json", summary_json(cfg, stats).dump(2) + "\n",
                         err)) {
        return kExitIo;
    }
    if (!write_text_file(out_dir / "manifest.json",
                         manifest_json(cfg, stats, started, finished).dump(2) + "\n", err)) {
        return kExitIo;
    }
    return kExitOk;
}

} // namespace detail

/// Executes one experiment and writes rounds.csv, summary.json, and
/// manifest.json into out_dir. Returns 0 on success, 1 for an invalid
/// config, and 2 for I/O failures. When stats_out is given it receives the
/// run aggregates on success.
inline int run_command(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                       std::ostream& err = std::cerr, RunStats* stats_out = nullptr) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    const std::time_t started = std::time(nullptr);
    const std::vector<PulseRecord> records = simulate_rounds(cfg);
    const RunStats stats = accumulate_stats(records);
    const int rc = detail::write_run_outputs(cfg, records, stats, started, std::time(nullptr),
                                             out_dir, err);
    if (rc == kExitOk && stats_out != nullptr) {
        *stats_out = stats;
    }
    return rc;
}

/// One sweep axis: a config field name and the value tokens to visit.
/// With contrast_turbulence set, every point is also rerun with turbulence
/// disabled (same derived seed) and the combined CSV gains paired columns.
struct SweepSpec {
    std::string axis;
    std::vector<std::string> values;
    bool contrast_turbulence = false;
};

namespace detail {

/// Applies one axis token to the config and returns the numeric value used
/// for the combined CSV's value column.
inline double apply_axis_value(ExperimentConfig& cfg, const std::string& axis,
                               const std::string& token) {
    if (axis == "theta") {
        cfg.rotation.theta = parse_angle_value(token, "sweep.theta");
        return cfg.rotation.theta;
    }
    if (axis == "rho") {
        cfg.rotation.rho = parse_double_strict(token, "sweep.rho");
        return cfg.rotation.rho;
    }
    if (axis == "iterations") {
        cfg.iterations = parse_int_strict(token, "sweep.iterations");
        return static_cast<double>(cfg.iterations);
    }
    if (axis == "N") {
        cfg.dimension = static_cast<int>(parse_int_strict(token, "sweep.N"));
        return static_cast<double>(cfg.dimension);
    }
    if (axis == "gain") {
        cfg.turbulence.gain = parse_double_strict(token, "sweep.gain");
        return cfg.turbulence.gain;
    }
    throw ConfigError("sweep: unknown axis \"" + axis +
                      "\" (expected theta, rho, iterations, N, or gain)");
}

} // namespace detail

/// Runs the base config once per axis value. Each point gets its own seed
/// derived from the master seed and its own run directory under
/// out_dir/runs/; a combined sweep.csv holds one summary row per value.
inline int sweep_command(const ExperimentConfig& base, const SweepSpec& spec,
                         const std::filesystem::path& out_dir, std::ostream& err = std::cerr) {
    if (spec.values.empty()) {
        err << "error: sweep: empty axis value list\n";
        return kExitConfig;
    }

    std::string csv = spec.contrast_turbulence
                          ? "axis,value,seed,rounds,qber_turb_on,efficiency_turb_on,"
                            "qber_turb_off,efficiency_turb_off\n"
                          : "axis,value,seed,rounds,sifted,errors,qber,efficiency\n";
    const std::time_t started = std::time(nullptr);
    nlohmann::ordered_json runs_doc = nlohmann::ordered_json::array();

    for (std::size_t idx = 0; idx < spec.values.size(); ++idx) {
        ExperimentConfig cfg = base;
        double numeric_value = 0.0;
        try {
            numeric_value = detail::apply_axis_value(cfg, spec.axis, spec.values[idx]);
            cfg.seed = derive_run_seed(base.seed, idx);
            cfg.validate();
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitConfig;
        }

        const std::filesystem::path run_dir =
            out_dir / "runs" / (spec.axis + "_" + std::to_string(idx));
        const std::time_t run_started = std::time(nullptr);
        const std::vector<PulseRecord> records = simulate_rounds(cfg);
        const RunStats stats = accumulate_stats(records);
        if (const int rc = detail::write_run_outputs(cfg, records, stats, run_started,
                                                     std::time(nullptr), run_dir, err);
            rc != kExitOk) {
            return rc;
        }

        char row[256];
        if (spec.contrast_turbulence) {
            ExperimentConfig off_cfg = cfg;
            off_cfg.turbulence.enabled = false;
            const RunStats off_stats = run_experiment(off_cfg);
            std::snprintf(row, sizeof(row),
                          "%s,%.17g,%llu,%lld,%.17g,%.17g,%.17g,%.17g\n", spec.axis.c_str(),
                          numeric_value, static_cast<unsigned long long>(cfg.seed),
                          static_cast<long long>(stats.rounds), stats.qber, stats.efficiency,
                          off_stats.qber, off_stats.efficiency);
        } else {
            std::snprintf(row, sizeof(row), "%s,%.17g,%llu,%lld,%lld,%lld,%.17g,%.17g\n",
                          spec.axis.c_str(), numeric_value,
                          static_cast<unsigned long long>(cfg.seed),
                          static_cast<long long>(stats.rounds),
                          static_cast<long long>(stats.sifted),
                          static_cast<long long>(stats.errors), stats.qber, stats.efficiency);
        }
        csv += row;

        nlohmann::ordered_json entry;
        entry["index"] = idx;
        entry["value"] = spec.values[idx];
        entry["seed"] = cfg.seed;
        entry["directory"] = (std::filesystem::path("runs") /
                              (spec.axis + "_" + std::to_string(idx))).string();
        runs_doc.push_back(entry);
    }

    if (!detail::write_text_file(out_dir / "sweep.csv", csv, err)) {
        return kExitIo;
    }
    nlohmann::ordered_json manifest;
    manifest["tool"] = kToolName;
    manifest["tool_version"] = kToolVersion;
    manifest["axis"] = spec.axis;
    manifest["contrast_turbulence"] = spec.contrast_turbulence;
    manifest["master_seed"] = base.seed;
    manifest["started"] = iso8601_utc(started);
    manifest["finished"] = iso8601_utc(std::time(nullptr));
    manifest["base_config_echo"] = serialize_config(base);
    manifest["runs"] = runs_doc;
    if (!detail::write_text_file(out_dir / "sweep_manifest.json", manifest.dump(2) + "\n",
                                 err)) {
        return kExitIo;
    }
    return kExitOk;
}

} // namespace qkd
