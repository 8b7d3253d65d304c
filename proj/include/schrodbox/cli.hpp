#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "schrodbox/config_io.hpp"
#include "schrodbox/reference.hpp"
#include "schrodbox/report.hpp"

namespace schrodbox {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitMismatch = 4;

// Default output directory when neither --out nor the config names one.
inline constexpr const char* kOutDirEnv = "SCHRODBOX_OUT_DIR";

struct CliOptions {
    std::string config_path;
    std::string mode = "combined";
    std::string out_dir;  // --out override
    int workers = 1;
    std::optional<unsigned long> seed;
    std::string oracle = "auto";  // compare: snapshot file or "auto"
};

namespace detail {

inline SimulationConfig load_with_echo(const std::string& path, std::string& echo) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    echo = buf.str();
    return parse_config(echo, std::filesystem::path(path).parent_path().string());
}

inline std::string resolve_out_dir(const CliOptions& opt, const SimulationConfig& cfg) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (!cfg.output.out_dir.empty()) return cfg.output.out_dir;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
    return ".";
}

// Wall-clock facts go to the log only, so data files byte-reproduce.
inline void write_log(const std::string& dir, const std::string& what,
                      const RunReport& rep) {
    std::ofstream log(dir + "/run.log", std::ios::app);
    const std::time_t now = std::time(nullptr);
    char stamp[32] = "?";
    if (std::tm tm{}; gmtime_r(&now, &tm)) {
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
    }
    log << stamp << " " << what << " steps=" << rep.steps << " t_end=" << rep.t_end
        << "fs wall=" << rep.wall_seconds << "s\n";
}

}  // namespace detail

inline RunResult run_mode(const SimulationConfig& cfg, const std::string& mode) {
    if (mode == "combined") return run_combined(cfg);
    if (mode == "full") return run_full_domain(cfg);
    if (mode == "absorb") return run_absorb_only(cfg);
    if (mode == "remap") return run_remap_only(cfg);
    if (mode == "cut") return run_truncated(cfg);
    throw ConfigError("unknown mode " + mode +
                      " (expected combined, full, absorb, remap or cut)");
}

inline int cmd_run(const CliOptions& opt, std::ostream& diag = std::cerr) {
    SimulationConfig cfg;
    std::string echo;
    try {
        cfg = detail::load_with_echo(opt.config_path, echo);
    } catch (const ConfigError& e) {
        diag << e.what() << "\n";
        return kExitConfig;
    }
    if (opt.seed) cfg.seed = *opt.seed;
    const auto violations = validate_config(cfg);
    if (!violations.empty()) {
        for (const auto& v : violations) diag << v << "\n";
        return kExitConfig;
    }
    const std::string out = detail::resolve_out_dir(opt, cfg);
    try {
        std::filesystem::create_directories(out);
        const RunResult res = run_mode(cfg, opt.mode);
        if (cfg.output.csv) write_series_csv(out + "/norms.csv", res.report);
        write_report_json(out + "/report.json", res.report, echo,
                          {{"mode", opt.mode}});
        if (cfg.output.ndjson || cfg.output.snapshots)
            write_snapshots_ndjson(out + "/snapshots.ndjson", res.trajectory);
        detail::write_log(out, "run mode=" + opt.mode, res.report);
        return kExitOk;
    } catch (const ConfigError& e) {
        diag << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        diag << "run failed: " << e.what() << "\n";
        return kExitNumerical;
    }
}

inline int cmd_compare(const CliOptions& opt, std::ostream& diag = std::cerr) {
    SimulationConfig cfg;
    std::string echo;
    try {
        cfg = detail::load_with_echo(opt.config_path, echo);
    } catch (const ConfigError& e) {
        diag << e.what() << "\n";
        return kExitConfig;
    }
    if (opt.seed) cfg.seed = *opt.seed;
    const auto violations = validate_config(cfg);
    if (!violations.empty()) {
        for (const auto& v : violations) diag << v << "\n";
        return kExitConfig;
    }
    const std::string out = detail::resolve_out_dir(opt, cfg);
    try {
        std::filesystem::create_directories(out);
        if (opt.oracle == "auto") {
            // three runs: ground truth, injection alone, the production scheme
            const RunResult full = run_full_domain(cfg);
            const SimulationConfig acfg = aligned_to(cfg, full.report);
            const RunResult inj = run_injection_only(acfg);
            const RunResult comb = run_combined(acfg);
            const ErrorSeries e_inj =
                overlap_error(full.trajectory, inj.trajectory, ErrorKind::inj);
            const ErrorSeries e_ar =
                overlap_error(inj.trajectory, comb.trajectory, ErrorKind::ar);
            const ErrorSeries e_tot =
                overlap_error(full.trajectory, comb.trajectory, ErrorKind::tot);
            write_series_csv(out + "/errors.csv", comb.report, &e_inj, &e_ar, &e_tot);
            write_report_json(out + "/report.json", comb.report, echo,
                              {{"mode", "compare-auto"},
                               {"eps_inj_max", e_inj.max_value()},
                               {"eps_ar_max", e_ar.max_value()},
                               {"eps_tot_max", e_tot.max_value()}});
            detail::write_log(out, "compare auto", comb.report);
        } else {
            const Trajectory oracle = read_trajectory_ndjson(opt.oracle);
            SimulationConfig acfg = cfg;
            acfg.stop.kind = StopKind::none;
            acfg.output.cadence = oracle.cadence;
            if (!oracle.times.empty())
                acfg.max_steps =
                    static_cast<long>(std::llround(oracle.times.back() / cfg.dt));
            const RunResult res = run_mode(acfg, opt.mode);
            const ErrorSeries e_tot =
                overlap_error(oracle, res.trajectory, ErrorKind::tot);
            write_series_csv(out + "/errors.csv", res.report, nullptr, nullptr,
                             &e_tot);
            write_report_json(out + "/report.json", res.report, echo,
                              {{"mode", "compare-" + opt.mode},
                               {"eps_tot_max", e_tot.max_value()}});
            detail::write_log(out, "compare " + opt.mode, res.report);
        }
        return kExitOk;
    } catch (const MisalignedTrajectories& e) {
        diag << "comparison mismatch: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const ConfigError& e) {
        diag << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        diag << "compare failed: " << e.what() << "\n";
        return kExitNumerical;
    }
}

namespace detail {

inline SimulationConfig apply_sweep_value(SimulationConfig c, const std::string& var,
                                          double v) {
    if (var == "energy") {
        c.energy_ev = v;
    } else if (var == "m_exp") {
        for (BoundaryConfig* side : {&c.left, &c.right}) {
            if (side->absorber) side->absorber->m_exp = static_cast<int>(v);
        }
        if (!c.left.absorber && !c.right.absorber) {
            AbsorberSpec a;
            a.m_exp = static_cast<int>(v);
            c.right.absorber = a;
        }
    } else if (var == "l") {
        if (!c.right.absorber) c.right.absorber = AbsorberSpec{};
        c.right.absorber->length = v;
        c.right.absorber->auto_length = false;
    } else if (var == "la") {
        if (!c.right.remap) c.right.remap = RemapSpec{};
        c.right.remap->La = v;
    } else if (var == "barrier_height") {
        if (c.potential.kind != PotentialKind::rectangular_barrier)
            throw ConfigError("barrier_height sweep needs a barrier potential");
        c.potential.barrier_height = v;
    } else {
        throw ConfigError("unknown sweep variable " + var +
                          " (expected energy, m_exp, L, La or barrier_height)");
    }
    return c;
}

struct SweepRow {
    bool ok = false;
    std::string error;
    double eps_inj = -1.0, eps_ar = -1.0, eps_tot = -1.0;
    double eps_single = -1.0;  // abs / rem / cut, depending on the mode
    long steps = 0;
    double t_end = 0.0;
};

inline SweepRow sweep_point(const SimulationConfig& cfg, const std::string& mode) {
    SweepRow row;
    try {
        if (mode == "full") {
            const RunResult full = run_full_domain(cfg);
            row.steps = full.report.steps;
            row.t_end = full.report.t_end;
        } else if (mode == "combined") {
            const RunResult full = run_full_domain(cfg);
            const SimulationConfig acfg = aligned_to(cfg, full.report);
            const RunResult inj = run_injection_only(acfg);
            const RunResult comb = run_combined(acfg);
            row.eps_inj =
                overlap_error(full.trajectory, inj.trajectory, ErrorKind::inj)
                    .max_value();
            row.eps_ar =
                overlap_error(inj.trajectory, comb.trajectory, ErrorKind::ar)
                    .max_value();
            row.eps_tot =
                overlap_error(full.trajectory, comb.trajectory, ErrorKind::tot)
                    .max_value();
            row.steps = comb.report.steps;
            row.t_end = comb.report.t_end;
        } else {
            const RunResult full = run_full_domain(cfg);
            const SimulationConfig acfg = aligned_to(cfg, full.report);
            const RunResult other = run_mode(acfg, mode);
            row.eps_single =
                overlap_error(full.trajectory, other.trajectory, ErrorKind::tot)
                    .max_value();
            row.steps = other.report.steps;
            row.t_end = other.report.t_end;
        }
        row.ok = true;
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace detail

inline int cmd_sweep(const CliOptions& opt, std::ostream& diag = std::cerr) {
    SimulationConfig base;
    std::string echo;
    SweepSpec sweep;
    try {
        base = detail::load_with_echo(opt.config_path, echo);
        sweep = parse_sweep(echo);
    } catch (const ConfigError& e) {
        diag << e.what() << "\n";
        return kExitConfig;
    }
    if (opt.seed) base.seed = *opt.seed;
    const auto violations = validate_config(base);
    if (!violations.empty()) {
        for (const auto& v : violations) diag << v << "\n";
        return kExitConfig;
    }
    const std::string out = detail::resolve_out_dir(opt, base);
    std::filesystem::create_directories(out);

    std::vector<SimulationConfig> points;
    try {
        for (double v : sweep.values)
            points.push_back(detail::apply_sweep_value(base, sweep.variable, v));
    } catch (const ConfigError& e) {
        diag << e.what() << "\n";
        return kExitConfig;
    }

    std::vector<detail::SweepRow> rows(points.size());
    const int workers = std::max(1, opt.workers);
    for (std::size_t begin = 0; begin < points.size();
         begin += static_cast<std::size_t>(workers)) {
        const std::size_t end =
            std::min(points.size(), begin + static_cast<std::size_t>(workers));
        std::vector<std::future<detail::SweepRow>> wave;
        for (std::size_t i = begin; i < end; ++i) {
            wave.push_back(std::async(std::launch::async, detail::sweep_point,
                                      points[i], opt.mode));
        }
        for (std::size_t i = begin; i < end; ++i) rows[i] = wave[i - begin].get();
    }

    std::ofstream csv(out + "/sweep.csv", std::ios::binary);
    if (!csv) {
        diag << "cannot open " << out << "/sweep.csv\n";
        return kExitNumerical;
    }
    csv << "index,variable,value,status,eps_inj_max,eps_ar_max,eps_tot_max,eps_" +
               (opt.mode == "absorb"  ? std::string("abs")
                : opt.mode == "remap" ? std::string("rem")
                : opt.mode == "cut"   ? std::string("cut")
                                      : std::string("single")) +
               "_max,steps,t_end_fs"
        << "\n";
    std::size_t succeeded = 0;
    auto cell = [](double v) { return v < 0.0 ? std::string() : detail::csv_num(v); };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.ok) ++succeeded;
        if (!row.ok) diag << "point " << i << " failed: " << row.error << "\n";
        csv << i << ',' << sweep.variable << ',' << detail::csv_num(sweep.values[i])
            << ',' << (row.ok ? "ok" : "failed") << ',' << cell(row.eps_inj) << ','
            << cell(row.eps_ar) << ',' << cell(row.eps_tot) << ','
            << cell(row.eps_single) << ',' << row.steps << ','
            << detail::csv_num(row.t_end) << "\n";
    }
    csv.close();

    RunReport dummy;
    detail::write_log(out, "sweep " + sweep.variable, dummy);
    return succeeded > 0 ? kExitOk : kExitNumerical;
}

}  // namespace schrodbox
