#pragma once

#include <cstdio>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "schrodbox/errors.hpp"
#include "schrodbox/integrator.hpp"
#include "schrodbox/reference.hpp"

namespace schrodbox {

namespace detail {

// Shortest exact decimal form, so reruns byte-reproduce their output files.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    return out;
}

}  // namespace detail

inline constexpr const char* kSeriesCsvHeader =
    "step,t_fs,norm_interior,norm_left_layer,norm_right_layer,eps_inj,eps_ar,eps_tot";

// One row per record; eps columns filled from whichever series are present
// (null pointers leave the cells empty).
inline void write_series_csv(std::ostream& out, const RunReport& rep,
                             const ErrorSeries* eps_inj = nullptr,
                             const ErrorSeries* eps_ar = nullptr,
                             const ErrorSeries* eps_tot = nullptr) {
    auto cell = [&](const ErrorSeries* es, std::size_t n) -> std::string {
        if (!es || n >= es->values.size()) return "";
        return detail::csv_num(es->values[n]);
    };
    out << kSeriesCsvHeader << "\n";
    for (std::size_t n = 0; n < rep.rec_step.size(); ++n) {
        out << rep.rec_step[n] << ',' << detail::csv_num(rep.rec_t[n]) << ','
            << detail::csv_num(rep.rec_norm_window[n]) << ','
            << detail::csv_num(rep.rec_norm_left[n]) << ','
            << detail::csv_num(rep.rec_norm_right[n]) << ',' << cell(eps_inj, n) << ','
            << cell(eps_ar, n) << ',' << cell(eps_tot, n) << "\n";
    }
}

inline void write_series_csv(const std::string& path, const RunReport& rep,
                             const ErrorSeries* eps_inj = nullptr,
                             const ErrorSeries* eps_ar = nullptr,
                             const ErrorSeries* eps_tot = nullptr) {
    auto out = detail::open_out(path);
    write_series_csv(out, rep, eps_inj, eps_ar, eps_tot);
}

// Summary of one run: step counts, final region norms, absorbed probability
// per side and the closure of the bookkeeping. For a packet sent in from the
// left, absorbed_right is the transmitted share and absorbed_left the
// reflected one. Wall-clock time is deliberately absent; it goes to the log.
inline nlohmann::json report_json(const RunReport& rep) {
    nlohmann::json j;
    j["steps"] = rep.steps;
    j["t_end_fs"] = rep.t_end;
    j["stop_rule_fired"] = rep.stop_rule_fired;
    j["norm_interior"] = rep.norm_window_final;
    j["norm_left_layer"] = rep.norm_left_final;
    j["norm_right_layer"] = rep.norm_right_final;
    j["absorbed_left"] = rep.absorbed_left;
    j["absorbed_right"] = rep.absorbed_right;
    j["accounting_total"] = rep.accounting_total;
    j["seed"] = rep.seed;
    return j;
}

inline void write_report_json(const std::string& path, const RunReport& rep,
                              const std::string& config_echo,
                              const nlohmann::json& extra = {}) {
    nlohmann::json j = report_json(rep);
    j["config"] = config_echo;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
}

// One header object, then one object per record with amplitudes as [re, im]
// pairs over the stored node range.
inline void write_snapshots_ndjson(const std::string& path, const Trajectory& traj) {
    auto out = detail::open_out(path);
    nlohmann::json head;
    head["type"] = "header";
    head["x_min_nm"] = traj.grid.x_min;
    head["dx_nm"] = traj.grid.dx;
    head["n_points"] = traj.grid.n_points;
    head["j_begin"] = traj.j_begin;
    head["j_end"] = traj.j_end;
    head["dt_fs"] = traj.dt;
    head["cadence"] = traj.cadence;
    head["a_nm"] = traj.grid.a;
    head["b_nm"] = traj.grid.b;
    out << head.dump() << "\n";
    for (std::size_t n = 0; n < traj.frames.size(); ++n) {
        nlohmann::json rec;
        rec["type"] = "snapshot";
        rec["t_fs"] = traj.times[n];
        auto psi = nlohmann::json::array();
        const CField& f = traj.frames[n];
        for (std::size_t k = 0; k < f.size(); ++k) {
            psi.push_back({f.re[k], f.im[k]});
        }
        rec["psi"] = std::move(psi);
        out << rec.dump() << "\n";
    }
}

inline Trajectory read_trajectory_ndjson(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty snapshot file");
    Trajectory traj;
    try {
        const auto head = nlohmann::json::parse(line);
        if (head.value("type", "") != "header")
            throw Error(path + ": first record is not a header");
        const double x_min = head.at("x_min_nm").get<double>();
        const double dx = head.at("dx_nm").get<double>();
        const int n = head.at("n_points").get<int>();
        traj.grid = build_grid(x_min, x_min + (n - 1) * dx, dx,
                               head.at("a_nm").get<double>(),
                               head.at("b_nm").get<double>());
        traj.j_begin = head.at("j_begin").get<int>();
        traj.j_end = head.at("j_end").get<int>();
        traj.dt = head.at("dt_fs").get<double>();
        traj.cadence = head.at("cadence").get<int>();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto rec = nlohmann::json::parse(line);
            if (rec.value("type", "") != "snapshot") continue;
            traj.times.push_back(rec.at("t_fs").get<double>());
            const auto& psi = rec.at("psi");
            CField f(psi.size());
            for (std::size_t k = 0; k < psi.size(); ++k) {
                f.re[k] = psi[k][0].get<double>();
                f.im[k] = psi[k][1].get<double>();
            }
            traj.frames.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": malformed snapshot stream: " + e.what());
    }
    return traj;
}

}  // namespace schrodbox
