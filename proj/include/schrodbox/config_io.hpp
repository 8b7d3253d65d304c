#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "schrodbox/config.hpp"
#include "schrodbox/errors.hpp"

namespace schrodbox {

namespace detail {

inline std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct IniValue {
    std::string text;
    int line = 0;
    bool used = false;
};

// section -> key -> value; '#' and ';' start comments, sections in brackets
using IniMap = std::map<std::string, std::map<std::string, IniValue>>;

inline IniMap parse_ini(const std::string& text) {
    IniMap m;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        m[section][key] = IniValue{value, lineno};
    }
    return m;
}

class ConfigReader {
  public:
    explicit ConfigReader(IniMap ini) : ini_(std::move(ini)) {}

    std::optional<std::string> take(const std::string& sec, const std::string& key) {
        auto s = ini_.find(sec);
        if (s == ini_.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        k->second.used = true;
        return k->second.text;
    }

    double num(const std::string& sec, const std::string& key, double def) {
        auto v = take(sec, key);
        if (!v) return def;
        return parse_num(sec, key, *v, def);
    }

    long integer(const std::string& sec, const std::string& key, long def) {
        const double d = num(sec, key, static_cast<double>(def));
        return static_cast<long>(d);
    }

    bool flag(const std::string& sec, const std::string& key, bool def) {
        auto v = take(sec, key);
        if (!v) return def;
        const std::string s = lower(*v);
        if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
        if (s == "false" || s == "no" || s == "off" || s == "0") return false;
        problems_.push_back("[" + sec + "] " + key + ": not a boolean: " + *v);
        return def;
    }

    std::string word(const std::string& sec, const std::string& key,
                     const std::string& def) {
        auto v = take(sec, key);
        return v ? lower(*v) : def;
    }

    std::string raw(const std::string& sec, const std::string& key,
                    const std::string& def) {
        auto v = take(sec, key);
        return v ? *v : def;
    }

    void problem(std::string msg) { problems_.push_back(std::move(msg)); }

    void finish() {
        for (const auto& [sec, keys] : ini_) {
            for (const auto& [key, val] : keys) {
                if (!val.used)
                    problems_.push_back("unknown key [" + sec + "] " + key +
                                        " (line " + std::to_string(val.line) + ")");
            }
        }
        if (!problems_.empty()) {
            std::string msg;
            for (std::size_t i = 0; i < problems_.size(); ++i) {
                if (i) msg += "\n";
                msg += problems_[i];
            }
            throw ConfigError(msg);
        }
    }

  private:
    double parse_num(const std::string& sec, const std::string& key,
                     const std::string& text, double def) {
        try {
            std::size_t used = 0;
            const double d = std::stod(text, &used);
            if (trim(text.substr(used)).empty()) return d;
        } catch (const std::exception&) {
        }
        problems_.push_back("[" + sec + "] " + key + ": not a number: " + text);
        return def;
    }

    IniMap ini_;
    std::vector<std::string> problems_;
};

}  // namespace detail

// Potential tables are whitespace-separated columns. A static table has rows
// "x u". A time-dependent one starts with a line "t: t0 t1 ..." and each
// following row reads "x u(t0) u(t1) ...".
inline void load_potential_table(const std::string& path, PotentialSpec& p) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open potential table " + path);
    std::string line;
    bool have_times = false;
    std::vector<std::vector<double>> rows;  // per x: [x, u...]
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cut = line.find('#');
        if (cut != std::string::npos) line.erase(cut);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (!have_times && line.rfind("t:", 0) == 0) {
            std::istringstream ts(line.substr(2));
            double t;
            while (ts >> t) p.table_t.push_back(t);
            if (p.table_t.empty())
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": empty time header");
            have_times = true;
            continue;
        }
        std::istringstream vs(line);
        std::vector<double> row;
        double v;
        while (vs >> v) row.push_back(v);
        if (row.size() < 2)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": need at least x and one value");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": no data rows");

    const std::size_t cols = have_times ? p.table_t.size() : 1;
    p.table_x.clear();
    p.table_u.assign(cols, {});
    for (const auto& row : rows) {
        if (row.size() != cols + 1)
            throw ConfigError(path + ": row with " + std::to_string(row.size() - 1) +
                              " values, expected " + std::to_string(cols));
        p.table_x.push_back(row[0]);
        for (std::size_t i = 0; i < cols; ++i) p.table_u[i].push_back(row[i + 1]);
    }
    for (std::size_t j = 1; j < p.table_x.size(); ++j) {
        if (!(p.table_x[j] > p.table_x[j - 1]))
            throw ConfigError(path + ": x column must be strictly increasing");
    }
    p.kind = have_times ? PotentialKind::time_dependent_tabulated
                        : PotentialKind::tabulated;
}

namespace detail {

inline void read_boundary(ConfigReader& r, const std::string& sec, BoundaryConfig& b) {
    b.analytic_injection = r.flag(sec, "injection", b.analytic_injection);
    if (r.flag(sec, "mask", false)) {
        AbsorberSpec a;
        a.m_exp = static_cast<int>(r.integer(sec, "mask_exponent", a.m_exp));
        const std::string len = r.word(sec, "mask_length_nm", "auto");
        if (len == "auto") {
            a.auto_length = true;
        } else {
            a.auto_length = false;
            try {
                a.length = std::stod(len);
            } catch (const std::exception&) {
                r.problem("[" + sec + "] mask_length_nm: expected a number or auto");
            }
        }
        b.absorber = a;
    } else {
        r.take(sec, "mask_exponent");
        r.take(sec, "mask_length_nm");
    }
    if (r.flag(sec, "remap", false)) {
        RemapSpec rm;
        rm.La = r.num(sec, "remap_la_nm", rm.La);
        b.remap = rm;
    } else {
        r.take(sec, "remap_la_nm");
    }
}

}  // namespace detail

// Parse the INI text into a raw (unresolved) configuration. base_dir anchors
// relative table paths. Unknown keys and malformed values are all collected
// and reported together.
inline SimulationConfig parse_config(const std::string& text,
                                     const std::string& base_dir = "") {
    detail::ConfigReader r(detail::parse_ini(text));
    SimulationConfig c;

    c.a = r.num("domain", "a_nm", c.a);
    c.b = r.num("domain", "b_nm", c.b);
    c.dx = r.num("domain", "dx_nm", c.dx);
    c.oracle_x_min = r.num("domain", "oracle_x_min_nm", c.oracle_x_min);
    c.oracle_x_max = r.num("domain", "oracle_x_max_nm", c.oracle_x_max);

    c.dt = r.num("time", "dt_fs", c.dt);
    c.max_steps = r.integer("time", "max_steps", c.max_steps);

    const std::string model = r.word("model", "kind", "tight_binding");
    if (model == "tight_binding") {
        c.model.kind = ModelKind::tight_binding;
    } else if (model == "effective_mass") {
        c.model.kind = ModelKind::effective_mass;
    } else {
        r.problem("[model] kind: unknown model " + model);
    }
    c.model.m_star = r.num("model", "m_star_rel", 0.2) * kElectronMass;
    c.model.u = r.num("model", "hopping_u_ev", 0.0);
    c.model.rho = r.num("model", "onsite_rho_ev", 0.0);

    c.packet.x0 = r.num("packet", "x0_nm", c.packet.x0);
    c.packet.sigma0 = r.num("packet", "sigma0_nm", c.packet.sigma0);
    c.packet.kx = r.num("packet", "kx_per_nm", c.packet.kx);
    c.energy_ev = r.num("packet", "energy_ev", c.energy_ev);
    const std::string side = r.word("packet", "side", "left");
    if (side == "left") {
        c.packet.injection_side = Side::left;
    } else if (side == "right") {
        c.packet.injection_side = Side::right;
    } else {
        r.problem("[packet] side: expected left or right");
    }

    const std::string pot = r.word("potential", "kind", "flat");
    if (pot == "flat") {
        c.potential.kind = PotentialKind::flat;
    } else if (pot == "barrier" || pot == "rectangular_barrier") {
        c.potential.kind = PotentialKind::rectangular_barrier;
        c.potential.barrier_center = r.num("potential", "barrier_center_nm", 0.0);
        c.potential.barrier_width = r.num("potential", "barrier_width_nm", 0.0);
        c.potential.barrier_height = r.num("potential", "barrier_height_ev", 0.0);
    } else if (pot == "tabulated" || pot == "time_dependent_tabulated" ||
               pot == "table") {
        const std::string file = r.raw("potential", "table_file", "");
        if (file.empty()) {
            r.problem("[potential] table_file required for tabulated potentials");
        } else {
            std::filesystem::path tp(file);
            if (tp.is_relative() && !base_dir.empty())
                tp = std::filesystem::path(base_dir) / tp;
            try {
                load_potential_table(tp.string(), c.potential);
            } catch (const ConfigError& e) {
                r.problem(e.what());
            }
        }
    } else {
        r.problem("[potential] kind: unknown potential " + pot);
    }

    detail::read_boundary(r, "boundary.left", c.left);
    detail::read_boundary(r, "boundary.right", c.right);
    c.left_mask_during_injection =
        r.flag("boundary.left", "mask_during_injection", c.left_mask_during_injection);

    const std::string stop = r.word("stop", "kind", "window_norm_below");
    if (stop == "window_norm_below") {
        c.stop.kind = StopKind::window_norm_below;
    } else if (stop == "tail_norm_below") {
        c.stop.kind = StopKind::tail_norm_below;
    } else if (stop == "none") {
        c.stop.kind = StopKind::none;
    } else {
        r.problem("[stop] kind: unknown stop rule " + stop);
    }
    c.stop.threshold = r.num("stop", "threshold", c.stop.threshold);

    c.output.cadence = static_cast<int>(r.integer("output", "cadence", c.output.cadence));
    c.output.csv = r.flag("output", "csv", c.output.csv);
    c.output.ndjson = r.flag("output", "ndjson", c.output.ndjson);
    c.output.snapshots = r.flag("output", "snapshots", c.output.snapshots);
    c.output.full_grid_snapshots =
        r.flag("output", "full_grid", c.output.full_grid_snapshots);
    c.output.out_dir = r.raw("output", "out_dir", c.output.out_dir);

    c.seed = static_cast<unsigned long>(r.integer("run", "seed", 0));

    // the sweep section belongs to the sweep front end; tolerated here
    r.take("sweep", "variable");
    r.take("sweep", "values");

    r.finish();
    return c;
}

// One swept variable with an explicit value list, read from the [sweep]
// section of a config file.
struct SweepSpec {
    std::string variable;
    std::vector<double> values;
};

inline SweepSpec parse_sweep(const std::string& text) {
    const auto ini = detail::parse_ini(text);
    SweepSpec s;
    auto sec = ini.find("sweep");
    if (sec != ini.end()) {
        auto var = sec->second.find("variable");
        if (var != sec->second.end()) s.variable = detail::lower(var->second.text);
        auto vals = sec->second.find("values");
        if (vals != sec->second.end()) {
            std::string list = vals->second.text;
            std::replace(list.begin(), list.end(), ',', ' ');
            std::istringstream vs(list);
            double v;
            while (vs >> v) s.values.push_back(v);
        }
    }
    if (s.variable.empty() || s.values.empty())
        throw ConfigError("nothing to sweep: config needs [sweep] variable and values");
    return s;
}

inline SimulationConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(),
                        std::filesystem::path(path).parent_path().string());
}

// Canonical text form; parse_config(serialize_config(c)) reproduces c for
// everything expressible in the file format.
inline std::string serialize_config(const SimulationConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "[domain]\n";
    out << "a_nm = " << c.a << "\n";
    out << "b_nm = " << c.b << "\n";
    out << "dx_nm = " << c.dx << "\n";
    out << "oracle_x_min_nm = " << c.oracle_x_min << "\n";
    out << "oracle_x_max_nm = " << c.oracle_x_max << "\n\n";

    out << "[time]\n";
    out << "dt_fs = " << c.dt << "\n";
    out << "max_steps = " << c.max_steps << "\n\n";

    out << "[model]\n";
    out << "kind = "
        << (c.model.kind == ModelKind::tight_binding ? "tight_binding"
                                                     : "effective_mass")
        << "\n";
    out << "m_star_rel = " << c.model.m_star / kElectronMass << "\n";
    if (c.model.u != 0.0) out << "hopping_u_ev = " << c.model.u << "\n";
    if (c.model.rho != 0.0) out << "onsite_rho_ev = " << c.model.rho << "\n";
    out << "\n[packet]\n";
    out << "x0_nm = " << c.packet.x0 << "\n";
    out << "sigma0_nm = " << c.packet.sigma0 << "\n";
    if (c.energy_ev > 0.0) {
        out << "energy_ev = " << c.energy_ev << "\n";
    } else {
        out << "kx_per_nm = " << c.packet.kx << "\n";
    }
    out << "side = " << (c.packet.injection_side == Side::left ? "left" : "right")
        << "\n\n";

    out << "[potential]\n";
    switch (c.potential.kind) {
        case PotentialKind::flat:
            out << "kind = flat\n";
            break;
        case PotentialKind::rectangular_barrier:
            out << "kind = barrier\n";
            out << "barrier_center_nm = " << c.potential.barrier_center << "\n";
            out << "barrier_width_nm = " << c.potential.barrier_width << "\n";
            out << "barrier_height_ev = " << c.potential.barrier_height << "\n";
            break;
        default:
            out << "kind = tabulated\n";
            out << "# table data not serialized; point table_file at the source\n";
            break;
    }

    auto boundary = [&](const char* name, const BoundaryConfig& b) {
        out << "\n[" << name << "]\n";
        out << "injection = " << (b.analytic_injection ? "true" : "false") << "\n";
        out << "mask = " << (b.absorber ? "true" : "false") << "\n";
        if (b.absorber) {
            out << "mask_exponent = " << b.absorber->m_exp << "\n";
            if (b.absorber->auto_length) {
                out << "mask_length_nm = auto\n";
            } else {
                out << "mask_length_nm = " << b.absorber->length << "\n";
            }
        }
        out << "remap = " << (b.remap ? "true" : "false") << "\n";
        if (b.remap) out << "remap_la_nm = " << b.remap->La << "\n";
    };
    boundary("boundary.left", c.left);
    out << "mask_during_injection = "
        << (c.left_mask_during_injection ? "true" : "false") << "\n";
    boundary("boundary.right", c.right);

    out << "\n[stop]\n";
    switch (c.stop.kind) {
        case StopKind::window_norm_below:
            out << "kind = window_norm_below\n";
            break;
        case StopKind::tail_norm_below:
            out << "kind = tail_norm_below\n";
            break;
        default:
            out << "kind = none\n";
            break;
    }
    out << "threshold = " << c.stop.threshold << "\n";

    out << "\n[output]\n";
    out << "cadence = " << c.output.cadence << "\n";
    out << "csv = " << (c.output.csv ? "true" : "false") << "\n";
    out << "ndjson = " << (c.output.ndjson ? "true" : "false") << "\n";
    out << "snapshots = " << (c.output.snapshots ? "true" : "false") << "\n";
    out << "full_grid = " << (c.output.full_grid_snapshots ? "true" : "false") << "\n";
    if (!c.output.out_dir.empty()) out << "out_dir = " << c.output.out_dir << "\n";

    out << "\n[run]\n";
    out << "seed = " << c.seed << "\n";
    return out.str();
}

}  // namespace schrodbox
