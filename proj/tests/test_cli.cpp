#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <schrodbox/schrodbox.hpp>

// Exercises the installed binary end to end: exit codes, file layout and the
// schemas of everything a run leaves on disk.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string output;
};

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("schrodbox_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path log =
        fs::temp_directory_path() / ("schrodbox_cli_log_" + std::to_string(counter++));
    const std::string cmd = std::string(SCHRODBOX_CLI_BIN) + " " + args + " > \"" +
                            log.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    if (raw != -1 && WIFEXITED(raw)) r.code = WEXITSTATUS(raw);
    std::ifstream in(log);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    fs::remove(log);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

// Short free run: injection from the left, mask plus contraction on the
// right, fixed step count so every artifact is deterministic.
std::string base_ini(double dx = 0.2) {
    std::ostringstream ini;
    ini << "[domain]\n"
        << "a_nm = 0\n"
        << "b_nm = 50\n"
        << "dx_nm = " << dx << "\n"
        << "oracle_x_min_nm = -200\n"
        << "oracle_x_max_nm = 200\n"
        << "[time]\n"
        << "dt_fs = 0.01\n"
        << "max_steps = 2000\n"
        << "[model]\n"
        << "kind = tight_binding\n"
        << "m_star_rel = 0.2\n"
        << "[packet]\n"
        << "x0_nm = -70\n"
        << "sigma0_nm = 10\n"
        << "energy_ev = 0.1\n"
        << "side = left\n"
        << "[potential]\n"
        << "kind = flat\n"
        << "[boundary.left]\n"
        << "injection = true\n"
        << "[boundary.right]\n"
        << "mask = true\n"
        << "mask_exponent = 5\n"
        << "mask_length_nm = auto\n"
        << "remap = true\n"
        << "remap_la_nm = 20\n"
        << "[stop]\n"
        << "kind = none\n"
        << "[output]\n"
        << "cadence = 500\n"
        << "csv = true\n"
        << "ndjson = true\n";
    return ini.str();
}

fs::path write_config(const fs::path& dir, const std::string& text,
                      const std::string& name = "case.ini") {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    out.close();
    return p;
}

}  // namespace

TEST_CASE("run produces the documented artifacts") {
    const fs::path dir = fresh_dir("run_ok");
    const fs::path cfg = write_config(dir, base_ini());
    const fs::path out = dir / "out";

    const CliResult r = run_cli("run --config \"" + cfg.string() + "\" --out \"" +
                                out.string() + "\" --seed 42");
    CAPTURE(r.output);
    REQUIRE(r.code == 0);

    SECTION("norms.csv carries the fixed header and one row per record") {
        const auto rows = lines_of(slurp(out / "norms.csv"));
        REQUIRE(rows.size() == 6);
        REQUIRE(rows[0] == schrodbox::kSeriesCsvHeader);
        const auto first = split_csv(rows[1]);
        const auto last = split_csv(rows[5]);
        REQUIRE(first.size() == 8);
        REQUIRE(first[0] == "1");
        REQUIRE(last[0] == "2000");
        REQUIRE_THAT(std::stod(last[1]), Catch::Matchers::WithinRel(20.0, 1e-12));
        // a run has no oracle, so the error cells stay empty
        REQUIRE(last[5].empty());
        REQUIRE(last[6].empty());
        REQUIRE(last[7].empty());
        // norms are probabilities
        for (int k = 2; k <= 4; ++k) {
            const double v = std::stod(last[k]);
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
    }

    SECTION("report.json keeps flat keys plus the config echo") {
        const json rep = json::parse(slurp(out / "report.json"));
        REQUIRE(rep.at("steps").get<long>() == 2000);
        REQUIRE_THAT(rep.at("t_end_fs").get<double>(),
                     Catch::Matchers::WithinRel(20.0, 1e-12));
        REQUIRE(rep.at("stop_rule_fired").get<bool>() == false);
        REQUIRE(rep.at("mode").get<std::string>() == "combined");
        REQUIRE(rep.at("seed").get<unsigned long>() == 42);
        for (const char* key : {"norm_interior", "norm_left_layer", "norm_right_layer",
                                "absorbed_left", "absorbed_right", "accounting_total"}) {
            REQUIRE(rep.contains(key));
            REQUIRE(rep.at(key).is_number());
        }
        REQUIRE(rep.at("config").get<std::string>() == base_ini());
    }

    SECTION("snapshots.ndjson starts with a header record") {
        const auto rows = lines_of(slurp(out / "snapshots.ndjson"));
        REQUIRE(rows.size() == 6);
        const json head = json::parse(rows[0]);
        REQUIRE(head.at("type").get<std::string>() == "header");
        REQUIRE(head.at("dx_nm").get<double>() == 0.2);
        REQUIRE(head.at("a_nm").get<double>() == 0.0);
        REQUIRE(head.at("b_nm").get<double>() == 50.0);
        const int width = head.at("j_end").get<int>() - head.at("j_begin").get<int>() + 1;
        REQUIRE(width == 251);
        const json snap = json::parse(rows[1]);
        REQUIRE(snap.at("type").get<std::string>() == "snapshot");
        REQUIRE(snap.at("psi").size() == 251);
        REQUIRE(snap.at("psi")[0].size() == 2);

        // the stream reads back into a trajectory with the same shape
        const auto traj =
            schrodbox::read_trajectory_ndjson((out / "snapshots.ndjson").string());
        REQUIRE(traj.frames.size() == 5);
        REQUIRE(traj.frames[0].size() == 251);
        REQUIRE_THAT(traj.times.back(), Catch::Matchers::WithinRel(20.0, 1e-12));
    }

    SECTION("run.log exists and mentions the mode") {
        const std::string log = slurp(out / "run.log");
        REQUIRE(log.find("run mode=combined") != std::string::npos);
    }

    SECTION("a second run reproduces every data file byte for byte") {
        const fs::path out2 = dir / "out2";
        const CliResult r2 = run_cli("run --config \"" + cfg.string() + "\" --out \"" +
                                     out2.string() + "\" --seed 42");
        REQUIRE(r2.code == 0);
        for (const char* name : {"norms.csv", "report.json", "snapshots.ndjson"}) {
            CAPTURE(name);
            REQUIRE(slurp(out / name) == slurp(out2 / name));
        }
    }
}

TEST_CASE("every mode of a short free run exits cleanly") {
    const fs::path dir = fresh_dir("run_modes");
    const fs::path cfg = write_config(dir, base_ini());
    for (const std::string mode : {"combined", "full", "absorb", "remap", "cut"}) {
        CAPTURE(mode);
        const fs::path out = dir / mode;
        const CliResult r = run_cli("run --config \"" + cfg.string() + "\" --mode " +
                                    mode + " --out \"" + out.string() + "\"");
        CAPTURE(r.output);
        REQUIRE(r.code == 0);
        const json rep = json::parse(slurp(out / "report.json"));
        REQUIRE(rep.at("mode").get<std::string>() == mode);
        REQUIRE(rep.at("steps").get<long>() == 2000);
    }
}

TEST_CASE("output directory falls back to the environment variable") {
    const fs::path dir = fresh_dir("run_env");
    const fs::path cfg = write_config(dir, base_ini());
    const fs::path envout = dir / "from_env";
    setenv(schrodbox::kOutDirEnv, envout.string().c_str(), 1);
    const CliResult r = run_cli("run --config \"" + cfg.string() + "\"");
    unsetenv(schrodbox::kOutDirEnv);
    CAPTURE(r.output);
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(envout / "norms.csv"));
    REQUIRE(fs::exists(envout / "report.json"));
}

TEST_CASE("configuration problems exit with code 2") {
    const fs::path dir = fresh_dir("exit_config");

    SECTION("missing config file") {
        const CliResult r = run_cli("run --config " + (dir / "nope.ini").string());
        REQUIRE(r.code == 2);
        REQUIRE(r.output.find("cannot open config") != std::string::npos);
    }

    SECTION("missing required flag") {
        const CliResult r = run_cli("run");
        REQUIRE(r.code == 2);
    }

    SECTION("unknown subcommand") {
        const CliResult r = run_cli("frobnicate --config x.ini");
        REQUIRE(r.code == 2);
    }

    SECTION("validation failure: unstable time step") {
        std::string ini = base_ini();
        const auto pos = ini.find("dt_fs = 0.01");
        REQUIRE(pos != std::string::npos);
        ini.replace(pos, 12, "dt_fs = 1.0\n");
        const fs::path cfg = write_config(dir, ini);
        const CliResult r = run_cli("run --config \"" + cfg.string() + "\"");
        REQUIRE(r.code == 2);
        REQUIRE(r.output.find("stability limit") != std::string::npos);
    }

    SECTION("unknown mode") {
        const fs::path cfg = write_config(dir, base_ini());
        const CliResult r = run_cli("run --config \"" + cfg.string() +
                                    "\" --mode sideways --out \"" +
                                    (dir / "o").string() + "\"");
        REQUIRE(r.code == 2);
        REQUIRE(r.output.find("unknown mode") != std::string::npos);
    }

    SECTION("sweep without a sweep section") {
        const fs::path cfg = write_config(dir, base_ini());
        const CliResult r = run_cli("sweep --config \"" + cfg.string() +
                                    "\" --out \"" + (dir / "s").string() + "\"");
        REQUIRE(r.code == 2);
        REQUIRE(r.output.find("nothing to sweep") != std::string::npos);
    }
}

TEST_CASE("numerical failures exit with code 3") {
    const fs::path dir = fresh_dir("exit_numerical");
    // the wide-domain oracle cannot hold the initial packet: its tail still
    // carries weight at the domain edge
    std::string ini = base_ini();
    const auto pos = ini.find("oracle_x_min_nm = -200");
    REQUIRE(pos != std::string::npos);
    ini.replace(pos, 22, "oracle_x_min_nm = -100");
    const fs::path cfg = write_config(dir, ini);
    const CliResult r = run_cli("run --config \"" + cfg.string() + "\" --mode full" +
                                " --out \"" + (dir / "o").string() + "\"");
    CAPTURE(r.output);
    REQUIRE(r.code == 3);
    REQUIRE(r.output.find("run failed") != std::string::npos);
}

TEST_CASE("compare with the built-in oracle writes error series") {
    const fs::path dir = fresh_dir("compare_auto");
    const fs::path cfg = write_config(dir, base_ini());
    const fs::path out = dir / "out";
    const CliResult r = run_cli("compare --config \"" + cfg.string() + "\" --out \"" +
                                out.string() + "\"");
    CAPTURE(r.output);
    REQUIRE(r.code == 0);

    const json rep = json::parse(slurp(out / "report.json"));
    REQUIRE(rep.at("mode").get<std::string>() == "compare-auto");
    const double e_inj = rep.at("eps_inj_max").get<double>();
    const double e_ar = rep.at("eps_ar_max").get<double>();
    const double e_tot = rep.at("eps_tot_max").get<double>();
    REQUIRE(e_inj > 0.0);
    REQUIRE(e_ar >= 0.0);
    REQUIRE(e_tot > 0.0);
    // twenty femtoseconds of free flight far from the window stay accurate
    REQUIRE(e_inj < 1e-3);
    REQUIRE(e_tot < 1e-3);

    const auto rows = lines_of(slurp(out / "errors.csv"));
    REQUIRE(rows.size() == 6);
    REQUIRE(rows[0] == schrodbox::kSeriesCsvHeader);
    const auto last = split_csv(rows.back());
    REQUIRE(last.size() == 8);
    // all three error cells are populated here
    REQUIRE(!last[5].empty());
    REQUIRE(!last[6].empty());
    REQUIRE(!last[7].empty());
    REQUIRE(std::stod(last[7]) >= 0.0);
}

TEST_CASE("compare against a stored oracle") {
    const fs::path dir = fresh_dir("compare_oracle");
    const fs::path cfg = write_config(dir, base_ini());
    const fs::path oracle_out = dir / "oracle";
    REQUIRE(run_cli("run --config \"" + cfg.string() + "\" --mode full --out \"" +
                    oracle_out.string() + "\"")
                .code == 0);
    const fs::path snapshots = oracle_out / "snapshots.ndjson";
    REQUIRE(fs::exists(snapshots));

    SECTION("matching grid compares clean") {
        const fs::path out = dir / "ok";
        const CliResult r = run_cli("compare --config \"" + cfg.string() +
                                    "\" --oracle \"" + snapshots.string() +
                                    "\" --out \"" + out.string() + "\"");
        CAPTURE(r.output);
        REQUIRE(r.code == 0);
        const json rep = json::parse(slurp(out / "report.json"));
        REQUIRE(rep.at("mode").get<std::string>() == "compare-combined");
        REQUIRE(rep.at("eps_tot_max").get<double>() < 1e-3);
        REQUIRE_FALSE(rep.contains("eps_inj_max"));
    }

    SECTION("mismatched grid exits with code 4") {
        const fs::path cfg2 = write_config(dir, base_ini(0.25), "coarse.ini");
        const CliResult r = run_cli("compare --config \"" + cfg2.string() +
                                    "\" --oracle \"" + snapshots.string() +
                                    "\" --out \"" + (dir / "bad").string() + "\"");
        CAPTURE(r.output);
        REQUIRE(r.code == 4);
        REQUIRE(r.output.find("comparison mismatch") != std::string::npos);
    }
}

TEST_CASE("sweep emits one row per value and honors workers") {
    const fs::path dir = fresh_dir("sweep");
    std::string ini = base_ini();
    ini += "[sweep]\nvariable = energy\nvalues = 0.08, 0.12\n";
    const fs::path cfg = write_config(dir, ini);

    const fs::path out1 = dir / "serial";
    const CliResult r1 = run_cli("sweep --config \"" + cfg.string() + "\" --out \"" +
                                 out1.string() + "\"");
    CAPTURE(r1.output);
    REQUIRE(r1.code == 0);

    const auto rows = lines_of(slurp(out1 / "sweep.csv"));
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0] ==
            "index,variable,value,status,eps_inj_max,eps_ar_max,eps_tot_max,"
            "eps_single_max,steps,t_end_fs");
    for (int i = 1; i <= 2; ++i) {
        const auto cells = split_csv(rows[i]);
        REQUIRE(cells.size() == 10);
        REQUIRE(cells[0] == std::to_string(i - 1));
        REQUIRE(cells[1] == "energy");
        REQUIRE(cells[3] == "ok");
        // combined sweeps fill the three split errors, not the single one
        REQUIRE(!cells[4].empty());
        REQUIRE(!cells[5].empty());
        REQUIRE(!cells[6].empty());
        REQUIRE(cells[7].empty());
        REQUIRE(cells[8] == "2000");
    }
    REQUIRE_THAT(std::stod(split_csv(rows[1])[2]),
                 Catch::Matchers::WithinRel(0.08, 1e-12));
    REQUIRE_THAT(std::stod(split_csv(rows[2])[2]),
                 Catch::Matchers::WithinRel(0.12, 1e-12));

    SECTION("two workers produce the identical table") {
        const fs::path out2 = dir / "parallel";
        const CliResult r2 = run_cli("sweep --config \"" + cfg.string() +
                                     "\" --workers 2 --out \"" + out2.string() + "\"");
        CAPTURE(r2.output);
        REQUIRE(r2.code == 0);
        REQUIRE(slurp(out1 / "sweep.csv") == slurp(out2 / "sweep.csv"));
    }

    SECTION("device sweeps label the single-error column by mode") {
        const fs::path out3 = dir / "absorb";
        const CliResult r3 = run_cli("sweep --config \"" + cfg.string() +
                                     "\" --mode absorb --out \"" + out3.string() +
                                     "\"");
        CAPTURE(r3.output);
        REQUIRE(r3.code == 0);
        const auto arows = lines_of(slurp(out3 / "sweep.csv"));
        REQUIRE(arows[0] ==
                "index,variable,value,status,eps_inj_max,eps_ar_max,eps_tot_max,"
                "eps_abs_max,steps,t_end_fs");
        const auto cells = split_csv(arows[1]);
        REQUIRE(cells[3] == "ok");
        REQUIRE(cells[4].empty());
        REQUIRE(!cells[7].empty());
    }
}
