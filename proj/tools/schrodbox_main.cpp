#include <CLI11.hpp>

#include <schrodbox/schrodbox.hpp>

int main(int argc, char** argv) {
    CLI::App app{"1D wave packet transport on a finite window with open boundaries"};
    app.require_subcommand(1);

    schrodbox::CliOptions opt;
    unsigned long seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "INI-style config file")
            ->required();
        sub->add_option("--mode", opt.mode,
                        "combined | full | absorb | remap | cut (default combined)");
        sub->add_option("--out", opt.out_dir,
                        "output directory (default: config, then $SCHRODBOX_OUT_DIR)");
        sub->add_option("--workers", opt.workers, "concurrent sweep points");
        sub->add_option("--seed", seed, "echoed into reports; runs are deterministic");
    };

    CLI::App* run = app.add_subcommand("run", "execute one simulation");
    add_common(run);
    CLI::App* compare = app.add_subcommand(
        "compare", "run against a reference solution and emit error series");
    add_common(compare);
    compare->add_option("--oracle", opt.oracle,
                        "reference snapshots (ndjson) or 'auto' to compute one");
    CLI::App* sweep =
        app.add_subcommand("sweep", "repeat a run over the [sweep] value list");
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? schrodbox::kExitOk : schrodbox::kExitConfig;
    }

    CLI::App* active = run->parsed()       ? run
                       : compare->parsed() ? compare
                       : sweep->parsed()   ? sweep
                                           : nullptr;
    if (!active) return schrodbox::kExitConfig;
    if (active->count("--seed") > 0) opt.seed = seed;
    if (active == run) return schrodbox::cmd_run(opt);
    if (active == compare) return schrodbox::cmd_compare(opt);
    return schrodbox::cmd_sweep(opt);
}
