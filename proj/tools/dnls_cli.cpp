// Command-line front end: dnls check|run|sweep|verify.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dnls/config.hpp"
#include "dnls/errors.hpp"
#include "dnls/runner.hpp"
#include "dnls/spectral.hpp"

namespace {

int resolve_threads(int flag)
{
    if (flag > 0)
        return flag;
    if (const char* env = std::getenv("DNLS_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0)
                return n;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring invalid DNLS_THREADS='" << env << "'\n";
    }
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Split-step simulator and diagnostics for damped defocusing NLS"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 0;
    bool quiet = false;
    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "run configuration file");
        if (needs_config)
            opt->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
        sub->add_option("--threads", threads, "FFT threads, or sweep workers")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", quiet, "suppress progress and summary output");
    };

    auto* check_cmd = app.add_subcommand("check", "evaluate the hypothesis checkers only");
    auto* run_cmd = app.add_subcommand("run", "simulate and judge one configuration");
    auto* sweep_cmd = app.add_subcommand("sweep", "run the cartesian product of the [sweep] axes");
    auto* verify_cmd = app.add_subcommand("verify", "re-judge a finished run directory");
    add_common(check_cmd, true);
    add_common(run_cmd, true);
    add_common(sweep_cmd, true);
    add_common(verify_cmd, false);
    std::string run_dir;
    verify_cmd->add_option("directory", run_dir, "run directory holding series.csv and run_meta.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dnls::kExitConfig;
    }

    const int n_threads = resolve_threads(threads);
    dnls::RunOptions options;
    options.quiet = quiet;
    options.log = &std::cout;
    if (!out_dir.empty())
        options.out_dir = out_dir;

    try {
        if (*verify_cmd)
            return dnls::verify(run_dir, options);

        const dnls::RunConfig config = dnls::load_config(config_path);
        if (*check_cmd) {
            dnls::check(config, options);
            return dnls::kExitOk;
        }
        if (*run_cmd) {
            dnls::SpectralContext::set_threads(n_threads);
            return dnls::run(config, options).exit_code;
        }
        return dnls::sweep(config, options, n_threads).exit_code();
    } catch (const dnls::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return dnls::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return dnls::kExitAbort;
    }
}
