// ptspec: command-line front end for the PT-symmetric spectrum laboratory.

#include "ptlab/figures.hpp"
#include "ptlab/job.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>
#include <vector>

namespace {

struct FlagSpec {
    const char* name;   // without leading dashes
    const char* help;
};

// Flags shared by several subcommands; run() rejects those a command does not use.
const std::vector<FlagSpec> value_flags = {
    {"K", "integer K in x^{2K}(ix)^eps"},
    {"P", "power P in |x|^P(ix)^eps (real-line problem)"},
    {"eps", "deformation eps"},
    {"eps-min", "lower end of the eps grid (or bracket)"},
    {"eps-max", "upper end of the eps grid (or bracket)"},
    {"eps-steps", "number of grid intervals"},
    {"levels", "number of levels"},
    {"trunc", "matrix truncation order"},
    {"energy", "classical energy E"},
    {"x0-re", "starting point, real part"},
    {"x0-im", "starting point, imaginary part"},
    {"branch", "sign of the initial momentum (+1 or -1)"},
    {"t-max", "integration time limit"},
    {"tol-energy", "relative energy-drift tolerance"},
    {"r-escape", "escape radius"},
    {"order", "WKB order: leading or nlo"},
    {"join-shooting", "1: add shooting eigenvalues to the WKB table"},
    {"deltas", "comma-separated delta values"},
    {"anchor", "eps at which the spectrum is taken real"},
    {"steps", "RK4 steps per ray"},
    {"threads", "worker threads (default: PTSPEC_THREADS or hardware)"},
    {"out", "output file ('-' or absent: stdout)"},
    {"format", "csv or json"},
};

std::string key_of(const std::string& flag) {
    std::string k = flag;
    for (char& ch : k)
        if (ch == '-') ch = '_';
    return k;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical orbits, spectra, WKB and matrix approximations for p^2 + x^{2K}(ix)^eps"};
    app.require_subcommand(0, 1);
    std::string config_path;
    app.add_option("--config", config_path, "key = value job file; flags override it");

    ptlab::JobConfig flags;
    for (const std::string& cmd : ptlab::job_commands()) {
        CLI::App* sub = app.add_subcommand(cmd, "run the " + cmd + " job");
        sub->add_option("--config", config_path, "key = value job file; flags override it");
        for (const FlagSpec& f : value_flags) {
            const std::string key = key_of(f.name);
            sub->add_option_function<std::string>(std::string("--") + f.name,
                                                  [&flags, key](const std::string& v) { flags.params[key] = v; }, f.help);
        }
        sub->add_option_function<std::vector<std::string>>(
               "--pair", [&flags](const std::vector<std::string>& v) { flags.params["pair"] = v[0] + "," + v[1]; },
               "level pair, e.g. --pair 1 2")
            ->expected(2);
        if (cmd == "emit-figure") {
            std::string ids;
            for (const auto& id : ptlab::figure_ids()) ids += (ids.empty() ? "" : " ") + id;
            sub->add_option_function<std::string>("figure", [&flags](const std::string& v) { flags.params["figure"] = v; },
                                                  "figure id: " + ids);
        }
        sub->callback([&flags, cmd] { flags.command = cmd; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ptlab::exit_ok : ptlab::exit_usage;
    }

    ptlab::JobConfig job;
    try {
        if (!config_path.empty()) job = ptlab::load_config_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ptlab::exit_usage;
    }
    job = ptlab::merge(job, flags);
    if (job.command.empty()) {
        std::cerr << "error: no command given\n" << app.help();
        return ptlab::exit_usage;
    }
    // With data on stdout, keep the summary off it.
    const bool to_stdout = job.get_string("out", "").empty() || job.get_string("out", "") == "-";
    return ptlab::run(job, std::cout, to_stdout ? std::cerr : std::cout, std::cerr);
}
