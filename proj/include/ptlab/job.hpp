#pragma once

// One CLI job: a command plus flat key=value parameters. Parameters come from
// an optional config file and are overridden by command-line flags.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ptlab {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_numeric = 3;

struct JobConfig {
    std::string command;
    std::map<std::string, std::string> params;

    bool has(const std::string& key) const { return params.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    // Required parameter; throws DomainError when missing.
    double require_double(const std::string& key) const;
    // Comma- or space-separated numbers.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
};

// Parses `key = value` lines; '#' starts a comment. A `command` key sets the command.
JobConfig parse_config(std::istream& in, const std::string& origin = "config");
JobConfig load_config_file(const std::string& path);

// Values in `overrides` replace those in `base`; a nonempty command wins.
JobConfig merge(JobConfig base, const JobConfig& overrides);

// Runs the job, writes its artifact (to params["out"] or `data`), and prints a
// one-line summary to `summary`. Returns the process exit code; diagnostics go to `err`.
int run(const JobConfig& config, std::ostream& data, std::ostream& summary, std::ostream& err);

// Commands accepted by run().
const std::vector<std::string>& job_commands();

}  // namespace ptlab
