#include "doctest.h"

#include "ptlab/csv_io.hpp"
#include "ptlab/figures.hpp"
#include "ptlab/job.hpp"

#include "json.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace ptlab;

namespace {

struct RunResult {
    int code = -1;
    std::string data, summary, err;
};

RunResult run_job(const std::string& command, const std::map<std::string, std::string>& params) {
    JobConfig c;
    c.command = command;
    c.params = params;
    std::ostringstream d, s, e;
    RunResult r;
    r.code = run(c, d, s, e);
    r.data = d.str();
    r.summary = s.str();
    r.err = e.str();
    return r;
}

// Rebuilds a job from the '# command:' and '# param.*:' header lines.
JobConfig job_from_header(const std::string& csv) {
    JobConfig c;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
        const auto colon = line.find(": ");
        if (colon == std::string::npos) continue;
        const std::string key = line.substr(2, colon - 2);
        const std::string value = line.substr(colon + 2);
        if (key == "command") c.command = value;
        else if (key.rfind("param.", 0) == 0) c.params[key.substr(6)] = value;
    }
    return c;
}

std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("#", 0) != 0) out.push_back(line);
    return out;
}

int exit_status(const std::string& cmd) {
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::filesystem::path scratch_dir() {
    auto p = std::filesystem::temp_directory_path() / ("ptlab_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("number format: 17 significant digits, no locale") {
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-2.5) == "-2.5");
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1e-7) == "9.9999999999999995e-08");
    CHECK(format_number(6.283185307179586) == "6.2831853071795862");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-HUGE_VAL) == "-inf");
    for (double v : {0.1, 1.0 / 3.0, 2.718281828459045, 1e300, -4.9e-324}) CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
}

TEST_CASE("output format names") {
    CHECK(parse_format("csv") == Format::csv);
    CHECK(parse_format("json") == Format::json);
    CHECK_THROWS_AS(parse_format("xml"), DomainError);
}

TEST_CASE("csv layout: metadata, side tables, header, quoting") {
    Dataset d;
    d.main.add_meta("a", "x");
    d.main.add_meta("b", 0.5);
    d.main.columns = {"n", "v", "s"};
    d.main.rows.push_back({1LL, 0.25, std::string("p,q")});
    d.main.rows.push_back({2LL, Cell{}, std::string("say \"hi\"")});
    Table side;
    side.columns = {"i", "j"};
    side.rows.push_back({3LL, 4LL});
    d.annotations.emplace_back("pinch", side);
    std::ostringstream os;
    write_csv(os, d);
    CHECK(os.str() == "# a: x\n# b: 0.5\n# pinch: i,j\n# pinch: 3,4\nn,v,s\n1,0.25,\"p,q\"\n2,,\"say \"\"hi\"\"\"\n");
}

TEST_CASE("json mirrors the table") {
    Dataset d;
    d.main.add_meta("k", "v");
    d.main.columns = {"x", "name"};
    d.main.rows.push_back({1.5, std::string("a")});
    d.main.rows.push_back({std::nan(""), std::string("b")});
    std::ostringstream os;
    write_json(os, d);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["meta"]["k"] == "v");
    CHECK(j["columns"].size() == 2);
    CHECK(j["rows"][0]["x"].get<double>() == 1.5);
    CHECK(j["rows"][1]["x"] == "nan");
    CHECK(j["rows"][1]["name"] == "b");
}

TEST_CASE("config files: comments, whitespace, command key, errors") {
    std::istringstream in("# a job\ncommand = spectrum\n  K= 2 \neps =-0.5   # trailing\n\nlevels=4\n");
    const JobConfig c = parse_config(in);
    CHECK(c.command == "spectrum");
    CHECK(c.get_int("K", 0) == 2);
    CHECK(c.get_double("eps", 0.0) == -0.5);
    CHECK(c.get_int("levels", 0) == 4);
    CHECK(c.get_string("missing", "dflt") == "dflt");
    CHECK_THROWS_AS(c.require_double("energy"), DomainError);

    std::istringstream bad("K 2\n");
    CHECK_THROWS_AS(parse_config(bad, "job.cfg"), DomainError);
    std::istringstream empty_key(" = 3\n");
    CHECK_THROWS_AS(parse_config(empty_key), DomainError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/ptlab.cfg"), DomainError);

    JobConfig v;
    v.params = {{"x", "1.5e"}, {"n", "2.5"}, {"l", "1, 2 3"}};
    CHECK_THROWS_AS(v.get_double("x", 0.0), DomainError);
    CHECK_THROWS_AS(v.get_int("n", 0), DomainError);
    CHECK(v.get_list("l", {}) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(v.get_list("none", {7.0}) == std::vector<double>{7.0});
}

TEST_CASE("flags override the config file") {
    std::istringstream in("command = wkb\nK = 1\neps = 1\nlevels = 3\n");
    JobConfig file = parse_config(in);
    JobConfig flags;
    flags.params["levels"] = "5";
    JobConfig m = merge(file, flags);
    CHECK(m.command == "wkb");
    CHECK(m.get_int("levels", 0) == 5);
    CHECK(m.get_double("eps", 0.0) == 1.0);
    flags.command = "matrix";
    CHECK(merge(file, flags).command == "matrix");
}

TEST_CASE("exit codes") {
    CHECK(run_job("nonsense", {}).code == exit_usage);
    CHECK(run_job("spectrum", {{"K", "1"}, {"eps", "x"}}).code == exit_usage);
    CHECK(run_job("matrix", {{"eps", "0"}, {"energy", "1"}}).code == exit_usage);   // flag not used by matrix
    CHECK(run_job("spectrum", {{"K", "1"}, {"P", "2"}, {"eps", "0"}}).code == exit_usage);
    CHECK(run_job("spectrum", {{"K", "1"}, {"eps", "0"}, {"levels", "0"}}).code == exit_usage);
    CHECK(run_job("matrix", {{"eps", "3"}}).code == exit_usage);
    CHECK(run_job("wkb", {{"K", "1"}, {"eps", "1"}, {"order", "third"}}).code == exit_usage);
    CHECK(run_job("wkb", {{"K", "2"}, {"eps", "0.5"}, {"order", "nlo"}}).code == exit_usage);
    CHECK(run_job("trajectory", {{"eps", "-1.5"}, {"energy", "1"}, {"x0_re", "0"}, {"x0_im", "0"}}).code == exit_usage);
    CHECK(run_job("emit-figure", {{"figure", "fig99"}}).code == exit_usage);
    CHECK(run_job("table1", {{"deltas", "1e-9"}}).code == exit_usage);
    CHECK(run_job("table1", {{"format", "xml"}}).code == exit_usage);

    // A nearly flat potential defeats the real-axis scan: numeric failure.
    const RunResult r = run_job("spectrum", {{"P", "0.05"}, {"eps", "0"}, {"levels", "8"}});
    CHECK(r.code == exit_numeric);
    CHECK(r.err.find("solver failure") != std::string::npos);

    const RunResult ok = run_job("wkb", {{"K", "1"}, {"eps", "0"}, {"levels", "3"}});
    CHECK(ok.code == exit_ok);
    CHECK(ok.err.empty());
    CHECK(ok.summary.find("wkb") == 0);
}

TEST_CASE("identical jobs give byte-identical output") {
    const std::map<std::string, std::string> p = {{"K", "1"}, {"eps_min", "-0.3"}, {"eps_max", "0.3"},
                                                  {"eps_steps", "6"}, {"levels", "4"}};
    auto one = p, many = p;
    one["threads"] = "1";
    many["threads"] = "3";
    const RunResult a = run_job("spectrum", one);
    const RunResult b = run_job("spectrum", one);
    const RunResult c = run_job("spectrum", many);
    REQUIRE(a.code == exit_ok);
    CHECK(a.data == b.data);
    CHECK(data_lines(a.data) == data_lines(c.data));
    const RunResult m1 = run_job("matrix", {{"eps", "-0.5"}, {"trunc", "12"}});
    const RunResult m2 = run_job("matrix", {{"eps", "-0.5"}, {"trunc", "12"}});
    CHECK(m1.data == m2.data);
}

TEST_CASE("headers carry everything needed to regenerate the file") {
    const std::vector<std::pair<std::string, std::map<std::string, std::string>>> jobs = {
        {"trajectory", {{"K", "1"}, {"eps", "1"}, {"energy", "1"}}},
        {"spectrum", {{"K", "1"}, {"eps", "0.5"}, {"levels", "3"}}},
        {"matrix", {{"eps", "-0.5"}, {"trunc", "8"}}},
        {"wkb", {{"K", "1"}, {"eps", "0.5"}, {"levels", "4"}, {"order", "nlo"}}},
        {"table1", {{"deltas", "0.1,0.01"}}},
        {"special-points", {{"K", "2"}, {"levels", "4"}}},
        {"emit-figure", {{"figure", "fig10"}}},
    };
    for (const auto& [cmd, params] : jobs) {
        CAPTURE(cmd);
        const RunResult first = run_job(cmd, params);
        REQUIRE(first.code == exit_ok);
        const JobConfig again = job_from_header(first.data);
        CHECK(again.command == cmd);
        for (const auto& [k, v] : params) CHECK(again.get_string(k, "") == v);
        std::ostringstream d, s, e;
        CHECK(run(again, d, s, e) == exit_ok);
        CHECK(d.str() == first.data);
    }
}

TEST_CASE("json output parses and matches the csv rows") {
    const RunResult csv = run_job("wkb", {{"K", "1"}, {"eps", "1"}, {"levels", "4"}});
    const RunResult js = run_job("wkb", {{"K", "1"}, {"eps", "1"}, {"levels", "4"}, {"format", "json"}});
    REQUIRE(js.code == exit_ok);
    const auto j = nlohmann::json::parse(js.data);
    CHECK(j["meta"]["command"] == "wkb");
    CHECK(j["rows"].size() == data_lines(csv.data).size() - 1);
}

TEST_CASE("output files are written where asked") {
    const auto dir = scratch_dir();
    const auto path = dir / "sub" / "t.csv";
    const RunResult r = run_job("matrix", {{"eps", "0.5"}, {"trunc", "4"}, {"out", path.string()}});
    REQUIRE(r.code == exit_ok);
    CHECK(r.data.empty());
    CHECK(r.summary.find(path.string()) != std::string::npos);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str().rfind("# command: matrix", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("figure registry") {
    const auto& ids = figure_ids();
    CHECK(ids.size() == 12);
    CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size());
    CHECK_THROWS_AS(emit_figure("fig3"), DomainError);

    const Dataset f10 = emit_figure("fig10");
    CHECK(f10.main.meta.front().first == "figure");
    CHECK(f10.main.rows.size() == 16u * 161u);
    std::set<double> bs;
    for (const auto& r : f10.main.rows) bs.insert(std::get<double>(r[1]));
    CHECK(bs.size() == 16);
    CHECK(*bs.begin() == -2.0);
    CHECK(*bs.rbegin() == 2.0);

    const Dataset f1 = emit_figure("fig1");
    std::set<long long> orbits;
    for (const auto& r : f1.main.rows) orbits.insert(std::get<long long>(r[0]));
    CHECK(orbits.size() == 6);

    FigureOptions o;
    o.trunc = 6;
    const Dataset f115 = emit_figure("fig115", o);
    std::set<long long> truncs;
    for (const auto& r : f115.main.rows) truncs.insert(std::get<long long>(r[0]));
    CHECK(truncs.size() == 7);
}

TEST_CASE("command-line binary") {
    const char* bin = std::getenv("PTSPEC_BIN");
    if (!bin) {
        MESSAGE("PTSPEC_BIN not set; skipping subprocess checks");
        return;
    }
    const std::string b = std::string("\"") + bin + "\"";
    const auto dir = scratch_dir();
    const std::string q = " >/dev/null 2>&1";
    CHECK(exit_status(b + " --help" + q) == 0);
    CHECK(exit_status(b + q) == 2);
    CHECK(exit_status(b + " wkb --no-such-flag 1" + q) == 2);
    CHECK(exit_status(b + " emit-figure fig99" + q) == 2);
    CHECK(exit_status(b + " spectrum --P 0.05 --eps 0 --levels 8" + q) == 3);

    const auto cfg = dir / "job.cfg";
    std::ofstream(cfg) << "command = wkb\nK = 1\neps = 0\nlevels = 3\n";
    const auto out1 = dir / "a.csv", out2 = dir / "b.csv";
    CHECK(exit_status(b + " --config " + cfg.string() + " --out " + out1.string() + q) == 2);   // flags need a subcommand
    CHECK(exit_status(b + " wkb --config " + cfg.string() + " --levels 5 --out " + out1.string() + q) == 0);
    CHECK(exit_status(b + " wkb --config " + cfg.string() + " --levels 5 --out " + out2.string() + q) == 0);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const std::string a = slurp(out1);
    CHECK(a == slurp(out2));
    CHECK(a.find("# param.levels: 5") != std::string::npos);
    CHECK(data_lines(a).size() == 6);   // header plus five levels
    std::filesystem::remove_all(dir);
}
