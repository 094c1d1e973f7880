#include "ptlab/job.hpp"

#include "ptlab/basis_matrix.hpp"
#include "ptlab/csv_io.hpp"
#include "ptlab/figures.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace ptlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string k) {
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc() || res.ptr != e) throw DomainError("parameter " + key + ": '" + v + "' is not a number");
    return out;
}

const std::set<std::string> common_keys = {"command", "out", "format", "threads", "steps"};

const std::map<std::string, std::set<std::string>>& command_keys() {
    static const std::map<std::string, std::set<std::string>> m = {
        {"trajectory", {"K", "eps", "energy", "x0_re", "x0_im", "branch", "t_max", "tol_energy", "r_escape"}},
        {"spectrum", {"K", "P", "eps", "eps_min", "eps_max", "eps_steps", "levels", "anchor"}},
        {"matrix", {"eps", "trunc"}},
        {"wkb", {"K", "eps", "levels", "order", "join_shooting"}},
        {"table1", {"deltas"}},
        {"pinch", {"K", "pair", "eps_min", "eps_max", "anchor"}},
        {"special-points", {"K", "levels"}},
        {"emit-figure", {"figure", "levels", "eps_steps", "trunc"}},
    };
    return m;
}

void check_keys(const JobConfig& c) {
    const auto it = command_keys().find(c.command);
    if (it == command_keys().end()) throw DomainError("unknown command '" + c.command + "'");
    for (const auto& [k, v] : c.params)
        if (!common_keys.count(k) && !it->second.count(k))
            throw DomainError("parameter '" + k + "' does not apply to " + c.command);
}

ShootingControls shooting_controls(const JobConfig& c) {
    ShootingControls s;
    s.steps = c.get_int("steps", s.steps);
    if (s.steps < 100) throw DomainError("steps must be >= 100");
    return s;
}

SweepControls sweep_controls(const JobConfig& c) {
    SweepControls s;
    s.shooting = shooting_controls(c);
    s.threads = c.get_int("threads", 0);
    return s;
}

void add_params(Dataset& d, const JobConfig& c) {
    d.main.meta.insert(d.main.meta.begin(), {"command", c.command});
    std::size_t pos = 1;
    for (const auto& [k, v] : c.params) {
        if (k == "command" || k == "out" || k == "format") continue;
        d.main.meta.insert(d.main.meta.begin() + pos++, {"param." + k, v});
    }
}

std::string range_text(const std::vector<double>& g) {
    if (g.empty()) return "[]";
    return "[" + format_number(g.front()) + ", " + format_number(g.back()) + "]";
}

struct Outcome {
    Dataset data;
    std::string summary;
};

Outcome run_trajectory(const JobConfig& c) {
    const int K = c.get_int("K", 1);
    const double eps = c.get_double("eps", 0.0);
    const double E = c.get_double("energy", 1.0);
    const Deformation def = Deformation::analytic(K, eps);
    if (!(eps > -2.0 * K)) throw DomainError("classical mode needs eps > -2K");
    cplx x0;
    if (c.has("x0_re") || c.has("x0_im")) {
        x0 = cplx(c.get_double("x0_re", 0.0), c.get_double("x0_im", 0.0));
    } else {
        const auto tps = turning_points(def, E);
        const auto it = std::find_if(tps.begin(), tps.end(), [](const TurningPoint& t) { return t.primary; });
        if (it == tps.end()) throw DomainError("no primary turning point; pass --x0-re/--x0-im");
        x0 = it->x;
    }
    const int branch = c.get_int("branch", 1);
    if (branch != 1 && branch != -1) throw DomainError("branch must be +1 or -1");
    IntegrationControls ic;
    ic.t_max = c.get_double("t_max", ic.t_max);
    ic.tol_energy = c.get_double("tol_energy", ic.tol_energy);
    ic.R_escape = c.get_double("r_escape", ic.R_escape);
    const Trajectory tr = integrate(def, E, x0, branch, ic);
    if (tr.termination == Termination::step_failure) throw NumericalError("trajectory integration failed near the branch point");
    Outcome o{trajectory_dataset(tr), ""};
    o.data.main.add_meta("x0_re", x0.real());
    o.data.main.add_meta("x0_im", x0.imag());
    o.data.main.add_meta("branch", std::to_string(branch));
    o.summary = "trajectory: " + def.describe() + " E=" + format_number(E) + " " + to_string(tr.termination) +
                " states=" + std::to_string(tr.states.size()) +
                (tr.period ? " period=" + format_number(*tr.period) : std::string()) +
                " winding=" + std::to_string(tr.winding) + " turns=" + format_number(tr.rotation_turns());
    return o;
}

std::vector<double> eps_grid(const JobConfig& c) {
    if (c.has("eps") && !c.has("eps_min") && !c.has("eps_max")) return {c.get_double("eps", 0.0)};
    const double lo = c.require_double("eps_min");
    const double hi = c.require_double("eps_max");
    const int steps = c.get_int("eps_steps", 100);
    if (steps < 1) throw DomainError("eps_steps must be >= 1");
    if (!(hi >= lo)) throw DomainError("eps_max must be >= eps_min");
    std::vector<double> g;
    for (int i = 0; i <= steps; ++i) g.push_back(lo + (hi - lo) * i / steps);
    return g;
}

Outcome run_spectrum(const JobConfig& c) {
    if (c.has("K") && c.has("P")) throw DomainError("give either K or P, not both");
    const Deformation base = c.has("P") ? Deformation::nonanalytic(c.get_double("P", 2.0), 0.0)
                                        : Deformation::analytic(c.get_int("K", 1), 0.0);
    const int levels = c.get_int("levels", 10);
    if (levels < 1) throw DomainError("levels must be >= 1");
    SweepControls sc = sweep_controls(c);
    sc.anchor_epsilon = c.get_double("anchor", 0.0);
    const std::vector<double> grid = eps_grid(c);
    const SweepResult r = sweep(base, grid, levels, sc);
    Outcome o{sweep_dataset(r), ""};
    std::size_t records = 0;
    for (const auto& row : r.rows) records += row.size();
    std::string pinches;
    for (const auto& p : r.pinches)
        pinches += " (" + std::to_string(p.n_low) + "," + std::to_string(p.n_high) + ")@" + format_number(p.epsilon_star);
    o.summary = "spectrum: " + base.describe() + " eps in " + range_text(grid) + " points=" + std::to_string(grid.size()) +
                " levels=" + std::to_string(levels) + " records=" + std::to_string(records) +
                " pinches=" + std::to_string(r.pinches.size()) + pinches + " warnings=" + std::to_string(r.warnings.size());
    return o;
}

Outcome run_matrix(const JobConfig& c) {
    const double eps = c.require_double("eps");
    const int trunc = c.get_int("trunc", 17);
    if (trunc < 0) throw DomainError("trunc must be >= 0");
    if (!(eps > -1.0 && eps < 2.0)) throw DomainError("matrix method needs -1 < eps < 2");
    std::vector<std::pair<int, std::vector<cplx>>> spectra;
    for (int k = 0; k <= trunc; ++k) spectra.emplace_back(k, truncated_spectrum(k, eps).eigenvalues);
    Outcome o{matrix_dataset(eps, spectra), ""};
    int real = 0;
    for (const cplx e : spectra.back().second) real += classify_real(e) ? 1 : 0;
    o.summary = "matrix: eps=" + format_number(eps) + " truncations 0.." + std::to_string(trunc) +
                " real eigenvalues at largest=" + std::to_string(real) +
                " lowest=" + format_number(spectra.back().second.front().real());
    return o;
}

Outcome run_wkb(const JobConfig& c) {
    const int K = c.get_int("K", 1);
    const double eps = c.require_double("eps");
    const int levels = c.get_int("levels", 10);
    if (levels < 1) throw DomainError("levels must be >= 1");
    const std::string order = c.get_string("order", "leading");
    if (order != "leading" && order != "lo" && order != "nlo") throw DomainError("order must be leading or nlo");
    const bool nlo = order == "nlo";
    const bool join = c.get_int("join_shooting", 0) != 0;

    const auto lo = wkb_levels(K, eps, levels, WkbOrder::leading);
    std::vector<WkbEstimate> hi;
    if (nlo) hi = wkb_levels(K, eps, levels, WkbOrder::nlo);
    std::vector<cplx> exact;
    if (join) {
        SweepControls sc = sweep_controls(c);
        const SweepResult r = sweep(Deformation::analytic(K, 0.0), {eps}, levels, sc);
        for (int n = 0; n < levels; ++n) {
            const auto it = std::find_if(r.rows[0].begin(), r.rows[0].end(), [n](const EigenvalueRecord& e) { return e.level == n; });
            exact.push_back(it != r.rows[0].end() ? it->energy : cplx(std::nan(""), 0.0));
        }
    }
    Outcome o;
    Dataset& d = o.data;
    d.main.add_meta("K", std::to_string(K));
    d.main.add_meta("epsilon", eps);
    d.main.columns = {"n", "epsilon", "E_lo", "E_nlo"};
    if (join) d.main.columns.push_back("E_shooting");
    for (int n = 0; n < levels; ++n) {
        std::vector<Cell> row = {static_cast<long long>(n), eps, lo[n].E};
        const auto h = std::find_if(hi.begin(), hi.end(), [n](const WkbEstimate& w) { return w.n == n; });
        row.push_back(h != hi.end() ? Cell(h->E) : Cell());
        if (join) row.push_back(exact[n].real());
        d.main.rows.push_back(row);
    }
    o.summary = "wkb: K=" + std::to_string(K) + " eps=" + format_number(eps) + " levels=" + std::to_string(levels) +
                " order=" + (nlo ? "nlo" : "leading") + " E0=" + format_number(lo.front().E) +
                (join ? " shooting joined" : "");
    return o;
}

Outcome run_table1(const JobConfig& c) {
    const std::vector<double> deltas = c.get_list("deltas", table1_default_deltas());
    const auto rows = table1(deltas, shooting_controls(c));
    Outcome o{table1_dataset(rows), ""};
    o.summary = "table1: rows=" + std::to_string(rows.size()) + " E_exact in [" + format_number(rows.front().E_exact) +
                ", " + format_number(rows.back().E_exact) + "]";
    return o;
}

Outcome run_pinch(const JobConfig& c) {
    const int K = c.get_int("K", 1);
    const std::vector<double> pair = c.get_list("pair", {1.0, 2.0});
    if (pair.size() != 2) throw DomainError("pair needs two level indices");
    PinchControls pc;
    pc.sweep = sweep_controls(c);
    pc.anchor_epsilon = c.get_double("anchor", 0.0);
    const double near = c.get_double("eps_max", pc.anchor_epsilon - 1e-3);
    const double far = c.get_double("eps_min", pc.anchor_epsilon - 0.99);
    const PinchPoint p = locate_pinch(K, {static_cast<int>(pair[0]), static_cast<int>(pair[1])}, {near, far}, pc);
    Outcome o;
    o.data.main.add_meta("K", std::to_string(K));
    o.data.main.columns = {"level_low", "level_high", "epsilon_star", "E_star"};
    o.data.main.rows.push_back({static_cast<long long>(p.n_low), static_cast<long long>(p.n_high), p.epsilon_star, p.E_star});
    o.summary = "pinch: K=" + std::to_string(K) + " pair (" + std::to_string(p.n_low) + "," + std::to_string(p.n_high) +
                ") eps*=" + format_number(p.epsilon_star) + " E*=" + format_number(p.E_star);
    return o;
}

Outcome run_special_points(const JobConfig& c) {
    const int K = c.get_int("K", 2);
    const int levels = c.get_int("levels", 8);
    const ShootingControls sc = shooting_controls(c);
    const auto checks = special_real_points(K, levels, sc);
    Outcome o;
    Dataset& d = o.data;
    d.main.add_meta("K", std::to_string(K));
    d.main.columns = {"epsilon", "level", "re_E", "im_E", "is_real"};
    Table flags;
    flags.columns = {"epsilon", "all_real", "zeros_in_box"};
    std::string text;
    for (const auto& rc : checks) {
        for (std::size_t n = 0; n < rc.levels.size(); ++n)
            d.main.rows.push_back({rc.epsilon, static_cast<long long>(n), rc.levels[n].real(), rc.levels[n].imag(),
                                   static_cast<long long>(classify_real(rc.levels[n]) ? 1 : 0)});
        flags.rows.push_back({rc.epsilon, static_cast<long long>(rc.all_real ? 1 : 0), static_cast<long long>(rc.zeros_in_box)});
        text += " eps=" + format_number(rc.epsilon) + (rc.all_real ? ":all-real" : ":not-all-real");
    }
    d.annotations.emplace_back("reality", std::move(flags));
    if (K == 2) {
        const double defect = cross_identity_defect(levels, sc);
        d.main.add_meta("cross_identity_defect", defect);
        text += " cross-identity defect=" + format_number(defect);
    }
    o.summary = "special-points: K=" + std::to_string(K) + text;
    return o;
}

Outcome run_emit_figure(const JobConfig& c) {
    if (!c.has("figure")) throw DomainError("emit-figure needs a figure id");
    FigureOptions fo;
    fo.levels = c.get_int("levels", 0);
    fo.eps_steps = c.get_int("eps_steps", 0);
    fo.trunc = c.get_int("trunc", 17);
    fo.threads = c.get_int("threads", 0);
    const std::string id = c.get_string("figure", "");
    Outcome o{emit_figure(id, fo), ""};
    o.summary = "emit-figure: " + id + " rows=" + std::to_string(o.data.main.rows.size());
    return o;
}

}  // namespace

std::string JobConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

double JobConfig::get_double(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : parse_double(key, it->second);
}

int JobConfig::get_int(const std::string& key, int fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    int out = 0;
    const std::string& v = it->second;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw DomainError("parameter " + key + ": '" + v + "' is not an integer");
    return out;
}

double JobConfig::require_double(const std::string& key) const {
    if (!has(key)) throw DomainError("missing required parameter " + key);
    return get_double(key, 0.0);
}

std::vector<double> JobConfig::get_list(const std::string& key, const std::vector<double>& fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(key, tok));
    if (out.empty()) throw DomainError("parameter " + key + " is empty");
    return out;
}

JobConfig parse_config(std::istream& in, const std::string& origin) {
    JobConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw DomainError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (key == "command") c.command = value;
        else c.params[key] = value;
    }
    return c;
}

JobConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read config file " + path);
    return parse_config(in, path);
}

JobConfig merge(JobConfig base, const JobConfig& overrides) {
    if (!overrides.command.empty()) base.command = overrides.command;
    for (const auto& [k, v] : overrides.params) base.params[k] = v;
    return base;
}

const std::vector<std::string>& job_commands() {
    static const std::vector<std::string> c = {"trajectory", "spectrum", "matrix", "wkb",
                                               "table1", "pinch", "special-points", "emit-figure"};
    return c;
}

int run(const JobConfig& config, std::ostream& data, std::ostream& summary, std::ostream& err) {
    try {
        check_keys(config);
        const Format fmt = parse_format(config.get_string("format", "csv"));
        Outcome o;
        const std::string& cmd = config.command;
        if (cmd == "trajectory") o = run_trajectory(config);
        else if (cmd == "spectrum") o = run_spectrum(config);
        else if (cmd == "matrix") o = run_matrix(config);
        else if (cmd == "wkb") o = run_wkb(config);
        else if (cmd == "table1") o = run_table1(config);
        else if (cmd == "pinch") o = run_pinch(config);
        else if (cmd == "special-points") o = run_special_points(config);
        else o = run_emit_figure(config);
        add_params(o.data, config);
        const std::string out = config.get_string("out", "");
        if (out.empty() || out == "-") {
            write_dataset(data, o.data, fmt);
        } else {
            write_dataset_file(out, o.data, fmt);
            o.summary += " -> " + out;
        }
        summary << o.summary << '\n';
        return exit_ok;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const NoConvergence& e) {
        err << "solver failure: " << e.what() << " (best iterate " << format_number(e.best().real()) << " "
            << format_number(e.best().imag()) << "i)\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << '\n';
        return exit_numeric;
    }
}

}  // namespace ptlab
