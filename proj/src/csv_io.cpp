#include "ptlab/csv_io.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace ptlab {

namespace {

std::string cell_text(const Cell& c) {
    return std::visit([](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, double>) return format_number(v);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else return v;
    }, c);
}

// Fields holding commas or quotes get RFC 4180 quoting.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_field(fields[i]);
    }
    return line;
}

nlohmann::ordered_json cell_json(const Cell& c) {
    return std::visit([](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) {
            if (!std::isfinite(v)) return format_number(v);
            return v;
        } else return v;
    }, c);
}

nlohmann::ordered_json table_json(const Table& t) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.meta) meta[k] = v;
    if (!t.meta.empty()) j["meta"] = meta;
    j["columns"] = t.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < r.size() && i < t.columns.size(); ++i) row[t.columns[i]] = cell_json(r[i]);
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

double energy_drift(const Trajectory& tr, const ClassicalState& s) {
    const cplx V = potential(Deformation::analytic(tr.K, tr.epsilon), s.x, s.theta);
    const cplx p2 = s.p * s.p;
    const double scale = std::max({std::abs(tr.energy), std::abs(V), std::abs(p2)});
    return std::abs(p2 + V - tr.energy) / (scale > 0.0 ? scale : 1.0);
}

void trajectory_meta(Table& t, const Trajectory& tr) {
    t.add_meta("K", std::to_string(tr.K));
    t.add_meta("epsilon", tr.epsilon);
    t.add_meta("E", tr.energy);
    t.add_meta("termination", to_string(tr.termination));
    t.add_meta("period", tr.period ? format_number(*tr.period) : std::string("none"));
    t.add_meta("winding", std::to_string(tr.winding));
    t.add_meta("rotation_turns", tr.rotation_turns());
    t.add_meta("max_energy_drift", tr.max_energy_drift);
}

}  // namespace

void Table::add_meta(std::string key, std::string value) {
    meta.emplace_back(std::move(key), std::move(value));
}

void Table::add_meta(std::string key, double value) {
    meta.emplace_back(std::move(key), format_number(value));
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw DomainError("unknown output format '" + s + "' (csv or json)");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const Dataset& d) {
    for (const auto& [k, v] : d.main.meta) os << "# " << k << ": " << v << '\n';
    for (const auto& [name, t] : d.annotations) {
        os << "# " << name << ": " << join_row(t.columns) << '\n';
        for (const auto& r : t.rows) {
            std::vector<std::string> f;
            for (const auto& c : r) f.push_back(cell_text(c));
            os << "# " << name << ": " << join_row(f) << '\n';
        }
    }
    os << join_row(d.main.columns) << '\n';
    for (const auto& r : d.main.rows) {
        std::vector<std::string> f;
        for (const auto& c : r) f.push_back(cell_text(c));
        os << join_row(f) << '\n';
    }
}

void write_json(std::ostream& os, const Dataset& d) {
    nlohmann::ordered_json j = table_json(d.main);
    for (const auto& [name, t] : d.annotations) j[name] = table_json(t);
    os << j.dump(2) << '\n';
}

void write_dataset(std::ostream& os, const Dataset& d, Format f) {
    if (f == Format::csv) write_csv(os, d);
    else write_json(os, d);
}

void write_dataset_file(const std::string& path, const Dataset& d, Format f) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    write_dataset(out, d, f);
    if (!out) throw std::runtime_error("write failed for " + path);
}

Dataset trajectory_dataset(const Trajectory& tr) {
    Dataset d;
    trajectory_meta(d.main, tr);
    d.main.columns = {"t", "re_x", "im_x", "re_p", "im_p", "theta", "energy_drift"};
    for (const auto& s : tr.states)
        d.main.rows.push_back({s.t, s.x.real(), s.x.imag(), s.p.real(), s.p.imag(), s.theta, energy_drift(tr, s)});
    return d;
}

Dataset trajectory_set_dataset(const std::vector<Trajectory>& trs) {
    Dataset d;
    Table summary;
    summary.columns = {"orbit", "K", "epsilon", "E", "x0_re", "x0_im", "termination", "period", "winding", "rotation_turns"};
    d.main.columns = {"orbit", "t", "re_x", "im_x", "re_p", "im_p", "theta", "energy_drift"};
    for (std::size_t k = 0; k < trs.size(); ++k) {
        const Trajectory& tr = trs[k];
        const cplx x0 = tr.states.empty() ? cplx(0.0) : tr.states.front().x;
        summary.rows.push_back({static_cast<long long>(k), static_cast<long long>(tr.K), tr.epsilon, tr.energy,
                                x0.real(), x0.imag(), std::string(to_string(tr.termination)),
                                tr.period ? Cell(*tr.period) : Cell(), static_cast<long long>(tr.winding),
                                tr.rotation_turns()});
        for (const auto& s : tr.states)
            d.main.rows.push_back({static_cast<long long>(k), s.t, s.x.real(), s.x.imag(), s.p.real(), s.p.imag(),
                                   s.theta, energy_drift(tr, s)});
    }
    d.annotations.emplace_back("orbits", std::move(summary));
    return d;
}

Dataset sweep_dataset(const SweepResult& r) {
    Dataset d;
    d.main.add_meta("family", r.base.describe());
    d.main.add_meta("levels", std::to_string(r.n_levels));
    d.main.columns = {"epsilon", "level", "re_E", "im_E", "is_real", "method"};
    for (std::size_t i = 0; i < r.rows.size(); ++i)
        for (const auto& rec : r.rows[i])
            d.main.rows.push_back({rec.epsilon, static_cast<long long>(rec.level), rec.energy.real(), rec.energy.imag(),
                                   static_cast<long long>(rec.is_real ? 1 : 0), std::string(to_string(rec.method))});
    Table pinches;
    pinches.columns = {"level_low", "level_high", "epsilon_star", "E_star", "reemergence"};
    for (const auto& p : r.pinches)
        pinches.rows.push_back({static_cast<long long>(p.n_low), static_cast<long long>(p.n_high), p.epsilon_star,
                                p.E_star, static_cast<long long>(p.reemergence ? 1 : 0)});
    d.annotations.emplace_back("pinches", std::move(pinches));
    if (!r.warnings.empty()) {
        Table w;
        w.columns = {"message"};
        for (const auto& m : r.warnings) w.rows.push_back({m});
        d.annotations.emplace_back("warnings", std::move(w));
    }
    return d;
}

Dataset matrix_dataset(double epsilon, const std::vector<std::pair<int, std::vector<cplx>>>& spectra) {
    Dataset d;
    d.main.add_meta("epsilon", epsilon);
    d.main.columns = {"trunc_order", "eig_index", "re_E", "im_E"};
    for (const auto& [order, eig] : spectra)
        for (std::size_t k = 0; k < eig.size(); ++k)
            d.main.rows.push_back({static_cast<long long>(order), static_cast<long long>(k), eig[k].real(), eig[k].imag()});
    return d;
}

Dataset table1_dataset(const std::vector<AsymptoteRow>& rows) {
    Dataset d;
    d.main.add_meta("family", "x^2 (ix)^eps at eps = -1 + delta, ground state");
    d.main.add_meta("E_formula", "[-(3/4) ln delta]^(2/3)");
    d.main.columns = {"delta", "E_exact", "E_formula"};
    for (const auto& r : rows) d.main.rows.push_back({r.delta, r.E_exact, r.E_formula});
    return d;
}

}  // namespace ptlab
