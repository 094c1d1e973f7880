#pragma once

// Plot-ready tables: '#'-prefixed metadata, a header row, fixed 17-digit
// numbers. The same tables serialize to JSON.

#include "ptlab/classical.hpp"
#include "ptlab/spectral_flow.hpp"
#include "ptlab/sweep.hpp"
#include "ptlab/wkb.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ptlab {

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_meta(std::string key, std::string value);
    void add_meta(std::string key, double value);
};

// A main table plus named side tables (pinch annotations and the like). In CSV
// the side tables become comment lines after the metadata.
struct Dataset {
    Table main;
    std::vector<std::pair<std::string, Table>> annotations;
};

enum class Format { csv, json };

Format parse_format(const std::string& s);

// 17 significant digits, no locale.
std::string format_number(double v);

void write_csv(std::ostream& os, const Dataset& d);
void write_json(std::ostream& os, const Dataset& d);
void write_dataset(std::ostream& os, const Dataset& d, Format f);

// Writes to `path`, creating parent directories. Throws std::runtime_error on I/O failure.
void write_dataset_file(const std::string& path, const Dataset& d, Format f);

// Column layouts shared by the CLI and the figure emitters.
Dataset trajectory_dataset(const Trajectory& tr);
// Several trajectories in one table with a leading orbit column.
Dataset trajectory_set_dataset(const std::vector<Trajectory>& trs);
Dataset sweep_dataset(const SweepResult& r);
Dataset matrix_dataset(double epsilon, const std::vector<std::pair<int, std::vector<cplx>>>& spectra);
Dataset table1_dataset(const std::vector<AsymptoteRow>& rows);

}  // namespace ptlab
