#pragma once

// Plot-ready datasets for the standard pictures of the model: classical orbit
// families, spectra against eps or P, and matrix truncation convergence.

#include "ptlab/csv_io.hpp"

#include <string>
#include <vector>

namespace ptlab {

struct FigureOptions {
    int levels = 0;       // <= 0: per-figure default
    int eps_steps = 0;    // <= 0: per-figure default
    int trunc = 17;       // matrix truncation for fig115
    int threads = 0;
};

const std::vector<std::string>& figure_ids();

// Throws DomainError for an unknown id.
Dataset emit_figure(const std::string& id, const FigureOptions& opt = {});

}  // namespace ptlab
