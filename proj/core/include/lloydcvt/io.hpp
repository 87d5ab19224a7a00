#pragma once

#include <string>

#include "lloydcvt/lloyd.hpp"
#include "lloydcvt/voronoi.hpp"

namespace lloydcvt {

// Grid JSON: {"level": N, "dim": d, "points": [[...], ...]}.
std::string grid_to_json(const Grid& g);
Grid grid_from_json_text(const std::string& text);
void write_grid_json(const Grid& g, const std::string& path);
Grid read_grid_json(const std::string& path);

// Grid CSV: one point per row, plain coordinates.
std::string grid_to_csv(const Grid& g);
void write_grid_csv(const Grid& g, const std::string& path);
Grid read_grid_csv(const std::string& path);

// Trace CSV with the fixed header
//   k,energy,gap,grad_norm,min_pair_dist,max_disp,radius,pullbacks
// Doubles are written with round-trip precision, so equal traces give
// byte-equal files.
std::string trace_to_csv(const Trace& t);
void write_trace_csv(const Trace& t, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lloydcvt
