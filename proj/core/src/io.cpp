#include "lloydcvt/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lloydcvt/errors.hpp"

namespace lloydcvt {

namespace {

// Shortest decimal string that round-trips the double, so equal values
// serialize byte-identically across runs.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  for (int prec = 1; prec < 17; ++prec) {
    char trial[40];
    std::snprintf(trial, sizeof(trial), "%.*g", prec, v);
    std::sscanf(trial, "%lf", &back);
    if (back == v) return trial;
  }
  return buf;
}

// JSON parsers read "-0" as the integer zero, losing the sign; force the
// float form there. Every other integer-looking string converts exactly.
std::string fmt_json(double v) {
  std::string s = fmt(v);
  return s == "-0" ? "-0.0" : s;
}

}  // namespace

std::string grid_to_json(const Grid& g) {
  std::ostringstream os;
  os << "{\n  \"level\": " << g.size() << ",\n  \"dim\": " << g.dim << ",\n  \"points\": [";
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << (i == 0 ? "\n" : ",\n") << "    [";
    for (int k = 0; k < g.dim; ++k) os << (k == 0 ? "" : ", ") << fmt_json(g.point(i)[k]);
    os << "]";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

Grid grid_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("grid json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dim") || !j.contains("points"))
    throw io_error("grid json: need an object with dim and points");
  Grid g;
  g.dim = j.at("dim").get<int>();
  if (g.dim < 1) throw io_error("grid json: dim must be >= 1");
  for (const auto& row : j.at("points")) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(g.dim))
      throw io_error("grid json: each point needs dim coordinates");
    for (const auto& v : row) g.pts.push_back(v.get<double>());
  }
  if (j.contains("level") &&
      j.at("level").get<std::size_t>() != g.size())
    throw io_error("grid json: level does not match the point count");
  return g;
}

void write_grid_json(const Grid& g, const std::string& path) {
  write_text_file(path, grid_to_json(g));
}

Grid read_grid_json(const std::string& path) {
  return grid_from_json_text(read_text_file(path));
}

std::string grid_to_csv(const Grid& g) {
  std::ostringstream os;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int k = 0; k < g.dim; ++k) os << (k == 0 ? "" : ",") << fmt(g.point(i)[k]);
    os << "\n";
  }
  return os.str();
}

void write_grid_csv(const Grid& g, const std::string& path) {
  write_text_file(path, grid_to_csv(g));
}

Grid read_grid_csv(const std::string& path) {
  std::string text = read_text_file(path);
  Grid g;
  g.dim = 0;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    int cols = 0;
    while (std::getline(ls, tok, ',')) {
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str())
        throw io_error("grid csv: non-numeric value at line " + std::to_string(lineno));
      g.pts.push_back(v);
      ++cols;
    }
    if (g.dim == 0)
      g.dim = cols;
    else if (cols != g.dim)
      throw io_error("grid csv: ragged row at line " + std::to_string(lineno));
  }
  if (g.dim == 0) throw io_error("grid csv: no points");
  return g;
}

std::string trace_to_csv(const Trace& t) {
  std::ostringstream os;
  os << "k,energy,gap,grad_norm,min_pair_dist,max_disp,radius,pullbacks\n";
  for (const TraceRow& r : t.rows) {
    os << r.k << ',' << fmt(r.energy) << ',' << fmt(r.gap) << ',' << fmt(r.grad_norm) << ','
       << fmt(r.min_pair_dist) << ',' << fmt(r.max_disp) << ',' << fmt(r.radius) << ','
       << r.pullbacks << "\n";
  }
  return os.str();
}

void write_trace_csv(const Trace& t, const std::string& path) {
  write_text_file(path, trace_to_csv(t));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw io_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace lloydcvt
