#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlcsim {

// Protograph base matrix: entries are edge multiplicities, punctured holds
// 0-based column indices of variable nodes that are never transmitted.
struct BaseMatrix {
  int rows{0};
  int cols{0};
  std::vector<int> entries;  // row-major, rows*cols
  std::set<int> punctured;
  int extension_count{0};
  std::string family;

  int at(int r, int c) const { return entries[static_cast<size_t>(r) * cols + c]; }
  int& at(int r, int c) { return entries[static_cast<size_t>(r) * cols + c]; }

  int col_degree(int c) const {
    int d = 0;
    for (int r = 0; r < rows; ++r) d += at(r, c);
    return d;
  }
  int row_degree(int r) const {
    int d = 0;
    for (int c = 0; c < cols; ++c) d += at(r, c);
    return d;
  }
  int edge_count() const {
    int d = 0;
    for (int v : entries) d += v;
    return d;
  }
  int max_entry() const {
    int m = 0;
    for (int v : entries) m = std::max(m, v);
    return m;
  }
  int transmitted_cols() const { return cols - static_cast<int>(punctured.size()); }

  double design_rate() const {
    return static_cast<double>(cols - rows) / transmitted_cols();
  }

  void validate() const {
    if (rows <= 0 || cols <= 0 || entries.size() != static_cast<size_t>(rows) * cols)
      throw std::invalid_argument("base matrix: bad shape");
    for (int v : entries)
      if (v < 0) throw std::invalid_argument("base matrix: negative multiplicity");
    for (int r = 0; r < rows; ++r)
      if (row_degree(r) == 0) throw std::invalid_argument("base matrix: empty row");
    for (int c = 0; c < cols; ++c)
      if (col_degree(c) == 0) throw std::invalid_argument("base matrix: empty column");
    for (int c : punctured)
      if (c < 0 || c >= cols) throw std::invalid_argument("base matrix: puncture out of range");
    const double r = design_rate();
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("base matrix: rate outside (0,1)");
  }
};

// Rate-(e+1)/(e+2) AR4JA matrix; the degree-6 second column is punctured.
// Each extension appends a pair of degree-4 and degree-4 columns [0,1,3],[0,3,1].
inline BaseMatrix make_ar4ja(int e) {
  if (e < 0) throw std::invalid_argument("extension count must be >= 0");
  BaseMatrix b;
  b.rows = 3;
  b.cols = 5 + 2 * e;
  b.extension_count = e;
  b.family = "ar4ja";
  b.entries.assign(static_cast<size_t>(b.rows) * b.cols, 0);
  const int core[3][5] = {{1, 2, 0, 0, 0}, {0, 3, 1, 1, 1}, {0, 1, 2, 2, 1}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) b.at(r, c) = core[r][c];
  for (int x = 0; x < e; ++x) {
    b.at(1, 5 + 2 * x) = 1;
    b.at(2, 5 + 2 * x) = 3;
    b.at(1, 6 + 2 * x) = 3;
    b.at(2, 6 + 2 * x) = 1;
  }
  b.punctured = {1};
  return b;
}

// AR4JA relative with the jagged accumulator edges removed, leaving three
// degree-2 transmitted columns; same puncture and extension pattern.
inline BaseMatrix make_ar4a(int e) {
  BaseMatrix b = make_ar4ja(e);
  b.family = "ar4a";
  b.at(2, 2) = 1;
  b.at(2, 3) = 1;
  return b;
}

// Rate-(e+1)/(e+2) EARA matrix; the degree-1 second column is punctured.
// Extensions alternate degree-3 columns [0,2,1],[0,1,2].
inline BaseMatrix make_eara(int e) {
  if (e < 0) throw std::invalid_argument("extension count must be >= 0");
  BaseMatrix b;
  b.rows = 3;
  b.cols = 5 + 2 * e;
  b.extension_count = e;
  b.family = "eara";
  b.entries.assign(static_cast<size_t>(b.rows) * b.cols, 0);
  const int core[3][5] = {{1, 1, 1, 0, 0}, {3, 0, 2, 1, 1}, {1, 0, 1, 2, 1}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) b.at(r, c) = core[r][c];
  for (int x = 0; x < e; ++x) {
    b.at(1, 5 + 2 * x) = 2;
    b.at(2, 5 + 2 * x) = 1;
    b.at(1, 6 + 2 * x) = 1;
    b.at(2, 6 + 2 * x) = 2;
  }
  b.punctured = {1};
  return b;
}

// (dv,dc)-regular protograph over `cols` variable nodes, no puncturing.
inline BaseMatrix make_regular(int dv, int dc, int cols) {
  if (dv <= 0 || dc <= 0 || cols <= 0)
    throw std::invalid_argument("regular protograph: degrees and size must be positive");
  if ((static_cast<long long>(dv) * cols) % dc != 0)
    throw std::invalid_argument("regular protograph: dv*cols not divisible by dc");
  const int rows = dv * cols / dc;
  if (rows <= 0 || rows >= cols)
    throw std::invalid_argument("regular protograph: implied rate outside (0,1)");
  if (dc % cols != 0)
    throw std::invalid_argument("regular protograph: dc must be a multiple of cols");
  BaseMatrix b;
  b.rows = rows;
  b.cols = cols;
  b.family = "regular";
  b.entries.assign(static_cast<size_t>(rows) * cols, dc / cols);
  return b;
}

// Re-puncture at the lowest-degree variable node (lowest index on ties).
inline BaseMatrix make_improved_variant(const BaseMatrix& base) {
  if (base.cols < 1) throw std::invalid_argument("improved variant: empty matrix");
  BaseMatrix b = base;
  int best = 0;
  for (int c = 1; c < b.cols; ++c)
    if (b.col_degree(c) < b.col_degree(best)) best = c;
  b.punctured = {best};
  if (b.family == "ar4ja" || b.family == "ar4a") b.family = "i" + b.family;
  return b;
}

struct ConstraintReport {
  bool punctured_degree_one{false};
  bool single_degree_two{false};
  bool parallel_edges_bounded{false};
  bool first_column_largest{false};
  bool all() const {
    return punctured_degree_one && single_degree_two && parallel_edges_bounded &&
           first_column_largest;
  }
};

// Mother-matrix design rules: (a) the punctured node has degree 1, (b) exactly
// one degree-2 variable node, (c) between 1 and 3 parallel edges at most,
// (d) the first column is the largest-degree node, strictly above columns 3,4.
inline ConstraintReport check_design_constraints(const BaseMatrix& b) {
  ConstraintReport rep;
  rep.punctured_degree_one = !b.punctured.empty();
  for (int c : b.punctured)
    if (b.col_degree(c) != 1) rep.punctured_degree_one = false;
  int deg2 = 0;
  for (int c = 0; c < b.cols; ++c)
    if (b.col_degree(c) == 2) ++deg2;
  rep.single_degree_two = (deg2 == 1);
  rep.parallel_edges_bounded = (b.max_entry() >= 1 && b.max_entry() <= 3);
  if (b.cols >= 4) {
    const int d0 = b.col_degree(0);
    rep.first_column_largest = d0 > b.col_degree(2) && d0 > b.col_degree(3);
  }
  return rep;
}

// Families benchmarked against each other at rate (e+1)/(e+2); "regular" is
// the (3,9) code and ignores e.
inline BaseMatrix make_family(const std::string& name, int e) {
  if (name == "ar4ja") return make_ar4ja(e);
  if (name == "ar4a") return make_ar4a(e);
  if (name == "eara") return make_eara(e);
  if (name == "iar4ja") return make_improved_variant(make_ar4ja(e));
  if (name == "iar4a") return make_improved_variant(make_ar4a(e));
  if (name == "regular") return make_regular(3, 9, 9);
  throw std::invalid_argument("unknown code family: " + name);
}

}  // namespace vlcsim
