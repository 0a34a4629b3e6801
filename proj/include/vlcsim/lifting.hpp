#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "protograph.hpp"
#include "rng.hpp"

namespace vlcsim {

// Sparse binary parity-check matrix obtained by lifting a protograph.
// Column layout: lifted column j*Z + c*Z2 + t covers protograph column j,
// pre-lift copy c, circulant position t.
struct LiftedCode {
  BaseMatrix base;
  int z{1};        // total lift factor
  int n{0};        // columns
  int m{0};        // rows
  int info_len{0};
  int transmitted_len{0};

  std::vector<int> row_ptr, col_of;  // CSR over rows
  std::vector<int> col_ptr, row_of;  // CSC over columns
  std::vector<int> proto_col_of;     // size n
  std::vector<std::uint8_t> is_punctured;  // size n
  std::vector<int> transmitted_bits;       // sorted column indices

  int row_degree(int r) const { return row_ptr[r + 1] - row_ptr[r]; }
  int col_degree(int c) const { return col_ptr[c + 1] - col_ptr[c]; }
  long long edge_count() const { return static_cast<long long>(col_of.size()); }
};

namespace detail {

// One edge of the pre-lift (factor-4) binary matrix.
struct ProtoEdge {
  int row, col;
};

// Achievable alternating offset sums for walks without immediate backtracking,
// kept per walk length as bitmaps over Z2. Used to score candidate offsets:
// offset o closes a cycle of length len+1 iff o is achievable at length len.
class CycleScorer {
 public:
  CycleScorer(int n_rows, int n_cols, int z2, int max_cycle)
      : z2_(z2), depth_(max_cycle - 1), adj_row_(n_rows), adj_col_(n_cols) {}

  void add_edge(int r, int c, int offset) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({r, c, offset});
    adj_row_[r].push_back(id);
    adj_col_[c].push_back(id);
  }

  // Smallest cycle length the offset would close through edge (r,c), or 0 if
  // none within the search depth.
  int cycle_length(int r, int c, int offset) const {
    compute_reach(c, r);
    for (int len = 1; len <= depth_; len += 2) {
      if (reach_[len].empty()) continue;
      if (reach_[len][static_cast<size_t>(offset)]) return len + 1;
    }
    return 0;
  }

  // Precompute reach sets once per (r,c) so all candidate offsets share them.
  void prepare(int r, int c) const { compute_reach(c, r); }
  int probe(int offset) const {
    for (int len = 1; len <= depth_; len += 2)
      if (!reach_[len].empty() && reach_[len][static_cast<size_t>(offset)]) return len + 1;
    return 0;
  }

 private:
  struct Edge {
    int row, col, offset;
  };

  // walk state: at a node having arrived via some edge; sums tracked mod z2
  void compute_reach(int from_col, int to_row) const {
    reach_.assign(static_cast<size_t>(depth_) + 1, std::vector<bool>());
    // state bitmaps per edge: sums of walks that end by traversing that edge
    std::vector<std::vector<bool>> cur(edges_.size()), nxt;
    // length-1: edges incident to from_col, walking col -> row, sum = +offset
    for (int id : adj_col_[from_col]) {
      cur[id].assign(static_cast<size_t>(z2_), false);
      cur[id][static_cast<size_t>(edges_[id].offset)] = true;
    }
    int parity = 1;  // odd lengths end at a row
    for (int len = 1; len <= depth_; ++len, parity ^= 1) {
      if (parity == 1) {
        // walks of odd length end at rows; record those ending at to_row
        auto& bucket = reach_[len];
        for (int id : adj_row_[to_row])
          if (!cur[id].empty()) merge_into(bucket, cur[id]);
      }
      if (len == depth_) break;
      nxt.assign(edges_.size(), {});
      for (size_t id = 0; id < edges_.size(); ++id) {
        if (cur[id].empty()) continue;
        const Edge& e = edges_[id];
        if (parity == 1) {
          // standing at row e.row; continue row -> col via a different edge
          for (int id2 : adj_row_[e.row]) {
            if (id2 == static_cast<int>(id)) continue;
            shift_merge(nxt[id2], cur[id], -edges_[id2].offset);
          }
        } else {
          // standing at col e.col; continue col -> row via a different edge
          for (int id2 : adj_col_[e.col]) {
            if (id2 == static_cast<int>(id)) continue;
            shift_merge(nxt[id2], cur[id], +edges_[id2].offset);
          }
        }
      }
      cur.swap(nxt);
    }
  }

  void merge_into(std::vector<bool>& dst, const std::vector<bool>& src) const {
    if (dst.empty()) dst.assign(static_cast<size_t>(z2_), false);
    for (int s = 0; s < z2_; ++s)
      if (src[static_cast<size_t>(s)]) dst[static_cast<size_t>(s)] = true;
  }

  void shift_merge(std::vector<bool>& dst, const std::vector<bool>& src, int delta) const {
    if (dst.empty()) dst.assign(static_cast<size_t>(z2_), false);
    delta %= z2_;
    if (delta < 0) delta += z2_;
    for (int s = 0; s < z2_; ++s) {
      if (!src[static_cast<size_t>(s)]) continue;
      int t = s + delta;
      if (t >= z2_) t -= z2_;
      dst[static_cast<size_t>(t)] = true;
    }
  }

  int z2_, depth_;
  std::vector<std::vector<int>> adj_row_, adj_col_;
  std::vector<Edge> edges_;
  mutable std::vector<std::vector<bool>> reach_;
};

}  // namespace detail

// Two columns sharing two rows form a length-4 cycle.
inline bool has_four_cycles(const LiftedCode& code) {
  std::unordered_set<long long> seen;
  for (int c = 0; c < code.n; ++c) {
    const int beg = code.col_ptr[c], end = code.col_ptr[c + 1];
    for (int a = beg; a < end; ++a)
      for (int b = a + 1; b < end; ++b) {
        const long long key =
            static_cast<long long>(code.row_of[a]) * code.m + code.row_of[b];
        if (!seen.insert(key).second) return true;
      }
  }
  return false;
}

namespace detail {

inline LiftedCode lift_once(const BaseMatrix& base, int z, std::uint64_t seed) {
  const int f = base.max_entry() > 1 ? 4 : 1;
  if (z % f != 0)
    throw std::invalid_argument("lift factor must be divisible by 4 for parallel edges");
  const int z2 = z / f;

  // stage 1: factor-f binary pre-lift; multiplicity m cell uses cyclic
  // offsets 0..m-1 so parallel edges land in distinct positions
  const int rows4 = base.rows * f;
  const int cols4 = base.cols * f;
  std::vector<ProtoEdge> edges4;
  for (int j = 0; j < base.cols; ++j)
    for (int i = 0; i < base.rows; ++i) {
      const int mult = base.at(i, j);
      for (int o = 0; o < mult; ++o)
        for (int c = 0; c < f; ++c)
          edges4.push_back({i * f + c, j * f + (c + o) % f});
    }

  // stage 2: assign a circulant offset to every pre-lift edge, greedily
  // maximizing the shortest cycle closed through it
  CycleScorer scorer(rows4, cols4, z2, 8);
  std::sort(edges4.begin(), edges4.end(), [](const ProtoEdge& a, const ProtoEdge& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  std::vector<int> offsets(edges4.size(), 0);
  for (size_t e = 0; e < edges4.size(); ++e) {
    const int r = edges4[e].row, c = edges4[e].col;
    scorer.prepare(r, c);
    const int rot =
        seed == 0 ? 0 : static_cast<int>(derive_seed(seed, streams::lift, e) % z2);
    int best = 0, best_score = -1;
    for (int k = 0; k < z2; ++k) {
      const int o = (rot + k) % z2;
      const int closes = scorer.probe(o);
      const int score = closes == 0 ? 1 << 20 : closes;
      if (score > best_score) {
        best_score = score;
        best = o;
        if (closes == 0) break;  // nothing beats cycle-free
      }
    }
    offsets[e] = best;
    scorer.add_edge(r, c, best);
  }

  // assemble CSR/CSC of the z-lifted matrix
  LiftedCode code;
  code.base = base;
  code.z = z;
  code.m = base.rows * z;
  code.n = base.cols * z;
  code.info_len = (base.cols - base.rows) * z;
  code.transmitted_len = base.transmitted_cols() * z;

  std::vector<std::vector<int>> rows_accum(static_cast<size_t>(code.m));
  for (size_t e = 0; e < edges4.size(); ++e) {
    const int r4 = edges4[e].row, c4 = edges4[e].col, off = offsets[e];
    const int i = r4 / f, ci = r4 % f;
    const int j = c4 / f, cj = c4 % f;
    for (int t = 0; t < z2; ++t) {
      const int row = i * z + ci * z2 + t;
      const int col = j * z + cj * z2 + (t + off) % z2;
      rows_accum[static_cast<size_t>(row)].push_back(col);
    }
  }
  code.row_ptr.assign(static_cast<size_t>(code.m) + 1, 0);
  for (int r = 0; r < code.m; ++r) {
    std::sort(rows_accum[r].begin(), rows_accum[r].end());
    code.row_ptr[r + 1] = code.row_ptr[r] + static_cast<int>(rows_accum[r].size());
  }
  code.col_of.reserve(code.row_ptr.back());
  for (int r = 0; r < code.m; ++r)
    code.col_of.insert(code.col_of.end(), rows_accum[r].begin(), rows_accum[r].end());

  code.col_ptr.assign(static_cast<size_t>(code.n) + 1, 0);
  for (int col : code.col_of) code.col_ptr[col + 1]++;
  for (int c = 0; c < code.n; ++c) code.col_ptr[c + 1] += code.col_ptr[c];
  code.row_of.resize(code.col_of.size());
  {
    std::vector<int> fill(code.col_ptr.begin(), code.col_ptr.end() - 1);
    for (int r = 0; r < code.m; ++r)
      for (int k = code.row_ptr[r]; k < code.row_ptr[r + 1]; ++k)
        code.row_of[static_cast<size_t>(fill[code.col_of[k]]++)] = r;
  }

  code.proto_col_of.resize(static_cast<size_t>(code.n));
  code.is_punctured.assign(static_cast<size_t>(code.n), 0);
  for (int c = 0; c < code.n; ++c) {
    code.proto_col_of[c] = c / z;
    if (base.punctured.count(c / z)) code.is_punctured[c] = 1;
  }
  for (int c = 0; c < code.n; ++c)
    if (!code.is_punctured[c]) code.transmitted_bits.push_back(c);
  return code;
}

}  // namespace detail

// PEG-style circulant lift. Deterministic for a fixed seed; seed 0 always
// probes offsets smallest-first, nonzero seeds rotate the probe order, which
// the retry loop uses when small Z leaves residual 4-cycles.
inline LiftedCode lift(const BaseMatrix& base, int z, std::uint64_t seed = 0) {
  base.validate();
  if (z < 1) throw std::invalid_argument("lift factor must be >= 1");
  const bool parallel = base.max_entry() > 1;
  LiftedCode code = detail::lift_once(base, z, seed);
  int tries = 0;
  while (parallel && has_four_cycles(code)) {
    if (++tries > 8)
      throw std::runtime_error("lift: cannot avoid 4-cycles at this lift factor");
    code = detail::lift_once(base, z, derive_seed(seed + 1, streams::lift, tries));
  }
  return code;
}

// Standard alist text format (1-based indices, zero-padded rows).
inline void write_alist(const LiftedCode& code, std::ostream& os) {
  int max_col = 0, max_row = 0;
  for (int c = 0; c < code.n; ++c) max_col = std::max(max_col, code.col_degree(c));
  for (int r = 0; r < code.m; ++r) max_row = std::max(max_row, code.row_degree(r));
  os << code.n << " " << code.m << "\n" << max_col << " " << max_row << "\n";
  for (int c = 0; c < code.n; ++c) os << code.col_degree(c) << (c + 1 < code.n ? " " : "\n");
  for (int r = 0; r < code.m; ++r) os << code.row_degree(r) << (r + 1 < code.m ? " " : "\n");
  for (int c = 0; c < code.n; ++c) {
    for (int k = code.col_ptr[c]; k < code.col_ptr[c + 1]; ++k) os << code.row_of[k] + 1 << " ";
    for (int k = code.col_degree(c); k < max_col; ++k) os << 0 << " ";
    os << "\n";
  }
  for (int r = 0; r < code.m; ++r) {
    for (int k = code.row_ptr[r]; k < code.row_ptr[r + 1]; ++k) os << code.col_of[k] + 1 << " ";
    for (int k = code.row_degree(r); k < max_row; ++k) os << 0 << " ";
    os << "\n";
  }
}

}  // namespace vlcsim
