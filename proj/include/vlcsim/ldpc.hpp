#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lifting.hpp"

namespace vlcsim {

constexpr double kLlrClip = 30.0;

inline double clip_llr(double v) {
  return v > kLlrClip ? kLlrClip : (v < -kLlrClip ? -kLlrClip : v);
}

struct Codeword {
  std::vector<std::uint8_t> bits;              // length n
  std::vector<std::uint8_t> transmitted_bits;  // length n - punctured
};

struct DecoderResult {
  std::vector<std::uint8_t> hard_bits;
  std::vector<double> aposteriori_llrs;
  int iterations_used{0};
  bool syndrome_ok{false};
};

// GF(2) row-reduction based encoder. The parity-check matrix is reduced once
// to RREF; free columns carry information bits and pivot columns are solved
// from the cached reduced rows. Rank-deficient H (possible for structured
// lifts) leaves extra free columns, which are pinned to zero so the designed
// info length k = n - m is kept.
class Encoder {
 public:
  explicit Encoder(const LiftedCode& code) : code_(&code) {
    const int n = code.n, m = code.m;
    const int words = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(
        static_cast<size_t>(m), std::vector<std::uint64_t>(static_cast<size_t>(words), 0));
    for (int r = 0; r < m; ++r)
      for (int kk = code.row_ptr[r]; kk < code.row_ptr[r + 1]; ++kk) {
        const int c = code.col_of[kk];
        rows[r][static_cast<size_t>(c >> 6)] |= 1ULL << (c & 63);
      }

    std::vector<int> pivot_of_row;
    std::vector<char> is_pivot_col(static_cast<size_t>(n), 0);
    int rank = 0;
    for (int c = 0; c < n && rank < m; ++c) {
      const int w = c >> 6;
      const std::uint64_t bit = 1ULL << (c & 63);
      int sel = -1;
      for (int r = rank; r < m; ++r)
        if (rows[r][w] & bit) {
          sel = r;
          break;
        }
      if (sel < 0) continue;
      std::swap(rows[rank], rows[static_cast<size_t>(sel)]);
      for (int r = 0; r < m; ++r) {
        if (r == rank || !(rows[r][w] & bit)) continue;
        for (int ww = w; ww < words; ++ww) rows[r][ww] ^= rows[rank][ww];
      }
      is_pivot_col[static_cast<size_t>(c)] = 1;
      pivot_of_row.push_back(c);
      ++rank;
    }
    rank_ = rank;
    if (rank < m) rows.resize(static_cast<size_t>(rank));

    const int k = code.info_len;
    for (int c = 0; c < n; ++c)
      if (!is_pivot_col[static_cast<size_t>(c)]) free_cols_.push_back(c);
    if (static_cast<int>(free_cols_.size()) < k)
      throw std::runtime_error("encoder: matrix rank leaves fewer than k free columns");
    info_cols_.assign(free_cols_.begin(), free_cols_.begin() + k);

    // cache, per pivot row, its reduced row restricted to info columns
    const int kwords = (k + 63) / 64;
    pivot_cols_ = std::move(pivot_of_row);
    masks_.assign(static_cast<size_t>(rank_) * kwords, 0);
    kwords_ = kwords;
    for (int r = 0; r < rank_; ++r)
      for (int ic = 0; ic < k; ++ic) {
        const int c = info_cols_[static_cast<size_t>(ic)];
        if (rows[r][static_cast<size_t>(c >> 6)] & (1ULL << (c & 63)))
          masks_[static_cast<size_t>(r) * kwords + (ic >> 6)] |= 1ULL << (ic & 63);
      }
  }

  int info_length() const { return code_->info_len; }
  int rank() const { return rank_; }
  const std::vector<int>& info_cols() const { return info_cols_; }

  Codeword encode(std::span<const std::uint8_t> info) const {
    if (static_cast<int>(info.size()) != code_->info_len)
      throw std::invalid_argument("encode: info length mismatch");
    std::vector<std::uint64_t> iv(static_cast<size_t>(kwords_), 0);
    for (size_t i = 0; i < info.size(); ++i)
      if (info[i]) iv[i >> 6] |= 1ULL << (i & 63);

    Codeword cw;
    cw.bits.assign(static_cast<size_t>(code_->n), 0);
    for (size_t i = 0; i < info.size(); ++i)
      cw.bits[static_cast<size_t>(info_cols_[i])] = info[i];
    for (int r = 0; r < rank_; ++r) {
      const std::uint64_t* mask = &masks_[static_cast<size_t>(r) * kwords_];
      int parity = 0;
      for (int w = 0; w < kwords_; ++w) parity ^= __builtin_popcountll(mask[w] & iv[w]) & 1;
      cw.bits[static_cast<size_t>(pivot_cols_[static_cast<size_t>(r)])] =
          static_cast<std::uint8_t>(parity);
    }
    cw.transmitted_bits.reserve(code_->transmitted_bits.size());
    for (int c : code_->transmitted_bits) cw.transmitted_bits.push_back(cw.bits[c]);
    return cw;
  }

 private:
  const LiftedCode* code_;
  int rank_{0}, kwords_{0};
  std::vector<int> pivot_cols_, free_cols_, info_cols_;
  std::vector<std::uint64_t> masks_;
};

inline bool syndrome_ok(const LiftedCode& code, const std::vector<std::uint8_t>& bits) {
  for (int r = 0; r < code.m; ++r) {
    int s = 0;
    for (int kk = code.row_ptr[r]; kk < code.row_ptr[r + 1]; ++kk) s ^= bits[code.col_of[kk]];
    if (s) return false;
  }
  return true;
}

// Flooding sum-product decoder. Owns per-frame scratch, so use one instance
// per worker thread; the LiftedCode stays shared and immutable.
class BpDecoder {
 public:
  explicit BpDecoder(const LiftedCode& code) : code_(&code) {
    const size_t ne = static_cast<size_t>(code.edge_count());
    var_edges_.resize(ne);
    // CSC traversal emitting positions of each column's edges in row-major order
    std::vector<int> cursor(code.row_ptr.begin(), code.row_ptr.end() - 1);
    size_t out = 0;
    var_edge_ptr_.assign(static_cast<size_t>(code.n) + 1, 0);
    for (int c = 0; c < code.n; ++c) {
      var_edge_ptr_[c] = static_cast<int>(out);
      for (int kk = code.col_ptr[c]; kk < code.col_ptr[c + 1]; ++kk) {
        const int r = code.row_of[kk];
        var_edges_[out++] = cursor[r]++;
      }
    }
    var_edge_ptr_[code.n] = static_cast<int>(out);
    v2c_.resize(ne);
    c2v_.resize(ne);
    scratch_.resize(64);
  }

  DecoderResult decode(std::span<const double> channel_llrs, int max_iter) {
    const LiftedCode& code = *code_;
    if (static_cast<int>(channel_llrs.size()) != code.n)
      throw std::invalid_argument("decode: llr length mismatch");
    if (max_iter < 1) throw std::invalid_argument("decode: max_iter must be >= 1");

    DecoderResult res;
    res.hard_bits.assign(static_cast<size_t>(code.n), 0);
    res.aposteriori_llrs.assign(static_cast<size_t>(code.n), 0.0);
    std::fill(c2v_.begin(), c2v_.end(), 0.0);

    for (int it = 1; it <= max_iter; ++it) {
      // variable update and a-posteriori in one pass
      for (int v = 0; v < code.n; ++v) {
        double total = channel_llrs[v];
        const int beg = var_edge_ptr_[v], end = var_edge_ptr_[v + 1];
        for (int kk = beg; kk < end; ++kk) total += c2v_[static_cast<size_t>(var_edges_[kk])];
        for (int kk = beg; kk < end; ++kk) {
          const int e = var_edges_[kk];
          v2c_[static_cast<size_t>(e)] = clip_llr(total - c2v_[static_cast<size_t>(e)]);
        }
      }
      // check update, tanh rule with prefix/suffix products
      for (int r = 0; r < code.m; ++r) {
        const int beg = code.row_ptr[r], end = code.row_ptr[r + 1];
        const int deg = end - beg;
        if (static_cast<int>(scratch_.size()) < 2 * deg) scratch_.resize(2 * deg);
        double* t = scratch_.data();
        double* suf = scratch_.data() + deg;
        for (int kk = 0; kk < deg; ++kk)
          t[kk] = std::tanh(0.5 * v2c_[static_cast<size_t>(beg + kk)]);
        double acc = 1.0;
        for (int kk = deg - 1; kk >= 0; --kk) {
          suf[kk] = acc;
          acc *= t[kk];
        }
        double pre = 1.0;
        for (int kk = 0; kk < deg; ++kk) {
          double p = pre * suf[kk];
          if (p > 0.999999999999999) p = 0.999999999999999;
          if (p < -0.999999999999999) p = -0.999999999999999;
          c2v_[static_cast<size_t>(beg + kk)] = clip_llr(2.0 * std::atanh(p));
          pre *= t[kk];
        }
      }
      // decision + early termination
      for (int v = 0; v < code.n; ++v) {
        double total = channel_llrs[v];
        for (int kk = var_edge_ptr_[v]; kk < var_edge_ptr_[v + 1]; ++kk)
          total += c2v_[static_cast<size_t>(var_edges_[kk])];
        res.aposteriori_llrs[static_cast<size_t>(v)] = total;
        res.hard_bits[static_cast<size_t>(v)] = total < 0.0 ? 1 : 0;
      }
      res.iterations_used = it;
      if (syndrome_ok(code, res.hard_bits)) {
        res.syndrome_ok = true;
        break;
      }
    }
    return res;
  }

 private:
  const LiftedCode* code_;
  std::vector<int> var_edges_, var_edge_ptr_;
  std::vector<double> v2c_, c2v_, scratch_;
};

}  // namespace vlcsim
