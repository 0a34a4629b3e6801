#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraction.hpp"

namespace vlcsim {

inline int ilog2(int v) {
  int b = 0;
  while ((1 << (b + 1)) <= v) ++b;
  return b;
}

inline bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct GsmConfig {
  int n_tx{4};
  int n_active{2};
  int upam_order{2};  // M
  double avg_intensity{1.0};

  long long pattern_space() const { return binomial(n_tx, n_active); }  // Delta
  int rho_d() const { return ilog2(static_cast<int>(pattern_space())); }
  int rho_s() const { return n_active * ilog2(upam_order); }
  int rho() const { return rho_d() + rho_s(); }

  void validate() const {
    if (n_tx < 1 || n_active < 2 || n_active > n_tx)
      throw std::invalid_argument("gsm: need 2 <= N_a <= N_t");
    if (!is_pow2(upam_order) || upam_order < 2)
      throw std::invalid_argument("gsm: M must be a power of 2, M >= 2");
    if (pattern_space() < 2) throw std::invalid_argument("gsm: need at least 2 patterns");
    if (!(avg_intensity > 0)) throw std::invalid_argument("gsm: I_a must be positive");
  }
};

enum class GsmKind { ConGsm, SserGsm };

inline const char* to_string(GsmKind k) {
  return k == GsmKind::ConGsm ? "congsm" : "ssergsm";
}

inline GsmKind gsm_kind_from_string(const std::string& s) {
  if (s == "congsm" || s == "con") return GsmKind::ConGsm;
  if (s == "ssergsm" || s == "sser") return GsmKind::SserGsm;
  throw std::invalid_argument("unknown constellation kind: " + s);
}

// UPAM levels I_t = 2 I_a t/(M+1), t = 1..M, as exact multiples of I_a.
inline std::vector<Fraction> upam_levels_exact(int M) {
  if (M < 2) throw std::invalid_argument("upam: M >= 2 required");
  std::vector<Fraction> lv;
  lv.reserve(static_cast<size_t>(M));
  for (int t = 1; t <= M; ++t) lv.emplace_back(2 * t, M + 1);
  return lv;
}

inline std::vector<double> upam_levels(int M, double i_a) {
  std::vector<double> out;
  for (const Fraction& f : upam_levels_exact(M)) out.push_back(f.value(i_a));
  return out;
}

// First 2^rho_d activation patterns in lexicographic order of sorted 0-based
// LED index sets.
inline std::vector<std::vector<int>> select_patterns(int n_tx, int n_active) {
  const long long delta = binomial(n_tx, n_active);
  if (delta < 2) throw std::invalid_argument("select_patterns: need at least 2 patterns");
  const int beta = 1 << ilog2(static_cast<int>(delta));
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<size_t>(n_active));
  for (int i = 0; i < n_active; ++i) cur[i] = i;
  while (static_cast<int>(out.size()) < beta) {
    out.push_back(cur);
    // next combination in lex order
    int i = n_active - 1;
    while (i >= 0 && cur[i] == n_tx - n_active + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < n_active; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

// Expanded level set of the SSER step 1: beta*M levels, M per subspace,
// level(n', tau) = 2 I_a n'/(beta (M+1)) + 2 I_a tau/beta.
inline std::vector<Fraction> sser_symbol_set_exact(int M, int beta) {
  if (M < 2 || beta < 1) throw std::invalid_argument("sser: bad M or beta");
  std::vector<Fraction> lv;
  lv.reserve(static_cast<size_t>(M) * beta);
  for (int tau = 0; tau < beta; ++tau)
    for (int np = 1; np <= M; ++np)
      lv.push_back(Fraction(2 * np, beta * (M + 1)) + Fraction(2 * tau, beta));
  return lv;
}

// SSER step 2: sort ascending, pattern p takes indices p, p+beta, ...,
// p+(M-1)beta, giving every pattern the maximum equal intensity spacing.
inline std::vector<std::vector<Fraction>> sser_allocate(std::vector<Fraction> levels,
                                                        int beta) {
  if (beta < 1 || levels.size() % static_cast<size_t>(beta) != 0)
    throw std::invalid_argument("sser_allocate: level count not a multiple of beta");
  std::sort(levels.begin(), levels.end());
  const int M = static_cast<int>(levels.size()) / beta;
  std::vector<std::vector<Fraction>> sets(static_cast<size_t>(beta));
  for (int p = 0; p < beta; ++p)
    for (int t = 0; t < M; ++t) sets[p].push_back(levels[static_cast<size_t>(p + t * beta)]);
  return sets;
}

// Full mapping table. Label layout, MSB first: rho_d pattern bits in natural
// binary over the pattern list, then log2(M) bits per active LED (ascending
// LED order), Gray-labeled onto ascending levels.
struct GsmConstellation {
  GsmConfig config;
  GsmKind kind{GsmKind::ConGsm};
  std::vector<std::vector<int>> patterns;
  std::vector<std::vector<Fraction>> symbol_sets;    // per pattern, ascending
  std::vector<std::vector<Fraction>> table_exact;    // 2^rho rows of N_t entries
  std::vector<double> table;                         // same, scaled by I_a, row-major
  std::vector<int> pattern_of_label;                 // 2^rho

  int rho() const { return config.rho(); }
  int labels() const { return 1 << config.rho(); }

  const double* vector_of(int label) const {
    return &table[static_cast<size_t>(label) * config.n_tx];
  }

  int label_of_bits(std::span<const std::uint8_t> bits) const {
    int label = 0;
    for (std::uint8_t b : bits) label = (label << 1) | (b & 1);
    return label;
  }

  const double* map_bits(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != config.rho())
      throw std::invalid_argument("map_bits: need exactly rho bits");
    return vector_of(label_of_bits(bits));
  }
};

inline int gray_decode(int g) {
  int b = 0;
  for (; g; g >>= 1) b ^= g;
  return b;
}

inline GsmConstellation build_constellation(const GsmConfig& cfg, GsmKind kind) {
  cfg.validate();
  GsmConstellation cs;
  cs.config = cfg;
  cs.kind = kind;
  cs.patterns = select_patterns(cfg.n_tx, cfg.n_active);
  const int beta = static_cast<int>(cs.patterns.size());
  const int M = cfg.upam_order;

  if (kind == GsmKind::ConGsm) {
    cs.symbol_sets.assign(static_cast<size_t>(beta), upam_levels_exact(M));
  } else {
    cs.symbol_sets = sser_allocate(sser_symbol_set_exact(M, beta), beta);
  }

  const int rho = cfg.rho();
  const int bits_per_led = ilog2(M);
  const int n_labels = 1 << rho;
  cs.table_exact.assign(static_cast<size_t>(n_labels),
                        std::vector<Fraction>(static_cast<size_t>(cfg.n_tx)));
  cs.table.assign(static_cast<size_t>(n_labels) * cfg.n_tx, 0.0);
  cs.pattern_of_label.assign(static_cast<size_t>(n_labels), 0);
  for (int label = 0; label < n_labels; ++label) {
    const int p = label >> cfg.rho_s();
    cs.pattern_of_label[static_cast<size_t>(label)] = p;
    for (int a = 0; a < cfg.n_active; ++a) {
      const int shift = (cfg.n_active - 1 - a) * bits_per_led;
      const int g = (label >> shift) & (M - 1);
      const Fraction& f = cs.symbol_sets[static_cast<size_t>(p)]
                                        [static_cast<size_t>(gray_decode(g))];
      const int led = cs.patterns[static_cast<size_t>(p)][static_cast<size_t>(a)];
      cs.table_exact[static_cast<size_t>(label)][static_cast<size_t>(led)] = f;
      cs.table[static_cast<size_t>(label) * cfg.n_tx + led] = f.value(cfg.avg_intensity);
    }
  }
  return cs;
}

inline std::string label_string(int label, int rho) {
  std::string s(static_cast<size_t>(rho), '0');
  for (int i = 0; i < rho; ++i)
    if (label & (1 << (rho - 1 - i))) s[static_cast<size_t>(i)] = '1';
  return s;
}

// CSV rows: label bits, 1-based pattern tuple, then exact intensities as
// rational multiples of I_a.
inline void write_table_csv(const GsmConstellation& cs, std::ostream& os) {
  os << "## constellation=" << to_string(cs.kind) << " N_t=" << cs.config.n_tx
     << " N_a=" << cs.config.n_active << " M=" << cs.config.upam_order
     << " rho=" << cs.rho() << " intensities_in_units_of=I_a\n";
  os << "## label,pattern,";
  for (int t = 0; t < cs.config.n_tx; ++t) os << "x" << t + 1 << (t + 1 < cs.config.n_tx ? "," : "\n");
  for (int label = 0; label < cs.labels(); ++label) {
    os << label_string(label, cs.rho()) << ",(";
    const auto& pat = cs.patterns[static_cast<size_t>(cs.pattern_of_label[label])];
    for (size_t i = 0; i < pat.size(); ++i) os << pat[i] + 1 << (i + 1 < pat.size() ? " " : ")");
    for (int t = 0; t < cs.config.n_tx; ++t)
      os << "," << cs.table_exact[static_cast<size_t>(label)][static_cast<size_t>(t)].str();
    os << "\n";
  }
}

}  // namespace vlcsim
