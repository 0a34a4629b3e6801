#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vlcsim/channel.hpp"
#include "vlcsim/demapper.hpp"
#include "vlcsim/gsm.hpp"
#include "vlcsim/parallel.hpp"
#include "vlcsim/protograph.hpp"
#include "vlcsim/rng.hpp"

namespace vlcsim {

// MI of a Gaussian-consistent LLR with standard deviation sigma, two-branch fit.
inline double j_function(double sigma) {
  if (sigma <= 0.0) return 0.0;
  if (sigma >= 10.0) return 1.0;
  double v;
  if (sigma <= 1.6363) {
    v = ((-0.0421061 * sigma + 0.209252) * sigma - 0.00640081) * sigma;
  } else {
    v = 1.0 - std::exp(((0.00181491 * sigma - 0.142675) * sigma - 0.0822054) * sigma +
                       0.0549608);
  }
  return std::clamp(v, 0.0, 1.0);
}

// Numerical inverse of j_function. The common closed-form fit for the inverse
// is not consistent with the forward branches to 1e-3, so bisect instead.
inline double j_inverse(double mi) {
  if (mi <= 0.0) return 0.0;
  if (mi >= j_function(10.0)) return 10.0;
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (j_function(mid) < mi ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// log2(1 + e^{-x}) without overflow for large |x|.
inline double log2_1p_exp_neg(double x) {
  constexpr double inv_ln2 = 1.4426950408889634;
  if (x < -37.0) return -x * inv_ln2;
  return std::log1p(std::exp(-x)) * inv_ln2;
}

inline std::vector<double> noiseless_outputs(const GsmConstellation& cs,
                                             const ChannelModel& ch) {
  const int n_labels = cs.labels();
  std::vector<double> hx(static_cast<size_t>(n_labels) * ch.n_rx);
  for (int l = 0; l < n_labels; ++l) {
    const double* x = cs.vector_of(l);
    for (int i = 0; i < ch.n_rx; ++i) {
      double acc = 0.0;
      for (int j = 0; j < ch.n_tx; ++j) acc += ch.at(i, j) * x[j];
      hx[static_cast<size_t>(l) * ch.n_rx + i] = acc;
    }
  }
  return hx;
}

constexpr long long kMonteCarloChunk = 8192;

}  // namespace detail

struct AmiEstimate {
  double i_spd{0.0};
  double i_sid{0.0};
  double i_total{0.0};
  double stderr_total{0.0};
  long long samples{0};
};

// Monte Carlo estimate of the demapper-side mutual information split into the
// spatial-domain and signal-domain bit groups. One channel draw scores every
// bit position of the symbol via ratios of restricted likelihood sums.
inline AmiEstimate estimate_ami(const GsmConstellation& cs, const ChannelModel& ch,
                                double sigma, long long samples, std::uint64_t seed,
                                int workers = 1) {
  if (samples < 1) throw std::invalid_argument("estimate_ami: samples must be >= 1");
  if (!(sigma > 0.0)) sigma = 1e-150;
  const int rho = cs.rho();
  const int rho_d = cs.config.rho_d();
  const int n_labels = cs.labels();
  const int n_rx = ch.n_rx;
  const std::vector<double> hx = detail::noiseless_outputs(cs, ch);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  constexpr double inv_ln2 = 1.4426950408889634;

  const long long n_chunks =
      (samples + detail::kMonteCarloChunk - 1) / detail::kMonteCarloChunk;
  struct Partial {
    double spd{0.0}, sid{0.0}, tot2{0.0};
  };
  std::vector<Partial> parts(static_cast<size_t>(n_chunks));

  parallel_chunks(samples, detail::kMonteCarloChunk, workers,
                  [&](int chunk, long long begin, long long end) {
                    Rng rng(derive_seed(seed, streams::ami,
                                        static_cast<std::uint64_t>(chunk)));
                    std::vector<double> y(static_cast<size_t>(n_rx));
                    std::vector<double> metric(static_cast<size_t>(n_labels));
                    Partial ps;
                    for (long long s = begin; s < end; ++s) {
                      const int label =
                          static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_labels)));
                      for (int i = 0; i < n_rx; ++i)
                        y[static_cast<size_t>(i)] =
                            hx[static_cast<size_t>(label) * n_rx + i] +
                            sigma * rng.next_gaussian();
                      double mmax = -HUGE_VAL;
                      for (int l = 0; l < n_labels; ++l) {
                        double d2 = 0.0;
                        for (int i = 0; i < n_rx; ++i) {
                          const double diff =
                              y[static_cast<size_t>(i)] - hx[static_cast<size_t>(l) * n_rx + i];
                          d2 += diff * diff;
                        }
                        const double m = -d2 * inv_two_sigma2;
                        metric[static_cast<size_t>(l)] = m;
                        mmax = std::max(mmax, m);
                      }
                      double s_full = 0.0;
                      for (int l = 0; l < n_labels; ++l) {
                        metric[static_cast<size_t>(l)] =
                            std::exp(metric[static_cast<size_t>(l)] - mmax);
                        s_full += metric[static_cast<size_t>(l)];
                      }
                      const double log2_full = std::log(s_full) * inv_ln2;
                      double tot_spd = 0.0, tot_sid = 0.0;
                      for (int b = 0; b < rho; ++b) {
                        const int shift = rho - 1 - b;
                        const int v = (label >> shift) & 1;
                        double s_match = 0.0;
                        for (int l = 0; l < n_labels; ++l)
                          if (((l >> shift) & 1) == v) s_match += metric[static_cast<size_t>(l)];
                        const double term = log2_full - std::log(s_match) * inv_ln2;
                        (b < rho_d ? tot_spd : tot_sid) += term;
                      }
                      ps.spd += tot_spd;
                      ps.sid += tot_sid;
                      ps.tot2 += (tot_spd + tot_sid) * (tot_spd + tot_sid);
                    }
                    parts[static_cast<size_t>(chunk)] = ps;
                  });

  double sum_spd = 0.0, sum_sid = 0.0, sum_tot2 = 0.0;
  for (const Partial& p : parts) {
    sum_spd += p.spd;
    sum_sid += p.sid;
    sum_tot2 += p.tot2;
  }
  const double n = static_cast<double>(samples);
  AmiEstimate est;
  est.samples = samples;
  est.i_spd = rho_d - sum_spd / n;
  est.i_sid = (rho - rho_d) - sum_sid / n;
  est.i_total = est.i_spd + est.i_sid;
  const double mean_tot = (sum_spd + sum_sid) / n;
  const double var = samples > 1 ? std::max(0.0, (sum_tot2 - n * mean_tot * mean_tot) /
                                                     (n - 1.0))
                                 : 0.0;
  est.stderr_total = std::sqrt(var / n);
  return est;
}

struct TransferPoint {
  double i_e_spd{0.0};
  double i_e_sid{0.0};
  long long samples{0};
};

// Demapper extrinsic-MI transfer probe with one prior MI per transmitted
// protograph column. A random interleaver spreads a column's bits uniformly
// over symbol slots, so each demapped bit draws its prior strength uniformly
// from prior_mis. Labels are random balanced bits; extrinsic MI comes from the
// time-average estimator 1 - E[log2(1 + e^{-(1-2v)L})] per bit group.
inline TransferPoint demapper_transfer(const GsmConstellation& cs, const ChannelModel& ch,
                                       double sigma, const std::vector<double>& prior_mis,
                                       long long samples, std::uint64_t seed, int workers = 1,
                                       DemapAlgo algo = DemapAlgo::MaxLog) {
  if (samples < 1) throw std::invalid_argument("demapper_transfer: samples must be >= 1");
  if (prior_mis.empty())
    throw std::invalid_argument("demapper_transfer: prior_mis must be non-empty");
  const int rho = cs.rho();
  const int rho_d = cs.config.rho_d();
  const int n_labels = cs.labels();
  const std::uint64_t n_prior = prior_mis.size();
  std::vector<double> sa(prior_mis.size());
  std::vector<double> mu(prior_mis.size());
  for (size_t c = 0; c < prior_mis.size(); ++c) {
    sa[c] = j_inverse(std::clamp(prior_mis[c], 0.0, 1.0));
    mu[c] = sa[c] * sa[c] / 2.0;
  }

  const long long n_chunks =
      (samples + detail::kMonteCarloChunk - 1) / detail::kMonteCarloChunk;
  struct Partial {
    double spd{0.0}, sid{0.0};
  };
  std::vector<Partial> parts(static_cast<size_t>(n_chunks));

  parallel_chunks(
      samples, detail::kMonteCarloChunk, workers, [&](int chunk, long long begin, long long end) {
        Rng rng(derive_seed(seed, streams::transfer, static_cast<std::uint64_t>(chunk)));
        Demapper dm(cs, ch, algo);
        std::vector<double> y(static_cast<size_t>(ch.n_rx));
        std::vector<double> la(static_cast<size_t>(rho));
        std::vector<double> lp(static_cast<size_t>(rho));
        Partial ps;
        for (long long s = begin; s < end; ++s) {
          const int label =
              static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_labels)));
          for (int b = 0; b < rho; ++b) {
            const int v = (label >> (rho - 1 - b)) & 1;
            const size_t c =
                n_prior == 1 ? 0 : static_cast<size_t>(rng.next_below(n_prior));
            la[static_cast<size_t>(b)] =
                (v ? -mu[c] : mu[c]) + sa[c] * rng.next_gaussian();
          }
          transmit(ch,
                   std::span<const double>(cs.vector_of(label), static_cast<size_t>(ch.n_tx)),
                   sigma, rng, y);
          dm.demap(y, sigma, la, lp);
          for (int b = 0; b < rho; ++b) {
            const int v = (label >> (rho - 1 - b)) & 1;
            const double le = lp[static_cast<size_t>(b)] - la[static_cast<size_t>(b)];
            const double folded = v ? -le : le;
            (b < rho_d ? ps.spd : ps.sid) += detail::log2_1p_exp_neg(folded);
          }
        }
        parts[static_cast<size_t>(chunk)] = ps;
      });

  double sum_spd = 0.0, sum_sid = 0.0;
  for (const Partial& p : parts) {
    sum_spd += p.spd;
    sum_sid += p.sid;
  }
  TransferPoint tp;
  tp.samples = samples;
  const double n = static_cast<double>(samples);
  tp.i_e_spd = std::clamp(1.0 - sum_spd / (n * rho_d), 0.0, 1.0);
  tp.i_e_sid = std::clamp(1.0 - sum_sid / (n * (rho - rho_d)), 0.0, 1.0);
  return tp;
}

// Single shared prior MI on every bit (classic scalar EXIT transfer curve).
inline TransferPoint demapper_transfer(const GsmConstellation& cs, const ChannelModel& ch,
                                       double sigma, double i_a_dem, long long samples,
                                       std::uint64_t seed, int workers = 1,
                                       DemapAlgo algo = DemapAlgo::MaxLog) {
  return demapper_transfer(cs, ch, sigma, std::vector<double>{i_a_dem}, samples, seed,
                           workers, algo);
}

struct ExitOptions {
  long long samples{200000};
  std::uint64_t seed{1};
  int workers{1};
  DemapAlgo algo{DemapAlgo::MaxLog};
};

// Modified protograph EXIT recursion: demapper transfer probe feeds channel
// MIs at protograph-column granularity, standard PEXIT inner passes, then
// per-column priors built from the check-to-variable messages go back to the
// demapper for the next outer round.
inline bool mpexit_converges(const BaseMatrix& base, const GsmConstellation& cs,
                             const ChannelModel& ch, double osnr_db, int g1, int g2,
                             const ExitOptions& opt = {}) {
  base.validate();
  if (g1 < 1) throw std::invalid_argument("mpexit: g1 must be >= 1");
  if (g2 < 0) throw std::invalid_argument("mpexit: g2 must be >= 0");
  const int rho = cs.rho();
  const int rho_d = cs.config.rho_d();
  const double sigma = osnr_to_sigma(ch, base.design_rate(), rho, osnr_db);

  const int nc = base.rows, nv = base.cols;
  auto idx = [nv](int i, int j) { return static_cast<size_t>(i) * nv + j; };
  std::vector<double> cv(static_cast<size_t>(nc) * nv, 0.0);
  std::vector<double> vc(static_cast<size_t>(nc) * nv, 0.0);
  std::vector<double> jcv2(static_cast<size_t>(nc) * nv, 0.0);
  std::vector<double> ich2(static_cast<size_t>(nv), 0.0);
  std::vector<double> colsum(static_cast<size_t>(nv), 0.0);

  std::vector<int> tx_cols;
  for (int j = 0; j < nv; ++j)
    if (!base.punctured.count(j)) tx_cols.push_back(j);
  std::vector<double> ia_cols(tx_cols.size(), 0.0);
  const int outer_rounds = g2 == 0 ? 1 : g2;
  const double target = 1.0 - 1e-4;

  for (int outer = 0; outer < outer_rounds; ++outer) {
    const TransferPoint tp = demapper_transfer(
        cs, ch, sigma, ia_cols, opt.samples,
        derive_seed(opt.seed, streams::transfer, static_cast<std::uint64_t>(outer)),
        opt.workers, opt.algo);
    const double ich =
        (rho_d * tp.i_e_spd + (rho - rho_d) * tp.i_e_sid) / rho;
    for (int j = 0; j < nv; ++j) {
      const double v = base.punctured.count(j) ? 0.0 : ich;
      const double jv = j_inverse(v);
      ich2[static_cast<size_t>(j)] = jv * jv;
    }

    for (int pass = 0; pass < g1; ++pass) {
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nv; ++j)
          if (base.at(i, j) > 0) {
            const double t = j_inverse(cv[idx(i, j)]);
            jcv2[idx(i, j)] = t * t;
          }
      for (int j = 0; j < nv; ++j) {
        double acc = 0.0;
        for (int i = 0; i < nc; ++i)
          if (base.at(i, j) > 0) acc += base.at(i, j) * jcv2[idx(i, j)];
        colsum[static_cast<size_t>(j)] = acc;
      }
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nv; ++j)
          if (base.at(i, j) > 0) {
            const double arg = colsum[static_cast<size_t>(j)] - jcv2[idx(i, j)] +
                               ich2[static_cast<size_t>(j)];
            vc[idx(i, j)] = j_function(std::sqrt(std::max(0.0, arg)));
          }
      for (int i = 0; i < nc; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j < nv; ++j)
          if (base.at(i, j) > 0) {
            const double t = j_inverse(1.0 - vc[idx(i, j)]);
            jcv2[idx(i, j)] = t * t;  // reuse as scratch for this row sweep
            rowsum += base.at(i, j) * jcv2[idx(i, j)];
          }
        for (int j = 0; j < nv; ++j)
          if (base.at(i, j) > 0)
            cv[idx(i, j)] =
                1.0 - j_function(std::sqrt(std::max(0.0, rowsum - jcv2[idx(i, j)])));
      }
      bool all_ok = true;
      for (int j = 0; j < nv && all_ok; ++j) {
        double acc = ich2[static_cast<size_t>(j)];
        for (int i = 0; i < nc; ++i)
          if (base.at(i, j) > 0) {
            const double t = j_inverse(cv[idx(i, j)]);
            acc += base.at(i, j) * t * t;
          }
        all_ok = j_function(std::sqrt(acc)) >= target;
      }
      if (all_ok) return true;
    }

    for (size_t t = 0; t < tx_cols.size(); ++t) {
      const int j = tx_cols[t];
      double acc = 0.0;
      for (int i = 0; i < nc; ++i)
        if (base.at(i, j) > 0) {
          const double u = j_inverse(cv[idx(i, j)]);
          acc += base.at(i, j) * u * u;
        }
      ia_cols[t] = j_function(std::sqrt(acc));
    }
  }
  return false;
}

// Bisect the lowest OSNR at which mpexit_converges, to resolution_db, with a
// best-of-three vote per probe to damp Monte Carlo wobble in the transfer step.
inline double find_threshold(const BaseMatrix& base, const GsmConstellation& cs,
                             const ChannelModel& ch, int g1, int g2, double osnr_lo,
                             double osnr_hi, const ExitOptions& opt = {},
                             double resolution_db = 0.01) {
  if (!(osnr_lo < osnr_hi)) throw std::invalid_argument("find_threshold: need lo < hi");
  std::uint64_t probe = 0;
  auto vote = [&](double osnr_db) {
    int yes = 0, no = 0;
    for (int rep = 0; rep < 3; ++rep) {
      ExitOptions o = opt;
      o.seed = derive_seed(opt.seed, streams::threshold, probe * 4 + rep);
      if (mpexit_converges(base, cs, ch, osnr_db, g1, g2, o))
        ++yes;
      else
        ++no;
      if (yes == 2 || no == 2) break;
    }
    ++probe;
    return yes >= 2;
  };

  if (vote(osnr_lo))
    throw std::runtime_error("find_threshold: already converges at lower bracket");
  if (!vote(osnr_hi))
    throw std::runtime_error("find_threshold: does not converge at upper bracket");
  double lo = osnr_lo, hi = osnr_hi;
  while (hi - lo > resolution_db) {
    const double mid = 0.5 * (lo + hi);
    (vote(mid) ? hi : lo) = mid;
  }
  return hi;
}

struct ComplexityInputs {
  long long n{0};      // variable nodes
  long long m{0};      // check nodes
  long long p{0};      // punctured variable nodes
  double gv{0.0};      // average VN degree
  double gc{0.0};      // average CN degree
  double t1{0.0};      // average inner iterations
  double t2{0.0};      // average outer iterations
  int rho{0};
  int n_tx{0};
  int n_rx{0};
};

struct ComplexityEstimate {
  double demap_ra{0.0}, demap_rm{0.0};
  double decode_ra{0.0}, decode_rm{0.0};
  double real_additions{0.0};
  double real_multiplications{0.0};
};

inline ComplexityEstimate estimate_complexity(const ComplexityInputs& in) {
  if (in.n <= 0 || in.m <= 0 || in.rho <= 0)
    throw std::invalid_argument("estimate_complexity: bad dimensions");
  const double two_rho = std::ldexp(1.0, in.rho);
  const double np = static_cast<double>(in.n - in.p);
  ComplexityEstimate est;
  est.demap_ra =
      np * (two_rho * ((in.n_tx + 1) * in.n_rx + 2 * in.rho - 4) + 2) * in.t2;
  est.demap_rm = two_rho * np * ((in.n_tx + 1) * in.n_rx + in.rho + 2) * in.t2;
  est.decode_ra = static_cast<double>(in.m) * (in.gv - 1.0) * in.t1;
  est.decode_rm = 2.0 * static_cast<double>(in.n) * in.gc * in.t1;
  est.real_additions = est.demap_ra + est.decode_ra;
  est.real_multiplications = est.demap_rm + est.decode_rm;
  return est;
}

}  // namespace vlcsim
