#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "channel.hpp"
#include "gsm.hpp"

namespace vlcsim {

enum class DemapAlgo { MaxLog, LogMap };

// Substitute for +-infinity when one side of a bit split has no candidate or
// all candidates carry -inf metrics (degenerate sigma, single-candidate sets).
constexpr double kDemapClip = 1e30;

struct LlrFrame {
  std::vector<double> apriori;
  std::vector<double> aposteriori;
  std::vector<double> extrinsic;
};

// Soft demapper over one GSM symbol. Candidate metrics follow the printed
// max-log rule: L^p(l) = L^a(l) + max over bit-l=0 candidates of
// [-||y-Hx||^2/(2 sigma^2) + sum_{tau != l, v_tau=0} L^a(tau)] minus the same
// max over bit-l=1 candidates; sign convention L > 0 favors bit 0.
class Demapper {
 public:
  Demapper(const GsmConstellation& cs, const ChannelModel& ch,
           DemapAlgo algo = DemapAlgo::MaxLog)
      : rho_(cs.rho()), n_rx_(ch.n_rx), n_labels_(cs.labels()), algo_(algo) {
    hx_.assign(static_cast<size_t>(n_labels_) * n_rx_, 0.0);
    for (int label = 0; label < n_labels_; ++label) {
      const double* x = cs.vector_of(label);
      for (int i = 0; i < n_rx_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < ch.n_tx; ++j) acc += ch.at(i, j) * x[j];
        hx_[static_cast<size_t>(label) * n_rx_ + i] = acc;
      }
    }
    d2_.resize(static_cast<size_t>(n_labels_));
  }

  int rho() const { return rho_; }

  void demap(std::span<const double> y, double sigma, std::span<const double> apriori,
             std::span<double> aposteriori) {
    if (!(sigma > 0.0)) sigma = 1e-150;  // degenerate sigma: keep d2/sigma^2 NaN-free
    for (int label = 0; label < n_labels_; ++label) {
      const double* hx = &hx_[static_cast<size_t>(label) * n_rx_];
      double d2 = 0.0;
      for (int i = 0; i < n_rx_; ++i) {
        const double diff = y[static_cast<size_t>(i)] - hx[i];
        d2 += diff * diff;
      }
      d2_[static_cast<size_t>(label)] = d2;
    }
    for (int l = 0; l < rho_; ++l) {
      double best0 = -std::numeric_limits<double>::infinity();
      double best1 = best0;
      double sum0 = 0.0, sum1 = 0.0;  // log-sum-exp accumulators
      for (int label = 0; label < n_labels_; ++label) {
        double q = 0.0;
        for (int tau = 0; tau < rho_; ++tau) {
          if (tau == l) continue;
          if (((label >> (rho_ - 1 - tau)) & 1) == 0) q += apriori[static_cast<size_t>(tau)];
        }
        const double metric = -d2_[static_cast<size_t>(label)] / (2.0 * sigma * sigma) + q;
        if (((label >> (rho_ - 1 - l)) & 1) == 0) {
          if (algo_ == DemapAlgo::LogMap && metric > -std::numeric_limits<double>::infinity()) {
            if (metric > best0) {
              sum0 = sum0 * std::exp(best0 - metric) + 1.0;
              best0 = metric;
            } else {
              sum0 += std::exp(metric - best0);
            }
          } else if (metric > best0) {
            best0 = metric;
          }
        } else {
          if (algo_ == DemapAlgo::LogMap && metric > -std::numeric_limits<double>::infinity()) {
            if (metric > best1) {
              sum1 = sum1 * std::exp(best1 - metric) + 1.0;
              best1 = metric;
            } else {
              sum1 += std::exp(metric - best1);
            }
          } else if (metric > best1) {
            best1 = metric;
          }
        }
      }
      double m0 = best0, m1 = best1;
      if (algo_ == DemapAlgo::LogMap) {
        if (std::isfinite(best0)) m0 = best0 + std::log(sum0);
        if (std::isfinite(best1)) m1 = best1 + std::log(sum1);
      }
      const bool fin0 = std::isfinite(m0), fin1 = std::isfinite(m1);
      double lp;
      if (fin0 && fin1)
        lp = apriori[static_cast<size_t>(l)] + m0 - m1;
      else if (fin0)
        lp = kDemapClip;
      else if (fin1)
        lp = -kDemapClip;
      else
        lp = 0.0;
      aposteriori[static_cast<size_t>(l)] = lp;
    }
  }

 private:
  int rho_, n_rx_, n_labels_;
  DemapAlgo algo_;
  std::vector<double> hx_, d2_;
};

inline LlrFrame demap_symbol(const GsmConstellation& cs, const ChannelModel& ch,
                             std::span<const double> y, double sigma,
                             std::span<const double> apriori,
                             DemapAlgo algo = DemapAlgo::MaxLog) {
  Demapper dm(cs, ch, algo);
  LlrFrame frame;
  frame.apriori.assign(apriori.begin(), apriori.end());
  frame.aposteriori.assign(static_cast<size_t>(cs.rho()), 0.0);
  dm.demap(y, sigma, apriori, std::span<double>(frame.aposteriori));
  frame.extrinsic.resize(frame.aposteriori.size());
  for (size_t i = 0; i < frame.extrinsic.size(); ++i)
    frame.extrinsic[i] = frame.aposteriori[i] - frame.apriori[i];
  return frame;
}

// Verification oracle: evaluates the candidate enumeration literally, with no
// precomputation or sharing across bits. Arithmetic matches demap_symbol
// operation for operation, so agreement is exact, not approximate.
inline LlrFrame brute_force_map(const GsmConstellation& cs, const ChannelModel& ch,
                                std::span<const double> y, double sigma,
                                std::span<const double> apriori,
                                DemapAlgo algo = DemapAlgo::MaxLog) {
  const int rho = cs.rho();
  if (rho > 12) throw std::invalid_argument("brute_force_map: rho > 12 rejected");
  if (!(sigma > 0.0)) sigma = 1e-150;
  const int n_labels = cs.labels();
  LlrFrame frame;
  frame.apriori.assign(apriori.begin(), apriori.end());
  frame.aposteriori.assign(static_cast<size_t>(rho), 0.0);
  for (int l = 0; l < rho; ++l) {
    double best0 = -std::numeric_limits<double>::infinity();
    double best1 = best0;
    double sum0 = 0.0, sum1 = 0.0;
    for (int label = 0; label < n_labels; ++label) {
      const double* x = cs.vector_of(label);
      double d2 = 0.0;
      for (int i = 0; i < ch.n_rx; ++i) {
        double acc = 0.0;
        for (int j = 0; j < ch.n_tx; ++j) acc += ch.at(i, j) * x[j];
        const double diff = y[static_cast<size_t>(i)] - acc;
        d2 += diff * diff;
      }
      double q = 0.0;
      for (int tau = 0; tau < rho; ++tau) {
        if (tau == l) continue;
        if (((label >> (rho - 1 - tau)) & 1) == 0) q += apriori[static_cast<size_t>(tau)];
      }
      const double metric = -d2 / (2.0 * sigma * sigma) + q;
      if (((label >> (rho - 1 - l)) & 1) == 0) {
        if (algo == DemapAlgo::LogMap && metric > -std::numeric_limits<double>::infinity()) {
          if (metric > best0) {
            sum0 = sum0 * std::exp(best0 - metric) + 1.0;
            best0 = metric;
          } else {
            sum0 += std::exp(metric - best0);
          }
        } else if (metric > best0) {
          best0 = metric;
        }
      } else {
        if (algo == DemapAlgo::LogMap && metric > -std::numeric_limits<double>::infinity()) {
          if (metric > best1) {
            sum1 = sum1 * std::exp(best1 - metric) + 1.0;
            best1 = metric;
          } else {
            sum1 += std::exp(metric - best1);
          }
        } else if (metric > best1) {
          best1 = metric;
        }
      }
    }
    double m0 = best0, m1 = best1;
    if (algo == DemapAlgo::LogMap) {
      if (std::isfinite(best0)) m0 = best0 + std::log(sum0);
      if (std::isfinite(best1)) m1 = best1 + std::log(sum1);
    }
    const bool fin0 = std::isfinite(m0), fin1 = std::isfinite(m1);
    double lp;
    if (fin0 && fin1)
      lp = apriori[static_cast<size_t>(l)] + m0 - m1;
    else if (fin0)
      lp = kDemapClip;
    else if (fin1)
      lp = -kDemapClip;
    else
      lp = 0.0;
    frame.aposteriori[static_cast<size_t>(l)] = lp;
  }
  frame.extrinsic.resize(frame.aposteriori.size());
  for (size_t i = 0; i < frame.extrinsic.size(); ++i)
    frame.extrinsic[i] = frame.aposteriori[i] - frame.apriori[i];
  return frame;
}

}  // namespace vlcsim
