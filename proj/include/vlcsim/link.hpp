#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "vlcsim/channel.hpp"
#include "vlcsim/demapper.hpp"
#include "vlcsim/gsm.hpp"
#include "vlcsim/ldpc.hpp"
#include "vlcsim/lifting.hpp"
#include "vlcsim/parallel.hpp"
#include "vlcsim/rng.hpp"

namespace vlcsim {

// Fixed pseudo-random bit permutation. interleaved[i] = flat[perm[i]].
class Interleaver {
 public:
  Interleaver(int n, std::uint64_t seed) : perm_(static_cast<size_t>(n)) {
    if (n < 1) throw std::invalid_argument("interleaver: length must be >= 1");
    std::iota(perm_.begin(), perm_.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm_[static_cast<size_t>(i)], perm_[static_cast<size_t>(j)]);
    }
  }

  int size() const { return static_cast<int>(perm_.size()); }
  const std::vector<int>& perm() const { return perm_; }
  int operator[](int i) const { return perm_[static_cast<size_t>(i)]; }

 private:
  std::vector<int> perm_;
};

struct LinkConfig {
  BaseMatrix base;
  int z{0};
  std::uint64_t lift_seed{1};
  GsmConfig gsm;
  GsmKind kind{GsmKind::SserGsm};
  Geometry geom;
  int g1{20};  // max inner (BP) iterations per outer round
  int g2{4};   // max outer demapper/decoder rounds; 0 means a single non-iterative pass
  DemapAlgo algo{DemapAlgo::MaxLog};
  std::uint64_t seed{1};

  void validate() const {
    base.validate();
    gsm.validate();
    geom.validate();
    if (z < 1) throw std::invalid_argument("link: lifting factor must be >= 1");
    if (g1 < 1) throw std::invalid_argument("link: g1 must be >= 1");
    if (g2 < 0) throw std::invalid_argument("link: g2 must be >= 0");
    if (gsm.n_tx != geom.n_tx)
      throw std::invalid_argument("link: constellation and geometry disagree on LED count");
  }
};

struct FrameResult {
  int bit_errors{0};
  bool frame_error{false};
  bool syndrome_ok{false};
  int inner_iters{0};
  int outer_iters{0};
};

struct PointStats {
  double osnr_db{0.0};
  long long frames{0};
  long long info_bits{0};
  long long bit_errors{0};
  long long frame_errors{0};
  long long success_frames{0};      // syndrome satisfied within the iteration budget
  long long success_inner_iters{0}; // cumulative BP iterations over success frames
  long long success_outer_iters{0};

  double ber() const { return info_bits ? static_cast<double>(bit_errors) / info_bits : 0.0; }
  double fer() const { return frames ? static_cast<double>(frame_errors) / frames : 0.0; }
  // Average iteration counts conditioned on successful decoding (complexity inputs).
  double t1() const {
    return success_frames ? static_cast<double>(success_inner_iters) / success_frames : 0.0;
  }
  double t2() const {
    return success_frames ? static_cast<double>(success_outer_iters) / success_frames : 0.0;
  }
};

// A point finishes at whichever limit is hit first.
struct StopRule {
  long long max_frames{100000};
  long long max_info_bits{10000000};
  int target_frame_errors{100};

  bool done(const PointStats& s) const {
    if (s.frames >= max_frames) return true;
    if (target_frame_errors > 0 && s.frame_errors >= target_frame_errors) return true;
    if (max_info_bits > 0 && s.info_bits >= max_info_bits) return true;
    return false;
  }
};

namespace detail {
constexpr int kFrameBatch = 64;
constexpr int kFrameChunk = 8;
}  // namespace detail

class LinkSimulator {
 public:
  explicit LinkSimulator(const LinkConfig& cfg)
      : cfg_(cfg),
        code_(lift(cfg.base, cfg.z, cfg.lift_seed)),
        encoder_(code_),
        cs_(build_constellation(cfg.gsm, cfg.kind)),
        ch_(build_gain_matrix(cfg.geom, cfg.gsm.avg_intensity)),
        pi_(code_.transmitted_len, derive_seed(cfg.seed, streams::interleaver)) {
    cfg_.validate();
    if (code_.transmitted_len % cs_.rho() != 0)
      throw std::invalid_argument("link: transmitted length not a multiple of rho");
    n_symbols_ = code_.transmitted_len / cs_.rho();
    code_rate_ = static_cast<double>(code_.info_len) / code_.transmitted_len;
  }

  const LiftedCode& code() const { return code_; }
  const GsmConstellation& constellation() const { return cs_; }
  const ChannelModel& channel() const { return ch_; }
  const Interleaver& interleaver() const { return pi_; }
  double code_rate() const { return code_rate_; }
  int symbols_per_frame() const { return n_symbols_; }
  double sigma_for(double osnr_db) const {
    return osnr_to_sigma(ch_, code_rate_, cs_.rho(), osnr_db);
  }

  struct Ctx {
    BpDecoder decoder;
    Demapper demapper;
    std::vector<std::uint8_t> info;
    std::vector<int> labels;
    std::vector<double> y;        // n_symbols x n_rx
    std::vector<double> la;       // demapper priors, transmitted order after interleaving
    std::vector<double> lp;       // demapper a-posteriori
    std::vector<double> dec_in;   // decoder channel LLRs, codeword order

    Ctx(const LinkSimulator& s)
        : decoder(s.code_),
          demapper(s.cs_, s.ch_, s.cfg_.algo),
          info(static_cast<size_t>(s.code_.info_len)),
          labels(static_cast<size_t>(s.n_symbols_)),
          y(static_cast<size_t>(s.n_symbols_) * s.ch_.n_rx),
          la(static_cast<size_t>(s.code_.transmitted_len)),
          lp(static_cast<size_t>(s.code_.transmitted_len)),
          dec_in(static_cast<size_t>(s.code_.n)) {}
  };

  FrameResult run_frame(Ctx& ctx, double sigma, std::uint64_t frame_seed) const {
    const int t_len = code_.transmitted_len;
    const int rho = cs_.rho();
    Rng rng(frame_seed);

    for (auto& b : ctx.info) b = static_cast<std::uint8_t>(rng.next_bit());
    const Codeword cw = encoder_.encode(ctx.info);

    const auto& tb = code_.transmitted_bits;
    const auto& perm = pi_.perm();
    for (int s = 0; s < n_symbols_; ++s) {
      int label = 0;
      for (int b = 0; b < rho; ++b)
        label = (label << 1) | cw.bits[static_cast<size_t>(tb[static_cast<size_t>(
                    perm[static_cast<size_t>(s * rho + b)])])];
      ctx.labels[static_cast<size_t>(s)] = label;
      transmit(ch_, std::span<const double>(cs_.vector_of(label), static_cast<size_t>(ch_.n_tx)),
               sigma, rng,
               std::span<double>(ctx.y.data() + static_cast<size_t>(s) * ch_.n_rx,
                                 static_cast<size_t>(ch_.n_rx)));
    }

    std::fill(ctx.la.begin(), ctx.la.end(), 0.0);
    const int passes = cfg_.g2 == 0 ? 1 : cfg_.g2;
    FrameResult fr;
    DecoderResult dec;
    for (int outer = 1; outer <= passes; ++outer) {
      fr.outer_iters = outer;
      for (int s = 0; s < n_symbols_; ++s) {
        const size_t off = static_cast<size_t>(s) * rho;
        ctx.demapper.demap(
            std::span<const double>(ctx.y.data() + static_cast<size_t>(s) * ch_.n_rx,
                                    static_cast<size_t>(ch_.n_rx)),
            sigma, std::span<const double>(ctx.la.data() + off, static_cast<size_t>(rho)),
            std::span<double>(ctx.lp.data() + off, static_cast<size_t>(rho)));
      }
      // Extrinsic hand-off to the decoder; punctured positions stay at zero.
      std::fill(ctx.dec_in.begin(), ctx.dec_in.end(), 0.0);
      for (int i = 0; i < t_len; ++i)
        ctx.dec_in[static_cast<size_t>(tb[static_cast<size_t>(perm[static_cast<size_t>(i)])])] =
            clip_llr(ctx.lp[static_cast<size_t>(i)] - ctx.la[static_cast<size_t>(i)]);

      dec = ctx.decoder.decode(ctx.dec_in, cfg_.g1);
      fr.inner_iters += dec.iterations_used;
      if (dec.syndrome_ok) {
        fr.syndrome_ok = true;
        break;
      }
      if (outer < passes) {
        for (int i = 0; i < t_len; ++i) {
          const size_t pos =
              static_cast<size_t>(tb[static_cast<size_t>(perm[static_cast<size_t>(i)])]);
          ctx.la[static_cast<size_t>(i)] =
              clip_llr(dec.aposteriori_llrs[pos] - ctx.dec_in[pos]);
        }
      }
    }

    const auto& ic = encoder_.info_cols();
    for (size_t k = 0; k < ic.size(); ++k)
      fr.bit_errors += dec.hard_bits[static_cast<size_t>(ic[k])] != ctx.info[k];
    fr.frame_error = fr.bit_errors > 0;
    return fr;
  }

  PointStats run_point(double osnr_db, const StopRule& stop, int workers = 1,
                       int point_index = 0) const {
    const double sigma = sigma_for(osnr_db);
    PointStats st;
    st.osnr_db = osnr_db;

    std::vector<std::unique_ptr<Ctx>> pool;
    std::mutex pool_mu;
    auto acquire = [&]() -> std::unique_ptr<Ctx> {
      {
        std::lock_guard<std::mutex> lk(pool_mu);
        if (!pool.empty()) {
          auto c = std::move(pool.back());
          pool.pop_back();
          return c;
        }
      }
      return std::make_unique<Ctx>(*this);
    };
    auto release = [&](std::unique_ptr<Ctx> c) {
      std::lock_guard<std::mutex> lk(pool_mu);
      pool.push_back(std::move(c));
    };

    std::vector<FrameResult> slots(detail::kFrameBatch);
    long long frame_idx = 0;
    while (!stop.done(st)) {
      const long long remaining = stop.max_frames - st.frames;
      const int batch =
          static_cast<int>(std::min<long long>(detail::kFrameBatch, remaining));
      if (batch <= 0) break;
      parallel_chunks(batch, detail::kFrameChunk, workers,
                      [&](int, int begin, int end) {
                        auto ctx = acquire();
                        for (int b = begin; b < end; ++b) {
                          const std::uint64_t fs = derive_seed(
                              cfg_.seed, streams::frame,
                              (static_cast<std::uint64_t>(point_index) << 32) +
                                  static_cast<std::uint64_t>(frame_idx + b));
                          slots[static_cast<size_t>(b)] = run_frame(*ctx, sigma, fs);
                        }
                        release(std::move(ctx));
                      });
      for (int b = 0; b < batch; ++b) {
        const FrameResult& fr = slots[static_cast<size_t>(b)];
        st.frames += 1;
        st.info_bits += code_.info_len;
        st.bit_errors += fr.bit_errors;
        st.frame_errors += fr.frame_error;
        if (fr.syndrome_ok && !fr.frame_error) {
          st.success_frames += 1;
          st.success_inner_iters += fr.inner_iters;
          st.success_outer_iters += fr.outer_iters;
        }
      }
      frame_idx += batch;
    }
    return st;
  }

  std::vector<PointStats> sweep(std::span<const double> osnrs_db, const StopRule& stop,
                                int workers = 1) const {
    std::vector<PointStats> out;
    out.reserve(osnrs_db.size());
    for (size_t i = 0; i < osnrs_db.size(); ++i)
      out.push_back(run_point(osnrs_db[i], stop, workers, static_cast<int>(i)));
    return out;
  }

 private:
  LinkConfig cfg_;
  LiftedCode code_;
  Encoder encoder_;
  GsmConstellation cs_;
  ChannelModel ch_;
  Interleaver pi_;
  int n_symbols_{0};
  double code_rate_{0.0};
};

}  // namespace vlcsim
