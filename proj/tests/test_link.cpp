#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

#include <vlcsim/link.hpp>

using namespace vlcsim;

namespace {

LinkConfig toy_config() {
  LinkConfig cfg;
  cfg.base = make_eara(0);
  cfg.z = 64;
  cfg.gsm = GsmConfig{4, 2, 2, 1.0};
  cfg.kind = GsmKind::SserGsm;
  cfg.geom.d_tx = 0.5;
  cfg.g1 = 20;
  cfg.g2 = 4;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("interleaver is a seeded permutation") {
  const Interleaver pi(256, 77);
  REQUIRE(pi.size() == 256);
  std::vector<int> sorted = pi.perm();
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> iota(256);
  std::iota(iota.begin(), iota.end(), 0);
  REQUIRE(sorted == iota);

  const Interleaver again(256, 77);
  REQUIRE(again.perm() == pi.perm());
  const Interleaver other(256, 78);
  REQUIRE(other.perm() != pi.perm());
  REQUIRE_THROWS_AS(Interleaver(0, 1), std::invalid_argument);
}

TEST_CASE("simulator wiring") {
  const LinkSimulator sim(toy_config());
  REQUIRE(sim.code().n == 320);
  REQUIRE(sim.code().transmitted_len == 256);
  REQUIRE(sim.code_rate() == Catch::Approx(0.5));
  REQUIRE(sim.symbols_per_frame() == 64);
  REQUIRE(sim.interleaver().size() == 256);
  REQUIRE(sim.sigma_for(10.0) ==
          Catch::Approx(osnr_to_sigma(sim.channel(), 0.5, 4, 10.0)));
}

TEST_CASE("frame length must divide into whole symbols") {
  LinkConfig cfg = toy_config();
  cfg.gsm = GsmConfig{4, 3, 2, 1.0};  // rho = 5, but 256 bits per frame
  REQUIRE_THROWS_AS(LinkSimulator(cfg), std::invalid_argument);
}

TEST_CASE("constellation and geometry must agree on the LED count") {
  LinkConfig cfg = toy_config();
  cfg.geom.n_tx = 2;
  REQUIRE_THROWS_AS(LinkSimulator(cfg), std::invalid_argument);
}

TEST_CASE("iteration budgets are validated") {
  LinkConfig cfg = toy_config();
  cfg.g1 = 0;
  REQUIRE_THROWS_AS(LinkSimulator(cfg), std::invalid_argument);
  LinkConfig cfg2 = toy_config();
  cfg2.g2 = -1;
  REQUIRE_THROWS_AS(LinkSimulator(cfg2), std::invalid_argument);
}

TEST_CASE("clean channel decodes every frame on the first pass") {
  const LinkSimulator sim(toy_config());
  StopRule stop;
  stop.max_frames = 20;
  stop.target_frame_errors = 0;
  stop.max_info_bits = 0;
  const PointStats st = sim.run_point(30.0, stop);
  REQUIRE(st.frames == 20);
  REQUIRE(st.bit_errors == 0);
  REQUIRE(st.frame_errors == 0);
  REQUIRE(st.success_frames == 20);
  REQUIRE(st.t1() == 1.0);
  REQUIRE(st.t2() == 1.0);
  REQUIRE(st.info_bits == 20LL * sim.code().info_len);
}

TEST_CASE("deep in the noise every frame fails") {
  const LinkSimulator sim(toy_config());
  StopRule stop;
  stop.max_frames = 30;
  stop.target_frame_errors = 0;
  stop.max_info_bits = 0;
  const PointStats st = sim.run_point(2.0, stop);
  REQUIRE(st.frames == 30);
  REQUIRE(st.fer() == 1.0);
  REQUIRE(st.ber() > 0.01);
}

TEST_CASE("results are reproducible and worker-count independent") {
  StopRule stop;
  stop.max_frames = 64;
  stop.target_frame_errors = 0;
  stop.max_info_bits = 0;
  const LinkSimulator a(toy_config());
  const LinkSimulator b(toy_config());
  const PointStats s1 = a.run_point(5.0, stop, 1);
  const PointStats s2 = b.run_point(5.0, stop, 1);
  const PointStats s3 = a.run_point(5.0, stop, 3);
  REQUIRE(s1.bit_errors == s2.bit_errors);
  REQUIRE(s1.frame_errors == s2.frame_errors);
  REQUIRE(s1.success_inner_iters == s2.success_inner_iters);
  REQUIRE(s1.bit_errors == s3.bit_errors);
  REQUIRE(s1.frame_errors == s3.frame_errors);
  REQUIRE(s1.success_inner_iters == s3.success_inner_iters);
  REQUIRE(s1.success_outer_iters == s3.success_outer_iters);

  LinkConfig reseeded = toy_config();
  reseeded.seed = 2;
  const PointStats s4 = LinkSimulator(reseeded).run_point(5.0, stop, 1);
  REQUIRE(s4.bit_errors != s1.bit_errors);
}

TEST_CASE("error rates fall with osnr") {
  const LinkSimulator sim(toy_config());
  StopRule stop;
  stop.max_frames = 300;
  stop.target_frame_errors = 0;
  stop.max_info_bits = 0;
  const PointStats low = sim.run_point(4.0, stop);
  const PointStats high = sim.run_point(12.0, stop, 1, 1);
  REQUIRE(low.ber() > high.ber());
  REQUIRE(low.fer() > high.fer());
}

TEST_CASE("stop rule fires at the first limit reached") {
  StopRule stop;  // defaults: 100000 frames, 1e7 info bits, 100 frame errors
  PointStats st;
  REQUIRE_FALSE(stop.done(st));
  st.frames = 100000;
  REQUIRE(stop.done(st));
  st = PointStats{};
  st.frame_errors = 100;
  REQUIRE(stop.done(st));
  st = PointStats{};
  st.info_bits = 10000000;
  REQUIRE(stop.done(st));
  // disabled limits never fire
  StopRule open;
  open.target_frame_errors = 0;
  open.max_info_bits = 0;
  st = PointStats{};
  st.frame_errors = 1000;
  st.info_bits = 1LL << 40;
  REQUIRE_FALSE(open.done(st));

  // frame cap is exact because batches clamp to the remainder
  const LinkSimulator sim(toy_config());
  StopRule cap;
  cap.max_frames = 32;
  cap.target_frame_errors = 0;
  cap.max_info_bits = 0;
  REQUIRE(sim.run_point(8.0, cap).frames == 32);
}

TEST_CASE("sweep runs one point per osnr") {
  const LinkSimulator sim(toy_config());
  StopRule stop;
  stop.max_frames = 8;
  stop.target_frame_errors = 0;
  stop.max_info_bits = 0;
  const std::vector<double> osnrs = {4.0, 8.0, 12.0};
  const auto pts = sim.sweep(osnrs, stop);
  REQUIRE(pts.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    REQUIRE(pts[i].osnr_db == osnrs[i]);
    REQUIRE(pts[i].frames == 8);
  }
}
