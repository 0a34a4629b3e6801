#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <vlcsim/analysis.hpp>

using namespace vlcsim;

namespace {

struct Bench {
  GsmConstellation cs;
  ChannelModel ch;
};

Bench make_bench(GsmKind kind, double d_tx = 0.5) {
  Geometry g;
  g.d_tx = d_tx;
  return Bench{build_constellation(GsmConfig{4, 2, 2, 1.0}, kind), build_gain_matrix(g)};
}

}  // namespace

TEST_CASE("mutual information fit and its inverse") {
  REQUIRE(j_function(0.0) == 0.0);
  REQUIRE(j_function(-1.0) == 0.0);
  REQUIRE(j_function(10.0) == 1.0);
  // strictly increasing over the usable range
  double prev = -1.0;
  for (double s = 0.05; s <= 9.0; s += 0.05) {
    const double v = j_function(s);
    REQUIRE(v > prev);
    prev = v;
  }
  // both compositions are near-identities
  for (double mi = 0.01; mi <= 0.99; mi += 0.01)
    REQUIRE(j_function(j_inverse(mi)) == Catch::Approx(mi).margin(1e-9));
  for (double s = 0.1; s <= 8.0; s += 0.1)
    REQUIRE(j_inverse(j_function(s)) == Catch::Approx(s).margin(1e-6));
  REQUIRE(j_inverse(0.0) == 0.0);
  REQUIRE(j_inverse(1.0) == 10.0);
}

TEST_CASE("log-domain softplus helper") {
  using detail::log2_1p_exp_neg;
  REQUIRE(log2_1p_exp_neg(0.0) == Catch::Approx(1.0));
  REQUIRE(log2_1p_exp_neg(3.0) == Catch::Approx(std::log2(1.0 + std::exp(-3.0))));
  REQUIRE(log2_1p_exp_neg(-50.0) == Catch::Approx(50.0 / std::log(2.0)));
  REQUIRE(log2_1p_exp_neg(700.0) >= 0.0);  // no overflow
}

TEST_CASE("ami saturates at the symbol entropy in the clean limit") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const AmiEstimate est = estimate_ami(b.cs, b.ch, 1e-9, 5000, 1);
  REQUIRE(est.i_total == Catch::Approx(4.0).margin(1e-9));
  REQUIRE(est.i_spd == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(est.i_sid == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(est.stderr_total == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("ami vanishes when noise swamps the signal") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const AmiEstimate est = estimate_ami(b.cs, b.ch, 1.0, 20000, 1);
  REQUIRE(est.i_total == Catch::Approx(0.0).margin(0.05));
}

TEST_CASE("ami splits add up and the estimate is reproducible") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const double sigma = osnr_to_sigma(b.ch, 0.5, 4, 6.0);
  const AmiEstimate est = estimate_ami(b.cs, b.ch, sigma, 20000, 7);
  REQUIRE(est.i_total == est.i_spd + est.i_sid);
  REQUIRE(est.samples == 20000);
  REQUIRE(est.stderr_total > 0.0);
  REQUIRE(est.stderr_total < 0.05);
  const AmiEstimate again = estimate_ami(b.cs, b.ch, sigma, 20000, 7);
  REQUIRE(again.i_total == est.i_total);
  // worker split must not change the reduced sums
  const AmiEstimate par = estimate_ami(b.cs, b.ch, sigma, 20000, 7, 3);
  REQUIRE(par.i_total == est.i_total);
  REQUIRE_THROWS_AS(estimate_ami(b.cs, b.ch, sigma, 0, 1), std::invalid_argument);
}

TEST_CASE("spread constellation carries more information than the plain one") {
  const Bench sser = make_bench(GsmKind::SserGsm);
  const Bench con = make_bench(GsmKind::ConGsm);
  for (double osnr_db : {5.0, 6.0, 7.0, 8.0}) {
    const double sigma = osnr_to_sigma(sser.ch, 0.5, 4, osnr_db);
    const AmiEstimate a = estimate_ami(sser.cs, sser.ch, sigma, 20000, 3);
    const AmiEstimate c = estimate_ami(con.cs, con.ch, sigma, 20000, 3);
    REQUIRE(a.i_total > c.i_total);
  }
}

TEST_CASE("transfer probe with perfect priors is near-lossless at high osnr") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const double sigma = osnr_to_sigma(b.ch, 0.5, 4, 20.0);
  const TransferPoint tp = demapper_transfer(b.cs, b.ch, sigma, 1.0, 50000, 1);
  REQUIRE(tp.i_e_spd >= 0.99);
  REQUIRE(tp.i_e_sid >= 0.99);
}

TEST_CASE("transfer output rises with the prior quality") {
  const Bench b = make_bench(GsmKind::SserGsm, 0.3);
  const double sigma = osnr_to_sigma(b.ch, 2.0 / 3.0, 4, 9.0);
  double prev_spd = -1.0, prev_sid = -1.0;
  for (double ia : {0.0, 0.3, 0.6, 0.9}) {
    const TransferPoint tp = demapper_transfer(b.cs, b.ch, sigma, ia, 50000, 5);
    REQUIRE(tp.i_e_spd > prev_spd);
    REQUIRE(tp.i_e_sid > prev_sid);
    prev_spd = tp.i_e_spd;
    prev_sid = tp.i_e_sid;
  }
}

TEST_CASE("spread constellation dominates the transfer chart too") {
  const Bench sser = make_bench(GsmKind::SserGsm, 0.3);
  const Bench con = make_bench(GsmKind::ConGsm, 0.3);
  const double sigma = osnr_to_sigma(sser.ch, 2.0 / 3.0, 4, 9.0);
  const TransferPoint s = demapper_transfer(sser.cs, sser.ch, sigma, 0.0, 50000, 9);
  const TransferPoint c = demapper_transfer(con.cs, con.ch, sigma, 0.0, 50000, 9);
  REQUIRE(s.i_e_spd > c.i_e_spd + 0.1);
  REQUIRE(s.i_e_sid > c.i_e_sid + 0.01);
}

TEST_CASE("per-column priors reduce to the scalar probe when equal") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const double sigma = osnr_to_sigma(b.ch, 0.5, 4, 7.0);
  const TransferPoint scalar = demapper_transfer(b.cs, b.ch, sigma, 0.5, 50000, 11);
  const TransferPoint vec = demapper_transfer(
      b.cs, b.ch, sigma, std::vector<double>{0.5, 0.5, 0.5, 0.5}, 50000, 11);
  REQUIRE(vec.i_e_spd == Catch::Approx(scalar.i_e_spd).margin(0.02));
  REQUIRE(vec.i_e_sid == Catch::Approx(scalar.i_e_sid).margin(0.02));
  REQUIRE_THROWS_AS(demapper_transfer(b.cs, b.ch, sigma, std::vector<double>{}, 100, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(demapper_transfer(b.cs, b.ch, sigma, 0.5, 0, 1),
                    std::invalid_argument);
}

TEST_CASE("exit recursion separates clean from hopeless operating points") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const BaseMatrix base = make_eara(0);
  ExitOptions opt;
  opt.samples = 20000;
  REQUIRE(mpexit_converges(base, b.cs, b.ch, 30.0, 20, 4, opt));
  REQUIRE_FALSE(mpexit_converges(base, b.cs, b.ch, 0.0, 20, 4, opt));
  REQUIRE_THROWS_AS(mpexit_converges(base, b.cs, b.ch, 10.0, 0, 4, opt),
                    std::invalid_argument);
}

TEST_CASE("threshold search brackets must straddle the transition") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const BaseMatrix base = make_eara(0);
  ExitOptions opt;
  opt.samples = 20000;
  REQUIRE_THROWS_AS(find_threshold(base, b.cs, b.ch, 20, 4, 25.0, 35.0, opt),
                    std::runtime_error);
  REQUIRE_THROWS_AS(find_threshold(base, b.cs, b.ch, 20, 4, -8.0, 0.0, opt),
                    std::runtime_error);
  REQUIRE_THROWS_AS(find_threshold(base, b.cs, b.ch, 20, 4, 9.0, 4.0, opt),
                    std::invalid_argument);
}

TEST_CASE("threshold sits between the convergent and divergent regimes") {
  const Bench b = make_bench(GsmKind::SserGsm);
  const BaseMatrix base = make_eara(0);
  ExitOptions opt;
  opt.samples = 50000;
  const double th = find_threshold(base, b.cs, b.ch, 20, 4, 3.0, 12.0, opt);
  REQUIRE(th > 3.0);
  REQUIRE(th <= 12.0);
  ExitOptions fresh = opt;
  fresh.seed = 99;
  REQUIRE(mpexit_converges(base, b.cs, b.ch, th + 0.5, 20, 4, fresh));
  REQUIRE_FALSE(mpexit_converges(base, b.cs, b.ch, th - 1.0, 20, 4, fresh));
}

TEST_CASE("operation counts match the closed forms") {
  ComplexityInputs in;
  in.n = 10;
  in.m = 5;
  in.p = 1;
  in.gv = 3.0;
  in.gc = 7.0;
  in.t1 = 2.0;
  in.t2 = 3.0;
  in.rho = 4;
  in.n_tx = 4;
  in.n_rx = 4;
  const ComplexityEstimate est = estimate_complexity(in);
  REQUIRE(est.demap_ra == Catch::Approx(10422.0));
  REQUIRE(est.demap_rm == Catch::Approx(11232.0));
  REQUIRE(est.decode_ra == Catch::Approx(20.0));
  REQUIRE(est.decode_rm == Catch::Approx(280.0));
  REQUIRE(est.real_additions == Catch::Approx(10442.0));
  REQUIRE(est.real_multiplications == Catch::Approx(11512.0));

  // zero iterations cost nothing
  ComplexityInputs idle = in;
  idle.t1 = 0.0;
  idle.t2 = 0.0;
  const ComplexityEstimate zero = estimate_complexity(idle);
  REQUIRE(zero.real_additions == 0.0);
  REQUIRE(zero.real_multiplications == 0.0);

  // demapper cost scales with outer rounds, decoder cost with inner passes
  ComplexityInputs twice = in;
  twice.t2 = 6.0;
  const ComplexityEstimate d = estimate_complexity(twice);
  REQUIRE(d.demap_ra == Catch::Approx(2.0 * est.demap_ra));
  REQUIRE(d.decode_ra == Catch::Approx(est.decode_ra));

  ComplexityInputs bad = in;
  bad.n = 0;
  REQUIRE_THROWS_AS(estimate_complexity(bad), std::invalid_argument);
}
