#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vlcsim/analysis.hpp"
#include "vlcsim/config.hpp"
#include "vlcsim/link.hpp"

namespace {

using namespace vlcsim;

struct OutStream {
  std::ostream* os;
  std::unique_ptr<std::ofstream> file;

  explicit OutStream(const std::string& path) {
    if (path.empty() || path == "-") {
      os = &std::cout;
      return;
    }
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw std::runtime_error("cannot open output file: " + path);
    os = file.get();
  }
};

void run_table_dump(const ExperimentSpec& spec, std::ostream& os) {
  const GsmConstellation cs = build_constellation(spec.gsm, spec.kind);
  write_config_echo(os, spec);
  write_table_csv(cs, os);
}

void run_ber_sweep(const ExperimentSpec& spec, std::ostream& os) {
  const LinkSimulator sim(to_link_config(spec));
  write_config_echo(os, spec);
  os << "## derived.code_rate=" << fmt_double(sim.code_rate()) << "\n";
  os << "## columns: osnr_db,bits,bit_errors,frames,frame_errors,ber,fer,avg_T1,avg_T2\n";
  const std::vector<double> grid = spec.osnr.values();
  for (size_t i = 0; i < grid.size(); ++i) {
    const PointStats st =
        sim.run_point(grid[i], spec.stop, spec.workers, static_cast<int>(i));
    os << fmt_double(st.osnr_db) << ',' << st.info_bits << ',' << st.bit_errors << ','
       << st.frames << ',' << st.frame_errors << ',' << fmt_double(st.ber()) << ','
       << fmt_double(st.fer()) << ',' << fmt_double(st.t1()) << ','
       << fmt_double(st.t2()) << "\n";
    os.flush();
  }
}

void run_ami_sweep(const ExperimentSpec& spec, std::ostream& os) {
  const BaseMatrix base = make_family(spec.family, spec.e);
  const GsmConstellation cs = build_constellation(spec.gsm, spec.kind);
  Geometry geom = spec.geom;
  geom.n_tx = spec.gsm.n_tx;
  const ChannelModel ch = build_gain_matrix(geom, spec.gsm.avg_intensity);
  write_config_echo(os, spec);
  os << "## derived.code_rate=" << fmt_double(base.design_rate()) << "\n";
  os << "## columns: osnr_db,sigma,i_spd,i_sid,i_total,stderr,samples\n";
  const std::vector<double> grid = spec.osnr.values();
  for (size_t i = 0; i < grid.size(); ++i) {
    const double sigma = osnr_to_sigma(ch, base.design_rate(), cs.rho(), grid[i]);
    const AmiEstimate est =
        estimate_ami(cs, ch, sigma, spec.ami_samples,
                     derive_seed(spec.seed, streams::ami, static_cast<std::uint64_t>(i)),
                     spec.workers);
    os << fmt_double(grid[i]) << ',' << fmt_double(sigma) << ',' << fmt_double(est.i_spd)
       << ',' << fmt_double(est.i_sid) << ',' << fmt_double(est.i_total) << ','
       << fmt_double(est.stderr_total) << ',' << est.samples << "\n";
    os.flush();
  }
}

void run_exit_transfer(const ExperimentSpec& spec, std::ostream& os) {
  const BaseMatrix base = make_family(spec.family, spec.e);
  const GsmConstellation cs = build_constellation(spec.gsm, spec.kind);
  Geometry geom = spec.geom;
  geom.n_tx = spec.gsm.n_tx;
  const ChannelModel ch = build_gain_matrix(geom, spec.gsm.avg_intensity);
  write_config_echo(os, spec);
  os << "## derived.code_rate=" << fmt_double(base.design_rate()) << "\n";
  os << "## columns: osnr_db,i_a,i_e_spd,i_e_sid,samples\n";
  const std::vector<double> grid = spec.osnr.values();
  std::uint64_t row = 0;
  for (const double osnr_db : grid) {
    const double sigma = osnr_to_sigma(ch, base.design_rate(), cs.rho(), osnr_db);
    const int ia_steps = static_cast<int>(std::floor(1.0 / spec.ia_step + 1e-9));
    for (int s = 0; s <= ia_steps; ++s) {
      const double ia_clamped = std::min(s * spec.ia_step, 1.0);
      const TransferPoint tp = demapper_transfer(
          cs, ch, sigma, ia_clamped, spec.samples,
          derive_seed(spec.seed, streams::transfer, row++), spec.workers, spec.algo);
      os << fmt_double(osnr_db) << ',' << fmt_double(ia_clamped) << ','
         << fmt_double(tp.i_e_spd) << ',' << fmt_double(tp.i_e_sid) << ',' << tp.samples
         << "\n";
    }
    os.flush();
  }
}

void run_threshold(const ExperimentSpec& spec, std::ostream& os) {
  const BaseMatrix base = make_family(spec.family, spec.e);
  const GsmConstellation cs = build_constellation(spec.gsm, spec.kind);
  Geometry geom = spec.geom;
  geom.n_tx = spec.gsm.n_tx;
  const ChannelModel ch = build_gain_matrix(geom, spec.gsm.avg_intensity);
  ExitOptions opt;
  opt.samples = spec.samples;
  opt.seed = spec.seed;
  opt.workers = spec.workers;
  opt.algo = spec.algo;
  const double th =
      find_threshold(base, cs, ch, spec.g1, spec.g2, spec.osnr.lo, spec.osnr.hi, opt);
  write_config_echo(os, spec);
  os << "## columns: family,e,kind,d_tx,rho,g1,g2,osnr_lo,osnr_hi,threshold_db\n";
  os << spec.family << ',' << spec.e << ',' << to_string(spec.kind) << ','
     << fmt_double(spec.geom.d_tx) << ',' << cs.rho() << ',' << spec.g1 << ',' << spec.g2
     << ',' << fmt_double(spec.osnr.lo) << ',' << fmt_double(spec.osnr.hi) << ','
     << fmt_double(th) << "\n";
}

void run_complexity(const ExperimentSpec& spec, std::ostream& os) {
  const BaseMatrix base = make_family(spec.family, spec.e);
  ComplexityInputs in;
  in.n = static_cast<long long>(base.cols) * spec.z;
  in.m = static_cast<long long>(base.rows) * spec.z;
  in.p = static_cast<long long>(base.punctured.size()) * spec.z;
  in.gv = static_cast<double>(base.edge_count()) / base.cols;
  in.gc = static_cast<double>(base.edge_count()) / base.rows;
  in.t1 = spec.t1;
  in.t2 = spec.t2;
  in.rho = spec.gsm.rho();
  in.n_tx = spec.gsm.n_tx;
  in.n_rx = spec.geom.n_rx;
  const ComplexityEstimate est = estimate_complexity(in);
  write_config_echo(os, spec);
  os << "## columns: n,m,p,gv,gc,t1,t2,rho,demap_ra,demap_rm,decode_ra,decode_rm,ra,rm\n";
  os << in.n << ',' << in.m << ',' << in.p << ',' << fmt_double(in.gv) << ','
     << fmt_double(in.gc) << ',' << fmt_double(in.t1) << ',' << fmt_double(in.t2) << ','
     << in.rho << ',' << fmt_double(est.demap_ra) << ',' << fmt_double(est.demap_rm)
     << ',' << fmt_double(est.decode_ra) << ',' << fmt_double(est.decode_rm) << ','
     << fmt_double(est.real_additions) << ',' << fmt_double(est.real_multiplications)
     << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded GSM link simulator and code-design toolkit for LOS MIMO optical channels"};
  std::string mode_str, config_path, out_path = "-", osnr_str, alist_path;
  std::uint64_t seed = 0;
  int workers = 0, g1 = 0, g2 = -1;
  long long frames = 0;

  app.add_option("--mode", mode_str,
                 "ber-sweep|ami-sweep|exit-transfer|threshold|table-dump|complexity")
      ->required();
  app.add_option("--config", config_path, "INI-style experiment description");
  app.add_option("--out", out_path, "output CSV path, '-' for stdout");
  auto* o_seed = app.add_option("--seed", seed, "master seed override");
  auto* o_workers = app.add_option("--workers", workers, "worker thread count");
  auto* o_osnr = app.add_option("--osnr", osnr_str, "OSNR dB value or lo:hi:step");
  auto* o_frames = app.add_option("--frames", frames, "frame budget override");
  auto* o_g1 = app.add_option("--g1", g1, "max inner iterations");
  auto* o_g2 = app.add_option("--g2", g2, "max outer iterations");
  app.add_option("--alist", alist_path, "also write the lifted parity check in alist form");

  CLI11_PARSE(app, argc, argv);

  try {
    vlcsim::ExperimentSpec spec;
    if (!config_path.empty()) spec = vlcsim::parse_spec_file(config_path);
    spec.mode = vlcsim::mode_from_string(mode_str);
    if (o_seed->count()) spec.seed = seed;
    if (o_workers->count()) spec.workers = workers;
    if (o_osnr->count()) spec.osnr = vlcsim::parse_osnr(osnr_str);
    if (o_frames->count()) spec.stop.max_frames = frames;
    if (o_g1->count()) spec.g1 = g1;
    if (o_g2->count()) spec.g2 = g2;

    const auto issues = vlcsim::validate_spec(spec);
    if (!issues.empty()) throw vlcsim::ConfigError(issues);

    if (!alist_path.empty()) {
      const vlcsim::LiftedCode code =
          vlcsim::lift(vlcsim::make_family(spec.family, spec.e), spec.z, spec.lift_seed);
      std::ofstream af(alist_path);
      if (!af) throw std::runtime_error("cannot open output file: " + alist_path);
      vlcsim::write_alist(code, af);
    }

    OutStream out(out_path);
    switch (spec.mode) {
      case vlcsim::Mode::TableDump: run_table_dump(spec, *out.os); break;
      case vlcsim::Mode::BerSweep: run_ber_sweep(spec, *out.os); break;
      case vlcsim::Mode::AmiSweep: run_ami_sweep(spec, *out.os); break;
      case vlcsim::Mode::ExitTransfer: run_exit_transfer(spec, *out.os); break;
      case vlcsim::Mode::Threshold: run_threshold(spec, *out.os); break;
      case vlcsim::Mode::Complexity: run_complexity(spec, *out.os); break;
    }
    out.os->flush();
    if (out.file && !*out.file) throw std::runtime_error("write failed: " + out_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
