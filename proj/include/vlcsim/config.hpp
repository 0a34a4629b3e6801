#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "vlcsim/analysis.hpp"
#include "vlcsim/link.hpp"

namespace vlcsim {

// Shortest representation that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

enum class Mode { BerSweep, AmiSweep, ExitTransfer, Threshold, TableDump, Complexity };

inline Mode mode_from_string(const std::string& s) {
  if (s == "ber-sweep") return Mode::BerSweep;
  if (s == "ami-sweep") return Mode::AmiSweep;
  if (s == "exit-transfer") return Mode::ExitTransfer;
  if (s == "threshold") return Mode::Threshold;
  if (s == "table-dump") return Mode::TableDump;
  if (s == "complexity") return Mode::Complexity;
  throw std::invalid_argument(
      "unknown mode: " + s +
      " (expected ber-sweep|ami-sweep|exit-transfer|threshold|table-dump|complexity)");
}

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::BerSweep: return "ber-sweep";
    case Mode::AmiSweep: return "ami-sweep";
    case Mode::ExitTransfer: return "exit-transfer";
    case Mode::Threshold: return "threshold";
    case Mode::TableDump: return "table-dump";
    case Mode::Complexity: return "complexity";
  }
  return "?";
}

struct OsnrGrid {
  double lo{0.0}, hi{0.0}, step{0.0};
  bool set{false};

  std::vector<double> values() const {
    std::vector<double> v;
    if (!set) return v;
    if (step <= 0.0) {
      v.push_back(lo);
      return v;
    }
    for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
    return v;
  }

  std::string str() const {
    if (step <= 0.0) return fmt_double(lo);
    return fmt_double(lo) + ":" + fmt_double(hi) + ":" + fmt_double(step);
  }
};

// "v" or "lo:hi:step"
inline OsnrGrid parse_osnr(const std::string& text) {
  OsnrGrid g;
  g.set = true;
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    g.lo = g.hi = std::stod(text);
    g.step = 0.0;
    return g;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw std::invalid_argument("osnr range must be 'v' or 'lo:hi:step': " + text);
  g.lo = std::stod(text.substr(0, c1));
  g.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  g.step = std::stod(text.substr(c2 + 1));
  if (!(g.step > 0.0) || !(g.lo < g.hi))
    throw std::invalid_argument("osnr range needs lo < hi and step > 0: " + text);
  return g;
}

struct ExperimentSpec {
  Mode mode{Mode::TableDump};

  std::string family{"eara"};
  int e{1};
  int z{900};
  std::uint64_t lift_seed{1};
  long long info_len{-1};  // optional cross-check

  GsmConfig gsm;
  GsmKind kind{GsmKind::SserGsm};
  Geometry geom;

  int g1{20};
  int g2{4};
  DemapAlgo algo{DemapAlgo::MaxLog};
  std::uint64_t seed{1};
  StopRule stop;
  OsnrGrid osnr;

  long long samples{200000};      // transfer-probe sample count
  long long ami_samples{100000};
  double ia_step{0.1};
  double t1{0.0}, t2{0.0};        // measured iteration averages for complexity mode

  int workers{1};
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::vector<std::string>& issues)
      : std::runtime_error(join(issues)) {}
  static std::string join(const std::vector<std::string>& issues) {
    std::string s = "invalid configuration:";
    for (const auto& i : issues) s += "\n  - " + i;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

struct RawItem {
  std::string section, key, value;
  int line;
};

inline std::vector<RawItem> parse_ini(std::istream& in) {
  std::vector<RawItem> items;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header: " + t);
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value: " + t);
    items.push_back({section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno});
  }
  return items;
}

template <typename T>
bool parse_num(const std::string& s, T& out) {
  try {
    size_t pos = 0;
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(s, &pos);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      out = std::stoull(s, &pos, 0);
    } else if constexpr (std::is_same_v<T, long long>) {
      out = std::stoll(s, &pos, 0);
    } else {
      long long v = std::stoll(s, &pos, 0);
      out = static_cast<T>(v);
      if (static_cast<long long>(out) != v) return false;
    }
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

// Applies "[section] key = value" items onto the spec. Unknown keys and
// malformed values are collected, not tolerated.
inline void apply_config_items(ExperimentSpec& spec,
                               const std::vector<detail::RawItem>& items,
                               std::vector<std::string>& issues) {
  auto bad_value = [&](const detail::RawItem& it) {
    issues.push_back("[" + it.section + "] " + it.key + ": cannot parse value '" +
                     it.value + "' (line " + std::to_string(it.line) + ")");
  };
  for (const auto& it : items) {
    // sectionless dotted keys ("code.Z = 900") are accepted so a config echo
    // block parses back verbatim
    const std::string id = it.section.empty() ? it.key : it.section + "." + it.key;
    bool ok = true;
    if (id == "mode") {
      try {
        spec.mode = mode_from_string(it.value);
      } catch (const std::exception& ex) {
        issues.push_back(std::string(ex.what()) + " (line " + std::to_string(it.line) + ")");
      }
    } else if (id == "code.family") {
      spec.family = it.value;
    } else if (id == "code.e") {
      ok = detail::parse_num(it.value, spec.e);
    } else if (id == "code.Z") {
      ok = detail::parse_num(it.value, spec.z);
    } else if (id == "code.lift_seed") {
      ok = detail::parse_num(it.value, spec.lift_seed);
    } else if (id == "code.info_len") {
      ok = detail::parse_num(it.value, spec.info_len);
    } else if (id == "gsm.N_t") {
      ok = detail::parse_num(it.value, spec.gsm.n_tx);
    } else if (id == "gsm.N_a") {
      ok = detail::parse_num(it.value, spec.gsm.n_active);
    } else if (id == "gsm.M") {
      ok = detail::parse_num(it.value, spec.gsm.upam_order);
    } else if (id == "gsm.I_a") {
      ok = detail::parse_num(it.value, spec.gsm.avg_intensity);
    } else if (id == "gsm.kind") {
      try {
        spec.kind = gsm_kind_from_string(it.value);
      } catch (const std::exception& ex) {
        issues.push_back(std::string(ex.what()) + " (line " + std::to_string(it.line) + ")");
      }
    } else if (id == "channel.d_tx") {
      ok = detail::parse_num(it.value, spec.geom.d_tx);
    } else if (id == "channel.d_rx") {
      ok = detail::parse_num(it.value, spec.geom.d_rx);
    } else if (id == "channel.phi_half") {
      ok = detail::parse_num(it.value, spec.geom.semi_angle_deg);
    } else if (id == "channel.psi_half") {
      ok = detail::parse_num(it.value, spec.geom.fov_deg);
    } else if (id == "channel.epsilon") {
      ok = detail::parse_num(it.value, spec.geom.responsivity);
    } else if (id == "channel.area") {
      ok = detail::parse_num(it.value, spec.geom.area);
    } else if (id == "channel.N_r") {
      ok = detail::parse_num(it.value, spec.geom.n_rx);
    } else if (id == "channel.room_x") {
      ok = detail::parse_num(it.value, spec.geom.room_x);
    } else if (id == "channel.room_y") {
      ok = detail::parse_num(it.value, spec.geom.room_y);
    } else if (id == "channel.room_z") {
      ok = detail::parse_num(it.value, spec.geom.room_z);
    } else if (id == "channel.tx_height") {
      ok = detail::parse_num(it.value, spec.geom.tx_height);
    } else if (id == "channel.rx_height") {
      ok = detail::parse_num(it.value, spec.geom.rx_height);
    } else if (id == "link.g1") {
      ok = detail::parse_num(it.value, spec.g1);
    } else if (id == "link.g2") {
      ok = detail::parse_num(it.value, spec.g2);
    } else if (id == "link.algo") {
      if (it.value == "maxlog") {
        spec.algo = DemapAlgo::MaxLog;
      } else if (it.value == "logmap") {
        spec.algo = DemapAlgo::LogMap;
      } else {
        issues.push_back("[link] algo: expected maxlog|logmap, got '" + it.value + "'");
      }
    } else if (id == "link.seed") {
      ok = detail::parse_num(it.value, spec.seed);
    } else if (id == "link.frames") {
      ok = detail::parse_num(it.value, spec.stop.max_frames);
    } else if (id == "link.max_bits") {
      ok = detail::parse_num(it.value, spec.stop.max_info_bits);
    } else if (id == "link.target_frame_errors") {
      ok = detail::parse_num(it.value, spec.stop.target_frame_errors);
    } else if (id == "link.osnr") {
      try {
        spec.osnr = parse_osnr(it.value);
      } catch (const std::exception& ex) {
        issues.push_back(std::string(ex.what()) + " (line " + std::to_string(it.line) + ")");
      }
    } else if (id == "analysis.samples") {
      ok = detail::parse_num(it.value, spec.samples);
    } else if (id == "analysis.ami_samples") {
      ok = detail::parse_num(it.value, spec.ami_samples);
    } else if (id == "analysis.ia_step") {
      ok = detail::parse_num(it.value, spec.ia_step);
    } else if (id == "analysis.t1") {
      ok = detail::parse_num(it.value, spec.t1);
    } else if (id == "analysis.t2") {
      ok = detail::parse_num(it.value, spec.t2);
    } else {
      issues.push_back("unknown config key '" + it.key + "' in section [" + it.section +
                       "] (line " + std::to_string(it.line) + ")");
      continue;
    }
    if (!ok) bad_value(it);
  }
}

// Static checks; returns the list of violations (empty = valid for the mode).
inline std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> issues;
  try {
    spec.gsm.validate();
  } catch (const std::exception& ex) {
    issues.emplace_back(ex.what());
  }
  try {
    spec.geom.validate();
  } catch (const std::exception& ex) {
    issues.emplace_back(ex.what());
  }
  if (spec.gsm.n_tx != spec.geom.n_tx && spec.geom.n_tx != 0)
    issues.push_back("gsm N_t = " + std::to_string(spec.gsm.n_tx) +
                     " disagrees with geometry LED count " + std::to_string(spec.geom.n_tx));
  if (spec.workers < 1) issues.push_back("workers must be >= 1");

  // Every mode except table-dump needs the code section, if only for the rate
  // inside the OSNR definition. Only ber-sweep actually lifts.
  if (spec.mode != Mode::TableDump) {
    try {
      const BaseMatrix base = make_family(spec.family, spec.e);
      const bool sized = spec.mode == Mode::BerSweep || spec.mode == Mode::Complexity;
      if (sized && spec.z < 1) issues.push_back("Z must be >= 1");
      if (sized && spec.z >= 1) {
        const long long info = static_cast<long long>(base.cols - base.rows) * spec.z;
        if (spec.info_len >= 0 && info != spec.info_len)
          issues.push_back("info_len = " + std::to_string(spec.info_len) +
                           " but family '" + spec.family + "' e=" + std::to_string(spec.e) +
                           " Z=" + std::to_string(spec.z) + " gives " + std::to_string(info));
      }
      if (spec.mode == Mode::BerSweep && spec.z >= 1) {
        if (base.max_entry() > 1 && spec.z % 4 != 0)
          issues.push_back("Z = " + std::to_string(spec.z) +
                           " must be divisible by 4 (base matrix has parallel edges)");
        const long long transmitted =
            static_cast<long long>(base.transmitted_cols()) * spec.z;
        const int rho = spec.gsm.rho();
        if (rho > 0 && transmitted % rho != 0)
          issues.push_back("transmitted length " + std::to_string(transmitted) +
                           " is not divisible by rho = " + std::to_string(rho));
      }
    } catch (const std::exception& ex) {
      issues.emplace_back(ex.what());
    }
  }

  const bool needs_osnr = spec.mode == Mode::BerSweep || spec.mode == Mode::AmiSweep ||
                          spec.mode == Mode::ExitTransfer || spec.mode == Mode::Threshold;
  if (needs_osnr && !spec.osnr.set)
    issues.push_back("mode " + std::string(to_string(spec.mode)) +
                     " requires an OSNR value or range (link.osnr or --osnr)");
  if (spec.mode == Mode::Threshold && spec.osnr.set && !(spec.osnr.lo < spec.osnr.hi))
    issues.push_back("threshold mode needs an OSNR bracket with lo < hi");
  if (spec.mode == Mode::BerSweep && spec.stop.max_frames < 1)
    issues.push_back("frame budget must be >= 1");
  if (spec.mode == Mode::Complexity) {
    if (!(spec.t1 > 0.0)) issues.push_back("complexity mode needs analysis.t1 > 0");
    if (!(spec.t2 > 0.0)) issues.push_back("complexity mode needs analysis.t2 > 0");
  }
  if (spec.g1 < 1) issues.push_back("g1 must be >= 1");
  if (spec.g2 < 0) issues.push_back("g2 must be >= 0");
  if (spec.samples < 1) issues.push_back("analysis.samples must be >= 1");
  if (spec.ami_samples < 1) issues.push_back("analysis.ami_samples must be >= 1");
  if (spec.mode == Mode::ExitTransfer && !(spec.ia_step > 0.0 && spec.ia_step <= 1.0))
    issues.push_back("analysis.ia_step must be in (0, 1]");
  return issues;
}

inline ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::vector<std::string> issues;
  apply_config_items(spec, detail::parse_ini(in), issues);
  if (!issues.empty()) throw ConfigError(issues);
  return spec;
}

inline ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_spec(in);
}

inline LinkConfig to_link_config(const ExperimentSpec& spec) {
  LinkConfig cfg;
  cfg.base = make_family(spec.family, spec.e);
  cfg.z = spec.z;
  cfg.lift_seed = spec.lift_seed;
  cfg.gsm = spec.gsm;
  cfg.kind = spec.kind;
  cfg.geom = spec.geom;
  cfg.geom.n_tx = spec.gsm.n_tx;
  cfg.g1 = spec.g1;
  cfg.g2 = spec.g2;
  cfg.algo = spec.algo;
  cfg.seed = spec.seed;
  return cfg;
}

// Round-trippable provenance block: '# section.key=value' lines that
// apply_config_items accepts back after stripping the '# ' prefix.
inline void write_config_echo(std::ostream& os, const ExperimentSpec& spec) {
  os << "# mode=" << to_string(spec.mode) << "\n";
  os << "# code.family=" << spec.family << "\n";
  os << "# code.e=" << spec.e << "\n";
  os << "# code.Z=" << spec.z << "\n";
  os << "# code.lift_seed=" << spec.lift_seed << "\n";
  if (spec.info_len >= 0) os << "# code.info_len=" << spec.info_len << "\n";
  os << "# gsm.N_t=" << spec.gsm.n_tx << "\n";
  os << "# gsm.N_a=" << spec.gsm.n_active << "\n";
  os << "# gsm.M=" << spec.gsm.upam_order << "\n";
  os << "# gsm.I_a=" << fmt_double(spec.gsm.avg_intensity) << "\n";
  os << "# gsm.kind=" << to_string(spec.kind) << "\n";
  os << "# channel.d_tx=" << fmt_double(spec.geom.d_tx) << "\n";
  os << "# channel.d_rx=" << fmt_double(spec.geom.d_rx) << "\n";
  os << "# channel.phi_half=" << fmt_double(spec.geom.semi_angle_deg) << "\n";
  os << "# channel.psi_half=" << fmt_double(spec.geom.fov_deg) << "\n";
  os << "# channel.epsilon=" << fmt_double(spec.geom.responsivity) << "\n";
  os << "# channel.area=" << fmt_double(spec.geom.area) << "\n";
  os << "# channel.N_r=" << spec.geom.n_rx << "\n";
  os << "# channel.room_x=" << fmt_double(spec.geom.room_x) << "\n";
  os << "# channel.room_y=" << fmt_double(spec.geom.room_y) << "\n";
  os << "# channel.room_z=" << fmt_double(spec.geom.room_z) << "\n";
  os << "# channel.tx_height=" << fmt_double(spec.geom.tx_height) << "\n";
  os << "# channel.rx_height=" << fmt_double(spec.geom.rx_height) << "\n";
  os << "# link.g1=" << spec.g1 << "\n";
  os << "# link.g2=" << spec.g2 << "\n";
  os << "# link.algo=" << (spec.algo == DemapAlgo::MaxLog ? "maxlog" : "logmap") << "\n";
  os << "# link.seed=" << spec.seed << "\n";
  os << "# link.frames=" << spec.stop.max_frames << "\n";
  os << "# link.max_bits=" << spec.stop.max_info_bits << "\n";
  os << "# link.target_frame_errors=" << spec.stop.target_frame_errors << "\n";
  if (spec.osnr.set) os << "# link.osnr=" << spec.osnr.str() << "\n";
  os << "# analysis.samples=" << spec.samples << "\n";
  os << "# analysis.ami_samples=" << spec.ami_samples << "\n";
  os << "# analysis.ia_step=" << fmt_double(spec.ia_step) << "\n";
  if (spec.t1 > 0.0) os << "# analysis.t1=" << fmt_double(spec.t1) << "\n";
  if (spec.t2 > 0.0) os << "# analysis.t2=" << fmt_double(spec.t2) << "\n";
}

}  // namespace vlcsim
