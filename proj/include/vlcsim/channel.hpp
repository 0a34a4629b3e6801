#pragma once

#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "gsm.hpp"
#include "rng.hpp"

namespace vlcsim {

// Room and transceiver geometry. LEDs hang face-down at tx_height, photo
// diodes face up at rx_height, both as centered 2x2 square arrays when
// n_tx = n_rx = 4 (grid side = ceil(sqrt(N))).
struct Geometry {
  double room_x{5.0}, room_y{5.0}, room_z{3.0};
  double d_tx{0.5};
  double d_rx{0.1};
  double tx_height{3.0};
  double rx_height{0.75};
  double semi_angle_deg{8.0};   // Phi_1/2
  double fov_deg{55.0};         // Psi_1/2
  double responsivity{0.434};   // A/W
  double area{7e-6};            // m^2
  int n_tx{4};
  int n_rx{4};

  void validate() const {
    if (!(room_x > 0 && room_y > 0 && room_z > 0)) throw std::invalid_argument("geometry: room dims must be positive");
    if (!(d_tx > 0 && d_rx > 0)) throw std::invalid_argument("geometry: grid spacings must be positive");
    if (!(semi_angle_deg > 0 && semi_angle_deg < 90)) throw std::invalid_argument("geometry: semi-angle outside (0,90)");
    if (!(fov_deg > 0 && fov_deg < 90)) throw std::invalid_argument("geometry: FOV outside (0,90)");
    if (!(responsivity > 0 && area > 0)) throw std::invalid_argument("geometry: responsivity and area must be positive");
    if (n_tx < 1 || n_rx < 1) throw std::invalid_argument("geometry: need at least one LED and one PD");
    if (!(tx_height > rx_height)) throw std::invalid_argument("geometry: LED plane must sit above the PD plane");
  }
};

struct Vec3 {
  double x, y, z;
};

// Positions of an axis-aligned square grid centered mid-room, lexicographic
// (x, then y) order.
inline std::vector<Vec3> grid_positions(int count, double spacing, double cx, double cy,
                                        double z) {
  int side = 1;
  while (side * side < count) ++side;
  std::vector<Vec3> out;
  out.reserve(static_cast<size_t>(count));
  const double half = (side - 1) / 2.0;
  for (int ix = 0; ix < side && static_cast<int>(out.size()) < count; ++ix)
    for (int iy = 0; iy < side && static_cast<int>(out.size()) < count; ++iy)
      out.push_back({cx + (ix - half) * spacing, cy + (iy - half) * spacing, z});
  return out;
}

inline double lambert_order(double semi_angle_deg) {
  const double c = std::cos(semi_angle_deg * M_PI / 180.0);
  return -std::log(2.0) / std::log(c);
}

struct ChannelModel {
  int n_rx{0}, n_tx{0};
  std::vector<double> h;        // row-major n_rx x n_tx
  double rx_power_per_intensity{0.0};  // (1/N_r) sum h_ij, scale by I for P_rx
  double avg_intensity{1.0};

  double at(int i, int j) const { return h[static_cast<size_t>(i) * n_tx + j]; }
  double rx_power() const { return rx_power_per_intensity * avg_intensity; }
};

// LOS Lambertian gains: h_ij = eps (eta+1) A cos^eta(phi) cos(psi) / (2 pi d^2)
// inside the FOV, zero outside. Emitter and detector normals are vertical.
inline ChannelModel build_gain_matrix(const Geometry& g, double avg_intensity = 1.0) {
  g.validate();
  const double eta = lambert_order(g.semi_angle_deg);
  const double cx = g.room_x / 2.0, cy = g.room_y / 2.0;
  const auto leds = grid_positions(g.n_tx, g.d_tx, cx, cy, g.tx_height);
  const auto pds = grid_positions(g.n_rx, g.d_rx, cx, cy, g.rx_height);
  const double fov_cos = std::cos(g.fov_deg * M_PI / 180.0);

  ChannelModel ch;
  ch.n_rx = g.n_rx;
  ch.n_tx = g.n_tx;
  ch.avg_intensity = avg_intensity;
  ch.h.assign(static_cast<size_t>(g.n_rx) * g.n_tx, 0.0);
  double sum = 0.0;
  for (int i = 0; i < g.n_rx; ++i)
    for (int j = 0; j < g.n_tx; ++j) {
      const double dx = pds[i].x - leds[j].x;
      const double dy = pds[i].y - leds[j].y;
      const double dz = pds[i].z - leds[j].z;
      const double d2 = dx * dx + dy * dy + dz * dz;
      const double d = std::sqrt(d2);
      const double cos_phi = -dz / d;  // emission angle off the downward normal
      const double cos_psi = -dz / d;  // incidence angle off the upward normal
      if (cos_psi < fov_cos) continue;
      const double gain = g.responsivity * (eta + 1.0) * g.area *
                          std::pow(cos_phi, eta) * cos_psi / (2.0 * M_PI * d2);
      ch.h[static_cast<size_t>(i) * g.n_tx + j] = gain;
      sum += gain;
    }
  ch.rx_power_per_intensity = sum / g.n_rx;
  return ch;
}

// OSNR = P_rx / (sqrt(2 R rho) sigma) with P_rx = (1/N_r) sum h_ij I, I = I_a.
inline double osnr_to_sigma(const ChannelModel& ch, double code_rate, int rho,
                            double osnr_db) {
  if (!(code_rate > 0.0 && code_rate <= 1.0)) throw std::invalid_argument("osnr: rate outside (0,1]");
  if (rho < 1) throw std::invalid_argument("osnr: rho must be >= 1");
  const double osnr = std::pow(10.0, osnr_db / 10.0);
  return ch.rx_power() / (std::sqrt(2.0 * code_rate * rho) * osnr);
}

inline void transmit(const ChannelModel& ch, std::span<const double> x, double sigma,
                     Rng& rng, std::span<double> y) {
  for (int i = 0; i < ch.n_rx; ++i) {
    double acc = 0.0;
    for (int j = 0; j < ch.n_tx; ++j) acc += ch.at(i, j) * x[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] = acc + sigma * rng.next_gaussian();
  }
}

inline void write_h_csv(const ChannelModel& ch, std::ostream& os) {
  os << "## gain matrix, rows=PD, cols=LED\n";
  for (int i = 0; i < ch.n_rx; ++i)
    for (int j = 0; j < ch.n_tx; ++j)
      os << ch.at(i, j) << (j + 1 < ch.n_tx ? "," : "\n");
}

}  // namespace vlcsim
