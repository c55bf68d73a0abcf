// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/scenario.hpp"
#include "rismec/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace rismec {

// ---------------------------------------------------------------------------
// random streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent generator for (seed, link, index). Each link of each device
/// owns its own stream, so adding devices or elements never shifts the
/// draws of the links that already existed.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t link, std::uint64_t index) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (link * 0x632be59bd9b4e019ull));
  s = splitmix64(s ^ (index * 0x85157af5ull + 0x1234567ull));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

enum class Link : std::uint64_t {
  PbToDevice = 1,
  DeviceToMec = 2,
  PbToRis = 3,
  RisToMec = 4,
  RisToDevice = 5,
  DeviceToRis = 6,
  Placement = 7,
  RandomPhase = 8,
};

// ---------------------------------------------------------------------------
// large- and small-scale fading
// ---------------------------------------------------------------------------

/// Power gain d^(-upsilon) of the distance-dependent path loss.
inline double path_loss(double d, double upsilon) {
  if (!(d > 0)) throw DomainError("path_loss: distance must be positive");
  return std::pow(d, -upsilon);
}

struct FadingKind {
  Fading kind = Fading::Rayleigh;
  double factor_db = 10.0;  // Rician K-factor; ignored for Rayleigh

  double factor_linear() const { return std::pow(10.0, factor_db / 10.0); }
};

/// Unit-power small-scale coefficients. For Rician fading the deterministic
/// component is `los` (all ones when empty), scaled so that E|x|^2 = 1.
inline CVec draw_small_scale(const FadingKind& kind, int n, std::mt19937_64& rng,
                             const CVec& los = CVec()) {
  if (n < 0) throw DomainError("draw_small_scale: negative count");
  CVec out(n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    double re = gauss(rng);
    double im = gauss(rng);
    out[i] = cplx(re, im) * inv_sqrt2;
  }
  if (kind.kind == Fading::Rician && n > 0) {
    double kf = kind.factor_linear();
    double w_los = std::sqrt(kf / (kf + 1.0));
    double w_nlos = std::sqrt(1.0 / (kf + 1.0));
    for (int i = 0; i < n; ++i) {
      cplx l = los.size() == n ? los[i] : cplx(1.0, 0.0);
      out[i] = w_los * l + w_nlos * out[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// channels and phase shifts
// ---------------------------------------------------------------------------

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Every complex channel coefficient for one network realization.
struct ChannelSet {
  std::vector<cplx> g_PU;  // PB -> device, direct
  CVec g_PI;               // PB -> RIS
  std::vector<CVec> g_IU;  // RIS -> device
  std::vector<cplx> h_UM;  // device -> MEC, direct
  std::vector<CVec> h_UI;  // device -> RIS
  CVec h_IM;               // RIS -> MEC
  std::vector<Point> devices;

  int K() const { return static_cast<int>(g_PU.size()); }
  int N() const { return static_cast<int>(g_PI.size()); }

  /// Copy with every RIS-segment coefficient set to zero (reflector absent).
  ChannelSet without_ris() const {
    ChannelSet c = *this;
    c.g_PI.setZero();
    c.h_IM.setZero();
    for (auto& v : c.g_IU) v.setZero();
    for (auto& v : c.h_UI) v.setZero();
    return c;
  }
};

/// Unit-modulus RIS reflection vector.
class PhaseShifts {
 public:
  PhaseShifts() = default;
  explicit PhaseShifts(CVec theta) : theta_(std::move(theta)) {
    for (Eigen::Index n = 0; n < theta_.size(); ++n)
      if (std::abs(std::abs(theta_[n]) - 1.0) > 1e-9)
        throw DomainError("PhaseShifts: entry " + std::to_string(n) + " is not unit modulus");
  }

  static PhaseShifts from_angles(const Vec& angles) {
    CVec t(angles.size());
    for (Eigen::Index n = 0; n < angles.size(); ++n) t[n] = std::polar(1.0, angles[n]);
    return PhaseShifts(std::move(t));
  }

  static PhaseShifts zeros(int N) { return PhaseShifts(CVec::Ones(N)); }

  const CVec& theta() const { return theta_; }
  int size() const { return static_cast<int>(theta_.size()); }

 private:
  CVec theta_;
};

/// Device placement: explicit coordinates when configured, otherwise uniform
/// in the disc around `wd_center`.
inline std::vector<Point> place_devices(const Scenario& sc, std::uint64_t seed) {
  std::vector<Point> pts(static_cast<std::size_t>(sc.K));
  if (!sc.wd_x.empty()) {
    for (int k = 0; k < sc.K; ++k) pts[k] = {sc.wd_x[k], sc.wd_y[k]};
    return pts;
  }
  if (sc.wd_center.size() != 2) throw ConfigError("geometry: wd_center or wd_x/wd_y required");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < sc.K; ++k) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(Link::Placement), k);
    double ang = 2.0 * std::numbers::pi * uni(rng);
    double rad = sc.wd_radius * std::sqrt(uni(rng));
    pts[k] = {sc.wd_center[0] + rad * std::cos(ang), sc.wd_center[1] + rad * std::sin(ang)};
  }
  return pts;
}

/// Half-wavelength linear array response along the x axis, seen from `from`.
inline CVec steering(int N, Point ris, Point from) {
  double phi = std::atan2(from.y - ris.y, from.x - ris.x);
  CVec a(N);
  for (int n = 0; n < N; ++n) a[n] = std::polar(1.0, std::numbers::pi * n * std::cos(phi));
  return a;
}

/// Draws one channel realization. Direct links use `upsilon_direct`, RIS
/// segments `upsilon_reflected`. With Rician fading the PB-RIS and RIS-MEC
/// links (fixed infrastructure) carry a line-of-sight component.
inline ChannelSet generate_channels(const Scenario& sc, std::uint64_t seed) {
  if (sc.pb_pos.size() != 2 || sc.mec_pos.size() != 2)
    throw ConfigError("geometry: pb_pos and mec_pos are required");
  if (sc.N > 0 && sc.ris_pos.size() != 2) throw ConfigError("geometry: ris_pos is required");
  const Point pb{sc.pb_pos[0], sc.pb_pos[1]};
  const Point mec{sc.mec_pos[0], sc.mec_pos[1]};
  const Point ris = sc.N > 0 ? Point{sc.ris_pos[0], sc.ris_pos[1]} : Point{};
  const FadingKind rayleigh{Fading::Rayleigh, 0.0};
  const FadingKind infra{sc.fading, sc.rician_factor_db};

  ChannelSet ch;
  ch.devices = place_devices(sc, seed);
  auto link_rng = [&](Link l, int idx) {
    return stream_rng(seed, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(idx));
  };
  auto amp = [](double d, double ups) { return std::sqrt(path_loss(d, ups)); };

  if (sc.N > 0) {
    auto r1 = link_rng(Link::PbToRis, 0);
    ch.g_PI = draw_small_scale(infra, sc.N, r1, steering(sc.N, ris, pb)) *
              amp(distance(pb, ris), sc.upsilon_reflected);
    auto r2 = link_rng(Link::RisToMec, 0);
    ch.h_IM = draw_small_scale(infra, sc.N, r2, steering(sc.N, ris, mec)) *
              amp(distance(ris, mec), sc.upsilon_reflected);
  } else {
    ch.g_PI = CVec(0);
    ch.h_IM = CVec(0);
  }
  for (int k = 0; k < sc.K; ++k) {
    const Point u = ch.devices[k];
    auto r_pu = link_rng(Link::PbToDevice, k);
    ch.g_PU.push_back(draw_small_scale(rayleigh, 1, r_pu)[0] *
                      amp(distance(pb, u), sc.upsilon_direct));
    auto r_um = link_rng(Link::DeviceToMec, k);
    ch.h_UM.push_back(draw_small_scale(rayleigh, 1, r_um)[0] *
                      amp(distance(u, mec), sc.upsilon_direct));
    if (sc.N > 0) {
      double d_ru = distance(ris, u);
      auto r_iu = link_rng(Link::RisToDevice, k);
      ch.g_IU.push_back(draw_small_scale(rayleigh, sc.N, r_iu) * amp(d_ru, sc.upsilon_reflected));
      auto r_ui = link_rng(Link::DeviceToRis, k);
      ch.h_UI.push_back(draw_small_scale(rayleigh, sc.N, r_ui) * amp(d_ru, sc.upsilon_reflected));
    } else {
      ch.g_IU.emplace_back(0);
      ch.h_UI.emplace_back(0);
    }
  }
  return ch;
}

/// Overall PB->device (g) and device->MEC (h) coefficients for one device.
struct CascadedGain {
  cplx g;
  cplx h;
};

inline std::vector<CascadedGain> cascaded_gains(const ChannelSet& ch, const PhaseShifts& ph) {
  if (ph.size() != ch.N()) throw DimensionError("cascaded_gains: theta length differs from N");
  const CVec& th = ph.theta();
  std::vector<CascadedGain> out;
  out.reserve(ch.g_PU.size());
  for (int k = 0; k < ch.K(); ++k) {
    if (ch.g_IU[k].size() != ch.N() || ch.h_UI[k].size() != ch.N())
      throw DimensionError("cascaded_gains: RIS vectors of inconsistent length");
    cplx g = ch.g_PU[k];
    cplx h = ch.h_UM[k];
    for (int n = 0; n < ch.N(); ++n) {
      g += std::conj(ch.g_PI[n]) * th[n] * ch.g_IU[k][n];
      h += std::conj(ch.h_UI[k][n]) * th[n] * ch.h_IM[n];
    }
    out.push_back({g, h});
  }
  return out;
}

/// Squared magnitudes |g_k|^2 and |h_k|^2 used by every rate/energy formula.
struct Gains {
  Vec g2;
  Vec h2;
};

inline Gains gain_powers(const ChannelSet& ch, const PhaseShifts& ph) {
  auto cg = cascaded_gains(ch, ph);
  Gains out{Vec(cg.size()), Vec(cg.size())};
  for (std::size_t k = 0; k < cg.size(); ++k) {
    out.g2[k] = std::norm(cg[k].g);
    out.h2[k] = std::norm(cg[k].h);
  }
  return out;
}

/// Phases that co-phase the PB->RIS->device cascade of device `k` with its
/// direct PB->device link.
inline PhaseShifts align_phases(const ChannelSet& ch, int k) {
  CVec t(ch.N());
  double ref = std::arg(ch.g_PU[k]);
  for (int n = 0; n < ch.N(); ++n) {
    cplx v = std::conj(ch.g_PI[n]) * ch.g_IU[k][n];
    t[n] = std::abs(v) > 0 ? std::polar(1.0, ref - std::arg(v)) : cplx(1.0, 0.0);
  }
  return PhaseShifts(std::move(t));
}

inline PhaseShifts random_phases(int N, std::uint64_t seed) {
  auto rng = stream_rng(seed, static_cast<std::uint64_t>(Link::RandomPhase), 0);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
  Vec a(N);
  for (int n = 0; n < N; ++n) a[n] = uni(rng);
  return PhaseShifts::from_angles(a);
}

}  // namespace rismec
