// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/types.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace rismec {

// ---------------------------------------------------------------------------
// number formatting / parsing helpers shared by config, CSV and manifests
// ---------------------------------------------------------------------------

/// Shortest decimal string that parses back to exactly `x`.
inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view text, std::string_view key) {
  std::string t = trim(text);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ConfigError("key '" + std::string(key) + "': cannot parse number '" + t + "'");
  return v;
}

inline long long parse_int(std::string_view text, std::string_view key) {
  double v = parse_double(text, key);
  if (v != std::floor(v))
    throw ConfigError("key '" + std::string(key) + "': expected an integer");
  return static_cast<long long>(v);
}

/// Parses `[a, b, c]` or a bare scalar (treated as a one-element list).
inline std::vector<double> parse_list(std::string_view text, std::string_view key) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError("key '" + std::string(key) + "': unterminated list");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<double> out;
  if (trim(t).empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  return out;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt_double(v[i]);
  }
  return s + "]";
}

using KeyValues = std::map<std::string, std::string>;

/// Reads `key = value` lines. `#` starts a comment; blank lines are skipped.
inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return kv;
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

enum class Fading { Rayleigh, Rician };

/// Rational energy-harvesting curve (a x + b)/(x + c) - b/c.
struct EhModel {
  double a = 2.463;
  double b = 1.635;
  double c = 0.826;
};

/// Every physical and algorithmic parameter of one network instance.
/// Per-device quantities are stored resolved to length K.
struct Scenario {
  int K = 4;
  int N = 20;
  double T = 1.0;
  double P_max = 1.0;
  double sigma2 = 1e-15;
  double zeta = 0.0316;
  double bandwidth = 1e5;
  double C_cpu = 1000.0;
  double f_max = 5e8;
  std::vector<double> eps;
  std::vector<double> eh_a, eh_b, eh_c;
  std::vector<double> P_circ_bc;
  std::vector<double> p_circ_at;
  double delta = 1.0;
  std::vector<double> Q;
  std::vector<double> gamma_min;

  // geometry (metres); an empty position vector means "not configured"
  std::vector<double> pb_pos{0.0, 0.0};
  std::vector<double> mec_pos{60.0, 0.0};
  std::vector<double> ris_pos{30.0, 10.0};
  std::vector<double> wd_center{30.0, 0.0};
  double wd_radius = 5.0;
  std::vector<double> wd_x, wd_y;  // explicit placement overrides the disc

  double upsilon_direct = 3.0;
  double upsilon_reflected = 2.2;
  Fading fading = Fading::Rayleigh;
  double rician_factor_db = 10.0;

  double penalty_delta = 5e5;
  double curvature_l = 2.5e-16;
  double alpha_step = 0.1;
  double p_ceiling = 100.0;  // guard for unbounded power when an energy dual vanishes

  EhModel eh(int k) const { return {eh_a[k], eh_b[k], eh_c[k]}; }

  static Scenario defaults(int K = 4) {
    Scenario s;
    s.K = K;
    s.fill_device_defaults();
    return s;
  }

  void fill_device_defaults() {
    auto n = static_cast<std::size_t>(K);
    eps.assign(n, 1e-26);
    eh_a.assign(n, 2.463);
    eh_b.assign(n, 1.635);
    eh_c.assign(n, 0.826);
    P_circ_bc.assign(n, 1e-4);
    p_circ_at.assign(n, 5e-3);
    gamma_min.assign(n, 2e4);
    Q.assign(n, 0.0);
    // first half of the devices start with 1 J of stored energy
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) Q[i] = 1.0;
  }

  void validate() const {
    auto need = [](bool ok, const std::string& msg) {
      if (!ok) throw ConfigError(msg);
    };
    need(K >= 1, "K must be >= 1");
    need(N >= 0, "N must be >= 0");
    need(T > 0 && P_max > 0 && sigma2 > 0 && bandwidth > 0, "T, P_max, sigma2, bandwidth must be > 0");
    need(zeta > 0 && zeta <= 1, "zeta must lie in (0, 1]");
    need(C_cpu > 0 && f_max >= 0 && delta > 0, "C_cpu, delta must be > 0 and f_max >= 0");
    need(p_ceiling > 0, "p_ceiling must be > 0");
    need(alpha_step > 0 && alpha_step <= 1, "alpha_step must lie in (0, 1]");
    auto sized = [&](const std::vector<double>& v, const char* name) {
      need(static_cast<int>(v.size()) == K, std::string(name) + " must have K entries");
    };
    sized(eps, "eps");
    sized(eh_a, "eh_a");
    sized(eh_b, "eh_b");
    sized(eh_c, "eh_c");
    sized(P_circ_bc, "P_circ_bc");
    sized(p_circ_at, "p_circ_at");
    sized(Q, "Q");
    sized(gamma_min, "gamma_min");
    for (int k = 0; k < K; ++k) {
      need(eh_a[k] * eh_c[k] > eh_b[k], "EH parameters must satisfy a*c > b");
      need(eh_c[k] > 0, "EH parameter c must be > 0");
      need(Q[k] >= 0, "Q must be >= 0");
      need(gamma_min[k] >= 0, "gamma_min must be >= 0");
      need(eps[k] > 0, "eps must be > 0");
      need(P_circ_bc[k] >= 0 && p_circ_at[k] >= 0, "circuit powers must be >= 0");
    }
    need(wd_x.size() == wd_y.size(), "wd_x and wd_y must have equal length");
    need(wd_x.empty() || static_cast<int>(wd_x.size()) == K, "wd_x/wd_y must have K entries");
  }

  /// Full, canonical key=value rendering (round-trips through from_key_values).
  KeyValues to_key_values() const {
    KeyValues kv;
    auto d = [](double x) { return fmt_double(x); };
    kv["K"] = std::to_string(K);
    kv["N"] = std::to_string(N);
    kv["T"] = d(T);
    kv["P_max"] = d(P_max);
    kv["sigma2"] = d(sigma2);
    kv["zeta"] = d(zeta);
    kv["bandwidth"] = d(bandwidth);
    kv["C_cpu"] = d(C_cpu);
    kv["f_max"] = d(f_max);
    kv["eps"] = fmt_list(eps);
    kv["eh_a"] = fmt_list(eh_a);
    kv["eh_b"] = fmt_list(eh_b);
    kv["eh_c"] = fmt_list(eh_c);
    kv["P_circ_bc"] = fmt_list(P_circ_bc);
    kv["p_circ_at"] = fmt_list(p_circ_at);
    kv["delta"] = d(delta);
    kv["Q"] = fmt_list(Q);
    kv["gamma_min"] = fmt_list(gamma_min);
    kv["pb_pos"] = fmt_list(pb_pos);
    kv["mec_pos"] = fmt_list(mec_pos);
    kv["ris_pos"] = fmt_list(ris_pos);
    kv["wd_center"] = fmt_list(wd_center);
    kv["wd_radius"] = d(wd_radius);
    kv["wd_x"] = fmt_list(wd_x);
    kv["wd_y"] = fmt_list(wd_y);
    kv["upsilon_direct"] = d(upsilon_direct);
    kv["upsilon_reflected"] = d(upsilon_reflected);
    kv["fading"] = fading == Fading::Rayleigh ? "rayleigh" : "rician";
    kv["rician_factor_db"] = d(rician_factor_db);
    kv["penalty_delta"] = d(penalty_delta);
    kv["curvature_l"] = d(curvature_l);
    kv["alpha_step"] = d(alpha_step);
    kv["p_ceiling"] = d(p_ceiling);
    return kv;
  }

  /// Builds a scenario from (possibly partial) key/values over the defaults.
  /// Per-device lists of length one broadcast to all K devices.
  static Scenario from_key_values(const KeyValues& kv) {
    static const char* known[] = {
        "K", "N", "T", "P_max", "sigma2", "zeta", "bandwidth", "C_cpu", "f_max", "eps", "eh_a",
        "eh_b", "eh_c", "P_circ_bc", "p_circ_at", "delta", "Q", "gamma_min", "pb_pos", "mec_pos",
        "ris_pos", "wd_center", "wd_radius", "wd_x", "wd_y", "upsilon_direct",
        "upsilon_reflected", "fading", "rician_factor_db", "penalty_delta", "curvature_l",
        "alpha_step", "p_ceiling"};
    for (const auto& [key, value] : kv) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) throw ConfigError("unknown scenario key '" + key + "'");
    }
    auto get = [&](const char* key) -> const std::string* {
      auto it = kv.find(key);
      return it == kv.end() ? nullptr : &it->second;
    };
    int K = 4;
    if (auto v = get("K")) K = static_cast<int>(parse_int(*v, "K"));
    if (K < 1) throw ConfigError("K must be >= 1");
    Scenario s = defaults(K);

    auto scalar = [&](const char* key, double& dst) {
      if (auto v = get(key)) dst = parse_double(*v, key);
    };
    auto device = [&](const char* key, std::vector<double>& dst) {
      auto v = get(key);
      if (!v) return;
      auto list = parse_list(*v, key);
      if (list.size() == 1) list.assign(static_cast<std::size_t>(K), list[0]);
      if (static_cast<int>(list.size()) != K)
        throw ConfigError(std::string("key '") + key + "' has " + std::to_string(list.size()) +
                          " entries, expected 1 or K=" + std::to_string(K));
      dst = std::move(list);
    };
    auto point = [&](const char* key, std::vector<double>& dst) {
      auto v = get(key);
      if (!v) return;
      auto list = parse_list(*v, key);
      if (!list.empty() && list.size() != 2)
        throw ConfigError(std::string("key '") + key + "' must be [x,y] or []");
      dst = std::move(list);
    };

    if (auto v = get("N")) s.N = static_cast<int>(parse_int(*v, "N"));
    scalar("T", s.T);
    scalar("P_max", s.P_max);
    scalar("sigma2", s.sigma2);
    scalar("zeta", s.zeta);
    scalar("bandwidth", s.bandwidth);
    scalar("C_cpu", s.C_cpu);
    scalar("f_max", s.f_max);
    device("eps", s.eps);
    device("eh_a", s.eh_a);
    device("eh_b", s.eh_b);
    device("eh_c", s.eh_c);
    device("P_circ_bc", s.P_circ_bc);
    device("p_circ_at", s.p_circ_at);
    scalar("delta", s.delta);
    device("Q", s.Q);
    device("gamma_min", s.gamma_min);
    point("pb_pos", s.pb_pos);
    point("mec_pos", s.mec_pos);
    point("ris_pos", s.ris_pos);
    point("wd_center", s.wd_center);
    scalar("wd_radius", s.wd_radius);
    if (auto v = get("wd_x")) s.wd_x = parse_list(*v, "wd_x");
    if (auto v = get("wd_y")) s.wd_y = parse_list(*v, "wd_y");
    scalar("upsilon_direct", s.upsilon_direct);
    scalar("upsilon_reflected", s.upsilon_reflected);
    if (auto v = get("fading")) {
      std::string f = trim(*v);
      if (f == "rayleigh") s.fading = Fading::Rayleigh;
      else if (f == "rician") s.fading = Fading::Rician;
      else throw ConfigError("fading must be 'rayleigh' or 'rician'");
    }
    scalar("rician_factor_db", s.rician_factor_db);
    scalar("penalty_delta", s.penalty_delta);
    scalar("curvature_l", s.curvature_l);
    scalar("alpha_step", s.alpha_step);
    scalar("p_ceiling", s.p_ceiling);
    s.validate();
    return s;
  }

  static Scenario from_stream(std::istream& in) { return from_key_values(parse_key_values(in)); }

  static Scenario from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    return from_stream(in);
  }

  static Scenario from_string(const std::string& text) {
    std::istringstream in(text);
    return from_stream(in);
  }

  /// Applies `key=value` overrides on top of this scenario. Changing K
  /// re-derives per-device defaults unless the overrides also set them.
  Scenario with_overrides(const KeyValues& overrides) const {
    KeyValues kv = to_key_values();
    if (overrides.count("K") && parse_int(overrides.at("K"), "K") != K) {
      for (const char* key : {"eps", "eh_a", "eh_b", "eh_c", "P_circ_bc", "p_circ_at", "Q",
                              "gamma_min", "wd_x", "wd_y"})
        kv.erase(key);
    }
    for (const auto& [k, v] : overrides) kv[k] = v;
    return from_key_values(kv);
  }

  Scenario with(const std::string& key, const std::string& value) const {
    return with_overrides({{key, value}});
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : to_key_values()) out += k + " = " + v + "\n";
    return out;
  }

  /// FNV-1a over the canonical text; identifies a scenario in manifests.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_text()) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    return h;
  }
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace rismec
