#pragma once

// Artifact writers: JSON records with a metadata block, CSV tables with a
// '#'-comment metadata header, and raw little-endian configuration dumps.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "htcg/concentration.hpp"
#include "htcg/equilibrium.hpp"
#include "htcg/error.hpp"
#include "htcg/fluctuations.hpp"
#include "htcg/gibbs.hpp"
#include "htcg/spectral.hpp"

namespace htcg {

inline constexpr const char* kVersion = "0.3.0";

struct Metadata {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;

  nlohmann::json to_json() const {
    nlohmann::json j{{"version", kVersion}, {"command", command}, {"config_hash", config_hash}, {"seed", seed}};
    for (const auto& [k, v] : extra) j[k] = v;
    return j;
  }
};

inline std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, mode);
  if (!f) throw Error("cannot open " + p.string() + " for writing");
  return f;
}

inline void write_json(const std::filesystem::path& p, nlohmann::json body, const Metadata& meta) {
  body["metadata"] = meta.to_json();
  auto f = open_out(p);
  f << body.dump(2) << '\n';
}

/// Rows of numbers under a header line; values printed with 17 significant digits.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& p, const std::vector<std::string>& columns, const Metadata& meta)
      : f_(open_out(p)) {
    f_ << "# version: " << kVersion << "\n# command: " << meta.command << "\n# config_hash: " << meta.config_hash
       << "\n# seed: " << meta.seed << '\n';
    for (const auto& [k, v] : meta.extra) f_ << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) f_ << (i ? "," : "") << columns[i];
    f_ << '\n';
    f_ << std::setprecision(17);
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) f_ << (i ? "," : "") << values[i];
    f_ << '\n';
  }

private:
  std::ofstream f_;
};

/// One row of N little-endian float64 per configuration.
inline void dump_configurations(const std::filesystem::path& p, const std::vector<Configuration>& xs) {
  auto f = open_out(p, std::ios::out | std::ios::binary);
  for (const auto& x : xs)
    for (double a : x.angles) {
      std::uint64_t u;
      std::memcpy(&u, &a, sizeof u);
      unsigned char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(u >> (8 * k));
      f.write(reinterpret_cast<const char*>(b), 8);
    }
}

inline std::vector<Configuration> read_configurations(const std::filesystem::path& p, int N) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error("cannot open " + p.string());
  std::vector<Configuration> xs;
  unsigned char b[8];
  Configuration cur;
  while (f.read(reinterpret_cast<char*>(b), 8)) {
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    double a;
    std::memcpy(&a, &u, sizeof a);
    cur.angles.push_back(a);
    if (static_cast<int>(cur.angles.size()) == N) {
      xs.push_back(std::move(cur));
      cur = Configuration{};
    }
  }
  if (!cur.angles.empty()) throw Error("configuration dump length is not a multiple of N");
  return xs;
}

inline nlohmann::json coeffs_json(const TrigSeries& f) {
  nlohmann::json a = nlohmann::json::array();
  for (const cplx& c : f.half()) a.push_back({c.real(), c.imag()});
  return a;
}

inline nlohmann::json to_json(const EquilibriumResult& eq) {
  return {{"beta", eq.beta},
          {"K", eq.density.max_mode()},
          {"M", eq.density.grid.size()},
          {"C_prime", eq.C_prime},
          {"C_beta", eq.C_beta()},
          {"residual_sup", eq.residual_sup},
          {"iterations", eq.iterations},
          {"free_energy", eq.free_energy_value},
          {"rho", std::vector<double>(eq.density.grid.values().begin(), eq.density.grid.values().end())},
          {"U_coeffs", coeffs_json(eq.U)}};
}

inline nlohmann::json to_json(const EigenSystem& es) {
  std::vector<double> k(es.kappas.data(), es.kappas.data() + es.kappas.size());
  return {{"kappas", k}, {"ortho_residual", es.ortho_residual}, {"K_op", es.K_op},
          {"index_convention", EigenSystem::index_convention}};
}

inline nlohmann::json to_json(const WeylFit& w) {
  return {{"alpha_hat", w.alpha_hat}, {"intercept", w.intercept}, {"ratio_spread", w.ratio_spread},
          {"j_min", w.j_min},         {"j_max", w.j_max},         {"index_convention", w.index_convention}};
}

inline nlohmann::json to_json(const Summary& s) {
  return {{"n", s.n},
          {"mean", s.mean},
          {"variance", s.variance},
          {"std_error", s.std_error},
          {"variance_se", s.variance_se},
          {"normality_p", s.normality_p}};
}

inline nlohmann::json to_json(const StatSeries& s) {
  return {{"name", s.name},   {"N", s.N},           {"beta", s.beta},
          {"seed_base", s.seed_base}, {"values", s.values}, {"summary", to_json(s.summary())},
          {"mean_acceptance", s.mean_acceptance}, {"warnings", s.warnings}};
}

}  // namespace htcg
