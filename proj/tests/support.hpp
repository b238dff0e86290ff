#pragma once

// Fixture access and independent reference computations shared by the unit
// tests and the acceptance binary. Nothing here calls into the code under
// test except for plain data types.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace support {

inline std::string data(const std::string& name) { return std::string(USD_TEST_DATA) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream(path, std::ios::binary) << content;
}

/// Fresh scratch directory below the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("usd_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

// ---- oracles ---------------------------------------------------------------

struct Counts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Straight evaluation of "unassigned (1) iff sim < t".
inline Counts count_at(const std::vector<double>& sims, const std::vector<std::uint8_t>& labels, double t) {
  Counts c;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const bool pred = sims[i] < t;
    const bool pos = labels[i] == 1;
    if (pred && pos) ++c.tp;
    else if (pred) ++c.fp;
    else if (pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline double fbeta_of(const Counts& c, double beta) {
  if (c.tp + c.fp == 0 || c.tp + c.fn == 0) return 0.0;
  const double p = double(c.tp) / double(c.tp + c.fp);
  const double r = double(c.tp) / double(c.tp + c.fn);
  if (p == 0.0 && r == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1 + b2) * p * r / (b2 * p + r);
}

struct BruteBest {
  double threshold = 0.0;
  double score = -1.0;
  Counts counts;
};

/// Tries every grid point i/100 in increasing order, keeping the first best.
inline BruteBest brute_force_sweep(const std::vector<double>& sims, const std::vector<std::uint8_t>& labels,
                                   double beta) {
  BruteBest best;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const Counts c = count_at(sims, labels, t);
    const double f = fbeta_of(c, beta);
    if (f > best.score) best = {t, f, c};
  }
  return best;
}

/// 0 iff the gold set and the unmasked set intersect.
inline std::uint8_t intersection_label(const std::set<std::string>& gold, const std::set<std::string>& unmasked) {
  for (const auto& g : gold) {
    if (unmasked.count(g)) return 0;
  }
  return 1;
}

/// Nominal alpha by counting disagreeing ordered pairs directly:
///   D_o = sum_u (disagreeing pairs in u) / (m_u - 1) / n
///   D_e = sum_{c != k} n_c n_k / (n (n - 1))
inline std::optional<double> alpha_by_pairs(const std::vector<std::vector<int>>& units) {
  double n = 0, disagree = 0;
  std::map<int, double> nc;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    n += u.size();
    for (int v : u) nc[v] += 1;
    double d = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j && u[i] != u[j]) d += 1;
    disagree += d / double(u.size() - 1);
  }
  if (n == 0) return std::nullopt;
  double e = 0;
  for (auto [c, a] : nc)
    for (auto [k, b] : nc)
      if (c != k) e += a * b;
  if (e == 0) return 1.0;
  const double d_o = disagree / n;
  const double d_e = e / (n * (n - 1));
  return 1.0 - d_o / d_e;
}

}  // namespace support
