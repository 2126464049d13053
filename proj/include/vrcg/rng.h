#ifndef VRCG_RNG_H_
#define VRCG_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace vrcg {

// Seeded generator with distribution code written out here, so draws do not
// depend on the standard library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Mixes several values into one seed (splitmix64 finalizer).
  static std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n).
  int Index(int n) {
    return static_cast<int>(Uniform() * n) % n;
  }

  double Exponential() { return -std::log(1.0 - Uniform()); }

  // Flat Dirichlet sample of dimension n, normalized to sum 1.
  std::vector<double> Dirichlet(int n) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) {
      x = Exponential() + 1e-12;
      sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
  }

  // Index drawn proportionally to non-negative weights.
  int Weighted(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double t = Uniform() * total;
    for (size_t i = 0; i < w.size(); ++i) {
      if (t < w[i]) return static_cast<int>(i);
      t -= w[i];
    }
    return static_cast<int>(w.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vrcg

#endif  // VRCG_RNG_H_
