#pragma once

// Environment law, its exact moments, and the seed-keyed lazy realization of
// an i.i.d. planar environment in which every step climbs 1..K levels.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

namespace rwre {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;

struct Site {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend auto operator<=>(const Site&, const Site&) = default;
};

struct Step {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Step&, const Step&) = default;
};

/// The (2K+1)*K admissible steps {-K..K} x {1..K}, ordered by dy then dx.
class StepSet {
 public:
  explicit StepSet(int K);

  int K() const noexcept { return K_; }
  std::size_t size() const noexcept { return steps_.size(); }
  const std::vector<Step>& steps() const noexcept { return steps_; }
  const Step& operator[](std::size_t i) const { return steps_[i]; }
  std::size_t index_of(Step s) const;

  friend bool operator==(const StepSet& a, const StepSet& b) { return a.K_ == b.K_; }

 private:
  int K_;
  std::vector<Step> steps_;
};

struct FiniteMixture {
  std::vector<std::vector<double>> rows;
  std::vector<double> weights;
  friend bool operator==(const FiniteMixture&, const FiniteMixture&) = default;
};

struct Dirichlet {
  std::vector<double> alpha;
  friend bool operator==(const Dirichlet&, const Dirichlet&) = default;
};

using Generator = std::variant<FiniteMixture, Dirichlet>;

struct EnvironmentLaw {
  StepSet stepset{1};
  Generator generator{Dirichlet{{1.0, 1.0, 1.0}}};
  double delta = 0.0;
  bool relax_ellipticity = false;

  /// Throws InvalidLaw for malformed laws and EllipticityViolation when the
  /// ellipticity bound fails without relax_ellipticity.
  void validate() const;

  bool is_dirichlet() const noexcept { return std::holds_alternative<Dirichlet>(generator); }

  friend bool operator==(const EnvironmentLaw&, const EnvironmentLaw&) = default;
};

// Reference laws used throughout the tests and the acceptance suite.
EnvironmentLaw dirichlet_law(int K, std::vector<double> alpha);  // relaxed (delta = 0)
EnvironmentLaw reference_law_k1();                               // K=1, Dirichlet(1,1,1)
EnvironmentLaw reference_law_k2();                               // K=2 elliptic mixture
EnvironmentLaw point_mass_law(int K, Step step);                 // relaxed, single row

struct EnvMoments {
  std::vector<double> m;  // E omega_{0,z}
  std::vector<double> J;  // E[omega_{0,w} omega_{0,z}], row-major |S| x |S|
  Vec2 meanDrift{};
  Mat2 secondMoment{};
  Mat2 gamma{};
  Vec2 wHat{};

  double J_at(std::size_t w, std::size_t z) const { return J[w * m.size() + z]; }
  /// wHat^T Gamma wHat.
  double gamma_quadratic_form() const;
  /// Eigenvalues of Gamma, ascending.
  Vec2 gamma_eigenvalues() const;
};

EnvMoments compute_moments(const EnvironmentLaw& law);

/// Lazily realized environment. row_at is a pure function of (law, seed, site).
class Environment {
 public:
  Environment(EnvironmentLaw law, std::uint64_t seed);

  const EnvironmentLaw& law() const noexcept { return law_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int K() const noexcept { return law_.stepset.K(); }
  std::size_t row_size() const noexcept { return law_.stepset.size(); }

  void row_at(Site site, std::span<double> out) const;
  std::vector<double> row_at(Site site) const;

 private:
  EnvironmentLaw law_;
  std::uint64_t seed_;
  std::vector<double> cumulativeWeights_;
};

/// Bounded per-worker memo of Environment rows. Not thread-safe; give each
/// worker its own instance. Returns exactly what Environment::row_at returns.
class RowCache {
 public:
  RowCache(const Environment& env, std::size_t capacity);

  std::span<const double> row_at(Site site);
  std::size_t size() const noexcept { return index_.size(); }

 private:
  struct SiteHash {
    std::size_t operator()(const Site& s) const noexcept;
  };
  const Environment* env_;
  std::size_t capacity_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
  std::vector<double> storage_;
};

/// Row source that returns the mean row m at every site; the averaged
/// single-walk law is the random walk with step law m.
class MeanRows {
 public:
  explicit MeanRows(const EnvironmentLaw& law);
  MeanRows(int K, std::vector<double> m);

  int K() const noexcept { return K_; }
  std::size_t row_size() const noexcept { return m_.size(); }
  void row_at(Site, std::span<double> out) const;

 private:
  int K_;
  std::vector<double> m_;
};

}  // namespace rwre
