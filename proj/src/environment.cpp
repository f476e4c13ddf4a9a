#include "rwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rwre/error.hpp"
#include "rwre/rng.hpp"

namespace rwre {

namespace {

constexpr double kSumTol = 1e-12;
constexpr std::uint64_t kRowSalt = 0x5157u;

double sum_of(const std::vector<double>& v) {
  // Neumaier; rows are short but sums are compared at 1e-12.
  double s = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

StepSet::StepSet(int K) : K_(K) {
  if (K < 1) throw InvalidLaw("K must be a positive integer, got " + std::to_string(K));
  steps_.reserve(static_cast<std::size_t>((2 * K + 1) * K));
  for (int dy = 1; dy <= K; ++dy)
    for (int dx = -K; dx <= K; ++dx) steps_.push_back({dx, dy});
}

std::size_t StepSet::index_of(Step s) const {
  if (s.dy < 1 || s.dy > K_ || s.dx < -K_ || s.dx > K_)
    throw InvalidLaw("step outside the admissible set");
  return static_cast<std::size_t>((s.dy - 1) * (2 * K_ + 1) + (s.dx + K_));
}

void EnvironmentLaw::validate() const {
  const std::size_t S = stepset.size();
  if (!std::isfinite(delta) || delta < 0.0) throw InvalidLaw("delta must be finite and >= 0");
  if (delta * static_cast<double>(S) > 1.0 + kSumTol)
    throw InvalidLaw("delta too large: rows cannot have every entry >= delta");

  if (const auto* mix = std::get_if<FiniteMixture>(&generator)) {
    if (mix->rows.empty()) throw InvalidLaw("mixture needs at least one row");
    if (mix->weights.size() != mix->rows.size())
      throw InvalidLaw("mixture weights and rows differ in length");
    for (double w : mix->weights)
      if (!std::isfinite(w) || w < 0.0) throw InvalidLaw("mixture weights must be >= 0");
    if (std::abs(sum_of(mix->weights) - 1.0) > kSumTol)
      throw InvalidLaw("mixture weights must sum to 1");
    for (std::size_t r = 0; r < mix->rows.size(); ++r) {
      const auto& row = mix->rows[r];
      if (row.size() != S)
        throw InvalidLaw("mixture row " + std::to_string(r) + " has " +
                         std::to_string(row.size()) + " entries, expected " + std::to_string(S));
      for (double p : row)
        if (!std::isfinite(p) || p < 0.0) throw InvalidLaw("row entries must be >= 0");
      if (std::abs(sum_of(row) - 1.0) > kSumTol)
        throw InvalidLaw("mixture row " + std::to_string(r) + " does not sum to 1");
      if (*std::min_element(row.begin(), row.end()) < delta)
        throw EllipticityViolation("mixture row " + std::to_string(r) +
                                   " has an entry below delta");
    }
  } else {
    const auto& dir = std::get<Dirichlet>(generator);
    if (dir.alpha.size() != S)
      throw InvalidLaw("Dirichlet alpha has " + std::to_string(dir.alpha.size()) +
                       " entries, expected " + std::to_string(S));
    for (double a : dir.alpha)
      if (!std::isfinite(a) || a <= 0.0) throw InvalidLaw("Dirichlet alphas must be > 0");
    if (delta > 0.0)
      throw EllipticityViolation(
          "Dirichlet rows have no positive lower bound; use delta = 0 with relax_ellipticity");
  }

  if (!relax_ellipticity && delta <= 0.0)
    throw EllipticityViolation("ellipticity requires delta > 0 (set relax_ellipticity for test laws)");
}

EnvironmentLaw dirichlet_law(int K, std::vector<double> alpha) {
  EnvironmentLaw law;
  law.stepset = StepSet(K);
  law.generator = Dirichlet{std::move(alpha)};
  law.delta = 0.0;
  law.relax_ellipticity = true;
  law.validate();
  return law;
}

EnvironmentLaw reference_law_k1() { return dirichlet_law(1, {1.0, 1.0, 1.0}); }

EnvironmentLaw reference_law_k2() {
  EnvironmentLaw law;
  law.stepset = StepSet(2);
  FiniteMixture mix;
  mix.rows.push_back(std::vector<double>(10, 0.1));
  mix.rows.push_back({0.02, 0.04, 0.10, 0.20, 0.24, 0.02, 0.03, 0.15, 0.10, 0.10});
  mix.weights = {0.5, 0.5};
  law.generator = std::move(mix);
  law.delta = 0.02;
  law.relax_ellipticity = false;
  law.validate();
  return law;
}

EnvironmentLaw point_mass_law(int K, Step step) {
  EnvironmentLaw law;
  law.stepset = StepSet(K);
  std::vector<double> row(law.stepset.size(), 0.0);
  row[law.stepset.index_of(step)] = 1.0;
  law.generator = FiniteMixture{{row}, {1.0}};
  law.delta = 0.0;
  law.relax_ellipticity = true;
  law.validate();
  return law;
}

double EnvMoments::gamma_quadratic_form() const {
  double q = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) q += wHat[i] * gamma[i][j] * wHat[j];
  return q;
}

Vec2 EnvMoments::gamma_eigenvalues() const {
  const double a = gamma[0][0];
  const double d = gamma[1][1];
  const double b = 0.5 * (gamma[0][1] + gamma[1][0]);
  const double mid = 0.5 * (a + d);
  const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return {mid - rad, mid + rad};
}

EnvMoments compute_moments(const EnvironmentLaw& law) {
  law.validate();
  const auto& steps = law.stepset.steps();
  const std::size_t S = steps.size();
  EnvMoments mo;
  mo.m.assign(S, 0.0);
  mo.J.assign(S * S, 0.0);

  if (const auto* mix = std::get_if<FiniteMixture>(&law.generator)) {
    for (std::size_t r = 0; r < mix->rows.size(); ++r) {
      const double w = mix->weights[r];
      const auto& row = mix->rows[r];
      for (std::size_t a = 0; a < S; ++a) {
        mo.m[a] += w * row[a];
        for (std::size_t b = 0; b < S; ++b) mo.J[a * S + b] += w * row[a] * row[b];
      }
    }
  } else {
    const auto& alpha = std::get<Dirichlet>(law.generator).alpha;
    const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t a = 0; a < S; ++a) {
      mo.m[a] = alpha[a] / a0;
      for (std::size_t b = 0; b < S; ++b)
        mo.J[a * S + b] = alpha[a] * (alpha[b] + (a == b ? 1.0 : 0.0)) / (a0 * (a0 + 1.0));
    }
  }

  for (std::size_t a = 0; a < S; ++a) {
    mo.meanDrift[0] += mo.m[a] * steps[a].dx;
    mo.meanDrift[1] += mo.m[a] * steps[a].dy;
    for (std::size_t b = 0; b < S; ++b) {
      const double j = mo.J[a * S + b];
      const double za[2] = {double(steps[a].dx), double(steps[a].dy)};
      const double zb[2] = {double(steps[b].dx), double(steps[b].dy)};
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) mo.secondMoment[i][k] += j * za[i] * zb[k];
    }
  }
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      mo.gamma[i][k] = mo.secondMoment[i][k] - mo.meanDrift[i] * mo.meanDrift[k];

  if (!(mo.meanDrift[1] > 0.0)) throw InvalidLaw("E(D.e2) = 0: corrupt law");
  mo.wHat = {1.0, -mo.meanDrift[0] / mo.meanDrift[1]};
  return mo;
}

Environment::Environment(EnvironmentLaw law, std::uint64_t seed)
    : law_(std::move(law)), seed_(seed) {
  law_.validate();
  if (const auto* mix = std::get_if<FiniteMixture>(&law_.generator)) {
    cumulativeWeights_.resize(mix->weights.size());
    std::partial_sum(mix->weights.begin(), mix->weights.end(), cumulativeWeights_.begin());
  }
}

void Environment::row_at(Site site, std::span<double> out) const {
  CounterRng rng(stream_key(seed_, static_cast<std::uint64_t>(site.x),
                            static_cast<std::uint64_t>(site.y), kRowSalt));
  if (const auto* mix = std::get_if<FiniteMixture>(&law_.generator)) {
    std::size_t r = 0;
    if (mix->rows.size() > 1) {
      const double u = rng.uniform() * cumulativeWeights_.back();
      r = static_cast<std::size_t>(
          std::upper_bound(cumulativeWeights_.begin(), cumulativeWeights_.end(), u) -
          cumulativeWeights_.begin());
      r = std::min(r, mix->rows.size() - 1);
    }
    std::copy(mix->rows[r].begin(), mix->rows[r].end(), out.begin());
    return;
  }
  const auto& alpha = std::get<Dirichlet>(law_.generator).alpha;
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 1.0) {
      out[i] = -std::log(rng.uniform_open());
    } else {
      // Fresh distribution object per draw: libstdc++ gamma keeps a cached normal.
      std::gamma_distribution<double> gamma(alpha[i], 1.0);
      out[i] = gamma(rng);
    }
    total += out[i];
  }
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] /= total;
}

std::vector<double> Environment::row_at(Site site) const {
  std::vector<double> row(row_size());
  row_at(site, row);
  return row;
}

std::size_t RowCache::SiteHash::operator()(const Site& s) const noexcept {
  return static_cast<std::size_t>(
      mix64(static_cast<std::uint64_t>(s.x) * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(s.y)));
}

RowCache::RowCache(const Environment& env, std::size_t capacity)
    : env_(&env), capacity_(std::max<std::size_t>(capacity, 1)) {
  index_.reserve(capacity_);
  storage_.reserve(capacity_ * env.row_size());
}

std::span<const double> RowCache::row_at(Site site) {
  const std::size_t S = env_->row_size();
  if (auto it = index_.find(site); it != index_.end())
    return {storage_.data() + it->second * S, S};
  if (index_.size() >= capacity_) {
    index_.clear();
    storage_.clear();
  }
  const std::size_t slot = index_.size();
  storage_.resize((slot + 1) * S);
  env_->row_at(site, std::span<double>(storage_.data() + slot * S, S));
  index_.emplace(site, slot);
  return {storage_.data() + slot * S, S};
}

MeanRows::MeanRows(const EnvironmentLaw& law)
    : K_(law.stepset.K()), m_(compute_moments(law).m) {}

MeanRows::MeanRows(int K, std::vector<double> m) : K_(K), m_(std::move(m)) {}

void MeanRows::row_at(Site, std::span<double> out) const {
  std::copy(m_.begin(), m_.end(), out.begin());
}

}  // namespace rwre
