#include "rht/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace rht {

BrownianPath sample_brownian(double T, int steps, SplitMix64& rng) {
  if (steps < 1) throw std::invalid_argument("sample_brownian: need at least one step");
  if (!(T > 0.0)) throw std::invalid_argument("sample_brownian: T must be positive");
  BrownianPath p;
  p.T = T;
  double dt = T / steps;
  double sq = std::sqrt(dt);
  std::normal_distribution<double> gauss(0.0, 1.0);
  p.increments.resize(steps);
  p.w.resize(steps + 1);
  p.w[0] = 0.0;
  for (int j = 0; j < steps; ++j) {
    p.increments[j] = gauss(rng) * sq;
    p.w[j + 1] = p.w[j] + p.increments[j];
  }
  return p;
}

double basis_chi(int k, double t, double T, bool paper_time_scaling) {
  if (k < 1) throw std::invalid_argument("basis_chi: k must be >= 1");
  if (paper_time_scaling) return std::sqrt(2.0) * std::sin(k * M_PI * t);
  return std::sqrt(2.0 / T) * std::sin(k * M_PI * t / T);
}

double gamma_coeff(DecayRule rule, int k, int n) {
  if (k < 1) throw std::invalid_argument("gamma_coeff: k must be >= 1");
  if (k > n) return 0.0;
  switch (rule) {
    case DecayRule::K32:
      return 1.0 / (static_cast<double>(k) * std::sqrt(static_cast<double>(k)));
    case DecayRule::Exp2:
      return std::pow(2.0, -k);
    case DecayRule::None:
      return 1.0;
  }
  throw std::invalid_argument("gamma_coeff: unknown decay rule");
}

NoisePath sample_truncated_noise(const NoiseSpec& spec, const std::vector<double>& times,
                                 SplitMix64& rng, std::uint64_t path_id) {
  if (spec.n < 0) throw std::invalid_argument("sample_truncated_noise: n must be >= 0");
  if (!(spec.T > 0.0)) throw std::invalid_argument("sample_truncated_noise: T must be positive");

  NoisePath p;
  p.path_id = path_id;
  p.eta.resize(spec.n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < spec.n; ++k) p.eta[k] = gauss(rng);

  DecayRule rule = spec.form == NoiseForm::Cons ? DecayRule::None : spec.rule;
  p.wdot = Vec::Zero(static_cast<Eigen::Index>(times.size()));
  for (size_t j = 0; j < times.size(); ++j) {
    double s = 0.0;
    for (int k = 1; k <= spec.n; ++k)
      s += gamma_coeff(rule, k, spec.n) * p.eta[k - 1] *
           basis_chi(k, times[j], spec.T, spec.paper_time_scaling);
    p.wdot[static_cast<Eigen::Index>(j)] = s;
  }
  return p;
}

Vec wdot_from_eta(const NoiseSpec& spec, const Vec& eta, const std::vector<double>& times,
                  int n_cut) {
  if (n_cut < 0 || n_cut > eta.size())
    throw std::invalid_argument("wdot_from_eta: cutoff outside the drawn coordinates");
  DecayRule rule = spec.form == NoiseForm::Cons ? DecayRule::None : spec.rule;
  Vec wdot = Vec::Zero(static_cast<Eigen::Index>(times.size()));
  for (size_t j = 0; j < times.size(); ++j) {
    double s = 0.0;
    for (int k = 1; k <= n_cut; ++k)
      s += gamma_coeff(rule, k, n_cut) * eta[k - 1] *
           basis_chi(k, times[j], spec.T, spec.paper_time_scaling);
    wdot[static_cast<Eigen::Index>(j)] = s;
  }
  return wdot;
}

namespace {

// Euler-Maclaurin remainder of sum_{k>=m} k^-5
double tail_k5_from(double m) {
  double m4 = std::pow(m, -4.0);
  return m4 / 4.0 + m4 / (2.0 * m) + 5.0 * m4 / (12.0 * m * m) - 7.0 * m4 / (24.0 * m * m * m * m);
}

// Euler-Maclaurin remainder of sum_{k>=m} k^-2
double tail_k2_from(double m) {
  return 1.0 / m + 1.0 / (2.0 * m * m) + 1.0 / (6.0 * m * m * m) - 1.0 / (30.0 * std::pow(m, 5.0));
}

}  // namespace

double truncation_tail(DecayRule rule, int n) {
  if (n < 0) throw std::invalid_argument("truncation_tail: n must be >= 0");
  switch (rule) {
    case DecayRule::K32: {  // sum_{k>n} k^-5
      double s = 0.0;
      int m = n + 1;
      int direct_end = m + 50;
      for (int k = m; k < direct_end; ++k) s += std::pow(static_cast<double>(k), -5.0);
      return s + tail_k5_from(static_cast<double>(direct_end));
    }
    case DecayRule::None: {  // sum_{k>n} k^-2
      double s = 0.0;
      int m = n + 1;
      int direct_end = m + 50;
      for (int k = m; k < direct_end; ++k) s += 1.0 / (static_cast<double>(k) * k);
      return s + tail_k2_from(static_cast<double>(direct_end));
    }
    case DecayRule::Exp2: {  // sum_{k>n} 4^-k / k^2
      double s = 0.0;
      for (int k = n + 1; k <= n + 80; ++k) {
        double term = std::pow(4.0, -k) / (static_cast<double>(k) * k);
        s += term;
        if (term < 1e-18 * s) break;
      }
      return s;
    }
  }
  throw std::invalid_argument("truncation_tail: unknown decay rule");
}

}  // namespace rht
