#pragma once

#include <cstdint>
#include <vector>

#include "rht/linalg.hpp"
#include "rht/rng.hpp"

namespace rht {

enum class NoiseForm { Cons, Fourier };
enum class DecayRule { K32, Exp2, None };  // k^{-3/2}, 2^{-k}, gamma_k = 1

struct NoiseSpec {
  NoiseForm form = NoiseForm::Fourier;
  int n = 8;  // truncation; n = 0 switches the noise off
  DecayRule rule = DecayRule::K32;
  double T = 0.1;
  // Reproduce the literal sqrt(2) sin(k pi t) basis instead of the
  // orthonormal-on-[0,T] scaling sqrt(2/T) sin(k pi t / T).
  bool paper_time_scaling = false;
};

/// One Monte Carlo realization. The Gaussian coordinates eta are drawn once
/// per path and reused at every time step.
struct NoisePath {
  Vec eta;            // n iid standard normals
  Vec wdot;           // evaluated at the supplied times
  std::uint64_t path_id = 0;
};

struct BrownianPath {
  double T = 0;
  Vec increments;  // ~ N(0, dt)
  Vec w;           // cumulative, w[0] = 0, size I+1
};

BrownianPath sample_brownian(double T, int steps, SplitMix64& rng);

double basis_chi(int k, double t, double T, bool paper_time_scaling = false);

/// gamma_k under the decay rule, zeroed beyond the truncation level n.
double gamma_coeff(DecayRule rule, int k, int n);

NoisePath sample_truncated_noise(const NoiseSpec& spec, const std::vector<double>& times,
                                 SplitMix64& rng, std::uint64_t path_id = 0);

/// Evaluates the truncated sum at cutoff n_cut <= eta.size() from an already
/// drawn coordinate vector, so different truncation levels share one path.
Vec wdot_from_eta(const NoiseSpec& spec, const Vec& eta, const std::vector<double>& times,
                  int n_cut);

/// Tail sum over k > n of (gamma_k / k)^2, to 1e-6 relative accuracy.
double truncation_tail(DecayRule rule, int n);

}  // namespace rht
