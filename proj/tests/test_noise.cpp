#include <doctest.h>

#include <cmath>

#include "rht/noise.hpp"

using namespace rht;

TEST_CASE("brownian paths") {
  SUBCASE("single increment is N(0,T) and deterministic per seed") {
    SplitMix64 a = make_rng(9, RngStream::Paths, 0), b = make_rng(9, RngStream::Paths, 0);
    BrownianPath pa = sample_brownian(0.1, 1, a), pb = sample_brownian(0.1, 1, b);
    CHECK(pa.w[0] == 0.0);
    CHECK(pa.w[1] == pb.w[1]);
  }
  SUBCASE("moments over 1e5 paths within 3-sigma Monte Carlo bands") {
    const int P = 100000, I = 16;
    const double T = 0.7;
    double sum = 0, sumsq = 0;
    for (int p = 0; p < P; ++p) {
      SplitMix64 rng = make_rng(123, RngStream::Paths, p);
      BrownianPath bp = sample_brownian(T, I, rng);
      double wT = bp.w[I];
      sum += wT;
      sumsq += wT * wT;
    }
    double mean = sum / P;
    double var = sumsq / P - mean * mean;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(T / P));
    CHECK(std::abs(var - T) <= 3.0 * std::sqrt(2.0) * T / std::sqrt(double(P)));
  }
}

TEST_CASE("time basis functions") {
  CHECK(basis_chi(1, 0.5, 1.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(basis_chi(2, 0.5, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(basis_chi(0, 0.1, 1.0), std::invalid_argument);

  SUBCASE("orthonormal on [0,T] by quadrature") {
    const double T = 0.1;
    const int Q = 20000;
    for (int k = 1; k <= 4; ++k)
      for (int l = k; l <= 4; ++l) {
        double s = 0;
        for (int q = 0; q < Q; ++q) {
          double t = (q + 0.5) * T / Q;
          s += basis_chi(k, t, T) * basis_chi(l, t, T) * (T / Q);
        }
        CHECK(s == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-4));
      }
  }
  SUBCASE("literal time scaling flag reproduces sqrt(2) sin(k pi t)") {
    CHECK(basis_chi(3, 0.05, 0.1, true) ==
          doctest::Approx(std::sqrt(2.0) * std::sin(3 * M_PI * 0.05)));
  }
}

TEST_CASE("decay coefficients") {
  CHECK(gamma_coeff(DecayRule::K32, 4, 100) == doctest::Approx(0.125));
  CHECK(gamma_coeff(DecayRule::K32, 5, 4) == 0.0);  // cutoff
  CHECK(gamma_coeff(DecayRule::Exp2, 3, 100) == doctest::Approx(0.125));
  CHECK(gamma_coeff(DecayRule::None, 17, 100) == 1.0);
}

TEST_CASE("truncated noise sampling") {
  NoiseSpec spec;
  spec.T = 0.1;
  std::vector<double> times;
  for (int j = 1; j <= 20; ++j) times.push_back(j * spec.T / 20);

  SUBCASE("n = 0 is the deterministic equation") {
    spec.n = 0;
    SplitMix64 rng = make_rng(1, RngStream::Paths, 0);
    NoisePath p = sample_truncated_noise(spec, times, rng);
    CHECK(p.eta.size() == 0);
    CHECK(p.wdot.norm() == 0.0);
  }
  SUBCASE("single term with unit coordinate is chi_1") {
    spec.form = NoiseForm::Cons;
    spec.n = 1;
    Vec eta = Vec::Ones(1);
    Vec w = wdot_from_eta(spec, eta, times, 1);
    for (size_t j = 0; j < times.size(); ++j)
      CHECK(w[j] == doctest::Approx(basis_chi(1, times[j], spec.T)));
  }
  SUBCASE("eta count matches the truncation and reuse is exact") {
    spec.form = NoiseForm::Fourier;
    spec.rule = DecayRule::K32;
    spec.n = 6;
    SplitMix64 rng = make_rng(2, RngStream::Paths, 3);
    NoisePath p = sample_truncated_noise(spec, times, rng, 3);
    CHECK(p.eta.size() == 6);
    Vec w = wdot_from_eta(spec, p.eta, times, 6);
    CHECK((w - p.wdot).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("determinism from (seed, path-id)") {
    spec.n = 5;
    SplitMix64 a = make_rng(77, RngStream::Paths, 4), b = make_rng(77, RngStream::Paths, 4);
    NoisePath pa = sample_truncated_noise(spec, times, a, 4);
    NoisePath pb = sample_truncated_noise(spec, times, b, 4);
    CHECK((pa.eta - pb.eta).norm() == 0.0);
    CHECK((pa.wdot - pb.wdot).norm() == 0.0);
  }
}

TEST_CASE("Parseval check over Monte Carlo paths") {
  NoiseSpec spec;
  spec.form = NoiseForm::Fourier;
  spec.rule = DecayRule::K32;
  spec.n = 8;
  spec.T = 0.1;
  const int I = 512, P = 10000;
  std::vector<double> times;
  for (int j = 0; j <= I; ++j) times.push_back(j * spec.T / I);

  double exact = 0, gamma4 = 0;
  for (int k = 1; k <= spec.n; ++k) {
    double gk = gamma_coeff(DecayRule::K32, k, spec.n);
    exact += gk * gk;
    gamma4 += gk * gk * gk * gk;
  }

  double acc = 0;
  for (int p = 0; p < P; ++p) {
    SplitMix64 rng = make_rng(321, RngStream::Paths, p);
    NoisePath np = sample_truncated_noise(spec, times, rng, p);
    double integral = 0;  // trapezoid; endpoints vanish for the sine basis
    for (int j = 0; j <= I; ++j) {
      double w = np.wdot[j] * np.wdot[j];
      integral += (j == 0 || j == I ? 0.5 : 1.0) * w * (spec.T / I);
    }
    acc += integral;
  }
  double mean = acc / P;
  double sigma = std::sqrt(2.0 * gamma4 / P);
  CHECK(std::abs(mean - exact) <= 3.0 * sigma + 1e-3 * exact);
}

TEST_CASE("truncation tails") {
  SUBCASE("k^-3/2 rule: tail decays like n^-4/4") {
    // brute-force values: n^4 * tail runs from 0.19394 (n=8) up toward 1/4
    double prev = 1e300;
    for (int n : {8, 16, 32, 64, 128}) {
      double tail = truncation_tail(DecayRule::K32, n);
      double scaled = tail * std::pow(double(n), 4.0);
      CHECK(scaled >= 0.19);
      CHECK(scaled <= 1.0 / 3.0);
      CHECK(tail < prev);  // monotone decay
      prev = tail;
    }
    CHECK(truncation_tail(DecayRule::K32, 8) * 4096.0 == doctest::Approx(0.193941).epsilon(1e-4));
  }
  SUBCASE("agrees with brute-force summation") {
    double direct = 0;
    for (int k = 9; k <= 2000000; ++k) direct += std::pow(double(k), -5.0);
    CHECK(truncation_tail(DecayRule::K32, 8) == doctest::Approx(direct).epsilon(1e-6));
  }
  SUBCASE("exponential rule from zero is the dilogarithm value") {
    CHECK(truncation_tail(DecayRule::Exp2, 0) == doctest::Approx(0.267652694).epsilon(1e-6));
  }
  SUBCASE("flat rule from zero is pi^2/6") {
    CHECK(truncation_tail(DecayRule::None, 0) == doctest::Approx(M_PI * M_PI / 6).epsilon(1e-6));
  }
}

TEST_CASE("faster decay means smoother sample paths") {
  // total variation ordering on a fixed seed, shared Gaussian coordinates
  NoiseSpec spec;
  spec.T = 0.1;
  spec.n = 16;
  const int I = 256;
  std::vector<double> times;
  for (int j = 1; j <= I; ++j) times.push_back(j * spec.T / I);

  SplitMix64 rng = make_rng(2024, RngStream::Paths, 0);
  spec.form = NoiseForm::Cons;
  NoisePath base = sample_truncated_noise(spec, times, rng, 0);

  auto tv = [&](DecayRule rule) {
    NoiseSpec s = spec;
    s.form = NoiseForm::Fourier;
    s.rule = rule;
    Vec w = wdot_from_eta(s, base.eta, times, spec.n);
    double v = 0;
    for (int j = 1; j < I; ++j) v += std::abs(w[j] - w[j - 1]);
    return v;
  };

  double tv_none = tv(DecayRule::None);
  double tv_k32 = tv(DecayRule::K32);
  double tv_exp = tv(DecayRule::Exp2);
  CHECK(tv_none > tv_k32);
  CHECK(tv_k32 > tv_exp);
}
