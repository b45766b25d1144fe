#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "driftlab/hamiltonian.hpp"
#include "driftlab/normal_form.hpp"
#include "driftlab/pendulum.hpp"

using namespace driftlab;

namespace {

// single-harmonic pendulum: every quantity has a closed form
ResonantModel<double> cosine_model(double A, double eps, double M, double alpha) {
  ResonantModel<double> m;
  m.n = 3;
  m.eps = eps;
  m.A = A;
  m.alpha = alpha;
  m.vh = {std::complex<double>(M / 2, 0)};
  m.M = M;
  m.Mbar = -M;
  m.M1 = M;
  m.sigma_bar = M_PI;
  return m;
}

struct ReferenceRun {
  NormalFormResult<double> nf;
  DomainSpec dom;
};

const ReferenceRun& reference_run() {
  static const ReferenceRun run = [] {
    auto H = make_coupled_rotators<double>();
    ResonanceSpec res;
    res.ell = {1, 1, 0};
    res.gamma = auto_gamma(res.ell);
    res.anchor = {0.664887, 0.955495, 1.0};
    Grading g{H.mu, 0.08, 9.0};
    auto sys = resonance_adapt(H, res, 0.08, g);
    NormalizeConfig cfg;
    cfg.dom.action_radii = {0.0285, 0.0285, 0.0285};
    return ReferenceRun{normalize(sys, cfg), cfg.dom};
  }();
  return run;
}

}  // namespace

TEST_CASE("cosine pendulum: level curve and bounds") {
  const double A = 0.6, eps = 0.05, M = 0.025;
  auto m = cosine_model(A, eps, M, 0.0);

  CHECK(m.v(0.0) == doctest::Approx(M));
  CHECK(m.v(M_PI) == doctest::Approx(-M));
  CHECK(m.dv(0.0) == doctest::Approx(0.0));
  CHECK(m.d2v(0.0) == doctest::Approx(-M));

  // s_0(sigma) = 2 sqrt(M/A) |sin(sigma/2)|
  for (double s : {0.3, 1.0, 2.0, M_PI, 4.5}) {
    double want = 2 * std::sqrt(M / A) * std::abs(std::sin(s / 2));
    CHECK(m.s_alpha(s) == doctest::Approx(want).epsilon(1e-12));
  }

  // at the top of the well, s_alpha^2 = 2 M alpha / A
  m.alpha = 1e-3;
  CHECK(m.s_alpha(0.0) == doctest::Approx(std::sqrt(2 * M * 1e-3 / A)).epsilon(1e-12));

  m.alpha = 0.0;
  CHECK(m.Q() == doctest::Approx(1.0));
  m.alpha = 0.5;
  CHECK(m.Q() == doctest::Approx(std::sqrt(2.0 / 2.5)));

  // W = Omega / sqrt(4 A eps M) for the cosine well
  CHECK(m.W_of(-0.2) == doctest::Approx(-0.2 / std::sqrt(4 * A * eps * M)));
  m.A = -A;
  CHECK(m.W_of(-0.2) == doctest::Approx(0.2 / std::sqrt(4 * A * eps * M)));
}

TEST_CASE("cosine pendulum: circulation period against the elliptic integral") {
  const double A = 0.6086, eps = 0.08, M = 0.0256;
  for (double alpha : {2.0, 0.5, 0.05, 1e-3}) {
    auto m = cosine_model(A, eps, M, alpha);
    // T = 4 K(k) / sqrt(2 A eps M (2 + alpha)),  k^2 = 2 / (2 + alpha)
    double k = std::sqrt(2.0 / (2.0 + alpha));
    double want = 4 * std::comp_ellint_1(k) / std::sqrt(2 * A * eps * M * (2 + alpha));
    CHECK(m.period_integral() == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("cosine pendulum: near-separatrix closed form matches the quadrature") {
  const double A = 0.6086, eps = 0.08, M = 0.0256;
  // the logarithmic formula carries the offset convention rn = 2 eps M alpha
  for (double alpha : {1e-4, 1e-6}) {
    auto m = cosine_model(A, eps, M, alpha);
    double tq = m.period_integral();
    double tl = std::log(32.0 / alpha) / std::sqrt(A * eps * M);
    CHECK(tq == doctest::Approx(tl).epsilon(5e-4));
  }
}

TEST_CASE("cosine pendulum: time and phase quadratures agree") {
  auto m = cosine_model(0.6, 0.05, 0.025, 0.01);
  for (double s : {1.0, 2.5, 5.0}) {
    CHECK(m.time_of(s) * std::abs(m.A) * std::sqrt(m.eps) ==
          doctest::Approx(m.phase_integral(s)).epsilon(1e-9));
  }
}

TEST_CASE("extract_model: quadratic part against the adapted Hessian") {
  auto m = extract_model(reference_run().nf);

  auto H = make_coupled_rotators<double>();
  std::array<double, kMaxVars> Istar = {0.664887, 0.955495, 1.0};
  auto hess = H.h0.hess(Istar);
  auto grad = H.h0.grad(Istar);
  IntMat gamma = auto_gamma({1, 1, 0});

  auto quad = [&](int a, int b) {
    double sum = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) sum += gamma.a[a][i] * hess[i][j] * gamma.a[b][j];
    return sum;
  };
  CHECK(m.A == doctest::Approx(quad(0, 0)).epsilon(1e-3));
  CHECK(m.B[1] == doctest::Approx(quad(0, 1)).epsilon(1e-3));
  CHECK(m.B[2] == doctest::Approx(quad(0, 2)).epsilon(1e-3));

  for (int j = 1; j < 3; ++j) {
    double wj = 0;
    for (int i = 0; i < 3; ++i) wj += gamma.a[j][i] * grad[i];
    CHECK(m.omega[j] == doctest::Approx(wj).epsilon(1e-4));
  }
}

TEST_CASE("extract_model: potential against the leading Fourier coefficient") {
  auto m = extract_model(reference_run().nf);

  // leading order of the nu = 1 harmonic is the (1,1,0) mode of the coupling
  auto H = make_coupled_rotators<double>();
  double f110 = H.fourier_coeff({1, 1, 0});
  CHECK(m.M1 == doctest::Approx(2 * std::abs(f110)).epsilon(0.05));
  CHECK(m.M1 == doctest::Approx(2 * std::abs(m.vh[0])).epsilon(1e-12));

  CHECK(m.M > 0);
  CHECK(m.Mbar < 0);
  CHECK(m.M > m.M1 * 0.9);
  CHECK(m.M < m.M1 * 1.2);
  CHECK(std::abs(m.sigma_shift) < 1e-6);
  CHECK(m.sigma_bar == doctest::Approx(M_PI).epsilon(1e-2));
  CHECK(m.dv(0.0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(std::abs(m.dv(m.sigma_bar)) < 1e-10);
  CHECK(m.v(m.sigma_bar) == doctest::Approx(m.Mbar));

  CHECK(m.B[1] == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(std::abs(m.B[2]) < 1e-3);
}

TEST_CASE("extract_model: circulation period at the optimal remainder") {
  const auto& run = reference_run();
  auto m = extract_model(run.nf);
  double rn = majorant_norm(run.nf.remainder, run.dom);
  double t = m.period_log(rn);
  CHECK(t == doctest::Approx(165.0).epsilon(0.05));
  // the general quadrature with the same offset stays in the same ballpark
  m.alpha = rn / (2 * m.eps * m.M1);
  CHECK(m.period_integral() == doctest::Approx(t).epsilon(0.15));
}
