#pragma once

// Resonant pendulum model read off a normal form: the slow pair (S, sigma)
// moves under  h = A S^2/2 + S B.F + ... + eps v(sigma)  while the fast
// actions F are frozen.  Everything downstream (phase classification,
// Melnikov integrals, periods) only needs the few numbers and the single
// 2 pi periodic potential collected here.

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "driftlab/normal_form.hpp"
#include "driftlab/quadrature.hpp"

namespace driftlab {

template <class Real>
struct ResonantModel {
  int n = 3;
  Real eps = 0;
  Real A = 0;                         ///< d2h/dS2 at the center
  std::array<Real, kMaxVars> B{};     ///< d2h/dS dF_j, j = 1 .. n-1
  std::array<Real, kMaxVars> omega{}; ///< fast frequencies omega*_j
  Real alpha = 0;                     ///< energy-level label, ~ |r^N|

  /// Harmonics of v(sigma): vh[i] multiplies e^{i (i+1) sigma} (the
  /// conjugates are implicit, the mean is dropped).  The angle has been
  /// shifted so the maximum of v sits at sigma = 0.
  std::vector<std::complex<Real>> vh;
  Real sigma_shift = 0;  ///< shift applied: sigma_here = sigma_nf - shift
  Real M = 0;            ///< max of v, attained at 0
  Real Mbar = 0;         ///< min of v, attained at sigma_bar
  Real M1 = 0;           ///< first-harmonic amplitude 2 |vh[0]|
  Real sigma_bar = 0;

  Real v(Real s) const {
    Real sum = 0;
    for (std::size_t i = 0; i < vh.size(); ++i)
      sum += 2 * (vh[i] * std::polar(Real(1), Real(i + 1) * s)).real();
    return sum;
  }
  Real dv(Real s) const {
    Real sum = 0;
    for (std::size_t i = 0; i < vh.size(); ++i) {
      Real nu = Real(i + 1);
      sum += 2 * (std::complex<Real>(0, nu) * vh[i] * std::polar(Real(1), nu * s)).real();
    }
    return sum;
  }
  Real d2v(Real s) const {
    Real sum = 0;
    for (std::size_t i = 0; i < vh.size(); ++i) {
      Real nu = Real(i + 1);
      sum -= 2 * nu * nu * (vh[i] * std::polar(Real(1), nu * s)).real();
    }
    return sum;
  }

  /// Upper branch of the level curve:  S - S* = sqrt(eps) s_alpha(sigma).
  Real s_alpha(Real s) const {
    Real arg = (Real(2) / std::abs(A)) * (M * (1 + alpha) - v(s));
    return arg > 0 ? std::sqrt(arg) : Real(0);
  }

  /// Ratio bound Q: phases with |N/W| below it have stationary points.
  Real Q() const { return std::sqrt(1 - Mbar / M) / std::sqrt(1 + alpha - Mbar / M); }

  /// Scaled fast frequency; the branch with s_alpha > 0, A > 0 is used.
  Real W_of(Real Omega) const {
    return (A > 0 ? Omega : -Omega) / std::sqrt(2 * std::abs(A) * eps * (M - Mbar));
  }

  /// Time along the upper branch from sigma = 0 (regular for alpha > 0).
  Real time_of(Real s) const {
    auto f = [this](double x) { return 1.0 / (double(std::abs(A)) * std::sqrt(double(eps)) *
                                              double(s_alpha(Real(x)))); };
    return Real(integrate(f, 0.0, double(s), 1e-12, 1e-10).value);
  }

  /// Circulation period from the level-curve quadrature.
  Real period_integral() const { return time_of(Real(2) * Real(M_PI)); }

  /// Near-separatrix closed form for the circulation period.  The level
  /// differs from the separatrix energy by half the remainder norm, and the
  /// pendulum is approximated by its first harmonic (amplitude M1), which is
  /// the setting the closed form is derived in.
  Real period_log(Real rn) const {
    Real aem = std::abs(A) * eps * M1;
    return std::log(32 * aem / (rn / 2)) / std::sqrt(aem);
  }

  /// Integral part of the phase: theta(sigma) = N sigma + Omega/(A sqrt(eps))
  /// * int_0^sigma dx/s_alpha(x).
  Real phase_integral(Real s) const {
    auto f = [this](double x) { return 1.0 / double(s_alpha(Real(x))); };
    return Real(integrate(f, 0.0, double(s), 1e-12, 1e-10).value);
  }
};

namespace detail {

template <class Real, class F>
Real refine_extremum(F&& df, Real lo, Real hi) {
  // bisection on the derivative; df(lo) and df(hi) must bracket a root
  Real flo = df(lo);
  for (int it = 0; it < 200; ++it) {
    Real mid = (lo + hi) / 2;
    Real fm = df(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

}  // namespace detail

/// Reads the pendulum data off a normal form.  The potential comes from the
/// slow-angle part at the expansion center (Taylor degree zero); its mean is
/// dropped and the angle shifted so v is maximal at sigma = 0, which puts
/// the hyperbolic point of the resonance at the angle origin.
template <class Real>
ResonantModel<Real> extract_model(const NormalFormResult<Real>& nf) {
  ResonantModel<Real> m;
  m.n = nf.n;
  m.eps = Real(nf.eps);
  if (!(m.eps > 0)) throw std::invalid_argument("extract_model: eps must be positive");

  TermKey kS2;
  kS2.p[0] = 2;
  m.A = 2 * nf.h.coeff(kS2).real();
  if (m.A == Real(0)) throw std::invalid_argument("extract_model: degenerate resonance (A = 0)");
  for (int j = 1; j < nf.n; ++j) {
    TermKey kSF;
    kSF.p[0] = 1;
    kSF.p[j] = 1;
    m.B[j] = nf.h.coeff(kSF).real();
    m.omega[j] = nf.omega[j];
  }

  int numax = 0;
  for (const auto& e : nf.f_res.entries()) {
    TermKey k = TermKey::unpack(e.key);
    if (k.taylor_degree() == 0) numax = std::max(numax, int(std::abs(k.f[0])));
  }
  if (numax == 0) throw std::invalid_argument("extract_model: no resonant harmonics");
  m.vh.assign(numax, std::complex<Real>{});
  for (const auto& e : nf.f_res.entries()) {
    TermKey k = TermKey::unpack(e.key);
    if (k.taylor_degree() != 0 || k.f[0] <= 0) continue;
    m.vh[k.f[0] - 1] += e.c / m.eps;
  }

  // locate the maximum on a dense grid, polish, then rotate it to 0
  const int grid = 4096;
  Real best = -std::numeric_limits<Real>::infinity(), sbest = 0;
  for (int i = 0; i < grid; ++i) {
    Real s = Real(2) * Real(M_PI) * Real(i) / Real(grid);
    Real val = m.v(s);
    if (val > best) {
      best = val;
      sbest = s;
    }
  }
  Real h = Real(2) * Real(M_PI) / Real(grid);
  m.sigma_shift = detail::refine_extremum<Real>([&](Real s) { return -m.dv(s); },
                                                sbest - h, sbest + h);
  for (std::size_t i = 0; i < m.vh.size(); ++i)
    m.vh[i] *= std::polar(Real(1), Real(i + 1) * m.sigma_shift);
  m.M = m.v(0);
  m.M1 = 2 * std::abs(m.vh[0]);

  Real worst = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < grid; ++i) {
    Real s = Real(2) * Real(M_PI) * Real(i) / Real(grid);
    Real val = m.v(s);
    if (val < worst) {
      worst = val;
      sbest = s;
    }
  }
  m.sigma_bar = detail::refine_extremum<Real>([&](Real s) { return m.dv(s); },
                                              sbest - h, sbest + h);
  m.Mbar = m.v(m.sigma_bar);
  if (!(m.M > 0) || !(m.Mbar <= 0))
    throw std::runtime_error("extract_model: potential is not centered (check the mean mode)");
  return m;
}

}  // namespace driftlab
