#pragma once

// Stationary-phase treatment of the Melnikov integrals that drive the slow
// drift of the adiabatic actions along a resonant circulation.  Each
// remainder harmonic (m, nu, k) is classified by the behaviour of its phase
// theta(sigma) = N sigma + (Omega / A sqrt(eps)) int dx/s_alpha:
//
//   non-stationary   theta' bounded away from zero; the term is dropped
//   stationary       two non-degenerate critical points; evaluated by the
//                    classical stationary-phase formula at each of them
//   quasi-stationary |N|/|W| close to the existence threshold Q_alpha; the
//                    pair of critical points has merged (or nearly so) and
//                    the integral follows an Airy profile in the detuning
//                    delta, whose tangent at delta = 0 is the linear law
//
// The asymptotic values feed a semi-analytic drift series over the initial
// fast phases; the module also provides the direct quadrature of the same
// integrals along the circulation, used to cross-check the asymptotics.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "driftlab/normal_form.hpp"
#include "driftlab/pendulum.hpp"
#include "driftlab/quadrature.hpp"

namespace driftlab {

enum class PhaseCategory { kNonStationary, kStationary, kQuasiStationary };

/// One remainder harmonic restricted to F = F*:  r (S - S*)^m e^{i(nu sigma + k phi)}.
template <class Real>
struct DriftTerm {
  int m = 0;
  int nu = 0;
  std::array<int, kMaxVars> k{};  // fast indices, slots 1 .. n-1
  std::complex<Real> r{};
};

template <class Real>
struct ClassifiedTerm {
  DriftTerm<Real> term;
  PhaseCategory cat = PhaseCategory::kNonStationary;
  Real Omega = 0, N = 0, W = 0;
  Real delta = 0, delta_c = 0;
  Real sigma_c1 = 0, sigma_c2 = 0;  // critical angles (stationary case)
  // asymptotic value of int_0^{2pi} s_alpha^{m-1} e^{i theta} dsigma, and its
  // split at sigma_bar (one critical point on each side; the quasi-stationary
  // contribution sits at sigma_bar and is shared evenly)
  std::complex<Real> I{}, I1{}, I2{};
};

/// Linear-law constants of the quasi-stationary regime for S-power m.
/// c1 is negative; the law reads I = e^{i theta*} (c0 |W|^{-1/3} + c1 delta |W|^{1/3}).
template <class Real>
struct QuasiConstants {
  Real c0 = 0, c1 = 0;
};

template <class Real>
QuasiConstants<Real> quasi_constants(const ResonantModel<Real>& m, int mpow) {
  Real ratio = Real(1) + m.alpha - m.Mbar / m.M;
  Real base = std::pow((2 * m.M / std::abs(m.A)) * ratio, Real(mpow - 1) / 2);
  Real D = std::sqrt(1 - m.Mbar / m.M) * m.d2v(m.sigma_bar) /
           (12 * m.M * std::pow(ratio, Real(1.5)));
  QuasiConstants<Real> c;
  c.c0 = std::sqrt(Real(3)) * std::tgamma(Real(4) / 3) * base / std::cbrt(D);
  c.c1 = -(std::tgamma(Real(2) / 3) / std::sqrt(Real(3))) * base / std::cbrt(D * D);
  return c;
}

namespace detail {

// Airy function Ai(x) by its Maclaurin series (plenty for |x| <= 8, the only
// range the quasi-stationary law visits) with the exponential asymptotic as a
// guard for large positive arguments.
template <class Real>
Real airy_ai(Real x) {
  const Real ai0 = 1 / (std::pow(Real(3), Real(2) / 3) * std::tgamma(Real(2) / 3));
  const Real aip0 = -1 / (std::cbrt(Real(3)) * std::tgamma(Real(1) / 3));
  if (x > 8) {
    Real zeta = 2 * std::pow(x, Real(1.5)) / 3;
    return std::exp(-zeta) / (2 * std::sqrt(Real(M_PI)) * std::pow(x, Real(0.25)));
  }
  Real x3 = x * x * x;
  Real f = 1, g = x, tf = 1, tg = x;
  for (int k = 0; k < 60; ++k) {
    tf *= x3 / Real((3 * k + 2) * (3 * k + 3));
    tg *= x3 / Real((3 * k + 3) * (3 * k + 4));
    f += tf;
    g += tg;
    if (std::abs(tf) + std::abs(tg) < Real(1e-18)) break;
  }
  return ai0 * f + aip0 * g;
}

// root of v(sigma) = target by bisection; v must be monotone on [lo, hi]
template <class Real>
Real solve_level(const ResonantModel<Real>& m, Real target, Real lo, Real hi) {
  Real flo = m.v(lo) - target;
  for (int it = 0; it < 200; ++it) {
    Real mid = (lo + hi) / 2;
    Real fm = m.v(mid) - target;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

// theta(sigma) for a term with slow index N and fast frequency Omega
template <class Real>
Real theta_at(const ResonantModel<Real>& m, Real N, Real Omega, Real s) {
  return N * s + Omega / (m.A * std::sqrt(m.eps)) * m.phase_integral(s);
}

// theta''(sigma) = (Omega / (A sqrt(eps))) v'(sigma) / (|A| s_alpha^3)
template <class Real>
Real theta_dd(const ResonantModel<Real>& m, Real Omega, Real s) {
  Real sa = m.s_alpha(s);
  return Omega / (m.A * std::sqrt(m.eps)) * m.dv(s) / (std::abs(m.A) * sa * sa * sa);
}

// stationary-phase value of the integral at one critical angle
template <class Real>
std::complex<Real> stationary_value(const ResonantModel<Real>& m, Real N, Real Omega,
                                    int mpow, Real sc) {
  Real sa = m.s_alpha(sc);
  Real tdd = theta_dd(m, Omega, sc);
  Real amp = std::pow(sa, Real(mpow - 1)) * std::sqrt(2 * Real(M_PI) / std::abs(tdd));
  Real phase = theta_at(m, N, Omega, sc) + (tdd > 0 ? Real(M_PI) / 4 : -Real(M_PI) / 4);
  return std::polar(amp, phase);
}

}  // namespace detail

/// Classifies one harmonic and fills in the asymptotic integral value.
template <class Real>
ClassifiedTerm<Real> classify_term(const ResonantModel<Real>& m, const DriftTerm<Real>& t) {
  ClassifiedTerm<Real> c;
  c.term = t;
  for (int j = 1; j < m.n; ++j) c.Omega += t.k[j] * m.omega[j];
  Real kB = 0;
  for (int j = 1; j < m.n; ++j) kB += t.k[j] * m.B[j];
  c.N = t.nu + kB / m.A;
  c.W = m.W_of(c.Omega);

  bool fast = true;
  for (int j = 1; j < m.n; ++j) fast = fast && t.k[j] == 0;
  if (fast || std::abs(c.Omega) > 1 || c.N * c.W > 0 || c.W == Real(0)) return c;

  Real Delta = std::abs(c.N) / std::abs(c.W);
  Real Q = m.Q();
  c.delta = Q - Delta;
  auto qc = quasi_constants(m, t.m);
  // delta_c is where the linear law crosses zero; the actual integral has a
  // tail beyond it (captured below by the Airy form of the law), so the
  // selection threshold is wider by the factor (c1/c0)^2
  c.delta_c = qc.c0 / std::abs(qc.c1) / std::cbrt(c.W * c.W);
  Real ratio10 = std::abs(qc.c1) / qc.c0;
  Real delta_cut = ratio10 / std::cbrt(c.W * c.W);

  Real upper = std::sqrt(1 - m.Mbar / m.M) / std::sqrt(m.alpha);
  if (c.delta < -c.delta_c / 2 && Delta > Q && Delta < upper) {
    // two non-degenerate critical points, one on each side of sigma_bar
    c.cat = PhaseCategory::kStationary;
    Real target = m.M * (1 + m.alpha) - m.M * (1 - m.Mbar / m.M) / (Delta * Delta);
    c.sigma_c1 = detail::solve_level(m, target, Real(1e-12), m.sigma_bar);
    c.sigma_c2 = detail::solve_level(m, target, m.sigma_bar, 2 * Real(M_PI) - Real(1e-12));
    c.I1 = detail::stationary_value(m, c.N, c.Omega, t.m, c.sigma_c1);
    c.I2 = detail::stationary_value(m, c.N, c.Omega, t.m, c.sigma_c2);
    c.I = c.I1 + c.I2;
  } else if (c.delta >= -c.delta_c / 2 && c.delta < delta_cut) {
    c.cat = PhaseCategory::kQuasiStationary;
    Real theta_star = detail::theta_at(m, c.N, c.Omega, m.sigma_bar);
    // uniform form of the linear law: the merging pair of critical points
    // gives an Airy profile whose Taylor expansion at delta = 0 is
    // c0 |W|^{-1/3} + c1 delta |W|^{1/3}; unlike the truncation it stays
    // accurate through the zero crossing and decays in the tail
    const Real ai0 = 1 / (std::pow(Real(3), Real(2) / 3) * std::tgamma(Real(2) / 3));
    const Real aip0 = 1 / (std::cbrt(Real(3)) * std::tgamma(Real(1) / 3));  // |Ai'(0)|
    Real kappa = std::abs(qc.c1) * ai0 / (qc.c0 * aip0);
    Real wcbrt = std::cbrt(std::abs(c.W));
    Real mag = qc.c0 / (ai0 * wcbrt) * detail::airy_ai(kappa * c.delta * wcbrt * wcbrt);
    c.I = mag * std::polar(Real(1), theta_star);
    c.I1 = c.I / Real(2);
    c.I2 = c.I1;
  }
  return c;
}

/// Collects the drift-relevant remainder harmonics: Taylor part S^m only
/// (terms with F powers vanish at F = F*), any fast index nonzero.  The slow
/// angle is re-phased to the shifted frame of the model.  total counts every
/// remainder term, so selected fractions can be reported against it.
template <class Real>
struct DriftSeries {
  std::vector<ClassifiedTerm<Real>> terms;
  std::size_t total = 0;       // all remainder terms
  std::size_t candidates = 0;  // drift-relevant ones (classified)

  std::size_t count(PhaseCategory c) const {
    std::size_t n = 0;
    for (const auto& t : terms) n += t.cat == c;
    return n;
  }
};

template <class Real>
DriftSeries<Real> classify_remainder(const ResonantModel<Real>& m,
                                     const TaylorFourierSeries<Real>& remainder) {
  DriftSeries<Real> out;
  out.total = remainder.size();
  for (const auto& e : remainder.entries()) {
    TermKey key = TermKey::unpack(e.key);
    bool pure_s = true;
    for (int j = 1; j < m.n; ++j) pure_s = pure_s && key.p[j] == 0;
    bool has_fast = false;
    for (int j = 1; j < m.n; ++j) has_fast = has_fast || key.f[j] != 0;
    if (!pure_s || !has_fast) continue;
    DriftTerm<Real> t;
    t.m = key.p[0];
    t.nu = key.f[0];
    for (int j = 1; j < m.n; ++j) t.k[j] = key.f[j];
    t.r = e.c * std::polar(Real(1), Real(t.nu) * m.sigma_shift);
    ++out.candidates;
    out.terms.push_back(classify_term(m, t));
  }
  return out;
}

/// Semi-analytic drift coefficient f_{j,m,nu,k} (selected terms only).
template <class Real>
std::complex<Real> drift_coefficient(const ResonantModel<Real>& m,
                                     const ClassifiedTerm<Real>& c, int j,
                                     std::complex<Real> integral) {
  if (c.term.k[j] == 0) return {};
  Real scale = std::pow(m.eps, Real(c.term.m - 1) / 2) / m.A;
  return std::complex<Real>(0, -1) * Real(c.term.k[j]) * c.term.r * scale * integral;
}

/// Maximum over the initial fast phases of |sum_f f e^{i k phi0}|, via a
/// coarse grid and local refinement.  The majorant sum_f |f| can exceed the
/// true maximum by an order of magnitude and must not be used instead.
template <class Real, class Coeff>
Real max_over_phases(const DriftSeries<Real>& s, int n, Coeff&& coeff, int grid = 64) {
  auto value = [&](const std::array<Real, kMaxVars>& phi) {
    std::complex<Real> sum{};
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
      std::complex<Real> f = coeff(i);
      if (f == std::complex<Real>{}) continue;
      Real ph = 0;
      for (int j = 1; j < n; ++j) ph += s.terms[i].term.k[j] * phi[j];
      sum += f * std::polar(Real(1), ph);
    }
    return std::abs(sum.real());
  };

  // phases enter only through k . phi with k in slots 1 .. n-1
  std::array<Real, kMaxVars> best{};
  Real vbest = -1;
  int dims = n - 1;
  std::vector<int> counter(dims, 0);
  for (;;) {
    std::array<Real, kMaxVars> phi{};
    for (int d = 0; d < dims; ++d) phi[d + 1] = 2 * Real(M_PI) * counter[d] / grid;
    Real v = value(phi);
    if (v > vbest) {
      vbest = v;
      best = phi;
    }
    int d = 0;
    while (d < dims && ++counter[d] == grid) counter[d++] = 0;
    if (d == dims) break;
  }

  // shrink a local stencil around the best grid point
  Real h = 2 * Real(M_PI) / grid;
  for (int round = 0; round < 24; ++round) {
    bool moved = false;
    for (int d = 1; d < n; ++d) {
      for (Real sgn : {Real(-1), Real(1)}) {
        auto phi = best;
        phi[d] += sgn * h;
        Real v = value(phi);
        if (v > vbest) {
          vbest = v;
          best = phi;
          moved = true;
        }
      }
    }
    if (!moved) h /= 2;
  }
  return vbest;
}

/// Semi-analytic maximum jump of F_j over one circulation.
template <class Real>
Real max_drift(const ResonantModel<Real>& m, const DriftSeries<Real>& s, int j,
               int grid = 64) {
  return max_over_phases(s, m.n, [&](std::size_t i) {
    return drift_coefficient(m, s.terms[i], j, s.terms[i].I);
  }, grid);
}

// ---------------------------------------------------------------------------
// Direct quadrature of the Melnikov integrals along the circulation.

/// Time parametrization of the upper-branch circulation, tabulated once and
/// shared by all terms.  sigma nodes cluster geometrically at the endpoints
/// where the motion hangs near the hyperbolic point.
template <class Real>
struct LoopTable {
  std::vector<Real> sigma, t;
  Real period = 0;
  Real t_bar = 0;  // time at sigma_bar

  Real sigma_at(Real time) const {
    if (time <= 0) return 0;
    if (time >= period) return sigma.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t i = std::size_t(it - t.begin()) - 1;
    Real w = (time - t[i]) / (t[i + 1] - t[i]);
    return sigma[i] + w * (sigma[i + 1] - sigma[i]);
  }
};

template <class Real>
LoopTable<Real> tabulate_loop(const ResonantModel<Real>& m, int uniform = 4096) {
  if (!(m.alpha > 0)) throw std::invalid_argument("tabulate_loop: alpha must be positive");
  std::vector<Real> nodes;
  for (int i = 0; i <= uniform; ++i) nodes.push_back(2 * Real(M_PI) * i / uniform);
  Real tiny = std::min(Real(1e-6), std::sqrt(m.alpha) * Real(1e-3));
  for (Real g = tiny; g < Real(0.2); g *= Real(1.5)) {
    nodes.push_back(g);
    nodes.push_back(2 * Real(M_PI) - g);
  }
  nodes.push_back(m.sigma_bar);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  LoopTable<Real> lt;
  lt.sigma = nodes;
  lt.t.resize(nodes.size());
  lt.t[0] = 0;
  auto rate = [&](double x) {
    return 1.0 / (double(std::abs(m.A)) * std::sqrt(double(m.eps)) * double(m.s_alpha(Real(x))));
  };
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    lt.t[i] = lt.t[i - 1] +
              Real(integrate(rate, double(nodes[i - 1]), double(nodes[i]), 1e-13, 1e-10).value);
    if (nodes[i] == m.sigma_bar) lt.t_bar = lt.t[i];
  }
  lt.period = lt.t.back();
  return lt;
}

/// Full-loop and half-loop integrals J = int_0^T S^m e^{i(N sigma + Omega t)} dt
/// for each selected term, by composite Simpson on a shared uniform time grid.
/// The drift coefficient follows as  f_j = -i k_j r J.
template <class Real>
struct QuadratureIntegrals {
  std::vector<std::complex<Real>> J, J1, J2;  // full, [0, t_bar], [t_bar, T]
};

template <class Real>
QuadratureIntegrals<Real> loop_integrals(const ResonantModel<Real>& m,
                                         const DriftSeries<Real>& s, const LoopTable<Real>& lt,
                                         Real phase_step = Real(0.25),
                                         bool selected_only = true) {
  Real rate_max = 1;
  Real smax = m.s_alpha(m.sigma_bar);
  for (const auto& c : s.terms) {
    if (selected_only && c.cat == PhaseCategory::kNonStationary) continue;
    Real r = std::abs(c.N) * std::abs(m.A) * std::sqrt(m.eps) * smax + std::abs(c.Omega);
    rate_max = std::max(rate_max, r);
  }
  Real dt = phase_step / rate_max;
  std::size_t half_steps = std::max<std::size_t>(64, std::size_t(lt.t_bar / dt) + 1);

  QuadratureIntegrals<Real> out;
  out.J.assign(s.terms.size(), {});
  out.J1.assign(s.terms.size(), {});
  out.J2.assign(s.terms.size(), {});

  auto accumulate = [&](Real t0, Real t1, std::size_t steps,
                        std::vector<std::complex<Real>>& into) {
    Real h = (t1 - t0) / Real(steps);
    for (std::size_t q = 0; q < steps; ++q) {
      Real ta = t0 + q * h, tm = ta + h / 2, tb = ta + h;
      Real sa = lt.sigma_at(ta), sm = lt.sigma_at(tm), sb = lt.sigma_at(tb);
      Real Sa = std::sqrt(m.eps) * m.s_alpha(sa);
      Real Sm = std::sqrt(m.eps) * m.s_alpha(sm);
      Real Sb = std::sqrt(m.eps) * m.s_alpha(sb);
      for (std::size_t i = 0; i < s.terms.size(); ++i) {
        const auto& c = s.terms[i];
        if (selected_only && c.cat == PhaseCategory::kNonStationary) continue;
        int mp = c.term.m;
        auto ig = [&](Real sg, Real S, Real tt) {
          return std::pow(S, Real(mp)) * std::polar(Real(1), c.N * sg + c.Omega * tt);
        };
        into[i] += h / 6 * (ig(sa, Sa, ta) + Real(4) * ig(sm, Sm, tm) + ig(sb, Sb, tb));
      }
    }
  };

  accumulate(Real(0), lt.t_bar, half_steps, out.J1);
  accumulate(lt.t_bar, lt.period, half_steps, out.J2);
  for (std::size_t i = 0; i < s.terms.size(); ++i) out.J[i] = out.J1[i] + out.J2[i];
  return out;
}

/// Maximum jump from the direct quadrature (the non-patched estimate).
template <class Real>
Real max_drift_quadrature(const ResonantModel<Real>& m, const DriftSeries<Real>& s,
                          const QuadratureIntegrals<Real>& q, int j, int grid = 64) {
  return max_over_phases(s, m.n, [&](std::size_t i) -> std::complex<Real> {
    if (s.terms[i].term.k[j] == 0) return {};
    return std::complex<Real>(0, -1) * Real(s.terms[i].term.k[j]) * s.terms[i].term.r * q.J[i];
  }, grid);
}

/// Drift profile t -> Delta F_j(t) for fixed initial phases, accumulated on a
/// uniform time grid; cats selects which categories contribute.
template <class Real>
struct DriftProfile {
  std::vector<Real> t;
  std::vector<Real> dF;
};

template <class Real>
DriftProfile<Real> drift_profile(const ResonantModel<Real>& m, const DriftSeries<Real>& s,
                                 const LoopTable<Real>& lt, int j,
                                 const std::array<Real, kMaxVars>& phi0,
                                 bool stationary = true, bool quasi = true,
                                 std::size_t steps = 4096) {
  DriftProfile<Real> out;
  out.t.resize(steps + 1);
  out.dF.resize(steps + 1);
  Real h = lt.period / Real(steps);

  // per-term constant factor -i k_j r e^{i k . phi0}
  std::vector<std::complex<Real>> pref(s.terms.size());
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    const auto& c = s.terms[i];
    bool want = (c.cat == PhaseCategory::kStationary && stationary) ||
                (c.cat == PhaseCategory::kQuasiStationary && quasi);
    if (!want || c.term.k[j] == 0) continue;
    Real ph = 0;
    for (int d = 1; d < m.n; ++d) ph += c.term.k[d] * phi0[d];
    pref[i] = std::complex<Real>(0, -1) * Real(c.term.k[j]) * c.term.r *
              std::polar(Real(1), ph);
  }

  std::vector<std::complex<Real>> acc(s.terms.size(), std::complex<Real>{});
  out.t[0] = 0;
  out.dF[0] = 0;
  for (std::size_t q = 0; q < steps; ++q) {
    Real ta = q * h, tm = ta + h / 2, tb = ta + h;
    Real sa = lt.sigma_at(ta), sm = lt.sigma_at(tm), sb = lt.sigma_at(tb);
    Real Sa = std::sqrt(m.eps) * m.s_alpha(sa);
    Real Sm = std::sqrt(m.eps) * m.s_alpha(sm);
    Real Sb = std::sqrt(m.eps) * m.s_alpha(sb);
    Real sum = 0;
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
      if (pref[i] == std::complex<Real>{}) continue;
      const auto& c = s.terms[i];
      int mp = c.term.m;
      auto ig = [&](Real sg, Real S, Real tt) {
        return std::pow(S, Real(mp)) * std::polar(Real(1), c.N * sg + c.Omega * tt);
      };
      acc[i] += pref[i] * (h / 6) * (ig(sa, Sa, ta) + Real(4) * ig(sm, Sm, tm) + ig(sb, Sb, tb));
      sum += acc[i].real();
    }
    out.t[q + 1] = tb;
    out.dF[q + 1] = sum;
  }
  return out;
}

/// Patched profile: mirror the first half of the loop onto the second, which
/// absorbs the phase randomization occurring between the two symmetric jumps.
template <class Real>
DriftProfile<Real> patched(const DriftProfile<Real>& p) {
  DriftProfile<Real> out = p;
  Real T = p.t.back();
  auto at = [&](Real time) {
    auto it = std::upper_bound(p.t.begin(), p.t.end(), time);
    std::size_t i = std::min<std::size_t>(std::size_t(it - p.t.begin()), p.t.size() - 1);
    if (i == 0) return p.dF[0];
    Real w = (time - p.t[i - 1]) / (p.t[i] - p.t[i - 1]);
    return p.dF[i - 1] + w * (p.dF[i] - p.dF[i - 1]);
  };
  Real half = 2 * at(T / 2);
  for (std::size_t i = 0; i < p.t.size(); ++i)
    if (p.t[i] >= T / 2) out.dF[i] = half - at(T - p.t[i]);
  return out;
}

/// Endpoint (integration-by-parts) bound on the neglected category: for a
/// non-stationary phase the integral is dominated by the boundary values of
/// s^{m-1} / theta'.  Returns the summed contribution to |Delta F_j|.
template <class Real>
Real neglected_mass(const ResonantModel<Real>& m, const DriftSeries<Real>& s, int j) {
  Real total = 0;
  Real scale0 = 1 / (m.A * std::sqrt(m.eps));
  Real s0 = m.s_alpha(Real(0));
  for (const auto& c : s.terms) {
    if (c.cat != PhaseCategory::kNonStationary || c.term.k[j] == 0) continue;
    Real tp0 = std::abs(c.N + c.Omega * scale0 / s0);
    Real bound = 2 * std::pow(s0, Real(c.term.m - 1)) / std::max(tp0, Real(1));
    total += std::abs(c.term.k[j]) * std::abs(c.term.r) *
             std::pow(m.eps, Real(c.term.m - 1) / 2) / std::abs(m.A) * bound;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Cosine benchmark: v = cos sigma, alpha = 0.  The phase has the closed form
// theta = N sigma + 2 W ln tan(sigma/4) and the model integral reduces to a
// one-parameter family used to validate the classification thresholds.

/// Linear-law constants for the cosine well (D = 1/24): c0 ~ 4.4613, c1 ~ -6.5049.
inline double cosine_c0() {
  return std::sqrt(3.0) * std::tgamma(4.0 / 3.0) * std::cbrt(24.0);
}
inline double cosine_c1() {
  return -(std::tgamma(2.0 / 3.0) / std::sqrt(3.0)) * std::cbrt(24.0 * 24.0);
}

/// Numerical value of int_0^{2pi} cos(N (sigma - pi) + 2 W ln tan(sigma/4)) dsigma
/// via the substitution tan(sigma/4) = e^u, which removes both endpoint
/// singularities of the phase.
inline double benchmark_integral(double N, double W, double ucut = 14.0) {
  auto f = [N, W](double u) {
    double sig = 4 * std::atan(std::exp(u));
    return 2.0 / std::cosh(u) * std::cos(N * (sig - M_PI) + 2 * W * u);
  };
  return integrate(f, -ucut, ucut, 1e-11, 1e-9, 60000).value;
}

/// Stationary-phase estimate of the same integral (valid for |N| > |W|, N W < 0).
inline double benchmark_stationary(double N, double W) {
  // critical angles: sin(sigma/2) = |W/N|
  double s2 = std::abs(W / N);
  if (s2 >= 1) return 0;
  double sc1 = 2 * std::asin(s2), sc2 = 2 * M_PI - 2 * std::asin(s2);
  double total = 0;
  for (double sc : {sc1, sc2}) {
    double half = sc / 2;
    double tdd = -W * std::cos(half) / (2 * std::sin(half) * std::sin(half));
    double phase = N * (sc - M_PI) + 2 * W * std::log(std::tan(sc / 4)) +
                   (tdd > 0 ? M_PI / 4 : -M_PI / 4);
    total += std::sqrt(2 * M_PI / std::abs(tdd)) * std::cos(phase);
  }
  return total;
}

/// Linear law of the quasi-stationary regime for the cosine benchmark,
/// expressed in the detuning delta = 1 - |N|/|W|.
inline double benchmark_linear(double delta, double W) {
  double w3 = std::cbrt(std::abs(W));
  return cosine_c0() / w3 + cosine_c1() * delta * w3;
}

/// Zero crossing of the linear law: the quasi-stationary window is
/// [-delta_c/2, delta_c); beyond it the phase counts as non-stationary.
inline double benchmark_delta_c(double W) {
  return cosine_c0() / std::abs(cosine_c1()) / std::cbrt(W * W);
}

// ---------------------------------------------------------------------------

/// Random-phase model of the ballistic motion: out of K diffusing orbits,
/// about K / 2^M keep the same jump sign for M consecutive circulations, so
/// the observable depth is floor(log2 K); the drift speed is the maximum
/// jump per circulation divided by the circulation period.
struct BallisticModel {
  int depth = 0;
  double speed = 0;
  double horizon = 0;  // time span covered by the depth

  static BallisticModel from(double swarm, double jump, double period) {
    BallisticModel b;
    b.depth = int(std::floor(std::log2(swarm)));
    b.speed = jump / period;
    b.horizon = b.depth * period;
    return b;
  }
  /// integrating with precision 10^-p bounds the observable ballistic time
  static double precision_cap(double p, double period) { return p / std::log10(2.0) * period; }
};

}  // namespace driftlab
