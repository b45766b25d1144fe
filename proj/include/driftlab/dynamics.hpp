#pragma once

// Ground truth for the drift predictions: symplectic integration of
// H = H0(I) + eps f(psi), the FLI chaos indicator, swarm measurements of the
// adiabatic-action jumps in normal-form variables, and the iterative
// ballistic-orbit search.  Everything is templated on the floating type so
// the ballistic search can run in extended precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "driftlab/hamiltonian.hpp"
#include "driftlab/normal_form.hpp"

namespace driftlab {

template <class Real>
struct PhaseState {
  std::array<Real, kMaxVars> I{};
  std::array<Real, kMaxVars> psi{};
  Real t = 0;
};

struct IntegratorConfig {
  double tau = 0.05;
  int scheme = 4;  // symmetric splitting order: 2 (Strang) or 4 (composed)
};

template <class Real>
Real energy(const HamiltonianSpec<Real>& H, Real eps, const PhaseState<Real>& s) {
  return H.h0.eval(s.I) + eps * H.f_value(s.psi);
}

namespace detail {

// One Strang step of length h: half kick, full drift, half kick.  The kick
// (flow of eps f) moves only actions, the drift (flow of H0) only angles;
// both are exact, so the composition is symplectic.
template <class Real>
void strang_step(const HamiltonianSpec<Real>& H, Real eps, Real h, PhaseState<Real>& s) {
  if (eps != Real(0)) {
    auto g = H.f_grad(s.psi);
    for (int i = 0; i < H.n; ++i) s.I[i] -= eps * (h / 2) * g[i];
  }
  auto w = H.h0.grad(s.I);
  for (int i = 0; i < H.n; ++i) s.psi[i] += h * w[i];
  if (eps != Real(0)) {
    auto g = H.f_grad(s.psi);
    for (int i = 0; i < H.n; ++i) s.I[i] -= eps * (h / 2) * g[i];
  }
}

// Same splitting applied to the tangent flow, for the variational dynamics.
template <class Real>
void strang_step_tangent(const HamiltonianSpec<Real>& H, Real eps, Real h, PhaseState<Real>& s,
                         std::array<Real, 2 * kMaxVars>& v) {
  auto kick = [&] {
    if (eps == Real(0)) return;
    auto g = H.f_grad(s.psi);
    auto hf = H.f_hess(s.psi);
    for (int i = 0; i < H.n; ++i) {
      Real dv = 0;
      for (int j = 0; j < H.n; ++j) dv += hf[i][j] * v[kMaxVars + j];
      s.I[i] -= eps * (h / 2) * g[i];
      v[i] -= eps * (h / 2) * dv;
    }
  };
  kick();
  auto w = H.h0.grad(s.I);
  auto h0 = H.h0.hess(s.I);
  for (int i = 0; i < H.n; ++i) {
    Real dv = 0;
    for (int j = 0; j < H.n; ++j) dv += h0[i][j] * v[j];
    s.psi[i] += h * w[i];
    v[kMaxVars + i] += h * dv;
  }
  kick();
}

// Order-4 by the 5-fold Suzuki composition of Strang steps; its error
// constant is far smaller than the 3-fold triple jump's, which matters for
// the energy budget at the default step sizes.
template <class Real>
const std::vector<Real>& composition(int scheme) {
  static const std::vector<Real> strang{Real(1)};
  static const std::vector<Real> suzuki = [] {
    Real w = 1 / (4 - std::pow(Real(4), Real(1) / 3));
    return std::vector<Real>{w, w, 1 - 4 * w, w, w};
  }();
  if (scheme == 2) return strang;
  if (scheme == 4) return suzuki;
  throw std::invalid_argument("integrator scheme must be 2 or 4");
}

}  // namespace detail

template <class Real>
void step(const HamiltonianSpec<Real>& H, Real eps, PhaseState<Real>& s,
          const IntegratorConfig& cfg) {
  Real h = Real(cfg.tau);
  for (Real w : detail::composition<Real>(cfg.scheme)) detail::strang_step(H, eps, w * h, s);
  s.t += h;
}

/// Fast Lyapunov Indicator: sup over t <= T of ln ||v(t)||, v evolved by the
/// tangent flow from a unit vector along the first action axis.  The norm is
/// renormalized periodically with the logarithm accumulated, so overflow
/// cannot occur on strongly chaotic orbits.
template <class Real>
Real fli(const HamiltonianSpec<Real>& H, Real eps, PhaseState<Real> s, Real T,
         const IntegratorConfig& cfg) {
  std::array<Real, 2 * kMaxVars> v{};
  v[0] = 1;
  Real h = Real(cfg.tau);
  const auto& weights = detail::composition<Real>(cfg.scheme);
  Real log_acc = 0, best = 0;
  std::size_t steps = std::size_t(T / h);
  auto norm = [&] {
    Real q = 0;
    for (int i = 0; i < H.n; ++i) q += v[i] * v[i] + v[kMaxVars + i] * v[kMaxVars + i];
    return std::sqrt(q);
  };
  for (std::size_t q = 0; q < steps; ++q) {
    for (Real w : weights) detail::strang_step_tangent(H, eps, w * h, s, v);
    Real nv = norm();
    best = std::max(best, log_acc + std::log(nv));
    if (q % 1000 == 999) {
      for (auto& x : v) x /= nv;
      log_acc += std::log(nv);
    }
  }
  return best;
}

/// One measured orbit: F1(t) in normal-form variables and the per-loop
/// jumps, with loop boundaries detected as sigma crossings of 0 (mod 2 pi).
template <class Real>
struct OrbitRecord {
  std::vector<Real> t, F1, sigma;
  std::vector<Real> loop_t;  // loop boundary times, strictly increasing
  std::vector<Real> jumps;   // Delta F1 between consecutive boundaries
  Real fli_value = 0;
  bool escaped = false;
};

template <class Real>
struct SwarmResult {
  std::vector<OrbitRecord<Real>> orbits;
  Real max_jump = 0;   // over chaotic (FLI > threshold) orbits
  Real mean_jump = 0;  // mean |jump| over the same set
  std::size_t chaotic = 0;
};

namespace detail {

// Integrates one orbit for `loops` saddle passages (or until t > t_max),
// sampling the normalized F1 every `sample_every` steps.  A single
// evaluation of F1 near a passage carries transform noise comparable to the
// jump itself, so each jump is measured between plateau means: the averages
// of the F1 samples taken inside the saddle window around consecutive
// passages.
template <class Real>
OrbitRecord<Real> record_orbit(const HamiltonianSpec<Real>& H, const AdaptedSystem<Real>& sys,
                               const NormalFormResult<Real>& nf, PhaseState<Real> s, int loops,
                               Real t_max, const IntegratorConfig& cfg,
                               std::size_t sample_every = 32) {
  Real eps = Real(sys.eps);
  OrbitRecord<Real> rec;
  auto normalized_F1 = [&](const PhaseState<Real>& p) {
    PhasePoint<Real> pt;
    pt.actions = sys.actions_from_original(p.I);
    pt.angles = sys.angles_from_original(p.psi);
    return transform_point(nf, pt, MapDirection::to_normalized).actions[1];
  };
  auto slow_angle = [&](const PhaseState<Real>& p) {
    Real sg = 0;
    for (int j = 0; j < H.n; ++j) sg += Real(sys.gamma.a[0][j]) * p.psi[j];
    return sg;  // unwrapped: psi is never reduced mod 2 pi here
  };
  const Real two_pi = 2 * Real(M_PI);
  const Real window = Real(0.5);  // |sigma| band defining the saddle hover
  Real sg0 = slow_angle(s);
  int crossings = 0;
  rec.loop_t.push_back(s.t);
  std::vector<Real> hov_t, hov_f;  // saddle-window samples
  hov_t.push_back(s.t);
  hov_f.push_back(normalized_F1(s));
  std::size_t q = 0;
  // Orbits start near the saddle (sigma = 0), where sigma wobbles around the
  // starting level; a passage therefore closes at a sigma = 0 (mod 2 pi)
  // crossing only after the orbit has visited the loop apex sigma = sigma_bar
  // since the previous closure.
  bool armed = false;
  while (s.t < t_max && crossings < loops) {
    Real sg_prev = slow_angle(s);
    step(H, eps, s, cfg);
    Real sg = slow_angle(s);
    if (q++ % sample_every == 0) {
      Real rel = sg - sg0;
      Real dist = rel - two_pi * std::round(rel / two_pi);
      rec.t.push_back(s.t);
      rec.sigma.push_back(rel);
      if (std::abs(dist) < window) {
        Real f = normalized_F1(s);
        rec.F1.push_back(f);
        hov_t.push_back(s.t);
        hov_f.push_back(f);
      } else {
        rec.F1.push_back(rec.F1.empty() ? hov_f.front() : rec.F1.back());
      }
    }
    if (std::floor((sg - sg0) / two_pi - Real(0.5)) !=
        std::floor((sg_prev - sg0) / two_pi - Real(0.5)))
      armed = true;  // apex crossed: sigma - sigma0 passed pi (mod 2 pi)
    if (armed && std::floor((sg - sg0) / two_pi) != std::floor((sg_prev - sg0) / two_pi)) {
      rec.loop_t.push_back(s.t);
      ++crossings;
      armed = false;
    }
  }
  rec.escaped = crossings < loops;
  // plateau means: each window sample belongs to the nearest passage time
  std::vector<Real> mean(rec.loop_t.size(), 0), cnt(rec.loop_t.size(), 0);
  for (std::size_t i = 0; i < hov_t.size(); ++i) {
    std::size_t k = 0;
    for (std::size_t j = 1; j < rec.loop_t.size(); ++j)
      if (std::abs(hov_t[i] - rec.loop_t[j]) < std::abs(hov_t[i] - rec.loop_t[k])) k = j;
    mean[k] += hov_f[i];
    cnt[k] += 1;
  }
  for (std::size_t k = 0; k + 1 < rec.loop_t.size(); ++k) {
    if (cnt[k] > 0 && cnt[k + 1] > 0)
      rec.jumps.push_back(mean[k + 1] / cnt[k + 1] - mean[k] / cnt[k]);
    else
      rec.jumps.push_back(0);
  }
  return rec;
}

// initial state on the separatrix level: deviations (dS, dphi1) from the
// saddle (S hat, sigma, F, phi) = (0, 0, F*, 0, 0)
template <class Real>
PhaseState<Real> saddle_state(const AdaptedSystem<Real>& sys, Real dS, Real dphi1) {
  std::array<Real, kMaxVars> SF = sys.center;
  SF[0] += dS;
  std::array<Real, kMaxVars> phi{};
  phi[1] = dphi1;
  PhaseState<Real> s;
  s.I = sys.actions_to_original(SF);
  s.psi = sys.angles_to_original(phi);
  return s;
}

}  // namespace detail

/// Swarm measurement: n_orbits random initial conditions in a (phi_1, S)
/// square of side `spread` around the separatrix saddle, each integrated for
/// `loops` circulations.  Orbits whose FLI over fli_T stays below
/// `fli_threshold` sit on regular tori and are excluded from the jump
/// statistics, as are orbits that fail to complete their loops.
template <class Real>
SwarmResult<Real> swarm_run(const HamiltonianSpec<Real>& H, const AdaptedSystem<Real>& sys,
                            const NormalFormResult<Real>& nf, int n_orbits, Real spread,
                            int loops, Real t_max, const IntegratorConfig& cfg,
                            std::uint64_t seed, Real fli_T = 1000, Real fli_threshold = 3) {
  SwarmResult<Real> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Real eps = Real(sys.eps);
  Real sum = 0;
  std::size_t count = 0;
  for (int o = 0; o < n_orbits; ++o) {
    Real dS = Real(u(rng)) * spread;
    Real dphi = Real(u(rng)) * spread;
    auto rec = detail::record_orbit(H, sys, nf, detail::saddle_state(sys, dS, dphi), loops,
                                    t_max, cfg);
    rec.fli_value = fli(H, eps, detail::saddle_state(sys, dS, dphi), fli_T, cfg);
    if (rec.fli_value > fli_threshold && !rec.escaped) {
      ++out.chaotic;
      for (Real j : rec.jumps) {
        out.max_jump = std::max(out.max_jump, std::abs(j));
        sum += std::abs(j);
        ++count;
      }
    }
    out.orbits.push_back(std::move(rec));
  }
  if (count) out.mean_jump = sum / Real(count);
  return out;
}

/// One refinement stage of the ballistic search.
template <class Real>
struct BallisticStage {
  Real center = 0, width = 0;        // phi_1 grid of this stage
  Real best_phi = 0, best_jump = 0;  // selected orbit
  std::size_t positive = 0, negative = 0;  // jump signs of the others
};

template <class Real>
struct BallisticResult {
  std::vector<BallisticStage<Real>> stages;
  OrbitRecord<Real> best;  // final orbit, integrated through all loops
  Real net_jump = 0;
  Real speed = 0;     // |net jump| / elapsed time
  int same_sign = 0;  // longest run of same-sign jumps of the final orbit
};

/// Iterative ballistic-orbit construction: stage s integrates `grid` orbits
/// on a 1-D phi_1 grid of width width0 * shrink^(s-1) around the current
/// best phase for s circulations, and recenters on the phase with the
/// largest same-sign net drift.  The non-selected orbits behave as a random
/// walk, which the per-stage sign counts expose.
template <class Real>
BallisticResult<Real> ballistic_search(const HamiltonianSpec<Real>& H,
                                       const AdaptedSystem<Real>& sys,
                                       const NormalFormResult<Real>& nf, int grid, int depth,
                                       Real width0, Real shrink, Real t_max_per_loop,
                                       const IntegratorConfig& cfg) {
  BallisticResult<Real> out;
  Real center = 0, width = width0;
  int sign = 0;
  for (int stage = 1; stage <= depth; ++stage) {
    BallisticStage<Real> st;
    st.center = center;
    st.width = width;
    Real best_score = -1;
    for (int g = 0; g < grid; ++g) {
      Real phi1 = center + width * (Real(g) / (grid - 1) - Real(0.5));
      auto rec = detail::record_orbit(H, sys, nf, detail::saddle_state(sys, Real(0), phi1),
                                      stage, Real(stage) * t_max_per_loop, cfg,
                                      std::size_t(1) << 30);
      Real net = 0;
      bool coherent = !rec.jumps.empty() && !rec.escaped;
      for (Real j : rec.jumps) {
        net += j;
        if (sign != 0 && j * sign <= 0) coherent = false;
      }
      (net > 0 ? st.positive : st.negative)++;
      if (coherent && std::abs(net) > best_score) {
        best_score = std::abs(net);
        st.best_phi = phi1;
        st.best_jump = net;
      }
    }
    if (best_score < 0) break;  // precision exhausted: no coherent orbit left
    if (sign == 0) sign = st.best_jump > 0 ? 1 : -1;
    (st.best_jump > 0 ? st.positive : st.negative)--;  // exclude the selected one
    center = st.best_phi;
    width *= shrink;
    out.stages.push_back(st);
  }
  if (!out.stages.empty()) {
    int loops = int(out.stages.size());
    out.best = detail::record_orbit(H, sys, nf, detail::saddle_state(sys, Real(0), center),
                                    loops, Real(loops) * t_max_per_loop, cfg);
    int run = 0, sgn = 0;
    for (Real j : out.best.jumps) {
      int js = j > 0 ? 1 : -1;
      run = (js == sgn) ? run + 1 : 1;
      sgn = js;
      out.same_sign = std::max(out.same_sign, run);
      out.net_jump += j;
    }
    if (out.best.loop_t.size() > 1)
      out.speed = std::abs(out.net_jump) / (out.best.loop_t.back() - out.best.loop_t.front());
  }
  return out;
}

/// FLI on a 2-D action grid at fixed angles: the resonance-web picture.
template <class Real>
std::vector<Real> fli_map(const HamiltonianSpec<Real>& H, Real eps, int axis_a, int axis_b,
                          std::array<Real, kMaxVars> base_I, Real lo_a, Real hi_a, Real lo_b,
                          Real hi_b, int na, int nb, Real T, const IntegratorConfig& cfg) {
  std::vector<Real> out(std::size_t(na) * nb);
  for (int ia = 0; ia < na; ++ia)
    for (int ib = 0; ib < nb; ++ib) {
      PhaseState<Real> s;
      s.I = base_I;
      s.I[axis_a] = lo_a + (hi_a - lo_a) * Real(ia) / std::max(1, na - 1);
      s.I[axis_b] = lo_b + (hi_b - lo_b) * Real(ib) / std::max(1, nb - 1);
      out[std::size_t(ia) * nb + ib] = fli(H, eps, s, T, cfg);
    }
  return out;
}

}  // namespace driftlab
