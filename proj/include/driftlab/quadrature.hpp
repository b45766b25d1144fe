#pragma once

// Adaptive Gauss-Kronrod quadrature for real and complex integrands.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace driftlab {

namespace detail {
// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule, on [-1,1].
inline constexpr double kKronrodX[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};
}  // namespace detail

template <class Value>
struct QuadResult {
  Value value{};
  double error = 0.0;
  int evaluations = 0;
};

/// One Gauss-Kronrod panel on [a,b]; returns (estimate, error estimate).
template <class F>
auto gk15_panel(F&& f, double a, double b) {
  using Value = decltype(f(0.0));
  const double h = 0.5 * (b - a), mid = 0.5 * (a + b);
  Value kres{}, gres{};
  for (int i = 0; i < 8; ++i) {
    double dx = h * detail::kKronrodX[i];
    Value fv = (i == 7) ? f(mid) : Value(f(mid - dx) + f(mid + dx));
    kres += detail::kKronrodW[i] * fv;
    if (i % 2 == 1) gres += detail::kGaussW[i / 2] * fv;
  }
  kres *= h;
  gres *= h;
  double err = std::abs(kres - gres);
  err = std::pow(200.0 * err, 1.5);
  double scale = std::abs(kres);
  if (scale > 0 && err > scale) err = scale;
  return std::pair<Value, double>(kres, err);
}

/// Adaptive quadrature over [a,b]; splits the worst panel until the summed
/// error estimate meets abs_tol + rel_tol*|result|.
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10,
               int max_panels = 4000) {
  using Value = decltype(f(0.0));
  struct Panel {
    double a, b, err;
    Value val;
  };
  auto [v0, e0] = gk15_panel(f, a, b);
  std::vector<Panel> panels{{a, b, e0, v0}};
  QuadResult<Value> res;
  res.evaluations = 15;
  for (int iter = 0; iter < max_panels; ++iter) {
    Value total{};
    double err = 0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].val;
      err += panels[i].err;
      if (panels[i].err > panels[worst].err) worst = i;
    }
    res.value = total;
    res.error = err;
    if (err <= abs_tol + rel_tol * std::abs(total)) return res;
    Panel p = panels[worst];
    double mid = 0.5 * (p.a + p.b);
    if (mid == p.a || mid == p.b) return res;  // machine-width panel
    auto [vl, el] = gk15_panel(f, p.a, mid);
    auto [vr, er] = gk15_panel(f, mid, p.b);
    res.evaluations += 30;
    panels[worst] = Panel{p.a, mid, el, vl};
    panels.push_back(Panel{mid, p.b, er, vr});
  }
  return res;
}

/// Integral over [a,b] with integrable inverse-square-root singularities at
/// one or both endpoints, removed by the substitution x = a + (b-a) sin^2(u).
template <class F>
auto integrate_endpoint_singular(F&& f, double a, double b, double abs_tol = 1e-12,
                                 double rel_tol = 1e-10, int max_panels = 4000) {
  const double span = b - a;
  auto g = [&](double u) {
    double s = std::sin(u), c = std::cos(u);
    return f(a + span * s * s) * (2.0 * span * s * c);
  };
  constexpr double half_pi = 1.57079632679489661923;
  return integrate(g, 0.0, half_pi, abs_tol, rel_tol, max_panels);
}

}  // namespace driftlab
