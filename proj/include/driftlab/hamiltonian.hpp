#pragma once

// Near-integrable Hamiltonians H(I, psi) = H0(I) + eps * f(psi).
// H0 is a polynomial in the actions; the perturbation is described both
// spectrally (Fourier coefficients, for the normal form) and pointwise
// (value/gradient/Hessian, for the symplectic integrator).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "driftlab/series.hpp"

namespace driftlab {

template <class Real>
struct ActionPolynomial {
  struct Mono {
    std::array<int, kMaxVars> e{};
    Real c{};
  };
  int n = 3;
  std::vector<Mono> monos;

  Real eval(const std::array<Real, kMaxVars>& I) const {
    Real s = 0;
    for (const auto& m : monos) {
      Real t = m.c;
      for (int i = 0; i < n; ++i)
        for (int q = 0; q < m.e[i]; ++q) t *= I[i];
      s += t;
    }
    return s;
  }
  std::array<Real, kMaxVars> grad(const std::array<Real, kMaxVars>& I) const {
    std::array<Real, kMaxVars> g{};
    for (const auto& m : monos)
      for (int j = 0; j < n; ++j) {
        if (m.e[j] == 0) continue;
        Real t = m.c * Real(m.e[j]);
        for (int i = 0; i < n; ++i) {
          int e = m.e[i] - (i == j ? 1 : 0);
          for (int q = 0; q < e; ++q) t *= I[i];
        }
        g[j] += t;
      }
    return g;
  }
  std::array<std::array<Real, kMaxVars>, kMaxVars> hess(const std::array<Real, kMaxVars>& I) const {
    std::array<std::array<Real, kMaxVars>, kMaxVars> h{};
    for (const auto& m : monos)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          int f = (j == l) ? m.e[j] * (m.e[j] - 1) : m.e[j] * m.e[l];
          if (f == 0) continue;
          Real t = m.c * Real(f);
          for (int i = 0; i < n; ++i) {
            int e = m.e[i] - (i == j ? 1 : 0) - (i == l ? 1 : 0);
            if (e < 0) { t = 0; break; }
            for (int q = 0; q < e; ++q) t *= I[i];
          }
          h[j][l] += t;
        }
    return h;
  }
};

template <class Real>
struct HamiltonianSpec {
  std::string name;
  int n = 3;
  ActionPolynomial<Real> h0;
  double mu = 1.0;  ///< angular analyticity width of the perturbation

  /// Fourier coefficient of f at integer mode m (exponential convention).
  std::function<Real(const std::array<int, kMaxVars>&)> fourier_coeff;

  /// Pointwise perturbation for direct integration.
  std::function<Real(const std::array<Real, kMaxVars>&)> f_value;
  std::function<std::array<Real, kMaxVars>(const std::array<Real, kMaxVars>&)> f_grad;
  std::function<std::array<std::array<Real, kMaxVars>, kMaxVars>(const std::array<Real, kMaxVars>&)>
      f_hess;
};

namespace detail {

// Fourier coefficients of 1/(lambda + cos x1 + ... + cos xd):
//   c(m) = (-1)^{sum |m_i|} Int_0^inf exp(-lambda t) prod I_{|m_i|}(t) dt,
// evaluated on a fixed composite Gauss-Legendre grid with tabulated
// modified Bessel functions.
template <class Real>
class InverseCosineCoeffs {
 public:
  InverseCosineCoeffs(int d, double lambda, int max_order = 80) : d_(d), lambda_(lambda) {
    // 20-point Gauss-Legendre per panel, 64 panels on [0, 80].
    static constexpr double x20[10] = {
        0.076526521133497333755, 0.227785851141645078080, 0.373706088715419560673,
        0.510867001950827098004, 0.636053680726515025453, 0.746331906460150792614,
        0.839116971822218823395, 0.912234428251325905868, 0.963971927277913791268,
        0.993128599185094924786};
    static constexpr double w20[10] = {
        0.152753387130725850698, 0.149172986472603746788, 0.142096109318382051329,
        0.131688638449176626898, 0.118194531961518417312, 0.101930119817240435037,
        0.083276741576704748725, 0.062672048334109063570, 0.040601429800386941331,
        0.017614007139152118312};
    const int panels = 64;
    const double tmax = 80.0;
    const double h = tmax / panels;
    nodes_.reserve(panels * 20);
    weights_.reserve(panels * 20);
    for (int p = 0; p < panels; ++p) {
      double mid = (p + 0.5) * h;
      for (int i = 0; i < 10; ++i) {
        nodes_.push_back(mid - 0.5 * h * x20[i]);
        weights_.push_back(0.5 * h * w20[i]);
        nodes_.push_back(mid + 0.5 * h * x20[i]);
        weights_.push_back(0.5 * h * w20[i]);
      }
    }
    bessel_.resize(max_order + 1);
    for (int k = 0; k <= max_order; ++k) {
      bessel_[k].resize(nodes_.size());
      for (std::size_t i = 0; i < nodes_.size(); ++i)
        bessel_[k][i] = std::cyl_bessel_i(Real(k), Real(nodes_[i]));
    }
  }

  Real operator()(const std::array<int, kMaxVars>& m) const {
    std::array<int, kMaxVars> a{};
    int total = 0;
    for (int i = 0; i < d_; ++i) {
      a[i] = std::abs(m[i]);
      total += a[i];
      if (a[i] >= static_cast<int>(bessel_.size()))
        throw std::out_of_range("fourier coefficient order beyond tabulated range");
    }
    std::array<int, kMaxVars> srt = a;
    std::sort(srt.begin(), srt.begin() + d_);
    std::uint64_t ck = 0;
    for (int i = 0; i < d_; ++i) ck = ck * 256 + srt[i];
    auto it = cache_.find(ck);
    if (it != cache_.end()) return it->second;
    Real sum = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Real t = Real(weights_[i]) * std::exp(Real(-lambda_) * Real(nodes_[i]));
      for (int j = 0; j < d_; ++j) t *= bessel_[a[j]][i];
      sum += t;
    }
    if (total % 2 != 0) sum = -sum;
    cache_.emplace(ck, sum);
    return sum;
  }

 private:
  int d_;
  double lambda_;
  std::vector<double> nodes_, weights_;
  std::vector<std::vector<Real>> bessel_;
  mutable std::map<std::uint64_t, Real> cache_;
};

}  // namespace detail

/// Three rotators coupled through an inverse-cosine potential:
///   H0 = I1^2/2 - I2^2/2 + I2^3/(3 pi) + pi I3,
///   f  = 1/(4 + cos psi1 + cos psi2 + cos psi3).
template <class Real>
HamiltonianSpec<Real> make_coupled_rotators() {
  HamiltonianSpec<Real> H;
  H.name = "coupled_rotators";
  H.n = 3;
  const Real pi = Real(3.14159265358979323846264338327950288L);
  H.h0.n = 3;
  H.h0.monos = {{{2, 0, 0}, Real(0.5)},
                {{0, 2, 0}, Real(-0.5)},
                {{0, 3, 0}, Real(1) / (Real(3) * pi)},
                {{0, 0, 1}, pi}};
  // the potential 1/(4 + sum cos) has cosh(width) = 4/3 at the nearest
  // complex singularity when the other two angles sit at pi
  H.mu = std::acosh(4.0 / 3.0);
  auto coeffs = std::make_shared<detail::InverseCosineCoeffs<Real>>(3, 4.0);
  H.fourier_coeff = [coeffs](const std::array<int, kMaxVars>& m) { return (*coeffs)(m); };
  H.f_value = [](const std::array<Real, kMaxVars>& psi) {
    return Real(1) / (Real(4) + std::cos(psi[0]) + std::cos(psi[1]) + std::cos(psi[2]));
  };
  H.f_grad = [](const std::array<Real, kMaxVars>& psi) {
    Real den = Real(4) + std::cos(psi[0]) + std::cos(psi[1]) + std::cos(psi[2]);
    Real g = Real(1) / (den * den);
    std::array<Real, kMaxVars> out{};
    for (int i = 0; i < 3; ++i) out[i] = std::sin(psi[i]) * g;
    return out;
  };
  H.f_hess = [](const std::array<Real, kMaxVars>& psi) {
    Real den = Real(4) + std::cos(psi[0]) + std::cos(psi[1]) + std::cos(psi[2]);
    Real inv2 = Real(1) / (den * den);
    Real inv3 = inv2 / den;
    std::array<std::array<Real, kMaxVars>, kMaxVars> h{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        h[i][j] = Real(2) * std::sin(psi[i]) * std::sin(psi[j]) * inv3;
        if (i == j) h[i][j] += std::cos(psi[i]) * inv2;
      }
    return h;
  };
  return H;
}

}  // namespace driftlab
