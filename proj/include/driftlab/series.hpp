#pragma once

// Sparse Taylor-Fourier series: polynomial in action deviations times
// exponential Fourier series in the angles, with a formal grading that
// controls truncation of all arithmetic.
//
// A term is  c * (I1-c1)^p1 ... (In-cn)^pn * exp(i(f1*th1 + ... + fn*thn))
// with complex coefficient c.  The first angle is by convention the slow
// (resonant) one, so f[0] is usually written "nu" and f[1..] "k".

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace driftlab {

inline constexpr int kMaxVars = 4;  // action-angle pairs supported by the key packing

/// Formal grading of a series: a term with exponents p and Fourier
/// indices (nu,k) has order  sum(p) + 2*mu*(|nu|+sum|k|)/log(1/eps),
/// plus eps_weight units for every power of eps attached at construction
/// time.  Near a resonance the actions scale as sqrt(eps), so a power of
/// eps is worth two action units; any eps_weight >= 1 also keeps the
/// iteration order strictly increasing (brackets of action-carrying
/// generators against the resonant potential land strictly above the
/// order being eliminated).
struct Grading {
  double mu = 1.0;        ///< analyticity width of the perturbation (radians)
  double eps = 0.5;       ///< perturbation parameter
  double jmax = 8.0;      ///< truncation order
  double eps_weight = 2.0;  ///< formal order carried by one power of eps
  /// Integer map applied to Fourier indices before counting their order.
  /// The analyticity width mu is a property of the perturbation in its
  /// original angles; series written in linearly transformed angles set
  /// this to the transform so the weight still reflects coefficient decay.
  std::array<std::array<std::int8_t, kMaxVars>, kMaxVars> index_map{{{1, 0, 0, 0},
                                                                     {0, 1, 0, 0},
                                                                     {0, 0, 1, 0},
                                                                     {0, 0, 0, 1}}};

  /// Grading weight of one unit of total Fourier order.
  double fourier_weight() const {
    if (eps == 0.0) return 0.0;
    return 2.0 * mu / std::log(1.0 / eps);
  }
  /// Total Fourier order of an index vector, counted through index_map.
  int fourier_order(const std::array<std::int16_t, kMaxVars>& f) const {
    int s = 0;
    for (int i = 0; i < kMaxVars; ++i) {
      int v = 0;
      for (int j = 0; j < kMaxVars; ++j) v += index_map[i][j] * f[j];
      s += v < 0 ? -v : v;
    }
    return s;
  }
  void validate() const {
    if (!(eps >= 0.0) || eps >= 1.0) throw std::invalid_argument("Grading: eps must lie in [0,1)");
    if (!(mu > 0.0)) throw std::invalid_argument("Grading: mu must be positive");
  }
  bool operator==(const Grading& o) const {
    return mu == o.mu && eps == o.eps && jmax == o.jmax && eps_weight == o.eps_weight &&
           index_map == o.index_map;
  }
};

/// Domain used by the majorant norm: radii for the action deviations and
/// (optional, default zero) analyticity widths for the angles.
struct DomainSpec {
  std::vector<double> action_radii;
  std::vector<double> angle_widths;  // may be empty meaning all-zero

  void validate(int n) const {
    if (static_cast<int>(action_radii.size()) != n)
      throw std::invalid_argument("DomainSpec: need one radius per action");
    for (double r : action_radii)
      if (!(r > 0.0)) throw std::invalid_argument("DomainSpec: radii must be positive");
    if (!angle_widths.empty() && static_cast<int>(angle_widths.size()) != n)
      throw std::invalid_argument("DomainSpec: need one width per angle (or none)");
    for (double w : angle_widths)
      if (w < 0.0) throw std::invalid_argument("DomainSpec: widths must be non-negative");
  }
};

/// Exponents and Fourier indices of a single term.
struct TermKey {
  std::array<std::uint8_t, kMaxVars> p{};  // action exponents
  std::array<std::int16_t, kMaxVars> f{};  // Fourier indices; f[0] = nu

  int nu() const { return f[0]; }

  /// Packs into a single integer whose natural order is lexicographic in
  /// (p..., f...).  Exponents up to 63, indices in [-127,127].
  std::uint64_t pack() const {
    std::uint64_t v = 0;
    for (int i = 0; i < kMaxVars; ++i) v = (v << 6) | (p[i] & 0x3f);
    for (int i = 0; i < kMaxVars; ++i) v = (v << 8) | static_cast<std::uint8_t>(f[i] + 128);
    return v;
  }
  static TermKey unpack(std::uint64_t v) {
    TermKey k;
    for (int i = kMaxVars - 1; i >= 0; --i) {
      k.f[i] = static_cast<std::int16_t>(static_cast<int>(v & 0xff) - 128);
      v >>= 8;
    }
    for (int i = kMaxVars - 1; i >= 0; --i) {
      k.p[i] = static_cast<std::uint8_t>(v & 0x3f);
      v >>= 6;
    }
    return k;
  }
  bool operator==(const TermKey& o) const { return p == o.p && f == o.f; }

  int taylor_degree() const {
    int s = 0;
    for (int i = 0; i < kMaxVars; ++i) s += p[i];
    return s;
  }
  int fourier_order() const {
    int s = 0;
    for (int i = 0; i < kMaxVars; ++i) s += std::abs(f[i]);
    return s;
  }
};

/// Formal order of a key under a grading (the eps-power contribution, if
/// any, is tracked separately by the series arithmetic).
inline double xi_order(const TermKey& key, const Grading& g) {
  if (!(g.eps > 0.0) || g.eps >= 1.0) throw std::invalid_argument("xi_order: eps must lie in (0,1)");
  if (!(g.mu > 0.0)) throw std::invalid_argument("xi_order: mu must be positive");
  return key.taylor_degree() + g.fourier_weight() * g.fourier_order(key.f);
}

namespace detail {
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
struct KeyHash {
  std::size_t operator()(std::uint64_t v) const { return static_cast<std::size_t>(mix64(v)); }
};

template <class Real> struct PruneDefault;
template <> struct PruneDefault<double> { static constexpr double value = 1e-30; };
template <> struct PruneDefault<long double> { static constexpr long double value = 1e-60L; };
}  // namespace detail

template <class Real>
class TaylorFourierSeries {
 public:
  using Complex = std::complex<Real>;
  struct Entry {
    std::uint64_t key;
    Complex c;
    float grade;  // formal order including eps-power bookkeeping
  };

  TaylorFourierSeries() = default;
  TaylorFourierSeries(int n, std::array<Real, kMaxVars> center, Grading grading)
      : n_(n), center_(center), grading_(grading) {
    if (n < 1 || n > kMaxVars) throw std::invalid_argument("series: 1 <= n <= 4 required");
  }

  int vars() const { return n_; }
  const std::array<Real, kMaxVars>& center() const { return center_; }
  const Grading& grading() const { return grading_; }
  const std::vector<Entry>& entries() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  static Real prune_threshold() { return detail::PruneDefault<Real>::value; }

  /// Accumulates one term; eps_power adds eps_weight units of formal order per power.
  /// Call canonicalize() after a batch of insertions.
  void add_term(const TermKey& key, Complex c, int eps_power = 0) {
    double g = key.taylor_degree() + grading_.fourier_weight() * grading_.fourier_order(key.f) +
               grading_.eps_weight * eps_power;
    add_raw(key.pack(), c, static_cast<float>(g));
  }
  void add_raw(std::uint64_t key, Complex c, float grade) {
    if (grade > grading_.jmax + kGradeTol) return;
    terms_.push_back(Entry{key, c, grade});
    dirty_ = true;
  }

  /// Sorts by key, merges duplicates, drops negligible coefficients.
  void canonicalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Entry& a, const Entry& b) { return a.key < b.key; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < terms_.size();) {
      std::uint64_t k = terms_[r].key;
      Complex c = terms_[r].c;
      float g = terms_[r].grade;
      for (++r; r < terms_.size() && terms_[r].key == k; ++r) {
        c += terms_[r].c;
        g = std::min(g, terms_[r].grade);
      }
      if (std::abs(c) > prune_threshold()) terms_[w++] = Entry{k, c, g};
    }
    terms_.resize(w);
    dirty_ = false;
  }

  bool is_canonical() const { return !dirty_; }

  Complex coeff(const TermKey& key) const {
    std::uint64_t k = key.pack();
    auto it = std::lower_bound(terms_.begin(), terms_.end(), k,
                               [](const Entry& e, std::uint64_t v) { return e.key < v; });
    if (it != terms_.end() && it->key == k) return it->c;
    return Complex{};
  }

  TaylorFourierSeries& operator+=(const TaylorFourierSeries& o) {
    require_compatible(o, "operator+=");
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    canonicalize();
    return *this;
  }
  TaylorFourierSeries& operator*=(Complex s) {
    for (auto& e : terms_) e.c *= s;
    if (std::abs(s) < Real(1)) canonicalize();
    return *this;
  }

  /// Keeps only terms satisfying the predicate on (key, grade).
  template <class Pred>
  TaylorFourierSeries filtered(Pred&& pred) const {
    TaylorFourierSeries out(n_, center_, grading_);
    for (const auto& e : terms_)
      if (pred(TermKey::unpack(e.key), e.grade)) out.terms_.push_back(e);
    out.dirty_ = false;
    return out;
  }

  void require_compatible(const TaylorFourierSeries& o, const char* op) const {
    if (n_ != o.n_ || !(grading_ == o.grading_) || center_ != o.center_)
      throw std::invalid_argument(std::string(op) + ": center/grading mismatch");
  }

  /// True when coefficients satisfy conjugate symmetry under (nu,k) -> (-nu,-k).
  bool is_real_symmetric(Real tol) const {
    Real scale = Real(0);
    for (const auto& e : terms_) scale = std::max(scale, std::abs(e.c));
    if (scale == Real(0)) return true;
    for (const auto& e : terms_) {
      TermKey k = TermKey::unpack(e.key);
      for (auto& f : k.f) f = static_cast<std::int16_t>(-f);
      if (std::abs(e.c - std::conj(coeff(k))) > tol * scale) return false;
    }
    return true;
  }

  static constexpr double kGradeTol = 1e-9;

 private:
  int n_ = 3;
  std::array<Real, kMaxVars> center_{};
  Grading grading_{};
  std::vector<Entry> terms_;
  bool dirty_ = false;
};

namespace detail {
// Accumulator used by products and brackets: hashed merge, then canonical sort.
template <class Real>
class Accumulator {
 public:
  explicit Accumulator(std::size_t hint) { map_.reserve(hint); }
  void add(std::uint64_t key, std::complex<Real> c, float grade) {
    auto [it, fresh] = map_.try_emplace(key, std::pair<std::complex<Real>, float>{c, grade});
    if (!fresh) {
      it->second.first += c;
      it->second.second = std::min(it->second.second, grade);
    }
  }
  void finalize(TaylorFourierSeries<Real>& out) {
    for (const auto& [k, v] : map_) out.add_raw(k, v.first, v.second);
    out.canonicalize();
  }

 private:
  std::unordered_map<std::uint64_t, std::pair<std::complex<Real>, float>, KeyHash> map_;
};

// Indices of entries sorted by ascending grade; lets pair loops break early.
template <class Real>
std::vector<std::uint32_t> by_grade(const TaylorFourierSeries<Real>& s) {
  std::vector<std::uint32_t> idx(s.size());
  for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& ea = s.entries()[a];
    const auto& eb = s.entries()[b];
    if (ea.grade != eb.grade) return ea.grade < eb.grade;
    return ea.key < eb.key;
  });
  return idx;
}

inline bool add_keys(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  TermKey ka = TermKey::unpack(a), kb = TermKey::unpack(b), kc;
  for (int i = 0; i < kMaxVars; ++i) {
    int p = ka.p[i] + kb.p[i];
    int f = ka.f[i] + kb.f[i];
    if (p > 63 || f < -127 || f > 127) return false;
    kc.p[i] = static_cast<std::uint8_t>(p);
    kc.f[i] = static_cast<std::int16_t>(f);
  }
  out = kc.pack();
  return true;
}
}  // namespace detail

/// Product truncated at the grading's jmax.
template <class Real>
TaylorFourierSeries<Real> mul(const TaylorFourierSeries<Real>& a, const TaylorFourierSeries<Real>& b) {
  a.require_compatible(b, "mul");
  const double jmax = a.grading().jmax + TaylorFourierSeries<Real>::kGradeTol;
  TaylorFourierSeries<Real> out(a.vars(), a.center(), a.grading());
  if (a.empty() || b.empty()) return out;
  auto bidx = detail::by_grade(b);
  detail::Accumulator<Real> acc(a.size() + b.size());
  for (const auto& ea : a.entries()) {
    for (auto ib : bidx) {
      const auto& eb = b.entries()[ib];
      float g = ea.grade + eb.grade;
      if (g > jmax) break;
      std::uint64_t key;
      if (!detail::add_keys(ea.key, eb.key, key)) continue;
      acc.add(key, ea.c * eb.c, g);
    }
  }
  acc.finalize(out);
  return out;
}

/// Canonical Poisson bracket sum_j (da/dtheta_j db/dI_j - da/dI_j db/dtheta_j),
/// truncated at jmax.
template <class Real>
TaylorFourierSeries<Real> poisson_bracket(const TaylorFourierSeries<Real>& a,
                                          const TaylorFourierSeries<Real>& b) {
  a.require_compatible(b, "poisson_bracket");
  const double jmax = a.grading().jmax + TaylorFourierSeries<Real>::kGradeTol;
  const int n = a.vars();
  TaylorFourierSeries<Real> out(n, a.center(), a.grading());
  if (a.empty() || b.empty() || &a == &b) return out;
  auto bidx = detail::by_grade(b);
  detail::Accumulator<Real> acc(a.size() + b.size());
  const std::complex<Real> I(0, 1);
  for (const auto& ea : a.entries()) {
    TermKey ka = TermKey::unpack(ea.key);
    for (auto ib : bidx) {
      const auto& eb = b.entries()[ib];
      float g = ea.grade + eb.grade - 1.0f;
      if (g > jmax) break;
      TermKey kb = TermKey::unpack(eb.key);
      std::complex<Real> cc = ea.c * eb.c;
      for (int j = 0; j < n; ++j) {
        // da/dtheta_j * db/dI_j
        if (ka.f[j] != 0 && kb.p[j] != 0) {
          TermKey kc;
          bool ok = true;
          for (int i = 0; i < kMaxVars; ++i) {
            int p = ka.p[i] + kb.p[i] - (i == j ? 1 : 0);
            int f = ka.f[i] + kb.f[i];
            if (p > 63 || f < -127 || f > 127) { ok = false; break; }
            kc.p[i] = static_cast<std::uint8_t>(p);
            kc.f[i] = static_cast<std::int16_t>(f);
          }
          if (ok) acc.add(kc.pack(), I * Real(ka.f[j]) * Real(kb.p[j]) * cc, g);
        }
        // - da/dI_j * db/dtheta_j
        if (ka.p[j] != 0 && kb.f[j] != 0) {
          TermKey kc;
          bool ok = true;
          for (int i = 0; i < kMaxVars; ++i) {
            int p = ka.p[i] + kb.p[i] - (i == j ? 1 : 0);
            int f = ka.f[i] + kb.f[i];
            if (p > 63 || f < -127 || f > 127) { ok = false; break; }
            kc.p[i] = static_cast<std::uint8_t>(p);
            kc.f[i] = static_cast<std::int16_t>(f);
          }
          if (ok) acc.add(kc.pack(), -I * Real(kb.f[j]) * Real(ka.p[j]) * cc, g);
        }
      }
    }
  }
  acc.finalize(out);
  return out;
}

/// exp(L_chi) s = sum_{j<=order} L_chi^j s / j!  with L_chi f = {f, chi}.
template <class Real>
TaylorFourierSeries<Real> lie_transform(const TaylorFourierSeries<Real>& s,
                                        const TaylorFourierSeries<Real>& chi, int order) {
  if (order < 0) throw std::invalid_argument("lie_transform: order must be >= 0");
  TaylorFourierSeries<Real> acc = s;
  TaylorFourierSeries<Real> w = s;
  for (int j = 1; j <= order; ++j) {
    w = poisson_bracket(w, chi);
    w *= std::complex<Real>(Real(1) / Real(j));
    if (w.empty()) break;
    acc += w;
  }
  return acc;
}

/// Series of absolute values weighted by the domain:
/// sum |c| prod r_i^{p_i} prod exp(width_j |f_j|).
template <class Real>
Real majorant_norm(const TaylorFourierSeries<Real>& s, const DomainSpec& dom) {
  dom.validate(s.vars());
  const int n = s.vars();
  Real total = 0;
  for (const auto& e : s.entries()) {
    TermKey k = TermKey::unpack(e.key);
    Real w = std::abs(e.c);
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < k.p[i]; ++q) w *= Real(dom.action_radii[i]);
    if (!dom.angle_widths.empty())
      for (int i = 0; i < n; ++i)
        w *= std::exp(Real(dom.angle_widths[i]) * std::abs(Real(k.f[i])));
    total += w;
  }
  return total;
}

/// Numerical value at absolute actions and angles.
template <class Real>
std::complex<Real> evaluate(const TaylorFourierSeries<Real>& s,
                            const std::array<Real, kMaxVars>& actions,
                            const std::array<Real, kMaxVars>& angles) {
  const int n = s.vars();
  std::array<Real, kMaxVars> dev{};
  for (int i = 0; i < n; ++i) dev[i] = actions[i] - s.center()[i];
  std::complex<Real> total{};
  for (const auto& e : s.entries()) {
    TermKey k = TermKey::unpack(e.key);
    Real mono = 1;
    Real phase = 0;
    for (int i = 0; i < n; ++i) {
      for (int q = 0; q < k.p[i]; ++q) mono *= dev[i];
      phase += Real(k.f[i]) * angles[i];
    }
    total += e.c * mono * std::polar(Real(1), phase);
  }
  return total;
}

/// d/dI_j (deviation variable j).
template <class Real>
TaylorFourierSeries<Real> derivative_action(const TaylorFourierSeries<Real>& s, int j) {
  TaylorFourierSeries<Real> out(s.vars(), s.center(), s.grading());
  for (const auto& e : s.entries()) {
    TermKey k = TermKey::unpack(e.key);
    if (k.p[j] == 0) continue;
    int p = k.p[j];
    k.p[j] = static_cast<std::uint8_t>(p - 1);
    out.add_raw(k.pack(), e.c * Real(p), e.grade - 1.0f);
  }
  out.canonicalize();
  return out;
}

/// d/dtheta_j.
template <class Real>
TaylorFourierSeries<Real> derivative_angle(const TaylorFourierSeries<Real>& s, int j) {
  TaylorFourierSeries<Real> out(s.vars(), s.center(), s.grading());
  const std::complex<Real> I(0, 1);
  for (const auto& e : s.entries()) {
    TermKey k = TermKey::unpack(e.key);
    if (k.f[j] == 0) continue;
    out.add_raw(e.key, e.c * I * Real(k.f[j]), e.grade);
  }
  out.canonicalize();
  return out;
}

}  // namespace driftlab
