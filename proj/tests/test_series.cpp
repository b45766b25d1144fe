#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "driftlab/series.hpp"
#include "driftlab/series_io.hpp"

using namespace driftlab;
using TFS = TaylorFourierSeries<double>;
using C = std::complex<double>;

namespace {

Grading test_grading(double jmax = 20.0) { return Grading{1.0, std::exp(-2.0), jmax}; }

TFS empty_series(double jmax = 20.0) { return TFS(3, {}, test_grading(jmax)); }

TermKey key(int p1, int p2, int p3, int nu, int k1, int k2) {
  TermKey k;
  k.p = {std::uint8_t(p1), std::uint8_t(p2), std::uint8_t(p3), 0};
  k.f = {std::int16_t(nu), std::int16_t(k1), std::int16_t(k2), 0};
  return k;
}

TFS single(TermKey k, C c, double jmax = 20.0) {
  TFS s = empty_series(jmax);
  s.add_term(k, c);
  s.canonicalize();
  return s;
}

// cos of the slow angle, exponential representation
TFS cos_sigma() {
  TFS s = empty_series();
  s.add_term(key(0, 0, 0, 1, 0, 0), C(0.5, 0));
  s.add_term(key(0, 0, 0, -1, 0, 0), C(0.5, 0));
  s.canonicalize();
  return s;
}

TFS random_series(std::mt19937_64& rng, int nterms, int max_p, int max_f, double jmax = 50.0) {
  TFS s(3, {}, test_grading(jmax));
  std::uniform_int_distribution<int> dp(0, max_p), df(-max_f, max_f);
  std::uniform_real_distribution<double> dc(-1.0, 1.0);
  for (int i = 0; i < nterms; ++i) {
    TermKey k = key(dp(rng), dp(rng), dp(rng), df(rng), df(rng), df(rng));
    s.add_term(k, C(dc(rng), dc(rng)));
  }
  s.canonicalize();
  return s;
}

double max_coeff_diff(const TFS& a, const TFS& b) {
  double m = 0;
  for (const auto& e : a.entries()) m = std::max(m, std::abs(e.c - b.coeff(TermKey::unpack(e.key))));
  for (const auto& e : b.entries()) m = std::max(m, std::abs(e.c - a.coeff(TermKey::unpack(e.key))));
  return m;
}

}  // namespace

TEST_CASE("xi_order matches the stated weight") {
  Grading g{1.0, std::exp(-2.0), 20.0};
  CHECK(xi_order(key(0, 0, 0, 0, 0, 0), g) == doctest::Approx(0.0));
  CHECK(xi_order(key(2, 1, 0, 0, 0, 0), g) == doctest::Approx(3.0));
  CHECK(xi_order(key(0, 0, 0, 1, 1, 0), g) == doctest::Approx(2.0));
  Grading bad{-1.0, 0.5, 20.0};
  CHECK_THROWS_AS(xi_order(key(0, 0, 0, 0, 0, 0), bad), std::invalid_argument);
  Grading bad2{1.0, 1.5, 20.0};
  CHECK_THROWS_AS(xi_order(key(0, 0, 0, 0, 0, 0), bad2), std::invalid_argument);
}

TEST_CASE("xi_order is additive on product keys") {
  Grading g = test_grading();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dp(0, 3), df(-4, 4);
  for (int t = 0; t < 200; ++t) {
    TermKey a = key(dp(rng), dp(rng), dp(rng), df(rng), df(rng), df(rng));
    TermKey b = key(dp(rng), dp(rng), dp(rng), df(rng), df(rng), df(rng));
    // additivity holds when no cancellation occurs in the Fourier indices
    bool cancel = false;
    for (int i = 0; i < kMaxVars; ++i)
      if (a.f[i] * b.f[i] < 0) cancel = true;
    if (cancel) continue;
    TermKey c;
    for (int i = 0; i < kMaxVars; ++i) {
      c.p[i] = a.p[i] + b.p[i];
      c.f[i] = a.f[i] + b.f[i];
    }
    CHECK(xi_order(c, g) == doctest::Approx(xi_order(a, g) + xi_order(b, g)));
  }
}

TEST_CASE("key packing round-trips and orders lexicographically") {
  TermKey a = key(1, 2, 3, -5, 7, -9);
  CHECK(TermKey::unpack(a.pack()) == a);
  CHECK(key(1, 0, 0, 0, 0, 0).pack() > key(0, 3, 3, 9, 9, 9).pack());
  CHECK(key(0, 0, 0, 1, 0, 0).pack() > key(0, 0, 0, 0, 9, 9).pack());
}

TEST_CASE("mul: exponent/index addition and absorbing zero") {
  TermKey x_eis = key(1, 0, 0, 1, 0, 0);
  TermKey x_emis = key(1, 0, 0, -1, 0, 0);
  TFS a = single(x_eis, C(1, 0));
  TFS b = single(x_emis, C(1, 0));
  TFS ab = mul(a, b);
  REQUIRE(ab.size() == 1);
  CHECK(ab.coeff(key(2, 0, 0, 0, 0, 0)) == C(1, 0));

  TFS z = empty_series();
  CHECK(mul(a, z).empty());
  CHECK(mul(z, a).empty());
}

TEST_CASE("mul: cos^2 = 1/2 + 1/2 cos 2s") {
  TFS c = cos_sigma();
  TFS c2 = mul(c, c);
  REQUIRE(c2.size() == 3);
  CHECK(c2.coeff(key(0, 0, 0, 0, 0, 0)).real() == doctest::Approx(0.5));
  CHECK(c2.coeff(key(0, 0, 0, 2, 0, 0)).real() == doctest::Approx(0.25));
  CHECK(c2.coeff(key(0, 0, 0, -2, 0, 0)).real() == doctest::Approx(0.25));
}

TEST_CASE("mul rejects mismatched centers") {
  TFS a = empty_series();
  TFS b(3, {1.0, 0.0, 0.0, 0.0}, test_grading());
  CHECK_THROWS_AS(mul(a, b), std::invalid_argument);
}

TEST_CASE("mul truncates at jmax") {
  TFS a = single(key(3, 0, 0, 0, 0, 0), C(1, 0), 5.0);
  TFS b = single(key(3, 0, 0, 0, 0, 0), C(1, 0), 5.0);
  CHECK(mul(a, b).empty());
}

TEST_CASE("mul is associative and commutative without truncation") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 5; ++t) {
    TFS a = random_series(rng, 8, 2, 2);
    TFS b = random_series(rng, 8, 2, 2);
    TFS c = random_series(rng, 8, 2, 2);
    CHECK(max_coeff_diff(mul(mul(a, b), c), mul(a, mul(b, c))) < 1e-12);
    CHECK(max_coeff_diff(mul(a, b), mul(b, a)) < 1e-14);
  }
}

TEST_CASE("poisson bracket basics") {
  TFS S = single(key(1, 0, 0, 0, 0, 0), C(1, 0));
  TFS eis = single(key(0, 0, 0, 1, 0, 0), C(1, 0));

  // series independent of the slow angle commutes with S
  TFS b = single(key(0, 2, 0, 0, 1, 0), C(0.3, -0.1));
  CHECK(poisson_bracket(S, b).empty());

  // antisymmetry: {a,a} = 0
  std::mt19937_64 rng(3);
  TFS a = random_series(rng, 10, 2, 2);
  CHECK(poisson_bracket(a, a).empty());

  // {S, e^{is}} = -i e^{is} with the convention {a,b} = a_theta b_I - a_I b_theta
  TFS br = poisson_bracket(S, eis);
  REQUIRE(br.size() == 1);
  CHECK(std::abs(br.coeff(key(0, 0, 0, 1, 0, 0)) - C(0, -1)) < 1e-15);
}

TEST_CASE("poisson bracket convention matches the flow it generates") {
  // With chi = S the generated flow advances sigma; d/dt e^{is} along the
  // flow equals {e^{is}, chi}.  Finite-difference oracle on the exact flow
  // sigma(t) = sigma0 + t.
  TFS chi = single(key(1, 0, 0, 0, 0, 0), C(1, 0));
  TFS eis = single(key(0, 0, 0, 1, 0, 0), C(1, 0));
  TFS dot = poisson_bracket(eis, chi);
  double s0 = 0.7, h = 1e-6;
  C fd = (std::polar(1.0, s0 + h) - std::polar(1.0, s0 - h)) / (2 * h);
  C an = evaluate(dot, std::array<double, 4>{}, std::array<double, 4>{s0, 0, 0, 0});
  CHECK(std::abs(fd - an) < 1e-9);
}

TEST_CASE("poisson bracket satisfies Jacobi") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 4; ++t) {
    TFS a = random_series(rng, 6, 2, 1);
    TFS b = random_series(rng, 6, 2, 1);
    TFS c = random_series(rng, 6, 2, 1);
    TFS j1 = poisson_bracket(a, poisson_bracket(b, c));
    TFS j2 = poisson_bracket(b, poisson_bracket(c, a));
    TFS j3 = poisson_bracket(c, poisson_bracket(a, b));
    j1 += j2;
    j1 += j3;
    double scale = 0;
    for (const auto& e : a.entries()) scale = std::max(scale, std::abs(e.c));
    double resid = 0;
    for (const auto& e : j1.entries()) resid = std::max(resid, std::abs(e.c));
    CHECK(resid < 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("poisson bracket satisfies Leibniz") {
  std::mt19937_64 rng(23);
  TFS a = random_series(rng, 6, 2, 1);
  TFS b = random_series(rng, 6, 2, 1);
  TFS c = random_series(rng, 6, 2, 1);
  TFS lhs = poisson_bracket(mul(a, b), c);
  TFS rhs = mul(a, poisson_bracket(b, c));
  rhs += mul(poisson_bracket(a, c), b);
  CHECK(max_coeff_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("lie transform identity and inverse-composition") {
  std::mt19937_64 rng(29);
  TFS s = random_series(rng, 8, 2, 1, 12.0);
  TFS chi = random_series(rng, 5, 2, 1, 12.0);
  // keep chi at order >= 1+ so the expansion settles within jmax
  chi = chi.filtered([&](const TermKey& k, float) {
    return xi_order(k, chi.grading()) >= 1.0;
  });
  chi *= C(0.05, 0.0);

  CHECK(max_coeff_diff(lie_transform(s, empty_series(12.0), 10), s) == 0.0);
  CHECK(max_coeff_diff(lie_transform(s, chi, 0), s) == 0.0);
  CHECK_THROWS_AS(lie_transform(s, chi, -1), std::invalid_argument);

  TFS there = lie_transform(s, chi, 40);
  TFS back = lie_transform(there, mul(chi, single(key(0, 0, 0, 0, 0, 0), C(-1, 0), 12.0)), 40);
  // agreement up to terms pushed past the truncation order
  double resid = 0;
  for (const auto& e : s.entries()) {
    TermKey k = TermKey::unpack(e.key);
    if (xi_order(k, s.grading()) > 8.0) continue;
    resid = std::max(resid, std::abs(e.c - back.coeff(k)));
  }
  CHECK(resid < 1e-10);
}

TEST_CASE("majorant norm") {
  DomainSpec dom{{0.5, 1.0, 2.0}, {}};
  CHECK(majorant_norm(empty_series(), dom) == 0.0);
  TFS s = single(key(2, 0, 0, 0, 0, 0), C(-3, 0));
  CHECK(majorant_norm(s, dom) == doctest::Approx(3 * 0.25));
  DomainSpec with_widths{{0.5, 1.0, 2.0}, {0.1, 0.2, 0.0}};
  TFS t = single(key(0, 0, 0, 2, -1, 0), C(0, 1));
  CHECK(majorant_norm(t, with_widths) == doctest::Approx(std::exp(0.1 * 2 + 0.2 * 1)));
  DomainSpec bad{{0.5, -1.0, 2.0}, {}};
  CHECK_THROWS_AS(majorant_norm(s, bad), std::invalid_argument);
}

TEST_CASE("majorant norm is sub-multiplicative") {
  std::mt19937_64 rng(31);
  DomainSpec dom{{0.3, 0.7, 1.1}, {0.05, 0.1, 0.15}};
  for (int t = 0; t < 6; ++t) {
    TFS a = random_series(rng, 10, 2, 2);
    TFS b = random_series(rng, 10, 2, 2);
    CHECK(majorant_norm(mul(a, b), dom) <=
          majorant_norm(a, dom) * majorant_norm(b, dom) * (1 + 1e-12));
  }
}

TEST_CASE("evaluate") {
  std::array<double, 4> acts{0.2, -0.1, 0.4, 0};
  std::array<double, 4> angs{1.0, 2.0, 3.0, 0};
  CHECK(std::abs(evaluate(empty_series(), acts, angs)) == 0.0);
  TFS c = single(key(0, 0, 0, 0, 0, 0), C(2.5, -1));
  CHECK(evaluate(c, acts, angs) == C(2.5, -1));
  double pi3 = std::acos(-1.0) / 3.0;
  auto v = evaluate(cos_sigma(), acts, std::array<double, 4>{pi3, 0, 0, 0});
  CHECK(v.real() == doctest::Approx(0.5));
  CHECK(std::abs(v.imag()) < 1e-15);
}

TEST_CASE("reality invariant preserved by arithmetic") {
  std::mt19937_64 rng(37);
  auto make_real = [&](int nterms) {
    TFS s = empty_series(50.0);
    std::uniform_int_distribution<int> dp(0, 2), df(-2, 2);
    std::uniform_real_distribution<double> dc(-1.0, 1.0);
    for (int i = 0; i < nterms; ++i) {
      TermKey k = key(dp(rng), dp(rng), dp(rng), df(rng), df(rng), df(rng));
      C c(dc(rng), dc(rng));
      s.add_term(k, c);
      for (auto& f : k.f) f = -f;
      s.add_term(k, std::conj(c));
    }
    s.canonicalize();
    return s;
  };
  TFS a = make_real(8), b = make_real(8);
  REQUIRE(a.is_real_symmetric(1e-14));
  CHECK(mul(a, b).is_real_symmetric(1e-12));
  CHECK(poisson_bracket(a, b).is_real_symmetric(1e-12));
  CHECK(lie_transform(a, b, 6).is_real_symmetric(1e-10));
}

TEST_CASE("derivatives") {
  TFS s = single(key(2, 1, 0, 3, -1, 0), C(1, 1));
  TFS dS = derivative_action(s, 0);
  CHECK(dS.coeff(key(1, 1, 0, 3, -1, 0)) == C(2, 2));
  TFS dphi = derivative_angle(s, 1);
  CHECK(dphi.coeff(key(2, 1, 0, 3, -1, 0)) == C(1, 1) * C(0, -1));
}

TEST_CASE("text serialization round-trips") {
  std::mt19937_64 rng(41);
  TFS s = random_series(rng, 25, 3, 4);
  std::string txt = to_text(s);
  TFS r = from_text<double>(txt);
  CHECK(r.vars() == s.vars());
  CHECK(r.size() == s.size());
  CHECK(max_coeff_diff(s, r) < 1e-25);
  // grades (including any eps-power bookkeeping) survive the round trip
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(r.entries()[i].grade == doctest::Approx(s.entries()[i].grade).epsilon(1e-6));
}

TEST_CASE("text serialization preserves eps powers") {
  TFS s = empty_series();
  s.add_term(key(0, 0, 0, 1, 1, 0), C(0.25, 0), 1);
  s.add_term(key(1, 0, 0, 0, 0, 0), C(1, 0), 0);
  s.canonicalize();
  TFS r = from_text<double>(to_text(s));
  REQUIRE(r.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(r.entries()[i].grade == s.entries()[i].grade);
}

TEST_CASE("json serialization round-trips") {
  std::mt19937_64 rng(43);
  TFS s = random_series(rng, 15, 3, 4);
  TFS r = from_json<double>(to_json(s));
  CHECK(max_coeff_diff(s, r) < 1e-14);
  CHECK(r.grading() == s.grading());
}

TEST_CASE("parse errors are reported") {
  CHECK_THROWS_AS(from_text<double>("garbage"), std::runtime_error);
  CHECK_THROWS_AS(from_text<double>("# taylor-fourier-series v1\nvars 9\n"), std::runtime_error);
}
