#pragma once

// Text and JSON round-trip formats for Taylor-Fourier series.
//
// Text layout:
//   # taylor-fourier-series v1
//   vars <n>
//   center <c1> ... <cn>
//   grading <mu> <eps> <jmax>
//   terms <count>
//   <p1> ... <pn> <nu> <k1> ... <k_{n-1}> <re> <im> [epspow]
//
// The optional trailing integer restores the eps-power part of a term's
// formal order; it is omitted when zero.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "driftlab/series.hpp"

namespace driftlab {

namespace detail {
inline std::string fmt_real(long double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}
inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Formal order carried beyond the key's own weight (eps powers, index
// cancellation in products).  Stored so reloaded series keep their grading.
template <class Real>
double grade_excess(const typename TaylorFourierSeries<Real>::Entry& e, const Grading& g) {
  TermKey k = TermKey::unpack(e.key);
  double base = k.taylor_degree() + g.fourier_weight() * g.fourier_order(k.f);
  return static_cast<double>(e.grade) - base;
}
inline std::string fmt_grade(double v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace detail

template <class Real>
std::string to_text(const TaylorFourierSeries<Real>& s) {
  if (!s.is_canonical()) throw std::logic_error("to_text: series not canonical");
  const int n = s.vars();
  std::string out = "# taylor-fourier-series v1\n";
  out += "vars " + std::to_string(n) + "\n";
  out += "center";
  for (int i = 0; i < n; ++i) out += " " + detail::fmt_real(s.center()[i]);
  out += "\n";
  out += "grading " + detail::fmt_real(s.grading().mu) + " " + detail::fmt_real(s.grading().eps) +
         " " + detail::fmt_real(s.grading().jmax) + " " +
         detail::fmt_real(s.grading().eps_weight) + "\n";
  {
    Grading ident;
    if (s.grading().index_map != ident.index_map) {
      out += "indexmap";
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          out += " " + std::to_string(int(s.grading().index_map[i][j]));
      out += "\n";
    }
  }
  out += "terms " + std::to_string(s.size()) + "\n";
  for (const auto& e : s.entries()) {
    TermKey k = TermKey::unpack(e.key);
    std::string line;
    for (int i = 0; i < n; ++i) line += std::to_string(int(k.p[i])) + " ";
    for (int i = 0; i < n; ++i) line += std::to_string(int(k.f[i])) + " ";
    line += detail::fmt_real(e.c.real()) + " " + detail::fmt_real(e.c.imag());
    double x = detail::grade_excess<Real>(e, s.grading());
    if (std::abs(x) > 1e-6) line += " " + detail::fmt_grade(x);
    out += line + "\n";
  }
  return out;
}

template <class Real>
TaylorFourierSeries<Real> from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  auto expect = [&](const char* want) {
    if (!(in >> tok) || tok != want)
      throw std::runtime_error(std::string("series parse: expected '") + want + "'");
  };
  if (!std::getline(in, tok) || tok.rfind("# taylor-fourier-series", 0) != 0)
    throw std::runtime_error("series parse: bad magic line");
  expect("vars");
  int n;
  if (!(in >> n) || n < 1 || n > kMaxVars) throw std::runtime_error("series parse: bad vars");
  expect("center");
  std::array<Real, kMaxVars> center{};
  for (int i = 0; i < n; ++i) {
    long double v;
    if (!(in >> v)) throw std::runtime_error("series parse: bad center");
    center[i] = static_cast<Real>(v);
  }
  expect("grading");
  Grading g;
  if (!(in >> g.mu >> g.eps >> g.jmax)) throw std::runtime_error("series parse: bad grading");
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream rs(rest);
    double w;
    if (rs >> w) g.eps_weight = w;
  }
  if (!(in >> tok)) throw std::runtime_error("series parse: truncated header");
  if (tok == "indexmap") {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        int v;
        if (!(in >> v)) throw std::runtime_error("series parse: bad indexmap");
        g.index_map[i][j] = static_cast<std::int8_t>(v);
      }
    if (!(in >> tok)) throw std::runtime_error("series parse: truncated header");
  }
  if (tok != "terms") throw std::runtime_error("series parse: expected 'terms'");
  std::size_t count;
  if (!(in >> count)) throw std::runtime_error("series parse: bad term count");
  std::getline(in, tok);

  TaylorFourierSeries<Real> s(n, center, g);
  for (std::size_t t = 0; t < count; ++t) {
    std::string line;
    do {
      if (!std::getline(in, line)) throw std::runtime_error("series parse: truncated terms");
    } while (line.empty() || line[0] == '#');
    std::istringstream ls(line);
    TermKey k;
    for (int i = 0; i < n; ++i) {
      int p;
      if (!(ls >> p) || p < 0 || p > 63) throw std::runtime_error("series parse: bad exponent");
      k.p[i] = static_cast<std::uint8_t>(p);
    }
    for (int i = 0; i < n; ++i) {
      int f;
      if (!(ls >> f) || f < -127 || f > 127) throw std::runtime_error("series parse: bad index");
      k.f[i] = static_cast<std::int16_t>(f);
    }
    long double re, im;
    if (!(ls >> re >> im)) throw std::runtime_error("series parse: bad coefficient");
    double excess = 0;
    ls >> excess;
    double base = k.taylor_degree() + g.fourier_weight() * g.fourier_order(k.f);
    s.add_raw(k.pack(), std::complex<Real>(static_cast<Real>(re), static_cast<Real>(im)),
              static_cast<float>(base + excess));
  }
  s.canonicalize();
  return s;
}

template <class Real>
nlohmann::ordered_json to_json(const TaylorFourierSeries<Real>& s) {
  if (!s.is_canonical()) throw std::logic_error("to_json: series not canonical");
  const int n = s.vars();
  nlohmann::ordered_json j;
  j["format"] = "taylor-fourier-series";
  j["version"] = 1;
  j["vars"] = n;
  auto center = nlohmann::ordered_json::array();
  for (int i = 0; i < n; ++i) center.push_back(static_cast<double>(s.center()[i]));
  j["center"] = center;
  j["grading"] = {{"mu", s.grading().mu},
                  {"eps", s.grading().eps},
                  {"jmax", s.grading().jmax},
                  {"eps_weight", s.grading().eps_weight}};
  {
    Grading ident;
    if (s.grading().index_map != ident.index_map) {
      auto rows = nlohmann::ordered_json::array();
      for (int i = 0; i < n; ++i) {
        auto row = nlohmann::ordered_json::array();
        for (int jj = 0; jj < n; ++jj) row.push_back(int(s.grading().index_map[i][jj]));
        rows.push_back(std::move(row));
      }
      j["grading"]["index_map"] = std::move(rows);
    }
  }
  auto terms = nlohmann::ordered_json::array();
  for (const auto& e : s.entries()) {
    TermKey k = TermKey::unpack(e.key);
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int i = 0; i < n; ++i) row.push_back(int(k.p[i]));
    for (int i = 0; i < n; ++i) row.push_back(int(k.f[i]));
    row.push_back(static_cast<double>(e.c.real()));
    row.push_back(static_cast<double>(e.c.imag()));
    double x = detail::grade_excess<Real>(e, s.grading());
    if (std::abs(x) > 1e-6) row.push_back(x);
    terms.push_back(std::move(row));
  }
  j["terms"] = std::move(terms);
  return j;
}

template <class Real>
TaylorFourierSeries<Real> from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "taylor-fourier-series")
    throw std::runtime_error("series json: bad format tag");
  int n = j.at("vars").get<int>();
  if (n < 1 || n > kMaxVars) throw std::runtime_error("series json: bad vars");
  std::array<Real, kMaxVars> center{};
  for (int i = 0; i < n; ++i) center[i] = static_cast<Real>(j.at("center").at(i).get<double>());
  Grading g{j.at("grading").at("mu").get<double>(), j.at("grading").at("eps").get<double>(),
            j.at("grading").at("jmax").get<double>(),
            j.at("grading").value("eps_weight", 2.0)};
  if (j.at("grading").contains("index_map")) {
    const auto& rows = j.at("grading").at("index_map");
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj)
        g.index_map[i][jj] = static_cast<std::int8_t>(rows.at(i).at(jj).get<int>());
  }
  TaylorFourierSeries<Real> s(n, center, g);
  for (const auto& row : j.at("terms")) {
    if (static_cast<int>(row.size()) < 2 * n + 2) throw std::runtime_error("series json: short term row");
    TermKey k;
    for (int i = 0; i < n; ++i) k.p[i] = static_cast<std::uint8_t>(row.at(i).get<int>());
    for (int i = 0; i < n; ++i) k.f[i] = static_cast<std::int16_t>(row.at(n + i).get<int>());
    std::complex<Real> c(static_cast<Real>(row.at(2 * n).get<double>()),
                         static_cast<Real>(row.at(2 * n + 1).get<double>()));
    double excess =
        static_cast<int>(row.size()) > 2 * n + 2 ? row.at(2 * n + 2).get<double>() : 0.0;
    double base = k.taylor_degree() + g.fourier_weight() * g.fourier_order(k.f);
    s.add_raw(k.pack(), c, static_cast<float>(base + excess));
  }
  s.canonicalize();
  return s;
}

template <class Real>
void save_series(const TaylorFourierSeries<Real>& s, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << to_text(s);
}

template <class Real>
TaylorFourierSeries<Real> load_series(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_text<Real>(ss.str());
}

}  // namespace driftlab
