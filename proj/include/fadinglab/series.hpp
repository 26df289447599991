#pragma once

// Laguerre-series engine: recursive even moments of the envelope, series
// coefficients C_n, adaptive truncation and the L2 truncation bound.
//
// Everything internal runs on normalized ("hatted") quantities
//   uhat_k = eps^k E[r^{2k}] / k!,   eps = 1 / (sum V_i^2 + omega),
// so that C_n = sum_k (-1)^k binom(n,k) uhat_k. The normalization keeps the
// recursion inside double range for any order the series can reach.
//
// The alternating sum cancels brutally for strongly specular channels; the
// pipeline runs once in compensated double and, when the observed term
// growth demands it, again in double-double or quad-double.

#include <fadinglab/errors.hpp>
#include <fadinglab/model.hpp>
#include <fadinglab/multiprec.hpp>
#include <fadinglab/specfun.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace fadinglab {

enum class PrecisionMode { standard, extended };

struct LaguerreSeries {
  double epsilon = 1.0;             // expansion scale
  std::vector<double> coeffs;       // C_0..C_M
  int truncation_order = 0;         // M
  double tail_estimate = 0.0;       // estimate of sum_{n>M} |C_n|
  PrecisionMode precision_mode = PrecisionMode::standard;

  struct Diagnostics {
    double max_term_ratio = 0.0;   // worst |term| / |C_n| seen while summing
    bool extended_only = false;    // standard and extended disagreed > 1e-8
    std::string extended_impl;     // "", "dd" or "qd"
  } diagnostics;

  int order() const { return truncation_order; }

  void validate() const {
    if (coeffs.empty() || truncation_order + 1 != static_cast<int>(coeffs.size()))
      throw consistency_error("LaguerreSeries: coefficient count mismatch");
    if (std::abs(coeffs[0] - 1.0) > 1e-12)
      throw consistency_error("LaguerreSeries: C_0 must be 1");
    if (coeffs.size() > 1 && std::abs(coeffs[1]) > 1e-10)
      throw consistency_error("LaguerreSeries: C_1 must vanish");
    if (!(tail_estimate >= 0.0)) throw consistency_error("LaguerreSeries: negative tail estimate");
    for (double c : coeffs)
      if (!std::isfinite(c)) throw consistency_error("LaguerreSeries: non-finite coefficient");
  }
};

namespace detail {

// uhat_k = eps^k E[r^{2k}] / k! for k = 0..max_k.
//
// Specular rays combine first through the binomial-square recursion written
// in normalized form, with plain magnitudes for both model kinds. The
// fluctuation is shared by all rays, so its moments E[xi^i] = (m_s)_i / m_s^i
// attach to the combined specular moment of order i at the final merge with
// the diffuse component; attaching them per ray would treat the fluctuation
// as independent across rays and disagrees with simulation for N >= 2.
template <class Real>
std::vector<Real> scaled_moment_table(const ChannelModel& model, int max_k) {
  const int K = max_k;
  const Real one(1.0);
  Real total(0.0);
  for (double v : model.specular) total = total + Real(v) * Real(v);
  total = total + Real(model.omega);
  const Real eps = one / total;

  // binomial row, updated in place per k
  std::vector<Real> binrow(K + 1, Real(0.0));
  binrow[0] = one;

  // combined specular moments s[i] = eps^i E[|S|^{2i}] / i!
  std::vector<Real> s(K + 1, Real(0.0));
  s[0] = one;
  bool first_ray = true;
  for (double v : model.specular) {
    Real vt2 = Real(v) * Real(v) * eps;
    std::vector<Real> nu(K + 1);
    nu[0] = one;
    for (int i = 1; i <= K; ++i) nu[i] = nu[i - 1] * vt2 / static_cast<double>(i);
    if (first_ray) {
      s = nu;
      first_ray = false;
      continue;
    }
    std::vector<Real> nxt(K + 1, Real(0.0));
    std::fill(binrow.begin(), binrow.end(), Real(0.0));
    binrow[0] = one;
    for (int k = 0; k <= K; ++k) {
      if (k > 0)
        for (int i = k; i >= 1; --i) binrow[i] = binrow[i] + binrow[i - 1];
      Real acc(0.0);
      for (int i = 0; i <= k; ++i) acc = acc + binrow[i] * s[i] * nu[k - i];
      nxt[k] = acc;
    }
    s = nxt;
  }

  // shared fluctuation moments
  std::vector<Real> xi(K + 1, one);
  if (model.kind == ModelKind::FMR) {
    const double ms = *model.m_s;
    for (int i = 1; i <= K; ++i) xi[i] = xi[i - 1] * ((ms + i - 1.0) / ms);
  }

  // diffuse moments d[k] = eps^k (m)_k (omega/m)^k / k!
  std::vector<Real> d(K + 1, one);
  Real omt = Real(model.omega) * eps;
  for (int k = 1; k <= K; ++k)
    d[k] = d[k - 1] * omt * ((model.m + k - 1.0) / (model.m * k));

  std::vector<Real> uhat(K + 1, Real(0.0));
  std::fill(binrow.begin(), binrow.end(), Real(0.0));
  binrow[0] = one;
  for (int k = 0; k <= K; ++k) {
    if (k > 0)
      for (int i = k; i >= 1; --i) binrow[i] = binrow[i] + binrow[i - 1];
    Real acc(0.0);
    for (int i = 0; i <= k; ++i) acc = acc + binrow[i] * s[i] * xi[i] * d[k - i];
    uhat[k] = acc;
  }
  return uhat;
}

// C_n for n = 0..M from a moment table, plus the worst term/result ratio
template <class Real>
std::vector<double> coeffs_from_moments(const std::vector<Real>& uhat, int M,
                                        double* max_term_ratio) {
  std::vector<Real> binrow(M + 1, Real(0.0));
  binrow[0] = Real(1.0);
  std::vector<double> C(M + 1);
  double worst = 0.0;
  for (int n = 0; n <= M; ++n) {
    if (n > 0)
      for (int i = n; i >= 1; --i) binrow[i] = binrow[i] + binrow[i - 1];
    Real acc(0.0);
    double max_term = 0.0;
    for (int k = 0; k <= n; ++k) {
      Real term = binrow[k] * uhat[k];
      max_term = std::max(max_term, std::abs(to_double(term)));
      acc = (k % 2 == 0) ? acc + term : acc - term;
    }
    C[n] = to_double(acc);
    double ratio = max_term / std::max(std::abs(C[n]), 1e-300);
    worst = std::max(worst, std::min(ratio, 1e300));
  }
  if (max_term_ratio) *max_term_ratio = worst;
  return C;
}

// standard-mode variant: compensated double summation, reporting per-run
// maxima of |term| so the caller can decide whether to escalate. The ratio
// skips C_0 and C_1: those are pinned by construction and their terms are
// order one, so they say nothing about cancellation damage.
inline std::vector<double> coeffs_standard(const std::vector<double>& uhat, int M,
                                           double* max_term_abs, double* max_term_ratio) {
  std::vector<double> binrow(M + 1, 0.0);
  binrow[0] = 1.0;
  std::vector<double> C(M + 1);
  double worst_ratio = 0.0, worst_abs = 0.0;
  for (int n = 0; n <= M; ++n) {
    if (n > 0)
      for (int i = n; i >= 1; --i) binrow[i] += binrow[i - 1];
    comp_sum acc;
    double max_term = 0.0;
    for (int k = 0; k <= n; ++k) {
      double term = binrow[k] * uhat[k];
      max_term = std::max(max_term, std::abs(term));
      acc.add((k % 2 == 0) ? term : -term);
    }
    C[n] = acc.value();
    worst_abs = std::max(worst_abs, max_term);
    if (n >= 2)
      worst_ratio = std::max(worst_ratio, max_term / std::max(std::abs(C[n]), 1e-300));
  }
  if (max_term_abs) *max_term_abs = worst_abs;
  if (max_term_ratio) *max_term_ratio = worst_ratio;
  return C;
}

// geometric tail extrapolation from the last (up to) five coefficients,
// ratio capped at 0.99
inline double tail_from_coeffs(const std::vector<double>& C, int M) {
  int lo = std::max(1, M - 4);
  double num = 0.0, den = 0.0;
  for (int n = lo + 1; n <= M; ++n) {
    num += std::abs(C[n]);
    den += std::abs(C[n - 1]);
  }
  double cm = std::abs(C[M]);
  if (cm == 0.0 || den == 0.0 || num == 0.0) return 0.0;
  double rho = std::min(num / den, 0.99);
  return cm * rho / (1.0 - rho);
}

}  // namespace detail

// Raw even moments E[r^0], E[r^2], ..., E[r^{2 max_k}].
inline std::vector<double> envelope_even_moments(const ChannelModel& model, int max_k) {
  model.validate();
  if (max_k < 0 || max_k > 1024)
    throw std::invalid_argument("envelope_even_moments: max_k out of range");
  auto uhat = detail::scaled_moment_table<dd>(model, max_k);
  const double eps = epsilon(model);
  std::vector<double> out(max_k + 1);
  // E[r^{2k}] = uhat_k k! / eps^k; assemble in log space to detect overflow
  double log_kfac = 0.0;
  const double log_eps = std::log(eps);
  for (int k = 0; k <= max_k; ++k) {
    if (k > 0) log_kfac += std::log(static_cast<double>(k));
    double lu = std::log(std::abs(to_double(uhat[k])));
    double lmag = lu + log_kfac - k * log_eps;
    if (lmag > 706.0)
      throw precision_error(
          "envelope_even_moments: E[r^{2k}] overflows double at k=" + std::to_string(k) +
          "; work with the normalized moments / extended-mode coefficient pipeline instead");
    out[k] = to_double(uhat[k]) * std::exp(log_kfac - k * log_eps);
  }
  return out;
}

// Series coefficients C_0..C_max_order with automatic precision escalation.
inline LaguerreSeries coefficients(const ChannelModel& model, int max_order) {
  model.validate();
  if (max_order < 1 || max_order > 1024)
    throw std::invalid_argument("coefficients: max_order out of range");
  const int M = max_order;

  auto uhat_std = detail::scaled_moment_table<double>(model, M);
  double max_abs = 0.0, ratio_std = 0.0;
  auto C_std = detail::coeffs_standard(uhat_std, M, &max_abs, &ratio_std);

  LaguerreSeries series;
  series.epsilon = epsilon(model);
  series.truncation_order = M;
  series.diagnostics.max_term_ratio = ratio_std;

  // escalate when any coefficient is dwarfed by its intermediate terms, or
  // when the terms alone are large enough that double roundoff (~1e-16 of the
  // largest term) would pollute the coefficient scale outright
  const bool need_extended =
      ratio_std > 1e12 || max_abs > 1e3 || !std::isfinite(ratio_std) || !std::isfinite(max_abs);
  if (!need_extended) {
    series.coeffs = std::move(C_std);
    series.precision_mode = PrecisionMode::standard;
  } else {
    // digits demanded by the worst cancellation, plus headroom
    double digits = std::log10(std::max(max_abs, 1.0)) + 14.0;
    double ratio_ext = 0.0;
    std::vector<double> C_ext;
    if (digits <= 30.0) {
      auto uhat = detail::scaled_moment_table<dd>(model, M);
      C_ext = detail::coeffs_from_moments(uhat, M, &ratio_ext);
      series.diagnostics.extended_impl = "dd";
    } else {
      auto uhat = detail::scaled_moment_table<qd>(model, M);
      C_ext = detail::coeffs_from_moments(uhat, M, &ratio_ext);
      series.diagnostics.extended_impl = "qd";
    }
    for (int n = 0; n <= std::min(30, M); ++n)
      if (std::abs(C_std[n] - C_ext[n]) > 1e-8) series.diagnostics.extended_only = true;
    series.coeffs = std::move(C_ext);
    series.precision_mode = PrecisionMode::extended;
    series.diagnostics.max_term_ratio = ratio_ext;
  }

  // divergent coefficient sequences (fluctuation too heavy for the expansion
  // scale) grow geometrically; flag them rather than hand back garbage
  if (M >= 60) {
    double recent = 0.0, prior = 0.0;
    for (int n = M - 9; n <= M; ++n) recent += std::abs(series.coeffs[n]);
    for (int n = M - 29; n <= M - 20; ++n) prior += std::abs(series.coeffs[n]);
    if (recent > 1e-3 && prior > 0.0 && recent > 1.5 * prior)
      throw convergence_error("coefficients: |C_n| not decaying by n=" + std::to_string(M) +
                              " (tail level " + std::to_string(recent / 10.0) + ")");
  }

  series.tail_estimate = detail::tail_from_coeffs(series.coeffs, M);
  series.validate();
  return series;
}

// Remark-style L2 bound on the truncation error: sqrt(eps pi) tail^2.
inline double truncation_bound(const LaguerreSeries& series) {
  return std::sqrt(series.epsilon * kPi) * series.tail_estimate * series.tail_estimate;
}

// Smallest truncation order whose trailing three coefficients and L2 bound
// both sit below tol. max_order is the search cap (the contract default).
inline LaguerreSeries auto_truncate(const ChannelModel& model, double tol, int max_order = 200) {
  if (!(tol >= 1e-14 && tol <= 1e-2))
    throw std::invalid_argument("auto_truncate: tol must lie in [1e-14, 1e-2]");
  LaguerreSeries full = coefficients(model, max_order);
  for (int M = 2; M <= max_order; ++M) {
    double w = 0.0;
    for (int n = std::max(1, M - 2); n <= M; ++n) w = std::max(w, std::abs(full.coeffs[n]));
    if (w >= tol) continue;
    LaguerreSeries cut = full;
    cut.coeffs.resize(M + 1);
    cut.truncation_order = M;
    cut.tail_estimate = detail::tail_from_coeffs(cut.coeffs, M);
    if (truncation_bound(cut) < tol) return cut;
  }
  throw convergence_error("auto_truncate: no admissible truncation order <= " +
                          std::to_string(max_order));
}

// ------------------------------------------------------------------ JSON

inline nlohmann::json to_json(const LaguerreSeries& s) {
  return nlohmann::json{
      {"epsilon", s.epsilon},
      {"coeffs", s.coeffs},
      {"truncation_order", s.truncation_order},
      {"tail_estimate", s.tail_estimate},
      {"precision_mode", s.precision_mode == PrecisionMode::standard ? "standard" : "extended"}};
}

inline LaguerreSeries series_from_json(const nlohmann::json& j) {
  LaguerreSeries s;
  s.epsilon = j.at("epsilon").get<double>();
  s.coeffs = j.at("coeffs").get<std::vector<double>>();
  s.truncation_order = j.at("truncation_order").get<int>();
  s.tail_estimate = j.at("tail_estimate").get<double>();
  s.precision_mode = j.at("precision_mode").get<std::string>() == "extended"
                         ? PrecisionMode::extended
                         : PrecisionMode::standard;
  s.validate();
  return s;
}

}  // namespace fadinglab
