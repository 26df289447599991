#pragma once

// Envelope and SNR distribution evaluators.
//
// The series route (valid for any real m >= 0.5, both model kinds) is the
// primary evaluator. The closed-form route through the confluent
// multi-variable series only needs integer m and exists as an independent
// cross-check; the fluctuating model additionally has a direct oscillatory
// Hankel-integral evaluator valid for real shapes.

#include <fadinglab/errors.hpp>
#include <fadinglab/model.hpp>
#include <fadinglab/series.hpp>
#include <fadinglab/specfun.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace fadinglab {

// ------------------------------------------------------------------ series route

// f_R(r) = 2 eps r e^{-eps r^2} sum_n C_n L_n(eps r^2)
inline double envelope_pdf_series(const LaguerreSeries& series, double r) {
  if (r < 0.0) throw std::domain_error("envelope_pdf_series: requires r >= 0");
  if (r == 0.0) return 0.0;
  const double u = series.epsilon * r * r;
  laguerre_recurrence lag(u);
  comp_sum acc;
  for (int n = 0; n <= series.truncation_order; ++n) {
    acc.add(series.coeffs[n] * lag.value());
    lag.next();
  }
  return 2.0 * series.epsilon * r * std::exp(-u) * acc.value();
}

namespace detail {

// integral of the series density of the squared-scale variable up to x:
//   int_0^x e^-u L_n(u) du = (x/n) e^-x L_{n-1}^{(1)}(x)   (n >= 1)
// so the CDF sums C_0 (1 - e^-x) + e^-x sum_{n>=1} C_n (x/n) L_{n-1}^{(1)}(x),
// which is algebraically the double sum over incomplete-gamma terms but free
// of its alternating-binomial cancellation.
inline double cdf_series_core(const LaguerreSeries& series, double x) {
  if (x == 0.0) return 0.0;
  comp_sum acc;
  acc.add(series.coeffs[0] * (-std::expm1(-x)));
  const double ex = std::exp(-x);
  laguerre_recurrence lag1(x, 1.0);
  for (int n = 1; n <= series.truncation_order; ++n) {
    acc.add(series.coeffs[n] * (x / n) * ex * lag1.value());
    lag1.next();
  }
  return acc.value();
}

}  // namespace detail

inline double envelope_cdf_series(const LaguerreSeries& series, double t) {
  if (t < 0.0) throw std::domain_error("envelope_cdf_series: requires t >= 0");
  return detail::cdf_series_core(series, series.epsilon * t * t);
}

// f_gamma(x) = (1/gbar) e^{-x/gbar} sum_n C_n L_n(x/gbar)
inline double snr_pdf_series(const LaguerreSeries& series, const SnrContext& ctx, double x) {
  if (x < 0.0) throw std::domain_error("snr_pdf_series: requires x >= 0");
  const double u = x / ctx.gamma_bar;
  laguerre_recurrence lag(u);
  comp_sum acc;
  for (int n = 0; n <= series.truncation_order; ++n) {
    acc.add(series.coeffs[n] * lag.value());
    lag.next();
  }
  return std::exp(-u) / ctx.gamma_bar * acc.value();
}

inline double snr_cdf_series(const LaguerreSeries& series, const SnrContext& ctx, double x) {
  if (x < 0.0) throw std::domain_error("snr_cdf_series: requires x >= 0");
  return detail::cdf_series_core(series, x / ctx.gamma_bar);
}

// ------------------------------------------------------------------ closed form route

namespace detail {

inline void require_psi2_applicable(const ChannelModel& model, const char* who) {
  if (model.kind != ModelKind::MWGD)
    throw unsupported_error(std::string(who) +
                            ": closed form covers the unfluctuated model only; "
                            "use the series evaluator");
  if (!model.m_is_integer() || model.m < 1.0)
    throw unsupported_error(std::string(who) +
                            ": closed form requires integer m; use the series evaluator");
}

inline std::vector<double> psi2_args(const ChannelModel& model, double x) {
  std::vector<double> a;
  a.reserve(model.specular.size() + 1);
  const double scale = model.m / model.omega;
  for (double v : model.specular) a.push_back(v * v * scale);
  a.push_back(x * x * scale);
  return a;
}

}  // namespace detail

// f_R(r) = (2m/omega) r sum_{k=0}^{m-1} binom(m-1,k)(-1)^k Psi2(k+1; [1]_{N+1}; args(r))
inline double envelope_pdf_psi2(const ChannelModel& model, double r, const QuadratureRule& rule) {
  model.validate();
  detail::require_psi2_applicable(model, "envelope_pdf_psi2");
  if (r < 0.0) throw std::domain_error("envelope_pdf_psi2: requires r >= 0");
  if (r == 0.0) return 0.0;
  const long mi = std::lround(model.m);
  auto args = detail::psi2_args(model, r);
  const std::vector<double> ones(args.size(), 1.0);
  double sum = 0.0, binom = 1.0;
  for (long k = 0; k < mi; ++k) {
    double term = binom * psi2(static_cast<double>(k + 1), ones, args, rule);
    sum += (k % 2 == 0) ? term : -term;
    binom *= static_cast<double>(mi - 1 - k) / static_cast<double>(k + 1);
  }
  return 2.0 * model.m / model.omega * r * sum;
}

// F_R(t) = (m/omega) t^2 sum_k binom(m-1,k)(-1)^k Psi2(k+1; [1]_N, 2; args(t));
// the trailing second parameter 2 turns the last Bessel factor into the
// first-order ratio kernel.
inline double envelope_cdf_psi2(const ChannelModel& model, double t, const QuadratureRule& rule) {
  model.validate();
  detail::require_psi2_applicable(model, "envelope_cdf_psi2");
  if (t < 0.0) throw std::domain_error("envelope_cdf_psi2: requires t >= 0");
  if (t == 0.0) return 0.0;
  const long mi = std::lround(model.m);
  auto args = detail::psi2_args(model, t);
  double sum = 0.0, binom = 1.0;
  for (long k = 0; k < mi; ++k) {
    double term = binom * detail::psi2_last_b2(static_cast<double>(k + 1), args, rule);
    sum += (k % 2 == 0) ? term : -term;
    binom *= static_cast<double>(mi - 1 - k) / static_cast<double>(k + 1);
  }
  return model.m / model.omega * t * t * sum;
}

// Quadrature order able to resolve the Bessel-product oscillation for this
// model up to envelope r_max: empirically the rule of order M integrates the
// product kernel accurately while (sum_i sqrt(x_i))^2 <= ~2.8 M.
inline int recommended_psi2_order(const ChannelModel& model, double r_max) {
  const double scale = model.m / model.omega;
  double s = 0.0;
  for (double v : model.specular) s += std::sqrt(v * v * scale);
  s += std::sqrt(r_max * r_max * scale);
  int order = static_cast<int>(std::ceil(s * s / 2.5)) + 16;
  return std::clamp(order, 128, 512);
}

// ------------------------------------------------------------------ fluctuating-model integral

namespace detail {

// zeros of J0 via McMahon's expansion plus one Newton step
inline double j0_zero(int k) {
  double b = (k - 0.25) * kPi;
  double x = b + 1.0 / (8.0 * b) - 124.0 / (3.0 * std::pow(8.0 * b, 3));
  for (int it = 0; it < 3; ++it) x += bessel_j0(x) / bessel_j1(x);
  return x;
}

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate_adaptive(const F& f, double a, double b, double tol, int depth = 40) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Euler transformation of a (eventually alternating) panel series; feed
// terms one at a time, read the running accelerated estimate.
class euler_accumulator {
 public:
  void add(double term) {
    if (n_ == 0) {
      w_[0] = term;
      sum_ = 0.5 * term;
    } else {
      double tmp = w_[0];
      w_[0] = term;
      for (int j = 1; j <= n_ && j < kCap; ++j) {
        double t2 = w_[j];
        w_[j] = 0.5 * (w_[j - 1] + tmp);
        tmp = t2;
      }
      int m = std::min(n_, kCap - 1);
      if (std::abs(w_[m]) <= std::abs(tmp)) {
        sum_ += 0.5 * w_[m];
      } else {
        sum_ += tmp + 0.5 * (w_[m] - tmp);
      }
    }
    ++n_;
  }
  double value() const { return sum_; }

 private:
  static constexpr int kCap = 64;
  double w_[kCap] = {};
  double sum_ = 0.0;
  int n_ = 0;
};

struct fmr_kernel_cache {
  std::map<int, QuadratureRule> rules;
  const QuadratureRule& rule(int order, double alpha) {
    auto it = rules.find(order);
    if (it == rules.end())
      it = rules.emplace(order, gauss_laguerre_normalized(order, alpha)).first;
    return it->second;
  }
};

// E over the fluctuation of prod_i J0(sqrt(xi) V_i nu): a Gamma(m_s)
// expectation evaluated with a generalized-weight rule at the given order
inline double fmr_xi_average(const ChannelModel& model, double nu, int order,
                             fmr_kernel_cache& cache) {
  const double ms = *model.m_s;
  const auto& rule = cache.rule(order, ms - 1.0);
  comp_sum acc;
  for (int i = 0; i < rule.order; ++i) {
    double root = std::sqrt(rule.nodes[i] / ms);
    double g = 1.0;
    for (double v : model.specular) g *= bessel_j0(v * nu * root);
    acc.add(rule.weights[i] * g);
  }
  return acc.value();
}

}  // namespace detail

// Direct Hankel-integral density of the fluctuating model,
//   f_R(r) = r Int_0^inf 1F1(m;1;-omega nu^2/4m) E_xi[prod J0(sqrt(xi)V_i nu)]
//            nu J0(r nu) dnu,
// valid for real m and m_s. The oscillatory integral is split at consecutive
// zeros of J0(r nu); panel sums are Euler-accelerated.
inline double fmr_envelope_pdf_integral(const ChannelModel& model, double r,
                                        const QuadratureRule& rule) {
  model.validate();
  if (model.kind != ModelKind::FMR)
    throw unsupported_error("fmr_envelope_pdf_integral: model must be the fluctuating kind");
  if (r < 0.0) throw std::domain_error("fmr_envelope_pdf_integral: requires r >= 0");
  if (r == 0.0) return 0.0;

  detail::fmr_kernel_cache cache;
  const double ms = *model.m_s;

  // per-panel inner-expectation order: refine until two orders agree
  auto pick_order = [&](double nu) {
    int order = 32;
    double prev = detail::fmr_xi_average(model, nu, order, cache);
    while (order < rule.order) {
      int next = std::min(2 * order, rule.order);
      double cur = detail::fmr_xi_average(model, nu, next, cache);
      if (std::abs(cur - prev) < 1e-10 * (1.0 + std::abs(cur))) return next;
      prev = cur;
      order = next;
    }
    return rule.order;
  };

  double head = 0.0;
  detail::euler_accumulator tail;
  int quiet = 0, stable = 0;
  const int head_panels = 8;
  double lo = 0.0;
  double scale = 0.0, prev_total = 0.0;
  for (int k = 1; k <= 4000; ++k) {
    double hi = detail::j0_zero(k) / r;
    int inner_order = pick_order(0.5 * (lo + hi));
    auto f = [&](double nu) {
      if (nu == 0.0) return 0.0;
      double x1f1 = model.omega * nu * nu / (4.0 * model.m);
      double a = detail::kummer_1f1_neg_real(model.m, x1f1);
      if (a == 0.0) return 0.0;
      double xi_avg = model.n_specular()
                          ? detail::fmr_xi_average(model, nu, inner_order, cache)
                          : 1.0;
      return a * xi_avg * nu * bessel_j0(r * nu);
    };
    double panel = detail::integrate_adaptive(f, lo, hi, 1e-14 * (1.0 + scale));
    if (k <= head_panels)
      head += panel;
    else
      tail.add(panel);
    double total = head + (k > head_panels ? tail.value() : 0.0);
    scale = std::max(scale, std::abs(total));
    // raw panels negligible for three panels running: the integral is done
    if (k > head_panels + 3 && std::abs(panel) < 1e-12 * (scale + 1e-300)) {
      if (++quiet >= 3) return r * total;
    } else {
      quiet = 0;
    }
    // algebraic tails (non-integer m) never satisfy the raw rule in sane
    // time, but the Euler-accelerated estimate stabilizes long before
    if (k > head_panels + 15) {
      if (std::abs(total - prev_total) < 1e-13 * (scale + 1e-300)) {
        if (++stable >= 3) return r * total;
      } else {
        stable = 0;
      }
    }
    prev_total = total;
    lo = hi;
  }
  throw numerical_error("fmr_envelope_pdf_integral: panel acceleration did not converge (r=" +
                        std::to_string(r) + ", m=" + std::to_string(model.m) +
                        ", m_s=" + std::to_string(ms) + ")");
}

// ------------------------------------------------------------------ curves

enum class CurveMeaning { envelope_pdf, envelope_cdf, snr_pdf, snr_cdf };
enum class CurveMethod { series, psi2_closed_form, integral };

struct EvaluatedCurve {
  std::vector<double> grid;
  std::vector<double> values;
  CurveMeaning meaning = CurveMeaning::envelope_pdf;
  CurveMethod method = CurveMethod::series;
  int clamped_count = 0;  // tail values in [-1e-9, 0) clamped to zero

  void validate() const {
    if (grid.size() != values.size()) throw consistency_error("EvaluatedCurve: size mismatch");
    for (size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1]))
        throw consistency_error("EvaluatedCurve: grid must be strictly increasing");
    const bool is_cdf =
        meaning == CurveMeaning::envelope_cdf || meaning == CurveMeaning::snr_cdf;
    for (size_t i = 0; i < values.size(); ++i) {
      if (values[i] < -1e-9) throw consistency_error("EvaluatedCurve: negative density/probability");
      if (is_cdf) {
        if (values[i] > 1.0 + 1e-9) throw consistency_error("EvaluatedCurve: CDF above one");
        if (i && values[i] < values[i - 1] - 1e-9)
          throw consistency_error("EvaluatedCurve: CDF must be nondecreasing");
      }
    }
  }
};

template <class F>
EvaluatedCurve evaluate_curve(const std::vector<double>& grid, CurveMeaning meaning,
                              CurveMethod method, const F& f) {
  EvaluatedCurve c;
  c.grid = grid;
  c.values.reserve(grid.size());
  c.meaning = meaning;
  c.method = method;
  for (double x : grid) {
    double v = f(x);
    if (v < 0.0 && v >= -1e-9) {
      v = 0.0;
      ++c.clamped_count;
    }
    c.values.push_back(v);
  }
  c.validate();
  return c;
}

inline std::vector<double> linear_grid(double start, double stop, int count) {
  if (count < 2) throw std::invalid_argument("linear_grid: count must be >= 2");
  if (!(stop > start)) throw std::invalid_argument("linear_grid: stop must exceed start");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i)
    g[i] = start + (stop - start) * static_cast<double>(i) / (count - 1);
  return g;
}

inline void write_curve_csv(std::ostream& os, const EvaluatedCurve& c) {
  os << "x,value\n";
  char buf[64];
  for (size_t i = 0; i < c.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", c.grid[i]);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", c.values[i]);
    os << buf << '\n';
  }
}

// Count interior local maxima with prominence above rel_prominence times the
// global peak; tiny truncation ringing stays below any sensible threshold.
inline int count_local_maxima(const std::vector<double>& v, double rel_prominence = 1e-5) {
  if (v.size() < 3) return 0;
  double peak = *std::max_element(v.begin(), v.end());
  if (!(peak > 0.0)) return 0;
  int count = 0;
  size_t i = 1;
  while (i + 1 < v.size()) {
    if (v[i] >= v[i - 1] && v[i] > v[i + 1]) {
      // local max (plateau-tolerant); prominence = drop to nearest valleys
      double left = v[i];
      for (size_t j = i; j > 0; --j) {
        if (v[j - 1] > v[j]) break;
        left = std::min(left, v[j - 1]);
      }
      double right = v[i];
      for (size_t j = i; j + 1 < v.size(); ++j) {
        if (v[j + 1] > v[j]) break;
        right = std::min(right, v[j + 1]);
      }
      if (v[i] - std::max(left, right) > rel_prominence * peak) ++count;
    }
    ++i;
  }
  return count;
}

}  // namespace fadinglab
