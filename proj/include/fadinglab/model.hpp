#pragma once

// Channel parameter types and derived quantities.
//
// A channel is N constant-magnitude specular rays with uniform random phases
// plus a diffuse component whose envelope is Nakagami (shape m, spread omega).
// The fluctuating variant scales every specular magnitude by sqrt(xi) with
// xi ~ Gamma(shape m_s, mean 1), drawn once per realization.

#include <fadinglab/errors.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace fadinglab {

enum class ModelKind { MWGD, FMR };

struct ChannelModel {
  ModelKind kind = ModelKind::MWGD;
  std::vector<double> specular;  // V_1..V_N, linear amplitudes, N >= 0
  double m = 1.0;                // Nakagami shape, >= 0.5
  double omega = 1.0;            // Nakagami spread (power)
  std::optional<double> m_s;     // fluctuation shape, required iff kind == FMR

  void validate() const {
    if (!(omega > 0.0)) throw std::invalid_argument("ChannelModel: omega must be > 0");
    if (!(m >= 0.5)) throw std::invalid_argument("ChannelModel: m must be >= 0.5");
    for (double v : specular)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("ChannelModel: specular magnitudes must be >= 0 and finite");
    if (kind == ModelKind::FMR) {
      if (!m_s) throw std::invalid_argument("ChannelModel: FMR requires m_s");
      if (!(*m_s > 0.0)) throw std::invalid_argument("ChannelModel: m_s must be > 0");
    }
  }

  size_t n_specular() const { return specular.size(); }
  double specular_power() const {
    return std::inner_product(specular.begin(), specular.end(), specular.begin(), 0.0);
  }
  double total_power() const { return specular_power() + omega; }

  // closed-form (Psi2) paths additionally require integer m
  bool m_is_integer() const { return std::abs(m - std::round(m)) < 1e-9; }

  static ChannelModel mwgd(std::vector<double> v, double m_, double omega_) {
    ChannelModel c{ModelKind::MWGD, std::move(v), m_, omega_, std::nullopt};
    c.validate();
    return c;
  }
  static ChannelModel fmr(std::vector<double> v, double m_, double omega_, double ms_) {
    ChannelModel c{ModelKind::FMR, std::move(v), m_, omega_, ms_};
    c.validate();
    return c;
  }
};

// reciprocal of the total mean power; the scale of the Laguerre expansion
inline double epsilon(const ChannelModel& model) { return 1.0 / model.total_power(); }

// specular-to-diffuse power ratio in dB; -inf for a pure diffuse channel
inline double power_ratio_db(const ChannelModel& model) {
  double sp = model.specular_power();
  if (sp == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sp / model.omega);
}

// Scale a relative magnitude shape so the power ratio hits ratio_db.
inline std::vector<double> solve_magnitudes(double ratio_db, const std::vector<double>& shape,
                                            double omega) {
  if (shape.empty()) throw std::invalid_argument("solve_magnitudes: shape must be nonempty");
  if (!(omega > 0.0)) throw std::invalid_argument("solve_magnitudes: omega must be > 0");
  if (!std::isfinite(ratio_db)) throw std::invalid_argument("solve_magnitudes: ratio must be finite");
  double ssq = 0.0;
  for (double s : shape) {
    if (!(s > 0.0)) throw std::invalid_argument("solve_magnitudes: shape entries must be > 0");
    ssq += s * s;
  }
  double target = omega * std::pow(10.0, ratio_db / 10.0);
  double scale = std::sqrt(target / ssq);
  std::vector<double> v(shape);
  for (double& s : v) s *= scale;
  return v;
}

// An FMR model with a very large fluctuation shape behaves as if deterministic.
inline bool effectively_deterministic(const ChannelModel& model) {
  return model.kind == ModelKind::MWGD || (model.m_s && *model.m_s >= 1e6);
}

// Average-SNR context: gamma = gamma0 R^2, gamma_bar = gamma0 (sum V^2 + omega).
struct SnrContext {
  double gamma0 = 1.0;
  double gamma_bar = 1.0;

  static SnrContext from_gamma0(const ChannelModel& model, double g0) {
    if (!(g0 > 0.0)) throw std::invalid_argument("SnrContext: gamma0 must be > 0");
    return {g0, g0 * model.total_power()};
  }
  static SnrContext from_gamma_bar(const ChannelModel& model, double gbar) {
    if (!(gbar > 0.0)) throw std::invalid_argument("SnrContext: gamma_bar must be > 0");
    return {gbar / model.total_power(), gbar};
  }
  static SnrContext from_gamma_bar_db(const ChannelModel& model, double gbar_db) {
    return from_gamma_bar(model, std::pow(10.0, gbar_db / 10.0));
  }
};

}  // namespace fadinglab
