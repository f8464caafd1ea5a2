#pragma once

// Physical configuration of two static Unruh-DeWitt detectors coupled to a
// real scalar field in the Minkowski vacuum.
//
// Units: hbar = 1. Energies are measured in a reference unit E0, times in
// 1/E0 and distances in c/E0. The speed of light is kept explicit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "udleak/errors.hpp"

namespace udleak {

struct UnitSystem {
  double c = 1.0;
};

/// Amplitudes of alpha|g_A g_B> + gamma|e_A e_B>. Both real; alpha >= 0 after
/// validation, gamma keeps its sign.
struct InitialState {
  double alpha = 1.0;
  double gamma = 0.0;

  /// gamma = sign * sqrt(1 - alpha^2).
  static InitialState from_alpha(double alpha, int gamma_sign = +1) {
    const double g = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
    return {alpha, gamma_sign < 0 ? -g : g};
  }

  static InitialState bell(int gamma_sign = +1) {
    const double a = 1.0 / std::sqrt(2.0);
    return {a, gamma_sign < 0 ? -a : a};
  }

  double abs_alpha_gamma() const { return std::abs(alpha * gamma); }
};

/// Identical static detectors: A at the origin, B at distance `distance`.
/// Proper time equals coordinate time for both.
struct DetectorPairConfig {
  double delta_e = 1.0;
  double coupling_a = 0.0;
  double coupling_b = 0.0;
  double distance = 0.0;
};

/// Scalar field of mass m (in E0/c^2) in the Minkowski vacuum.
struct FieldSpec {
  double mass = 0.0;
};

enum class SwitchingKind { eternal, gaussian };

inline const char* to_string(SwitchingKind k) {
  return k == SwitchingKind::eternal ? "eternal" : "gaussian";
}

/// Switching function chi(tau). Eternal: chi = 1. Gaussian: exp(-tau^2/(2 sigma^2)),
/// peak value 1.
struct SwitchingSpec {
  SwitchingKind kind = SwitchingKind::eternal;
  double sigma = 0.0;

  static SwitchingSpec eternal() { return {SwitchingKind::eternal, 0.0}; }
  static SwitchingSpec gaussian(double sigma) { return {SwitchingKind::gaussian, sigma}; }

  double profile(double tau) const {
    if (kind == SwitchingKind::eternal) return 1.0;
    return std::exp(-tau * tau / (2.0 * sigma * sigma));
  }

  /// Integral of chi^2 over the real line (sigma * sqrt(pi) for the Gaussian).
  double effective_duration() const {
    if (kind == SwitchingKind::eternal) return INFINITY;
    return sigma * std::sqrt(M_PI);
  }
};

class ValidatedScenario;

ValidatedScenario validate_config(const DetectorPairConfig& pair, const FieldSpec& field,
                                  const InitialState& state, const SwitchingSpec& switching,
                                  const UnitSystem& units = {});

/// Immutable bundle produced by validate_config. All invariants hold.
class ValidatedScenario {
 public:
  const DetectorPairConfig& pair() const noexcept { return pair_; }
  const FieldSpec& field() const noexcept { return field_; }
  const InitialState& state() const noexcept { return state_; }
  const SwitchingSpec& switching() const noexcept { return switching_; }
  const UnitSystem& units() const noexcept { return units_; }

  double c() const noexcept { return units_.c; }
  double delta_e() const noexcept { return pair_.delta_e; }
  double mass() const noexcept { return field_.mass; }
  double rest_energy() const noexcept { return field_.mass * units_.c * units_.c; }

  /// True iff delta_e > m c^2 (the emission channel is open). The boundary,
  /// to 8 ulps of delta_e, counts as closed.
  bool channel_open() const noexcept { return channel_open_; }

  /// sqrt(delta_e^2 - m^2 c^4), or 0 when the channel is closed.
  double on_shell_root() const noexcept {
    if (!channel_open_) return 0.0;
    const double mc2 = rest_energy();
    return std::sqrt((pair_.delta_e - mc2) * (pair_.delta_e + mc2));
  }

  /// Momentum of the emitted quantum, on_shell_root() / c.
  double resonant_momentum() const noexcept { return on_shell_root() / units_.c; }

 private:
  friend ValidatedScenario validate_config(const DetectorPairConfig&, const FieldSpec&,
                                           const InitialState&, const SwitchingSpec&,
                                           const UnitSystem&);
  ValidatedScenario() = default;

  DetectorPairConfig pair_;
  FieldSpec field_;
  InitialState state_;
  SwitchingSpec switching_;
  UnitSystem units_;
  bool channel_open_ = false;
};

inline ValidatedScenario validate_config(const DetectorPairConfig& pair, const FieldSpec& field,
                                         const InitialState& state,
                                         const SwitchingSpec& switching, const UnitSystem& units) {
  std::vector<std::string> bad;
  std::ostringstream msg;
  auto fail = [&](const char* field_name, const std::string& why) {
    bad.emplace_back(field_name);
    if (bad.size() > 1) msg << "; ";
    msg << field_name << ": " << why;
  };
  auto finite = [](double x) { return std::isfinite(x); };

  if (!finite(units.c) || !(units.c > 0.0)) fail("c", "speed of light must be positive");
  if (!finite(pair.delta_e) || !(pair.delta_e > 0.0)) fail("delta_e", "energy gap must be positive");
  if (!finite(pair.coupling_a) || pair.coupling_a < 0.0) fail("coupling_a", "must be >= 0");
  if (!finite(pair.coupling_b) || pair.coupling_b < 0.0) fail("coupling_b", "must be >= 0");
  if (!finite(pair.distance) || pair.distance < 0.0) fail("distance", "must be >= 0");
  if (!finite(field.mass) || field.mass < 0.0) fail("mass", "must be >= 0");
  if (!finite(state.alpha) || !finite(state.gamma)) {
    fail("alpha", "amplitudes must be finite");
  } else {
    const double norm = state.alpha * state.alpha + state.gamma * state.gamma;
    if (std::abs(norm - 1.0) > 1e-12) {
      std::ostringstream w;
      w.precision(17);
      w << "alpha^2 + gamma^2 = " << norm << ", expected 1";
      fail("alpha", w.str());
    }
  }
  if (switching.kind == SwitchingKind::gaussian &&
      (!finite(switching.sigma) || !(switching.sigma > 0.0))) {
    fail("sigma", "gaussian switching requires sigma > 0");
  }
  if (!bad.empty()) throw ConfigError(std::move(bad), msg.str());

  ValidatedScenario s;
  s.pair_ = pair;
  s.field_ = field;
  s.state_ = state;
  // (alpha, gamma) and (-alpha, -gamma) differ by a global phase.
  if (s.state_.alpha < 0.0) {
    s.state_.alpha = -s.state_.alpha;
    s.state_.gamma = -s.state_.gamma;
  }
  s.switching_ = switching;
  if (switching.kind == SwitchingKind::eternal) s.switching_.sigma = 0.0;
  s.units_ = units;
  // Gaps within a few ulps of delta_e are the threshold itself.
  s.channel_open_ = pair.delta_e - field.mass * units.c * units.c >
                    8.0 * std::numeric_limits<double>::epsilon() * pair.delta_e;
  return s;
}

}  // namespace udleak
