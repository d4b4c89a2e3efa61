#pragma once

#include <functional>
#include <span>
#include <vector>

#include "clinn/problems.hpp"

namespace clinn::oracle {

enum class WaveKind { Shock, Rarefaction, ContactDiscontinuity };

struct Wave {
  WaveKind kind;
  double speed;  // jump speed (f(ul) - f(ur)) / (ul - ur); meaningful for discontinuities
};

/// Oleinik classification of the jump ul -> ur. Equality within 1e-12 on
/// either side counts as a contact. Anything that is not an admissible single
/// discontinuity is reported as Rarefaction.
Wave classify_wave(const Flux& flux, double ul, double ur);

/// Entropy solution of the Riemann problem for a flux whose speed is strictly
/// monotone between ul and ur. Left-closed at the shock. Requires t > 0.
double riemann_convex(const Flux& flux, double ul, double ur, double x0, double x, double t);

/// Closed-form (or, for 1A, root-found) entropy solution. Throws
/// InvalidArgument for points outside the case domain.
double exact(const ProblemSpec& spec, std::span<const double> x, double t);
double exact(CaseId id, std::span<const double> x, double t);

/// One discontinuity trajectory x = position(t), valid on [t_begin, t_end].
struct ShockTrack {
  double t_begin;
  double t_end;
  std::function<double(double)> position;
  bool active(double t) const { return t >= t_begin && t <= t_end; }
};

struct ExactShock {
  CaseId id;
  std::vector<ShockTrack> tracks;  // for 2D: the 1D front gamma(t) along max(x, y)
  std::vector<double> kinks;       // times where a track bends or tracks merge

  /// Positions of all active tracks at time t, ascending.
  std::vector<double> positions(double t) const;
  /// 2D level set (x - gamma)(y - gamma); zero on the front. Only meaningful
  /// where x, y <= gamma(t).
  double phi(double x, double y, double t) const;
};

ExactShock exact_shocks(CaseId id);

/// The 2D front position, identical to the case-2B shock path.
double front_2d(double t);

}  // namespace clinn::oracle
