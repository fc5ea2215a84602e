#pragma once

#include <array>

#include "maip/belief.hpp"
#include "maip/domain.hpp"

namespace maip {

/// Parameters of the policing benchmark: three protest sites with intensity
/// levels {low, med, high}, two troops to place (9 ordered placements), and a
/// population of protestors split between a peaceful and a disruptive frame.
/// Protestors choose a site or stay home; per-site flags are the only
/// observations.  All numeric tables are benchmark defaults, independently
/// adjustable.
struct ProtestParams {
  int n = 2;               // protestor count
  double frame_mix = 0.5;  // fraction of the population in the peaceful frame

  // Pressure-statistic thresholds as fractions of n.  The per-site pressure
  // counts peaceful protestors once and disruptive ones twice.
  double theta_lo = 0.25;
  double theta_hi = 0.5;

  // Intensity-change rows {escalate, stay, de-escalate}, per policing level
  // and pressure bucket (below lo / between / at-or-above hi).  Two troops
  // pacify a site regardless of pressure.
  std::array<double, 3> two_troop_row = {0.0, 0.1, 0.9};
  std::array<std::array<double, 3>, 3> one_troop_rows = {
      {{0.0, 0.5, 0.5}, {0.1, 0.8, 0.1}, {0.6, 0.4, 0.0}}};
  std::array<std::array<double, 3>, 3> zero_troop_rows = {
      {{0.0, 0.8, 0.2}, {0.5, 0.5, 0.0}, {0.9, 0.1, 0.0}}};

  // Per-site flag probability: base by next intensity, shifted up per
  // disruptive-count bucket, capped.
  std::array<double, 3> flag_base = {0.05, 0.3, 0.85};
  double flag_shift = 0.1;
  double flag_cap = 0.95;

  // Reward per site: base by intensity, minus a disruption penalty when the
  // site is underpoliced (< 2 troops), minus a cost per troop placed there.
  std::array<double, 3> reward_base = {10.0, 0.0, -10.0};
  std::array<double, 3> disruption_penalty = {0.0, 2.0, 5.0};
  double troop_cost = 1.0;

  // Controller action rows over {go-site-0, go-site-1, go-site-2, stay-home}.
  std::array<double, 4> peaceful_row = {0.25, 0.25, 0.25, 0.25};
  std::array<double, 4> disruptive_row = {0.3, 0.3, 0.3, 0.1};

  // When set, controllers get a second "alerted" node entered on any raised
  // flag; it mostly stays home and relaxes back when all flags clear.
  bool reactive = false;
  std::array<double, 4> alerted_row = {0.1, 0.1, 0.1, 0.7};

  // Factored initial intensity distribution, identical per site.
  std::array<double, 3> initial_site = {0.2, 0.6, 0.2};

  ValidationReport validate() const;
};

/// Builds the complete domain (states, planner actions/observations, frames,
/// controllers, population, hypergraphs, rule dynamics, initial belief),
/// finalized and ready to validate/solve.
Domain build_protest_domain(const ProtestParams& params);

/// Troops that placement `a0` (an ordered pair encoded i*3+j) puts at `site`.
int protest_troops_at(int a0, int site);

// Context evaluators over explicit configurations (the configuration must
// match the context's neighborhood; ValidationError otherwise).
double protest_transition(const Domain& domain, int site, int x, int a0,
                          const Configuration& c, int x_next);
double protest_observation(const Domain& domain, int site, int x_next, int a0,
                           const Configuration& c, int flag);
double protest_reward(const Domain& domain, int site, int x, int a0,
                      const Configuration& c);

}  // namespace maip
