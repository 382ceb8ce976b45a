#pragma once

#include <cstddef>

#include "kinex/core.hpp"

namespace kinex {

/// A candidate trade between units j and k. Committing it moves `delta`
/// from k to j: x_j' = x_j + delta, x_k' = x_k - delta.
struct TradeProposal {
  std::size_t j = 0;
  std::size_t k = 0;
  double delta = 0.0;
  double eps_j = 0.0;
  double eps_k = 0.0;
  /// Angle rules only: 1 when the flow goes from j to k.
  int direction = 0;
};

// Closed-form transfers for given random draws.

/// Both units hand over a fraction of their wealth at once.
constexpr double immediate_delta(double x_j, double x_k, double eps_j, double eps_k) noexcept {
  return eps_k * x_k - eps_j * x_j;
}

/// The pair's total is re-split: x_j' = eps (x_j + x_k).
constexpr double dy_delta(double x_j, double x_k, double eps) noexcept {
  return eps * x_k - (1.0 - eps) * x_j;
}

/// Reshuffling of the non-saved part: x_j' = lambda x_j + eps (1 - lambda)(x_j + x_k).
constexpr double cc_delta(double x_j, double x_k, double lambda, double eps) noexcept {
  return (1.0 - lambda) * (eps * x_k - (1.0 - eps) * x_j);
}

/// One-way flow of a fraction eps (1 - lambda) of the giver's wealth.
/// direction == 1 means j gives to k.
constexpr double angle_delta(double x_j, double x_k, double lambda, double eps,
                             int direction) noexcept {
  return direction == 1 ? -eps * (1.0 - lambda) * x_j : eps * (1.0 - lambda) * x_k;
}

// Proposal generators. The returned proposal has j = k = 0; `propose` fills
// in the indices.

TradeProposal propose_immediate(double x_j, double x_k, RngStream& rng);
TradeProposal propose_dy(double x_j, double x_k, RngStream& rng);
TradeProposal propose_cc(double x_j, double x_k, double lambda, RngStream& rng);
TradeProposal propose_angle(double x_j, double x_k, double lambda, double p0, RngStream& rng);

/// With probability mu an unsaved symmetric one-way flow, otherwise an
/// immediate exchange. The branch is drawn first, and only when 0 < mu < 1.
TradeProposal propose_mixed(double x_j, double x_k, double mu, RngStream& rng);

/// Dispatches on rule.kind. Does not validate the rule parameters.
TradeProposal propose(const ExchangeRule& rule, double x_j, double x_k, RngStream& rng);

inline TradeProposal propose(const ExchangeRule& rule, const Population& pop, std::size_t j,
                             std::size_t k, RngStream& rng) {
  TradeProposal p = propose(rule, pop.wealth[j], pop.wealth[k], rng);
  p.j = j;
  p.k = k;
  return p;
}

}  // namespace kinex
