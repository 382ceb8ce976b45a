#pragma once

#include <cstddef>
#include <vector>

#include "kinex/core.hpp"
#include "kinex/rules.hpp"

namespace kinex {

/// Piecewise-linear acceptance in the absolute transfer: 0 below -eta<x>,
/// 1 + delta/(eta<x>) up to 0, and 1 for any gain.
double accept_prob_linear(double delta, double eta, double mean_wealth);

/// exp[(delta - dx0)/(eta<x>)] below the threshold dx0, 1 at or above it.
double accept_prob_exp(double delta, double eta, double dx0, double mean_wealth);

/// Linear acceptance in the relative transfer delta / x_self. A unit with
/// zero wealth accepts gains and refuses losses.
double accept_prob_relative(double delta, double x_self, double eta);

/// Both units draw an independent uniform and the trade goes ahead only if
/// both accept. Always consumes no draws; every other criterion consumes two
/// (AsymmetricRich consumes one).
bool decide_trade(const TradeProposal& proposal, const Population& population,
                  const AcceptanceCriterion& criterion, RngStream& rng);

/// Trades that profit the richer unit always pass; trades that profit the
/// poorer unit are vetoed with probability theta. Equal wealths count as the
/// richer unit gaining.
bool accept_asymmetric(const TradeProposal& proposal, const Population& population, double theta,
                       RngStream& rng);

std::vector<double> assign_heterogeneous_eta(const EtaDistributionSpec& spec, std::size_t n,
                                             RngStream& rng);

void validate(const EtaDistributionSpec& spec);

}  // namespace kinex
