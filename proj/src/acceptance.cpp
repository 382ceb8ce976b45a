#include "kinex/acceptance.hpp"

#include <cmath>
#include <string>

namespace kinex {

namespace {

void check_scale(double eta, double mean_wealth) {
  if (!(eta > 0.0)) throw ConfigError("eta: must be positive");
  if (!(mean_wealth > 0.0)) throw ConfigError("mean_wealth: must be positive");
}

double linear_q(double delta, double scale) noexcept {
  if (delta >= 0.0) return 1.0;
  if (delta <= -scale) return 0.0;
  return 1.0 + delta / scale;
}

}  // namespace

double accept_prob_linear(double delta, double eta, double mean_wealth) {
  check_scale(eta, mean_wealth);
  return linear_q(delta, eta * mean_wealth);
}

double accept_prob_exp(double delta, double eta, double dx0, double mean_wealth) {
  check_scale(eta, mean_wealth);
  if (delta >= dx0) return 1.0;
  return std::exp((delta - dx0) / (eta * mean_wealth));
}

double accept_prob_relative(double delta, double x_self, double eta) {
  if (!(eta > 0.0)) throw ConfigError("eta: must be positive");
  if (x_self <= 0.0) return delta >= 0.0 ? 1.0 : 0.0;
  if (delta >= 0.0) return 1.0;
  return linear_q(delta / x_self, eta);
}

bool accept_asymmetric(const TradeProposal& proposal, const Population& population, double theta,
                       RngStream& rng) {
  if (proposal.delta == 0.0) return true;
  const bool j_gains = proposal.delta > 0.0;
  const double gainer = population.wealth[j_gains ? proposal.j : proposal.k];
  const double loser = population.wealth[j_gains ? proposal.k : proposal.j];
  if (gainer >= loser) return true;
  return rng.uniform() >= theta;
}

bool decide_trade(const TradeProposal& proposal, const Population& population,
                  const AcceptanceCriterion& criterion, RngStream& rng) {
  const double d = proposal.delta;
  double q_j = 1.0;
  double q_k = 1.0;
  switch (criterion.kind) {
    case CriterionKind::Always:
      return true;
    case CriterionKind::AsymmetricRich:
      return accept_asymmetric(proposal, population, criterion.theta, rng);
    case CriterionKind::LinearAbsolute: {
      const double m = population.mean_wealth();
      q_j = accept_prob_linear(d, criterion.eta, m);
      q_k = accept_prob_linear(-d, criterion.eta, m);
      break;
    }
    case CriterionKind::ExponentialAbsolute: {
      const double m = population.mean_wealth();
      q_j = accept_prob_exp(d, criterion.eta, criterion.dx0, m);
      q_k = accept_prob_exp(-d, criterion.eta, criterion.dx0, m);
      break;
    }
    case CriterionKind::LinearRelative:
      q_j = accept_prob_relative(d, population.wealth[proposal.j], criterion.eta);
      q_k = accept_prob_relative(-d, population.wealth[proposal.k], criterion.eta);
      break;
    case CriterionKind::HeterogeneousLinear: {
      const double m = population.mean_wealth();
      q_j = accept_prob_linear(d, population.eta[proposal.j], m);
      q_k = accept_prob_linear(-d, population.eta[proposal.k], m);
      break;
    }
  }
  const double u_j = rng.uniform();
  const double u_k = rng.uniform();
  return u_j < q_j && u_k < q_k;
}

void validate(const EtaDistributionSpec& spec) {
  if (const auto* u = std::get_if<UniformEta>(&spec)) {
    if (!(u->min > 0.0 && u->min <= u->max && std::isfinite(u->max)))
      throw ConfigError("eta-min/eta-max: need 0 < eta_min <= eta_max");
    return;
  }
  const auto& t = std::get<TwoClassEta>(spec);
  if (!(t.fraction_major >= 0.0 && t.fraction_major <= 1.0))
    throw ConfigError("two-class: fraction must lie in [0, 1]");
  if (!(t.eta_major > 0.0)) throw ConfigError("two-class: major eta must be positive");
  if (!(t.minor_min > 0.0 && t.minor_min <= t.minor_max && std::isfinite(t.minor_max)))
    throw ConfigError("two-class: need 0 < minor min <= minor max");
}

std::vector<double> assign_heterogeneous_eta(const EtaDistributionSpec& spec, std::size_t n,
                                             RngStream& rng) {
  validate(spec);
  std::vector<double> eta(n);
  auto uniform_in = [&rng](double lo, double hi) {
    return lo == hi ? lo : lo + (hi - lo) * rng.uniform_open_closed();
  };
  if (const auto* u = std::get_if<UniformEta>(&spec)) {
    for (auto& e : eta) e = uniform_in(u->min, u->max);
    return eta;
  }
  const auto& t = std::get<TwoClassEta>(spec);
  const auto n_major =
      static_cast<std::size_t>(std::floor(t.fraction_major * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i)
    eta[i] = i < n_major ? t.eta_major : uniform_in(t.minor_min, t.minor_max);
  return eta;
}

}  // namespace kinex
