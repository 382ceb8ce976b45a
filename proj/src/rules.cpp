#include "kinex/rules.hpp"

#include <string>

namespace kinex {

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ConfigError("lambda: must lie in [0, 1), got " + std::to_string(lambda));
}

}  // namespace

TradeProposal propose_immediate(double x_j, double x_k, RngStream& rng) {
  TradeProposal p;
  p.eps_j = rng.uniform_open_closed();
  p.eps_k = rng.uniform_open_closed();
  p.delta = immediate_delta(x_j, x_k, p.eps_j, p.eps_k);
  return p;
}

TradeProposal propose_dy(double x_j, double x_k, RngStream& rng) {
  TradeProposal p;
  const double eps = rng.uniform_open_closed();
  p.eps_j = eps;
  p.eps_k = eps;
  p.delta = dy_delta(x_j, x_k, eps);
  return p;
}

TradeProposal propose_cc(double x_j, double x_k, double lambda, RngStream& rng) {
  check_lambda(lambda);
  TradeProposal p;
  const double eps = rng.uniform_open_closed();
  p.eps_j = eps;
  p.eps_k = eps;
  p.delta = cc_delta(x_j, x_k, lambda, eps);
  return p;
}

TradeProposal propose_angle(double x_j, double x_k, double lambda, double p0, RngStream& rng) {
  check_lambda(lambda);
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("p0: must lie in [0, 1]");
  TradeProposal p;
  p.direction = rng.uniform() < p0 ? 1 : 0;
  const double eps = rng.uniform_open_closed();
  p.eps_j = eps;
  p.eps_k = eps;
  p.delta = angle_delta(x_j, x_k, lambda, eps, p.direction);
  return p;
}

TradeProposal propose_mixed(double x_j, double x_k, double mu, RngStream& rng) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("mu: must lie in [0, 1]");
  bool one_way = mu >= 1.0;
  if (mu > 0.0 && mu < 1.0) one_way = rng.uniform() < mu;
  return one_way ? propose_angle(x_j, x_k, 0.0, 0.5, rng) : propose_immediate(x_j, x_k, rng);
}

TradeProposal propose(const ExchangeRule& rule, double x_j, double x_k, RngStream& rng) {
  switch (rule.kind) {
    case RuleKind::Immediate:
      return propose_immediate(x_j, x_k, rng);
    case RuleKind::DYReshuffle:
      return propose_dy(x_j, x_k, rng);
    case RuleKind::CCSaving:
      return propose_cc(x_j, x_k, rule.lambda, rng);
    case RuleKind::AngleUnidirectional:
      return propose_angle(x_j, x_k, 0.0, rule.p0, rng);
    case RuleKind::AngleSaving:
      return propose_angle(x_j, x_k, rule.lambda, rule.p0, rng);
    case RuleKind::Mixed:
      return propose_mixed(x_j, x_k, rule.mu, rng);
  }
  throw ConfigError("rule: unknown kind");
}

}  // namespace kinex
