#include <cmath>

#include "slab/error.hpp"
#include "slab/quantize.hpp"

namespace slab::quantize {

CanonicalPlan::CanonicalPlan(DualPair pair, Weight gamma, Direction direction, const Grid& g)
    : pair_(std::move(pair)), gamma_(std::move(gamma)), direction_(direction), grid_(g) {
  if (pair_.primal.dim() != g.n) throw Error(ErrorCode::InvalidSize, "CanonicalPlan: dimension mismatch");
  std::vector<double> w;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec xi = g.frequency(k);
    const double c = gamma_(xi);
    if (c == 0.0) continue;
    if (xi.norm() < symbols::kXiFloor) {
      throw Error(ErrorCode::ConfigInvalid, "CanonicalPlan: gamma must vanish near xi = 0");
    }
    support_.push_back(k);
    warped_.push_back(warp(xi));
    w.push_back(c);
  }
  weights_ = CVec(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) weights_[static_cast<Eigen::Index>(i)] = w[i];
}

Vec CanonicalPlan::warp(const Vec& xi) const {
  return direction_ == Direction::Forward ? symbols::psi(pair_, xi) : symbols::psi_inv(pair_, xi);
}

Field CanonicalPlan::apply(const Field& u, double* leakage) const {
  if (!(u.grid == grid_)) throw Error(ErrorCode::InvalidSize, "apply_canonical: grid mismatch");
  const CVec values = grid::spectrum_at(u, warped_);
  Spectrum out{grid_, CVec::Zero(static_cast<Eigen::Index>(grid_.size()))};
  double edge = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double c = weights_[i].real();
    const double mass = std::norm(values[i]);
    total += mass;
    if (c < 1.0) edge += mass;
    out.values[static_cast<Eigen::Index>(support_[static_cast<std::size_t>(i)])] = c * values[i];
  }
  const double share = total > 0.0 ? edge / total : 0.0;
  if (leakage) *leakage = share;
  if (share > leakage_limit) {
    throw Error(ErrorCode::CutoffLeakage,
                "apply_canonical: " + std::to_string(100.0 * share) + "% of the spectral mass sits on the cutoff transition");
  }
  return grid::inverse_transform(out);
}

CanonicalPlan partner_plan(const CanonicalPlan& plan) {
  const DualPair& pair = plan.pair();
  const Weight gamma = plan.gamma();
  const Direction other =
      plan.direction() == Direction::Forward ? Direction::Inverse : Direction::Forward;
  // The partner's cutoff is gamma composed with the partner's own warp inverse.
  Weight partner;
  if (plan.direction() == Direction::Forward) {
    partner = [pair, gamma](const Vec& xi) {
      return xi.norm() < symbols::kXiFloor ? 0.0 : gamma(symbols::psi_inv(pair, xi));
    };
  } else {
    partner = [pair, gamma](const Vec& xi) {
      return xi.norm() < symbols::kXiFloor ? 0.0 : gamma(symbols::psi(pair, xi));
    };
  }
  CanonicalPlan out(pair, partner, other, plan.grid());
  out.leakage_limit = plan.leakage_limit;
  return out;
}

Field apply_canonical(const CanonicalPlan& plan, const Field& u, double* leakage) {
  return plan.apply(u, leakage);
}

}  // namespace slab::quantize
