#include "homog/sampling.hpp"

namespace homog {

InitialMeasure parse_initial_measure(const std::string& name) {
  if (name == "mu") return InitialMeasure::kMu;
  if (name == "lebesgue") return InitialMeasure::kLebesgue;
  throw ConfigError("unknown initial measure '" + name + "' (expected mu or lebesgue)");
}

std::string to_string(InitialMeasure m) { return m == InitialMeasure::kMu ? "mu" : "lebesgue"; }

SampledOrbit::SampledOrbit(const MapSpec& spec, std::uint64_t seed, std::uint64_t index,
                           InitialMeasure initial, std::size_t burnin)
    : kind_(spec.kind),
      lsv_{LsvLeftBranch(spec.kind == MapKind::kLsv ? spec.gamma : 0.25)},
      dbl_state_{0, 0, 0, RngStream(seed, index, StreamPurpose::kRefill)} {
  switch (kind_) {
    case MapKind::kLsv:
      lsv_state_ = start_orbit(lsv_, seed, index, initial, burnin);
      x_ = LsvStepper::value(lsv_state_);
      break;
    case MapKind::kDoubling:
      dbl_state_ = start_orbit(DoublingStepper{}, seed, index, initial, burnin);
      x_ = DoublingStepper::value(dbl_state_);
      break;
    case MapKind::kQuadratic:
      quad_state_ = start_orbit(QuadraticStepper{}, seed, index, initial, burnin);
      x_ = QuadraticStepper::value(quad_state_);
      break;
  }
}

void SampledOrbit::advance() {
  switch (kind_) {
    case MapKind::kLsv:
      lsv_.advance(lsv_state_);
      x_ = lsv_state_.x;
      return;
    case MapKind::kDoubling:
      DoublingStepper::advance(dbl_state_);
      x_ = DoublingStepper::value(dbl_state_);
      return;
    case MapKind::kQuadratic:
      QuadraticStepper::advance(quad_state_);
      x_ = quad_state_.x;
      return;
  }
}

}  // namespace homog
