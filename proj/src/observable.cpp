#include "homog/observable.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "homog/errors.hpp"

namespace homog {

Observable::Observable(ObservableKind kind, std::string name, int dim)
    : kind_(kind), name_(std::move(name)), dim_(dim), offset_(Vec::Zero(dim)) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("observable dimension must be in [1, 4]");
}

Observable Observable::zero() { return {ObservableKind::kZero, "zero", 1}; }
Observable Observable::linear() { return {ObservableKind::kLinear, "linear", 1}; }
Observable Observable::cosine() { return {ObservableKind::kCos, "cos", 1}; }
Observable Observable::vec3() { return {ObservableKind::kVec3, "vec3", 3}; }

Observable Observable::constant(double value) {
  Observable o(ObservableKind::kConstant, "constant", 1);
  o.constant_ = value;
  return o;
}

Observable Observable::custom(std::string name, int dim, RawFn raw) {
  Observable o(ObservableKind::kCustom, std::move(name), dim);
  o.raw_ = std::make_shared<const RawFn>(std::move(raw));
  return o;
}

Observable Observable::with_offset(const Vec& c) const {
  if (c.size() != dim_) throw ConfigError("offset dimension mismatch for observable " + name_);
  Observable o = *this;
  o.offset_ = c;
  return o;
}

void Observable::raw(double x, double* out) const {
  switch (kind_) {
    case ObservableKind::kZero: out[0] = 0.0; return;
    case ObservableKind::kLinear: out[0] = x; return;
    case ObservableKind::kCos: out[0] = std::cos(2.0 * M_PI * x); return;
    case ObservableKind::kVec3:
      out[0] = x;
      out[1] = std::cos(2.0 * M_PI * x);
      out[2] = std::sin(2.0 * M_PI * x);
      return;
    case ObservableKind::kConstant: out[0] = constant_; return;
    case ObservableKind::kCustom: (*raw_)(x, out); return;
  }
}

Observable parse_observable(const std::string& name) {
  if (name == "zero") return Observable::zero();
  if (name == "linear") return Observable::linear();
  if (name == "cos") return Observable::cosine();
  if (name == "vec3") return Observable::vec3();
  throw ConfigError("unknown observable '" + name + "' (expected zero, linear, cos or vec3)");
}

Observable center(const Observable& raw, const DensityEstimate& density) {
  Vec c(raw.dim());
  Vec buf(raw.dim());
  for (int i = 0; i < raw.dim(); ++i) {
    c[i] = density.integrate([&](double x) {
      raw.raw(x, buf.data());
      return buf[i];
    });
  }
  return raw.with_offset(c);
}

Vec arcsine_mean(const Observable& v) {
  // x = cos(pi theta) carries Lebesgue on theta to the arcsine law
  using G = boost::math::quadrature::gauss<double, 16>;
  constexpr int kPanels = 512;
  Vec m = Vec::Zero(v.dim());
  Vec buf(v.dim());
  for (int k = 0; k < kPanels; ++k) {
    const double a = static_cast<double>(k) / kPanels, b = static_cast<double>(k + 1) / kPanels;
    for (int i = 0; i < v.dim(); ++i)
      m[i] += G::integrate(
          [&](double th) {
            v(std::cos(M_PI * th), buf.data());
            return buf[i];
          },
          a, b);
  }
  return m;
}

Observable center(const Observable& raw, const MapSpec& spec, std::size_t bins) {
  if (raw.kind() == ObservableKind::kZero) return raw;
  if (spec.kind == MapKind::kQuadratic) return raw.with_offset(arcsine_mean(raw.with_offset(Vec::Zero(raw.dim()))));
  return center(raw, invariant_density_ulam(spec, bins));
}

HolderData estimate_holder(const Observable& v, const MapSpec& spec, std::size_t grid) {
  const Interval dom = spec.domain();
  const double h = dom.width() / static_cast<double>(grid);
  HolderData out;
  Vec prev = v(dom.lo);
  out.sup = prev.norm();
  for (std::size_t i = 1; i <= grid; ++i) {
    const Vec cur = v(dom.lo + static_cast<double>(i) * h);
    out.sup = std::max(out.sup, cur.norm());
    out.holder = std::max(out.holder, (cur - prev).norm() / std::pow(h, spec.eta));
    prev = cur;
  }
  return out;
}

}  // namespace homog
