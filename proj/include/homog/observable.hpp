#pragma once

#include <functional>
#include <memory>
#include <string>

#include "homog/dynamics.hpp"
#include "homog/types.hpp"

namespace homog {

enum class ObservableKind { kZero, kLinear, kCos, kVec3, kConstant, kCustom };

/// A vector observable v(x) - c with centering offset c.
class Observable {
 public:
  using RawFn = std::function<void(double, double*)>;

  static Observable zero();
  static Observable linear();    // x
  static Observable cosine();    // cos(2 pi x)
  static Observable vec3();      // (x, cos 2 pi x, sin 2 pi x)
  static Observable constant(double value);
  static Observable custom(std::string name, int dim, RawFn raw);

  ObservableKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const Vec& offset() const { return offset_; }
  double constant_value() const { return constant_; }
  const RawFn& raw_fn() const { return *raw_; }

  Observable with_offset(const Vec& c) const;

  void raw(double x, double* out) const;
  void operator()(double x, double* out) const {
    raw(x, out);
    for (int i = 0; i < dim_; ++i) out[i] -= offset_[i];
  }
  Vec operator()(double x) const {
    Vec v(dim_);
    (*this)(x, v.data());
    return v;
  }

 private:
  Observable(ObservableKind kind, std::string name, int dim);

  ObservableKind kind_;
  std::string name_;
  int dim_;
  Vec offset_;
  double constant_ = 0.0;
  std::shared_ptr<const RawFn> raw_;
};

/// Presets: "zero", "linear", "cos", "vec3".
Observable parse_observable(const std::string& name);

/// Ulam grid used for centering.
inline constexpr std::size_t kCenteringBins = 4096;

/// Returns v - \int v dmu, with the integral computed from the Ulam density.
/// The quadratic map (a = 2) is centered against its exact arcsine density.
Observable center(const Observable& raw, const MapSpec& spec, std::size_t bins = kCenteringBins);
Observable center(const Observable& raw, const DensityEstimate& density);
/// int v d(arcsine law on [-1, 1]), offset included.
Vec arcsine_mean(const Observable& v);

struct HolderData {
  double sup = 0.0;     // |v|_inf
  double holder = 0.0;  // |v|_eta, from neighbouring grid points
};
HolderData estimate_holder(const Observable& v, const MapSpec& spec, std::size_t grid = 4096);

// Compile-time evaluators for the Monte Carlo kernels.
struct ZeroEval {
  static constexpr int dim() { return 1; }
  void operator()(double, double* o) const { o[0] = 0.0; }
};
struct LinearEval {
  double c;
  static constexpr int dim() { return 1; }
  void operator()(double x, double* o) const { o[0] = x - c; }
};
struct CosEval {
  double c;
  static constexpr int dim() { return 1; }
  void operator()(double x, double* o) const { o[0] = std::cos(2.0 * M_PI * x) - c; }
};
struct Vec3Eval {
  double c0, c1, c2;
  static constexpr int dim() { return 3; }
  void operator()(double x, double* o) const {
    o[0] = x - c0;
    o[1] = std::cos(2.0 * M_PI * x) - c1;
    o[2] = std::sin(2.0 * M_PI * x) - c2;
  }
};
struct GenericEval {
  const Observable* obs;
  int dim() const { return obs->dim(); }
  void operator()(double x, double* o) const { (*obs)(x, o); }
};

template <class F>
decltype(auto) with_evaluator(const Observable& v, F&& f) {
  switch (v.kind()) {
    case ObservableKind::kZero: return f(ZeroEval{});
    case ObservableKind::kLinear: return f(LinearEval{v.offset()[0]});
    case ObservableKind::kCos: return f(CosEval{v.offset()[0]});
    case ObservableKind::kVec3: return f(Vec3Eval{v.offset()[0], v.offset()[1], v.offset()[2]});
    default: break;
  }
  return f(GenericEval{&v});
}

}  // namespace homog
