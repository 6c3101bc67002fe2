#pragma once

#include <memory>
#include <mutex>

#include "fuzz/piecewise.hpp"

namespace fuzz {

struct Interval {
  double lo = 0;
  double hi = 0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
};

struct AlphaCut {
  double lo = 0;
  double hi = 0;
  double alpha = 1;
};

/// The membership-side view of a fuzzy interval: left component on
/// [support.lo, core.lo], the value-1 plateau, right component on
/// [core.hi, support.hi].
struct CharView {
  MonotoneFn left;
  Interval plateau;
  MonotoneFn right;
};

/// A fuzzy interval as an ordered pair of endpoint functions of the level
/// alpha: the lower endpoint increasing and left-continuous, the upper
/// endpoint decreasing and right-continuous, both on [0,1]. All arithmetic
/// operates on this representation; the membership view is derived lazily by
/// generalized inversion and cached.
class FuzzyInterval {
 public:
  FuzzyInterval(MonotoneFn lower, MonotoneFn upper)
      : lower_(std::move(lower)),
        upper_(std::move(upper)),
        cache_(std::make_shared<ViewCache>()) {
    validate_invariants();
  }

  const MonotoneFn& lower() const { return lower_; }
  const MonotoneFn& upper() const { return upper_; }

  Interval support() const { return {lower_.eval(0.0), upper_.eval(0.0)}; }
  Interval core() const { return {lower_.eval(1.0), upper_.eval(1.0)}; }

  bool is_positive() const { return lower_.eval(0.0) > 0.0; }

  AlphaCut alpha_cut(double alpha) const {
    if (!(alpha > 0.0) || alpha > 1.0)
      fail(ErrorKind::Range, "alpha must lie in (0,1], got " + std::to_string(alpha));
    return {lower_.eval(alpha), upper_.eval(alpha), alpha};
  }

  /// Membership level at x: 0 outside the support, 1 on the core, the
  /// recovered component value on the flanks. Upper semi-continuous.
  double membership(double x) const {
    const CharView& view = char_view();
    Interval supp = support();
    if (x < supp.lo || x > supp.hi) return 0.0;
    if (x >= view.plateau.lo && x <= view.plateau.hi) return 1.0;
    if (x < view.plateau.lo) return view.left.eval(x);
    return view.right.eval(x);
  }

  /// The x-space view, computed on first use. Concurrent fills are idempotent.
  const CharView& char_view() const {
    std::scoped_lock lock(cache_->mutex);
    if (!cache_->view) {
      cache_->view = std::make_unique<CharView>(CharView{
          inverse_sup(lower_), Interval{lower_.eval(1.0), upper_.eval(1.0)},
          inverse_inf(upper_)});
    }
    return *cache_->view;
  }

  bool equals(const FuzzyInterval& other, double tol = 1e-9) const {
    return lower_.equals(other.lower_, tol) && upper_.equals(other.upper_, tol);
  }

 private:
  struct ViewCache {
    std::mutex mutex;
    std::unique_ptr<CharView> view;
  };

  void validate_invariants() const {
    auto check_domain = [](const MonotoneFn& f, const char* which) {
      if (!detail::nearly_equal(f.domain_lo(), 0.0) ||
          !detail::nearly_equal(f.domain_hi(), 1.0))
        fail(ErrorKind::Shape, std::string(which) + " endpoint function must live on [0,1]");
    };
    check_domain(lower_, "lower");
    check_domain(upper_, "upper");
    if (lower_.direction() != Direction::Increasing ||
        lower_.continuity() != Continuity::Left)
      fail(ErrorKind::Shape, "lower endpoint function must be increasing and left-continuous");
    if (upper_.direction() != Direction::Decreasing ||
        upper_.continuity() != Continuity::Right)
      fail(ErrorKind::Shape, "upper endpoint function must be decreasing and right-continuous");
    // Monotonicity reduces the interval ordering to the core.
    double core_lo = lower_.eval(1.0);
    double core_hi = upper_.eval(1.0);
    double scale = std::max({1.0, std::abs(core_lo), std::abs(core_hi)});
    if (core_lo > core_hi + 1e-12 * scale)
      fail(ErrorKind::Order, "endpoint functions cross: core is empty");
    // Closed-edge conditions: no jump of the lower endpoint at 0 nor of the
    // upper endpoint at 1.
    if (!detail::nearly_equal(lower_.eval(0.0), lower_.right_limit(0.0)))
      fail(ErrorKind::Shape, "lower endpoint function jumps at level 0");
    if (!detail::nearly_equal(upper_.eval(1.0), upper_.left_limit(1.0)))
      fail(ErrorKind::Shape, "upper endpoint function jumps at level 1");
  }

  MonotoneFn lower_;
  MonotoneFn upper_;
  std::shared_ptr<ViewCache> cache_;
};

// --- constructors -----------------------------------------------------------

inline FuzzyInterval make_fuzzy(MonotoneFn lower, MonotoneFn upper) {
  return FuzzyInterval(std::move(lower), std::move(upper));
}

/// Triangle-shaped number: affine flanks through (l,0), (m,1), (r,0).
inline FuzzyInterval triangle(double l, double m, double r) {
  if (!(l <= m && m <= r))
    fail(ErrorKind::Order, "triangle needs l <= m <= r");
  MonotoneFn lower = MonotoneFn::single(Direction::Increasing, Continuity::Left, 0, 1,
                                        Segment::affine(m - l, l));
  MonotoneFn upper = MonotoneFn::single(Direction::Decreasing, Continuity::Right, 0, 1,
                                        Segment::affine(-(r - m), r));
  return FuzzyInterval(std::move(lower), std::move(upper));
}

inline FuzzyInterval trapezoid(double l, double m1, double m2, double r) {
  if (!(l <= m1 && m1 <= m2 && m2 <= r))
    fail(ErrorKind::Order, "trapezoid needs l <= m1 <= m2 <= r");
  MonotoneFn lower = MonotoneFn::single(Direction::Increasing, Continuity::Left, 0, 1,
                                        Segment::affine(m1 - l, l));
  MonotoneFn upper = MonotoneFn::single(Direction::Decreasing, Continuity::Right, 0, 1,
                                        Segment::affine(-(r - m2), r));
  return FuzzyInterval(std::move(lower), std::move(upper));
}

/// Crisp real number as a fuzzy interval (delta-shaped membership).
inline FuzzyInterval point(double lambda) {
  return FuzzyInterval(
      MonotoneFn::constant(lambda, 0, 1, Direction::Increasing, Continuity::Left),
      MonotoneFn::constant(lambda, 0, 1, Direction::Decreasing, Continuity::Right));
}

/// Crisp interval [a, b] as a fuzzy interval (indicator membership).
inline FuzzyInterval crisp_interval(double a, double b) {
  if (!(a <= b)) fail(ErrorKind::Order, "crisp interval needs a <= b");
  return FuzzyInterval(
      MonotoneFn::constant(a, 0, 1, Direction::Increasing, Continuity::Left),
      MonotoneFn::constant(b, 0, 1, Direction::Decreasing, Continuity::Right));
}

/// Assemble a fuzzy interval from its membership-side components by
/// generalized inversion. The components must reach 1 exactly where they meet
/// the plateau.
inline FuzzyInterval from_components(const MonotoneFn& xi_left, Interval plateau,
                                     const MonotoneFn& xi_right) {
  if (xi_left.direction() != Direction::Increasing ||
      xi_left.continuity() != Continuity::Right)
    fail(ErrorKind::Shape, "left component must be non-decreasing and right-continuous");
  if (xi_right.direction() != Direction::Decreasing ||
      xi_right.continuity() != Continuity::Left)
    fail(ErrorKind::Shape, "right component must be non-increasing and left-continuous");
  if (!detail::nearly_equal(xi_left.domain_hi(), plateau.lo) ||
      !detail::nearly_equal(xi_right.domain_lo(), plateau.hi))
    fail(ErrorKind::Gap, "component domains must meet the plateau");
  if (plateau.lo > plateau.hi)
    fail(ErrorKind::Order, "plateau interval is reversed");
  if (std::abs(xi_left.eval(xi_left.domain_hi()) - 1.0) > 1e-9)
    fail(ErrorKind::Gap, "left component must reach 1 at the plateau");
  if (std::abs(xi_right.eval(xi_right.domain_lo()) - 1.0) > 1e-9)
    fail(ErrorKind::Gap, "right component must reach 1 at the plateau");
  MonotoneFn lower = inverse_inf(xi_left);
  MonotoneFn upper = inverse_sup(xi_right);
  FuzzyInterval out(std::move(lower), std::move(upper));
  Interval c = out.core();
  if (!detail::nearly_equal(c.lo, plateau.lo) || !detail::nearly_equal(c.hi, plateau.hi))
    fail(ErrorKind::Gap, "components reach 1 before the declared plateau");
  return out;
}

// --- free-function spellings used throughout the tests and the CLI ---------

inline AlphaCut alpha_cut(const FuzzyInterval& f, double alpha) { return f.alpha_cut(alpha); }
inline double membership(const FuzzyInterval& f, double x) { return f.membership(x); }
inline Interval support(const FuzzyInterval& f) { return f.support(); }
inline Interval core(const FuzzyInterval& f) { return f.core(); }
inline const CharView& char_view(const FuzzyInterval& f) { return f.char_view(); }

/// Re-checks every representation invariant; test suites run this on all
/// constructed values.
inline void validate(const FuzzyInterval& f) {
  FuzzyInterval copy(f.lower(), f.upper());
  Interval s = copy.support();
  Interval c = copy.core();
  if (!(s.lo <= c.lo && c.lo <= c.hi && c.hi <= s.hi))
    fail(ErrorKind::Internal, "support does not contain core");
}

}  // namespace fuzz
