#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fuzz/errors.hpp"

namespace fuzz {

enum class Direction { Increasing, Decreasing };
enum class Continuity { Left, Right };

/// Which root of a*s^2 + b*s + c = x a QuadraticRoot segment evaluates:
/// Plus is (-b + sqrt(D))/(2a), Minus is (-b - sqrt(D))/(2a).
enum class QuadBranch { Plus, Minus };

struct Knot {
  double x;
  double y;
};

namespace detail {

constexpr double kValueTol = 1e-12;   // slack for monotonicity / anchor checks
constexpr double kDomainTol = 1e-9;   // slack for domain membership

inline bool nearly_equal(double a, double b, double tol = kValueTol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Number of alpha knots used when an operation has no closed form. The
/// FUZZ_ALPHA_RES environment variable overrides the 1025 default
/// (power-of-two + 1, so refined grids nest).
inline int default_alpha_resolution() {
  static const int value = [] {
    if (const char* env = std::getenv("FUZZ_ALPHA_RES")) {
      int parsed = std::atoi(env);
      if (parsed >= 3) return parsed;
    }
    return 1025;
  }();
  return value;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Segment: one piece of a piecewise function, as a closed-form kind or a
// sampled table. A Segment carries no domain; the owning function assigns it
// a closed sub-interval.
// ---------------------------------------------------------------------------

class Segment {
 public:
  enum class Kind { Constant, Affine, Quadratic, QuadraticRoot, Mobius, Sampled };

  static Segment constant(double value) {
    Segment s;
    s.kind_ = Kind::Constant;
    s.p_[0] = value;
    return s;
  }

  /// slope*t + intercept; collapses to Constant when slope == 0.
  static Segment affine(double slope, double intercept) {
    if (slope == 0.0) return constant(intercept);
    Segment s;
    s.kind_ = Kind::Affine;
    s.p_[0] = slope;
    s.p_[1] = intercept;
    return s;
  }

  /// a*t^2 + b*t + c; collapses to Affine when a == 0.
  static Segment quadratic(double a, double b, double c) {
    if (a == 0.0) return affine(b, c);
    Segment s;
    s.kind_ = Kind::Quadratic;
    s.p_[0] = a;
    s.p_[1] = b;
    s.p_[2] = c;
    return s;
  }

  /// The branch of s(x) solving a*s^2 + b*s + c = x.
  static Segment quadratic_root(double a, double b, double c, QuadBranch branch) {
    if (a == 0.0) {
      if (b == 0.0) fail(ErrorKind::Shape, "degenerate quadratic root segment");
      return affine(1.0 / b, -c / b);  // b*s + c = x
    }
    Segment s;
    s.kind_ = Kind::QuadraticRoot;
    s.p_[0] = a;
    s.p_[1] = b;
    s.p_[2] = c;
    s.branch_ = branch;
    return s;
  }

  /// (a*t + b) / (c*t + d); collapses to Affine when c == 0 and to Constant
  /// when the determinant vanishes.
  static Segment mobius(double a, double b, double c, double d) {
    if (c == 0.0) {
      if (d == 0.0) fail(ErrorKind::Shape, "mobius segment with zero denominator");
      return affine(a / d, b / d);
    }
    if (a * d - b * c == 0.0) return constant(a / c);
    Segment s;
    s.kind_ = Kind::Mobius;
    s.p_[0] = a;
    s.p_[1] = b;
    s.p_[2] = c;
    s.p_[3] = d;
    return s;
  }

  /// Piecewise-linear table. Knot inputs must be strictly increasing.
  static Segment sampled(std::vector<Knot> knots) {
    if (knots.size() < 2) fail(ErrorKind::Shape, "sampled segment needs at least 2 knots");
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (!(knots[i - 1].x < knots[i].x))
        fail(ErrorKind::Shape, "sampled knots must be strictly increasing in input");
    }
    Segment s;
    s.kind_ = Kind::Sampled;
    s.knots_ = std::move(knots);
    return s;
  }

  Kind kind() const { return kind_; }
  const std::vector<Knot>& knots() const { return knots_; }
  double param(int i) const { return p_[i]; }
  QuadBranch branch() const { return branch_; }

  double eval(double t) const {
    switch (kind_) {
      case Kind::Constant:
        return p_[0];
      case Kind::Affine:
        return p_[0] * t + p_[1];
      case Kind::Quadratic:
        return (p_[0] * t + p_[1]) * t + p_[2];
      case Kind::QuadraticRoot:
        return eval_quadratic_root(t);
      case Kind::Mobius:
        return (p_[0] * t + p_[1]) / (p_[2] * t + p_[3]);
      case Kind::Sampled:
        return eval_sampled(t);
    }
    fail(ErrorKind::Internal, "unreachable segment kind");
  }

  bool is_constant() const { return kind_ == Kind::Constant; }
  bool is_closed_form() const { return kind_ != Kind::Sampled; }

  /// t-coordinates interior to (lo, hi) where the derivative may change sign.
  /// Only Quadratic has one (its vertex); Sampled extrema sit on knots, which
  /// the envelope machinery already treats as split points.
  std::optional<double> interior_vertex(double lo, double hi) const {
    if (kind_ == Kind::Quadratic) {
      double v = -p_[1] / (2.0 * p_[0]);
      if (v > lo && v < hi) return v;
    }
    return std::nullopt;
  }

  Segment negated() const {
    switch (kind_) {
      case Kind::Constant:
        return constant(-p_[0]);
      case Kind::Affine:
        return affine(-p_[0], -p_[1]);
      case Kind::Quadratic:
        return quadratic(-p_[0], -p_[1], -p_[2]);
      case Kind::QuadraticRoot:
        // -root of (a,b,c) solves a*s^2 - b*s + c = x with the branch flipped.
        return quadratic_root(p_[0], -p_[1], p_[2],
                              branch_ == QuadBranch::Plus ? QuadBranch::Minus
                                                          : QuadBranch::Plus);
      case Kind::Mobius:
        return mobius(-p_[0], -p_[1], p_[2], p_[3]);
      case Kind::Sampled: {
        std::vector<Knot> k = knots_;
        for (auto& kn : k) kn.y = -kn.y;
        return sampled(std::move(k));
      }
    }
    fail(ErrorKind::Internal, "unreachable segment kind");
  }

  Segment scaled(double factor) const {
    if (factor == 0.0) return constant(0.0);
    if (factor < 0.0) return negated().scaled(-factor);
    switch (kind_) {
      case Kind::Constant:
        return constant(factor * p_[0]);
      case Kind::Affine:
        return affine(factor * p_[0], factor * p_[1]);
      case Kind::Quadratic:
        return quadratic(factor * p_[0], factor * p_[1], factor * p_[2]);
      case Kind::QuadraticRoot:
        // y = k*root: a*(y/k)^2 + b*(y/k) + c = x.
        return quadratic_root(p_[0] / (factor * factor), p_[1] / factor, p_[2], branch_);
      case Kind::Mobius:
        return mobius(factor * p_[0], factor * p_[1], p_[2], p_[3]);
      case Kind::Sampled: {
        std::vector<Knot> k = knots_;
        for (auto& kn : k) kn.y *= factor;
        return sampled(std::move(k));
      }
    }
    fail(ErrorKind::Internal, "unreachable segment kind");
  }

  Segment shifted(double offset) const {
    switch (kind_) {
      case Kind::Constant:
        return constant(p_[0] + offset);
      case Kind::Affine:
        return affine(p_[0], p_[1] + offset);
      case Kind::Quadratic:
        return quadratic(p_[0], p_[1], p_[2] + offset);
      case Kind::QuadraticRoot: {
        // y = root + k: a*(y-k)^2 + b*(y-k) + c = x.
        double a = p_[0], b = p_[1], c = p_[2], k = offset;
        return quadratic_root(a, b - 2.0 * a * k, (a * k - b) * k + c, branch_);
      }
      case Kind::Mobius:
        return mobius(p_[0] + offset * p_[2], p_[1] + offset * p_[3], p_[2], p_[3]);
      case Kind::Sampled: {
        std::vector<Knot> k = knots_;
        for (auto& kn : k) kn.y += offset;
        return sampled(std::move(k));
      }
    }
    fail(ErrorKind::Internal, "unreachable segment kind");
  }

  /// Closed-form inverse of this segment restricted to [lo, hi] where it is
  /// strictly monotone with values [vlo, vhi] (unordered). Sampled tables
  /// invert by swapping knot coordinates.
  Segment inverse_of_strictly_monotone(double lo, double hi) const {
    switch (kind_) {
      case Kind::Constant:
        fail(ErrorKind::Internal, "constant segment has no inverse");
      case Kind::Affine:
        return affine(1.0 / p_[0], -p_[1] / p_[0]);
      case Kind::Quadratic: {
        double vertex = -p_[1] / (2.0 * p_[0]);
        bool right_of_vertex = lo >= vertex - detail::kValueTol;
        QuadBranch br = (right_of_vertex == (p_[0] > 0.0)) ? QuadBranch::Plus
                                                           : QuadBranch::Minus;
        return quadratic_root(p_[0], p_[1], p_[2], br);
      }
      case Kind::QuadraticRoot:
        return quadratic(p_[0], p_[1], p_[2]);
      case Kind::Mobius:
        return mobius(p_[3], -p_[1], -p_[2], p_[0]);
      case Kind::Sampled: {
        std::vector<Knot> inv;
        inv.reserve(knots_.size());
        auto emit = [&](double x, double y) {
          if (inv.empty() || inv.back().x < y) inv.push_back({y, x});
        };
        bool increasing = knots_.front().y < knots_.back().y;
        if (increasing) {
          for (const Knot& k : knots_) {
            if (k.x < lo - detail::kValueTol || k.x > hi + detail::kValueTol) continue;
            emit(k.x, k.y);
          }
        } else {
          for (auto it = knots_.rbegin(); it != knots_.rend(); ++it) {
            if (it->x < lo - detail::kValueTol || it->x > hi + detail::kValueTol) continue;
            emit(it->x, it->y);
          }
        }
        if (inv.size() < 2) fail(ErrorKind::Internal, "sampled inverse degenerated");
        return sampled(std::move(inv));
      }
    }
    fail(ErrorKind::Internal, "unreachable segment kind");
  }

  /// Structural identity: same kind and identical parameters.
  bool same_formula(const Segment& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
      case Kind::Constant:
        return p_[0] == other.p_[0];
      case Kind::Affine:
        return p_[0] == other.p_[0] && p_[1] == other.p_[1];
      case Kind::Quadratic:
        return p_[0] == other.p_[0] && p_[1] == other.p_[1] && p_[2] == other.p_[2];
      case Kind::QuadraticRoot:
        return p_[0] == other.p_[0] && p_[1] == other.p_[1] && p_[2] == other.p_[2] &&
               branch_ == other.branch_;
      case Kind::Mobius:
        return p_[0] == other.p_[0] && p_[1] == other.p_[1] && p_[2] == other.p_[2] &&
               p_[3] == other.p_[3];
      case Kind::Sampled:
        return false;  // tables compare by value, not structure
    }
    return false;
  }

 private:
  Segment() = default;

  double eval_quadratic_root(double x) const {
    const double a = p_[0], b = p_[1];
    const double cmx = p_[2] - x;
    double disc = b * b - 4.0 * a * cmx;
    if (disc < 0.0) {
      if (disc > -1e-9 * std::max(1.0, b * b + std::abs(4.0 * a * cmx))) {
        disc = 0.0;  // grazing the vertex, within roundoff
      } else {
        fail(ErrorKind::Domain, "quadratic root segment evaluated outside its range");
      }
    }
    const double sq = std::sqrt(disc);
    double plus, minus;
    if (b >= 0.0) {
      const double q = -0.5 * (b + sq);
      minus = q / a;                       // (-b - sq)/(2a)
      plus = (q != 0.0) ? cmx / q : -b / (2.0 * a);
    } else {
      const double q = -0.5 * (b - sq);
      plus = q / a;                        // (-b + sq)/(2a)
      minus = (q != 0.0) ? cmx / q : -b / (2.0 * a);
    }
    return branch_ == QuadBranch::Plus ? plus : minus;
  }

  double eval_sampled(double t) const {
    const auto& k = knots_;
    if (t <= k.front().x) return k.front().y;
    if (t >= k.back().x) return k.back().y;
    auto it = std::upper_bound(k.begin(), k.end(), t,
                               [](double v, const Knot& kn) { return v < kn.x; });
    const Knot& hi = *it;
    const Knot& lo = *(it - 1);
    if (t == lo.x) return lo.y;
    const double w = (t - lo.x) / (hi.x - lo.x);
    return lo.y + w * (hi.y - lo.y);
  }

  Kind kind_ = Kind::Constant;
  double p_[4] = {0, 0, 0, 0};
  QuadBranch branch_ = QuadBranch::Plus;
  std::vector<Knot> knots_;
};

/// A segment assigned to a closed sub-interval of the owning function's
/// domain. Degenerate pieces (lo == hi) pin an isolated boundary value, e.g.
/// the value 1 a right component takes at the core edge before jumping.
struct Piece {
  double lo;
  double hi;
  Segment seg;

  double value_at_lo() const { return seg.eval(lo); }
  double value_at_hi() const { return seg.eval(hi); }
  bool degenerate() const { return lo == hi; }
};

// ---------------------------------------------------------------------------
// MonotoneFn
// ---------------------------------------------------------------------------

/// A weakly monotone piecewise function on a closed interval, with a declared
/// one-sided continuity that decides which side owns the value at a jump.
/// Values are immutable after construction.
class MonotoneFn {
 public:
  MonotoneFn(Direction dir, Continuity cont, std::vector<Piece> pieces)
      : dir_(dir), cont_(cont), pieces_(std::move(pieces)) {
    validate();
  }

  static MonotoneFn constant(double value, double lo, double hi,
                             Direction dir = Direction::Increasing,
                             Continuity cont = Continuity::Left) {
    return MonotoneFn(dir, cont, {Piece{lo, hi, Segment::constant(value)}});
  }

  static MonotoneFn single(Direction dir, Continuity cont, double lo, double hi,
                           Segment seg) {
    return MonotoneFn(dir, cont, {Piece{lo, hi, std::move(seg)}});
  }

  Direction direction() const { return dir_; }
  Continuity continuity() const { return cont_; }
  double domain_lo() const { return pieces_.front().lo; }
  double domain_hi() const { return pieces_.back().hi; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  bool in_domain(double x) const {
    return x >= domain_lo() - detail::kDomainTol && x <= domain_hi() + detail::kDomainTol;
  }

  /// Value at x. At an interior breakpoint the side matching the declared
  /// continuity owns the value; a degenerate edge piece owns its point.
  double eval(double x) const {
    if (!in_domain(x)) {
      fail(ErrorKind::Domain, "evaluation point " + std::to_string(x) +
                                  " outside domain [" + std::to_string(domain_lo()) +
                                  ", " + std::to_string(domain_hi()) + "]");
    }
    x = std::clamp(x, domain_lo(), domain_hi());
    const std::size_t n = pieces_.size();
    // First piece whose hi >= x.
    std::size_t i = std::partition_point(pieces_.begin(), pieces_.end(),
                                         [x](const Piece& p) { return p.hi < x; }) -
                    pieces_.begin();
    if (i >= n) i = n - 1;
    if (cont_ == Continuity::Right) {
      // Prefer the piece starting at x (covers degenerate trailing pieces).
      if (x == pieces_[i].hi && i + 1 < n && pieces_[i + 1].lo == x) ++i;
      while (i + 1 < n && pieces_[i + 1].lo == x && pieces_[i + 1].degenerate()) ++i;
    } else {
      // Prefer the piece ending at x (covers degenerate leading pieces).
      while (i > 0 && pieces_[i - 1].hi == x) --i;
    }
    return pieces_[i].seg.eval(x);
  }

  double value_at_domain_lo() const { return eval(domain_lo()); }
  double value_at_domain_hi() const { return eval(domain_hi()); }

  /// One-sided limits at x, ignoring the continuity stamp.
  double left_limit(double x) const {
    for (std::size_t i = pieces_.size(); i-- > 0;) {
      const Piece& p = pieces_[i];
      if (p.degenerate()) continue;
      if (p.lo < x && x <= p.hi) return p.seg.eval(x);
    }
    return eval(x);
  }

  double right_limit(double x) const {
    for (const Piece& p : pieces_) {
      if (p.degenerate()) continue;
      if (p.lo <= x && x < p.hi) return p.seg.eval(x);
    }
    return eval(x);
  }

  MonotoneFn negated(Continuity restamp) const {
    std::vector<Piece> out;
    out.reserve(pieces_.size());
    for (const Piece& p : pieces_) out.push_back({p.lo, p.hi, p.seg.negated()});
    Direction d = dir_ == Direction::Increasing ? Direction::Decreasing
                                                : Direction::Increasing;
    return MonotoneFn(d, restamp, std::move(out));
  }

  MonotoneFn scaled(double factor) const {
    if (factor == 0.0)
      return MonotoneFn::constant(0.0, domain_lo(), domain_hi(), dir_, cont_);
    if (factor < 0.0) return negated(cont_).scaled(-factor);
    std::vector<Piece> out;
    out.reserve(pieces_.size());
    for (const Piece& p : pieces_) out.push_back({p.lo, p.hi, p.seg.scaled(factor)});
    return MonotoneFn(dir_, cont_, std::move(out));
  }

  MonotoneFn shifted(double offset) const {
    std::vector<Piece> out;
    out.reserve(pieces_.size());
    for (const Piece& p : pieces_) out.push_back({p.lo, p.hi, p.seg.shifted(offset)});
    return MonotoneFn(dir_, cont_, std::move(out));
  }

  MonotoneFn restamped(Continuity cont) const {
    return MonotoneFn(dir_, cont, pieces_);
  }

  /// Equality per the module contract: structural when the piecewise shapes
  /// match, otherwise a grid comparison at the canonical resolution.
  bool equals(const MonotoneFn& other, double tol = 1e-9) const;

  /// Breakpoints where the one-sided limits genuinely differ.
  std::vector<double> jump_points() const {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
      double x = pieces_[i].hi;
      double a = pieces_[i].value_at_hi();
      double b = pieces_[i + 1].value_at_lo();
      if (!detail::nearly_equal(a, b)) {
        if (out.empty() || out.back() != x) out.push_back(x);
      }
    }
    return out;
  }

  /// Maximal sub-intervals of positive width where the function is constant.
  int plateau_count() const {
    int count = 0;
    std::size_t i = 0;
    while (i < pieces_.size()) {
      if (!piece_is_flat(pieces_[i]) || pieces_[i].degenerate()) {
        ++i;
        continue;
      }
      double v = pieces_[i].value_at_lo();
      std::size_t j = i + 1;
      while (j < pieces_.size() && piece_is_flat(pieces_[j]) &&
             detail::nearly_equal(pieces_[j].value_at_lo(), v) &&
             detail::nearly_equal(pieces_[j - 1].value_at_hi(), pieces_[j].value_at_lo()))
        ++j;
      ++count;
      i = j;
    }
    return count;
  }

 private:
  static bool piece_is_flat(const Piece& p) {
    if (p.seg.is_constant()) return true;
    if (p.degenerate()) return true;
    return detail::nearly_equal(p.value_at_lo(), p.value_at_hi()) &&
           detail::nearly_equal(p.seg.eval(0.5 * (p.lo + p.hi)), p.value_at_lo());
  }

  void validate() const {
    if (pieces_.empty()) fail(ErrorKind::Shape, "monotone function needs at least one piece");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& p = pieces_[i];
      if (!(p.lo <= p.hi)) fail(ErrorKind::Shape, "piece interval is reversed");
      if (p.degenerate() && i != 0 && i != pieces_.size() - 1)
        fail(ErrorKind::Shape, "degenerate piece allowed only at a domain edge");
      if (i > 0 && pieces_[i - 1].hi != p.lo)
        fail(ErrorKind::Shape, "pieces must tile the domain without gaps");
    }
    if (pieces_.front().degenerate() && pieces_.size() > 1 && cont_ != Continuity::Left)
      fail(ErrorKind::Shape, "leading point value requires left continuity");
    if (pieces_.back().degenerate() && pieces_.size() > 1 && cont_ != Continuity::Right)
      fail(ErrorKind::Shape, "trailing point value requires right continuity");
    const double sign = dir_ == Direction::Increasing ? 1.0 : -1.0;
    double prev = sign * pieces_.front().value_at_lo();
    for (const Piece& p : pieces_) {
      double scale = std::max({1.0, std::abs(p.value_at_lo()), std::abs(p.value_at_hi())});
      double vlo = sign * p.value_at_lo();
      double vhi = sign * p.value_at_hi();
      if (vlo < prev - 1e-9 * scale)
        fail(ErrorKind::Shape, "piece values violate the declared direction");
      if (vhi < vlo - 1e-9 * scale)
        fail(ErrorKind::Shape, "piece formula runs against the declared direction");
      if (!p.degenerate() && !p.seg.is_constant()) {
        double vmid = sign * p.seg.eval(0.5 * (p.lo + p.hi));
        if (vmid < vlo - 1e-9 * scale || vmid > vhi + 1e-9 * scale)
          fail(ErrorKind::Shape, "piece formula is not monotone on its interval");
      }
      if (p.seg.kind() == Segment::Kind::Sampled) {
        const auto& kn = p.seg.knots();
        for (std::size_t k = 1; k < kn.size(); ++k) {
          if (sign * kn[k].y < sign * kn[k - 1].y - 1e-9 * scale)
            fail(ErrorKind::Shape, "sampled knots violate the declared direction");
        }
      }
      prev = vhi;
    }
  }

  Direction dir_;
  Continuity cont_;
  std::vector<Piece> pieces_;
};

namespace detail {

/// Uniform probe grid including both endpoints.
inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 1 || lo == hi) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace detail

inline bool MonotoneFn::equals(const MonotoneFn& other, double tol) const {
  if (dir_ != other.dir_ || cont_ != other.cont_) return false;
  if (!detail::nearly_equal(domain_lo(), other.domain_lo()) ||
      !detail::nearly_equal(domain_hi(), other.domain_hi()))
    return false;
  if (pieces_.size() == other.pieces_.size()) {
    bool structural = true;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (!detail::nearly_equal(pieces_[i].lo, other.pieces_[i].lo) ||
          !detail::nearly_equal(pieces_[i].hi, other.pieces_[i].hi) ||
          !pieces_[i].seg.same_formula(other.pieces_[i].seg)) {
        structural = false;
        break;
      }
    }
    if (structural) return true;
  }
  const int n = detail::default_alpha_resolution();
  for (double x : detail::linspace(domain_lo(), domain_hi(), n)) {
    double a = eval(x);
    double b = other.eval(std::clamp(x, other.domain_lo(), other.domain_hi()));
    if (std::abs(a - b) > tol * std::max({1.0, std::abs(a), std::abs(b)})) return false;
  }
  return true;
}

}  // namespace fuzz

#include "fuzz/piecewise_inverse.hpp"
#include "fuzz/piecewise_compose.hpp"
