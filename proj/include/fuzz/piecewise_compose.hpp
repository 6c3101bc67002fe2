#pragma once

#include "fuzz/piecewise.hpp"

namespace fuzz {

enum class PwOp { Add, Sub, Mul, Div, Min, Max };

namespace detail {

// Polynomial view c0 + c1*t + c2*t^2 of a segment, when it has one.
inline bool as_poly(const Segment& s, double& c0, double& c1, double& c2) {
  switch (s.kind()) {
    case Segment::Kind::Constant:
      c0 = s.param(0); c1 = 0; c2 = 0; return true;
    case Segment::Kind::Affine:
      c0 = s.param(1); c1 = s.param(0); c2 = 0; return true;
    case Segment::Kind::Quadratic:
      c0 = s.param(2); c1 = s.param(1); c2 = s.param(0); return true;
    default:
      return false;
  }
}

// Linear-fractional view (a*t + b)/(c*t + d) of a segment, when it has one.
inline bool as_linear_fractional(const Segment& s, double& a, double& b, double& c,
                                 double& d) {
  switch (s.kind()) {
    case Segment::Kind::Constant:
      a = 0; b = s.param(0); c = 0; d = 1; return true;
    case Segment::Kind::Affine:
      a = s.param(0); b = s.param(1); c = 0; d = 1; return true;
    case Segment::Kind::Mobius:
      a = s.param(0); b = s.param(1); c = s.param(2); d = s.param(3); return true;
    default:
      return false;
  }
}

inline void require_nonvanishing(double c, double d, double lo, double hi) {
  double vlo = c * lo + d;
  double vhi = c * hi + d;
  if (vlo == 0.0 || vhi == 0.0 || (vlo > 0) != (vhi > 0))
    fail(ErrorKind::DivisorVanishes, "pointwise divisor vanishes on the unit interval");
}

/// Sampled fallback: evaluate op(a(t), b(t)) on the canonical grid restricted
/// to [lo, hi], keeping both operands' knots so kinks stay exact.
inline Segment sample_combined(PwOp op, const Segment& a, const Segment& b, double lo,
                               double hi, int resolution) {
  std::vector<double> xs;
  xs.push_back(lo);
  xs.push_back(hi);
  for (double t : linspace(0.0, 1.0, resolution))
    if (t > lo && t < hi) xs.push_back(t);
  auto add_knots = [&](const Segment& s) {
    if (s.kind() != Segment::Kind::Sampled) return;
    for (const Knot& k : s.knots())
      if (k.x > lo && k.x < hi) xs.push_back(k.x);
  };
  add_knots(a);
  add_knots(b);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double p, double q) { return std::abs(p - q) < 1e-15; }),
           xs.end());
  std::vector<Knot> knots;
  knots.reserve(xs.size());
  for (double t : xs) {
    double va = a.eval(t);
    double vb = b.eval(t);
    double v = 0;
    switch (op) {
      case PwOp::Add: v = va + vb; break;
      case PwOp::Sub: v = va - vb; break;
      case PwOp::Mul: v = va * vb; break;
      case PwOp::Div:
        if (vb == 0.0) fail(ErrorKind::DivisorVanishes, "pointwise divisor vanishes");
        v = va / vb;
        break;
      default:
        fail(ErrorKind::Internal, "sample_combined only handles arithmetic ops");
    }
    knots.push_back({t, v});
  }
  return Segment::sampled(std::move(knots));
}

/// Pointwise combination of two segment formulas over [lo, hi], closed form
/// where the kinds stay inside the {constant, affine, quadratic, mobius}
/// algebra, sampled otherwise.
inline Segment combine_segments(PwOp op, const Segment& a, const Segment& b, double lo,
                                double hi, int resolution) {
  if (op == PwOp::Sub) return combine_segments(PwOp::Add, a, b.negated(), lo, hi, resolution);

  double a0, a1, a2, b0, b1, b2;
  const bool pa = as_poly(a, a0, a1, a2);
  const bool pb = as_poly(b, b0, b1, b2);

  if (op == PwOp::Add) {
    if (a.is_constant()) return b.shifted(a.param(0));
    if (b.is_constant()) return a.shifted(b.param(0));
    if (pa && pb) return Segment::quadratic(a2 + b2, a1 + b1, a0 + b0);
    return sample_combined(op, a, b, lo, hi, resolution);
  }

  if (op == PwOp::Mul) {
    if (a.is_constant()) return b.scaled(a.param(0));
    if (b.is_constant()) return a.scaled(b.param(0));
    if (pa && pb && a2 == 0.0 && b2 == 0.0)
      return Segment::quadratic(a1 * b1, a1 * b0 + a0 * b1, a0 * b0);
    return sample_combined(op, a, b, lo, hi, resolution);
  }

  if (op == PwOp::Div) {
    if (b.is_constant()) {
      if (b.param(0) == 0.0) fail(ErrorKind::DivisorVanishes, "division by zero segment");
      return a.scaled(1.0 / b.param(0));
    }
    double ma, mb, mc, md, na, nb, nc, nd;
    if (as_linear_fractional(a, ma, mb, mc, md) &&
        as_linear_fractional(b, na, nb, nc, nd)) {
      // (ma t + mb)/(mc t + md) / [(na t + nb)/(nc t + nd)]
      if (mc == 0.0 && md == 1.0 && nc == 0.0 && nd == 1.0) {
        require_nonvanishing(na, nb, lo, hi);
        return Segment::mobius(ma, mb, na, nb);
      }
      // proportional denominators cancel
      if (mc * nd == nc * md) {
        double s = (mc != 0.0) ? nc / mc : nd / md;
        require_nonvanishing(na, nb, lo, hi);
        return Segment::mobius(s * ma, s * mb, na, nb);
      }
    }
    return sample_combined(op, a, b, lo, hi, resolution);
  }

  fail(ErrorKind::Internal, "combine_segments only handles arithmetic ops");
}

// --- piecewise formulas on [0,1] ------------------------------------------

using PiecewiseFormula = std::vector<Piece>;

inline PiecewiseFormula to_formula(const MonotoneFn& f) {
  if (!nearly_equal(f.domain_lo(), 0.0) || !nearly_equal(f.domain_hi(), 1.0))
    fail(ErrorKind::Shape, "pointwise operands must live on [0,1]");
  PiecewiseFormula out;
  for (const Piece& p : f.pieces()) {
    if (p.degenerate())
      fail(ErrorKind::Shape, "pointwise operand has an isolated edge value");
    out.push_back(p);
  }
  return out;
}

inline const Segment& active_segment(const PiecewiseFormula& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  for (const Piece& p : f) {
    if (mid >= p.lo && mid <= p.hi) return p.seg;
  }
  fail(ErrorKind::Internal, "no active piece covers the query interval");
}

inline std::vector<double> breakpoint_union(std::span<const PiecewiseFormula> fs) {
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& f : fs)
    for (const Piece& p : f) {
      cuts.push_back(p.lo);
      cuts.push_back(p.hi);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());
  cuts.front() = 0.0;
  cuts.back() = 1.0;
  return cuts;
}

inline void merge_adjacent(PiecewiseFormula& pieces) {
  PiecewiseFormula merged;
  for (Piece& p : pieces) {
    if (!merged.empty() && merged.back().hi == p.lo) {
      Piece& prev = merged.back();
      if (prev.seg.same_formula(p.seg)) {
        prev.hi = p.hi;
        continue;
      }
      if (prev.seg.kind() == Segment::Kind::Sampled &&
          p.seg.kind() == Segment::Kind::Sampled &&
          prev.seg.knots().back().x == p.seg.knots().front().x &&
          prev.seg.knots().back().y == p.seg.knots().front().y) {
        std::vector<Knot> joined = prev.seg.knots();
        joined.insert(joined.end(), p.seg.knots().begin() + 1, p.seg.knots().end());
        prev = Piece{prev.lo, p.hi, Segment::sampled(std::move(joined))};
        continue;
      }
    }
    merged.push_back(std::move(p));
  }
  pieces = std::move(merged);
}

inline PiecewiseFormula combine_formula(PwOp op, const PiecewiseFormula& a,
                                        const PiecewiseFormula& b, int resolution) {
  std::vector<PiecewiseFormula> both{a, b};
  std::vector<double> cuts = breakpoint_union(both);
  PiecewiseFormula out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    const Segment& sa = active_segment(a, lo, hi);
    const Segment& sb = active_segment(b, lo, hi);
    out.push_back({lo, hi, combine_segments(op, sa, sb, lo, hi, resolution)});
  }
  merge_adjacent(out);
  return out;
}

// --- crossing detection for envelopes --------------------------------------

inline void push_root_if_inside(double t, double lo, double hi, std::vector<double>& out) {
  const double margin = 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi));
  if (t > lo + margin && t < hi - margin) out.push_back(t);
}

inline void quadratic_real_roots(double A, double B, double C, double lo, double hi,
                                 std::vector<double>& out) {
  const double scale = std::max({std::abs(A), std::abs(B), std::abs(C)});
  if (scale == 0.0) return;
  if (std::abs(A) <= 1e-14 * scale) {
    if (std::abs(B) > 1e-14 * scale) push_root_if_inside(-C / B, lo, hi, out);
    return;
  }
  double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return;
  double sq = std::sqrt(disc);
  double q = -0.5 * (B + (B >= 0 ? sq : -sq));
  push_root_if_inside(q / A, lo, hi, out);
  if (q != 0.0) push_root_if_inside(C / q, lo, hi, out);
}

/// Points in (lo, hi) where two candidate formulas cross. Exact for the
/// polynomial / linear-fractional algebra, probe-and-bisect otherwise.
inline void crossing_points(const Segment& a, const Segment& b, double lo, double hi,
                            std::vector<double>& out) {
  double a0, a1, a2, b0, b1, b2;
  if (as_poly(a, a0, a1, a2) && as_poly(b, b0, b1, b2)) {
    quadratic_real_roots(a2 - b2, a1 - b1, a0 - b0, lo, hi, out);
    return;
  }
  double ma, mb, mc, md, na, nb, nc, nd;
  if (as_linear_fractional(a, ma, mb, mc, md) &&
      as_linear_fractional(b, na, nb, nc, nd)) {
    // (ma t + mb)(nc t + nd) = (na t + nb)(mc t + md)
    quadratic_real_roots(ma * nc - na * mc, ma * nd + mb * nc - na * md - nb * mc,
                         mb * nd - nb * md, lo, hi, out);
    return;
  }
  // Probe for sign changes of the difference, then bisect to 1e-12.
  constexpr int kProbes = 65;
  double prev_t = lo;
  double prev_d = a.eval(lo) - b.eval(lo);
  for (int i = 1; i < kProbes; ++i) {
    double t = lo + (hi - lo) * static_cast<double>(i) / (kProbes - 1);
    double d = a.eval(t) - b.eval(t);
    if ((prev_d < 0 && d > 0) || (prev_d > 0 && d < 0)) {
      double x0 = prev_t, x1 = t, d0 = prev_d;
      while (x1 - x0 > 1e-12) {
        double xm = 0.5 * (x0 + x1);
        double dm = a.eval(xm) - b.eval(xm);
        if (dm == 0.0) { x0 = x1 = xm; break; }
        if ((dm < 0) == (d0 < 0)) {
          x0 = xm;
          d0 = dm;
        } else {
          x1 = xm;
        }
      }
      push_root_if_inside(0.5 * (x0 + x1), lo, hi, out);
    }
    prev_t = t;
    prev_d = d;
  }
}

inline Segment restrict_segment(const Segment& s, double lo, double hi) {
  if (s.kind() != Segment::Kind::Sampled) return s;
  std::vector<Knot> cut;
  cut.push_back({lo, s.eval(lo)});
  for (const Knot& k : s.knots())
    if (k.x > lo && k.x < hi) cut.push_back(k);
  cut.push_back({hi, s.eval(hi)});
  if (cut.size() < 2 || !(cut.front().x < cut.back().x))
    return Segment::constant(s.eval(0.5 * (lo + hi)));
  return Segment::sampled(std::move(cut));
}

/// Lower (min) or upper (max) envelope of candidate formulas, stamped with
/// the direction and continuity the caller requires. Candidate breakpoints,
/// quadratic vertices, sampled knots and pairwise crossings all become
/// refinement points, so each output piece is one candidate's formula.
inline MonotoneFn envelope_formula(bool use_min, std::span<const PiecewiseFormula> cands,
                                   Direction out_dir, Continuity out_cont) {
  if (cands.empty()) fail(ErrorKind::Internal, "envelope of no candidates");
  std::vector<double> cuts = breakpoint_union(cands);

  // Vertices and interior sampled knots split the comparison intervals.
  std::vector<double> refined;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    refined.push_back(lo);
    for (const auto& f : cands) {
      const Segment& s = active_segment(f, lo, hi);
      if (auto v = s.interior_vertex(lo, hi)) refined.push_back(*v);
      if (s.kind() == Segment::Kind::Sampled)
        for (const Knot& k : s.knots())
          if (k.x > lo && k.x < hi) refined.push_back(k.x);
    }
  }
  refined.push_back(cuts.back());
  std::sort(refined.begin(), refined.end());
  refined.erase(std::unique(refined.begin(), refined.end(),
                            [](double p, double q) { return std::abs(p - q) < 1e-14; }),
                refined.end());

  // Insert pairwise crossings.
  std::vector<double> final_cuts;
  for (std::size_t i = 0; i + 1 < refined.size(); ++i) {
    double lo = refined[i], hi = refined[i + 1];
    final_cuts.push_back(lo);
    std::vector<double> crossings;
    for (std::size_t p = 0; p < cands.size(); ++p)
      for (std::size_t q = p + 1; q < cands.size(); ++q)
        crossing_points(active_segment(cands[p], lo, hi),
                        active_segment(cands[q], lo, hi), lo, hi, crossings);
    std::sort(crossings.begin(), crossings.end());
    for (double c : crossings)
      if (final_cuts.empty() || c - final_cuts.back() > 1e-13) final_cuts.push_back(c);
  }
  final_cuts.push_back(refined.back());

  PiecewiseFormula out;
  for (std::size_t i = 0; i + 1 < final_cuts.size(); ++i) {
    double lo = final_cuts[i], hi = final_cuts[i + 1];
    double mid = 0.5 * (lo + hi);
    std::size_t winner = 0;
    double best = 0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      double v = active_segment(cands[c], lo, hi).eval(mid);
      if (c == 0 || (use_min ? v < best : v > best)) {
        best = v;
        winner = c;
      }
    }
    out.push_back({lo, hi, restrict_segment(active_segment(cands[winner], lo, hi), lo, hi)});
  }
  merge_adjacent(out);
  try {
    return MonotoneFn(out_dir, out_cont, std::move(out));
  } catch (const FuzzError& e) {
    throw FuzzError(ErrorKind::NonMonotone,
                    std::string("envelope is not monotone as required: ") + e.what());
  }
}

inline MonotoneFn materialize(PiecewiseFormula pieces, Direction dir, Continuity cont) {
  try {
    return MonotoneFn(dir, cont, std::move(pieces));
  } catch (const FuzzError& e) {
    throw FuzzError(ErrorKind::NonMonotone,
                    std::string("pointwise combination is not monotone: ") + e.what());
  }
}

}  // namespace detail

struct ComposeOptions {
  int resolution = detail::default_alpha_resolution();
};

/// Pointwise combination of functions sharing domain [0,1]. Add and Mul fold
/// over the whole list; Sub and Div are binary; Min and Max build the
/// envelope with crossing knots inserted where the winning candidate changes.
/// The result's continuity follows the operands when they agree.
inline MonotoneFn compose_pointwise(PwOp op, std::span<const MonotoneFn> fs,
                                    ComposeOptions opts = {}) {
  if (fs.empty()) fail(ErrorKind::EmptyList, "compose_pointwise of no operands");
  Continuity cont = fs[0].continuity();
  bool cont_agree = true;
  for (const MonotoneFn& f : fs)
    if (f.continuity() != cont) cont_agree = false;
  if (!cont_agree) cont = Continuity::Left;

  auto infer = [&](const detail::PiecewiseFormula& formula) -> MonotoneFn {
    double v0 = formula.front().value_at_lo();
    double v1 = formula.back().value_at_hi();
    Direction dir = v0 <= v1 ? Direction::Increasing : Direction::Decreasing;
    return detail::materialize(formula, dir, cont);
  };

  switch (op) {
    case PwOp::Add:
    case PwOp::Mul: {
      detail::PiecewiseFormula acc = detail::to_formula(fs[0]);
      for (std::size_t i = 1; i < fs.size(); ++i)
        acc = detail::combine_formula(op, acc, detail::to_formula(fs[i]), opts.resolution);
      return infer(acc);
    }
    case PwOp::Sub:
    case PwOp::Div: {
      if (fs.size() != 2)
        fail(ErrorKind::Shape, "subtraction and division are binary operations");
      return infer(detail::combine_formula(op, detail::to_formula(fs[0]),
                                           detail::to_formula(fs[1]), opts.resolution));
    }
    case PwOp::Min:
    case PwOp::Max: {
      std::vector<detail::PiecewiseFormula> cands;
      cands.reserve(fs.size());
      for (const MonotoneFn& f : fs) cands.push_back(detail::to_formula(f));
      // Direction probed from the envelope's own endpoint values.
      double v0 = 0, v1 = 0;
      for (std::size_t c = 0; c < cands.size(); ++c) {
        double e0 = fs[c].eval(0.0);
        double e1 = fs[c].eval(1.0);
        if (c == 0) {
          v0 = e0;
          v1 = e1;
        } else if (op == PwOp::Min) {
          v0 = std::min(v0, e0);
          v1 = std::min(v1, e1);
        } else {
          v0 = std::max(v0, e0);
          v1 = std::max(v1, e1);
        }
      }
      Direction dir = v0 <= v1 ? Direction::Increasing : Direction::Decreasing;
      return detail::envelope_formula(op == PwOp::Min, cands, dir, cont);
    }
  }
  fail(ErrorKind::Internal, "unreachable pointwise op");
}

}  // namespace fuzz
