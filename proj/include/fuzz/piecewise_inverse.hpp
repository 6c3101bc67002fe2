#pragma once

#include "fuzz/piecewise.hpp"

namespace fuzz {
namespace detail {

// One strictly-monotone, flat, or isolated-point stretch of the input, in
// walk order. Walk order is ascending input value for every inversion case:
// components are traversed from the support side toward the core for the
// x-to-alpha direction and from the core side outward for alpha-to-x.
struct WalkEvent {
  double pos_entry = 0;  // input coordinate where the stretch starts (walk order)
  double pos_exit = 0;
  double val_entry = 0;  // function value at entry/exit
  double val_exit = 0;
  bool flat = false;     // constant stretch of positive width
  bool point = false;    // degenerate edge piece
  const Piece* piece = nullptr;
  // for Sampled pieces: the knot range [k_lo, k_hi] this event covers
  int k_lo = -1;
  int k_hi = -1;
};

inline void append_sampled_events(const Piece& p, bool reverse, std::vector<WalkEvent>& out) {
  const auto& kn = p.seg.knots();
  const int n = static_cast<int>(kn.size());
  auto knot = [&](int i) -> const Knot& { return kn[reverse ? n - 1 - i : i]; };
  int i = 0;
  while (i + 1 < n) {
    bool run_flat = knot(i).y == knot(i + 1).y;
    int j = i + 1;
    while (j + 1 < n && (knot(j).y == knot(j + 1).y) == run_flat &&
           (run_flat ? knot(j).y == knot(i).y : true))
      ++j;
    WalkEvent e;
    e.pos_entry = knot(i).x;
    e.pos_exit = knot(j).x;
    e.val_entry = knot(i).y;
    e.val_exit = knot(j).y;
    e.flat = run_flat;
    e.piece = &p;
    e.k_lo = i;
    e.k_hi = j;
    out.push_back(e);
    i = j;
  }
}

inline std::vector<WalkEvent> walk_events(const MonotoneFn& fn, bool reverse) {
  std::vector<WalkEvent> out;
  const auto& pieces = fn.pieces();
  auto handle = [&](const Piece& p) {
    if (p.degenerate()) {
      WalkEvent e;
      e.pos_entry = e.pos_exit = p.lo;
      e.val_entry = e.val_exit = p.value_at_lo();
      e.point = true;
      e.piece = &p;
      out.push_back(e);
      return;
    }
    if (p.seg.kind() == Segment::Kind::Sampled) {
      append_sampled_events(p, reverse, out);
      return;
    }
    WalkEvent e;
    e.pos_entry = reverse ? p.hi : p.lo;
    e.pos_exit = reverse ? p.lo : p.hi;
    e.val_entry = p.seg.eval(e.pos_entry);
    e.val_exit = p.seg.eval(e.pos_exit);
    e.flat = e.val_entry == e.val_exit || p.seg.is_constant();
    e.piece = &p;
    out.push_back(e);
  };
  if (reverse) {
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) handle(*it);
  } else {
    for (const Piece& p : pieces) handle(p);
  }
  return out;
}

/// Inverse formula for a strictly monotone event, valid on the event's value
/// range. Walk order guarantees ascending values, so Sampled inverses come
/// out with strictly increasing inputs.
inline Segment event_inverse(const WalkEvent& e) {
  const Segment& seg = e.piece->seg;
  if (seg.kind() == Segment::Kind::Sampled) {
    const auto& kn = seg.knots();
    const int n = static_cast<int>(kn.size());
    const bool reverse = e.pos_entry > e.pos_exit;
    std::vector<Knot> inv;
    inv.reserve(static_cast<std::size_t>(e.k_hi - e.k_lo + 1));
    for (int i = e.k_lo; i <= e.k_hi; ++i) {
      const Knot& k = kn[reverse ? n - 1 - i : i];
      inv.push_back({k.y, k.x});
    }
    return Segment::sampled(std::move(inv));
  }
  return seg.inverse_of_strictly_monotone(std::min(e.pos_entry, e.pos_exit),
                                          std::max(e.pos_entry, e.pos_exit));
}

struct InverseSpec {
  bool reverse_walk;        // traverse pieces from the high end of the domain
  bool unit_output;         // output lives on [0,1] (x-to-alpha direction)
  Direction out_direction;
  Continuity out_continuity;
};

inline MonotoneFn run_inverse_walk(const MonotoneFn& fn, const InverseSpec& spec,
                                   const char* what) {
  std::vector<WalkEvent> events = walk_events(fn, spec.reverse_walk);
  if (spec.unit_output) {
    // Values are membership levels; the component must reach 1 at the core.
    for (const WalkEvent& e : events) {
      if (e.val_entry < -1e-9 || e.val_exit > 1.0 + 1e-9)
        fail(ErrorKind::Shape, std::string(what) + ": values must lie within [0,1]");
    }
  } else {
    // Endpoint functions must not jump at the edge adjoining the support
    // (alpha = 0 for a lower endpoint) nor at the core level (alpha = 1).
    if (!events.empty() && events.front().point && events.size() > 1 &&
        !nearly_equal(events.front().val_exit, events[1].val_entry))
      fail(ErrorKind::Shape,
           std::string(what) + ": endpoint function jumps at a closed edge level");
  }

  std::vector<Piece> out;
  double cursor_val = spec.unit_output
                          ? 0.0
                          : (events.empty() ? 0.0 : events.front().val_entry);
  const double snap_tol = 1e-9;

  // A plateau touching alpha = 1 pins the core-edge value of the recovered
  // component to exactly 1.
  if (!spec.unit_output && spec.reverse_walk && !events.empty() &&
      (events.front().flat || events.front().point)) {
    out.push_back({cursor_val, cursor_val, Segment::constant(1.0)});
  }

  for (const WalkEvent& e : events) {
    double v_in = e.val_entry;
    double v_out = e.val_exit;
    if (spec.unit_output) {
      v_in = std::clamp(v_in, 0.0, 1.0);
      v_out = std::clamp(v_out, 0.0, 1.0);
    }
    const double scale = std::max(1.0, std::abs(v_in));
    if (v_in > cursor_val + kValueTol * scale) {
      // Jump of the input converts to a constant interval of the inverse.
      out.push_back({cursor_val, v_in, Segment::constant(e.pos_entry)});
      cursor_val = v_in;
    } else if (v_in != cursor_val && (e.flat || e.point) &&
               std::abs(v_in - cursor_val) <= snap_tol * scale &&
               (out.empty() || v_in > out.back().lo)) {
      // Plateau levels are stored exactly; re-anchor the cursor on them so
      // seam roundoff from formula evaluation cannot drift breakpoints.
      if (!out.empty() && out.back().hi == cursor_val) out.back().hi = v_in;
      cursor_val = v_in;
    }
    if (e.flat || e.point) continue;  // plateau converts to a jump: no piece
    if (v_out <= cursor_val + 0.0) continue;  // zero-width after clamping
    out.push_back({cursor_val, v_out, event_inverse(e)});
    cursor_val = v_out;
  }

  if (spec.unit_output) {
    if (std::abs(cursor_val - 1.0) > snap_tol)
      fail(ErrorKind::Shape, std::string(what) + ": component must reach 1 at the core edge");
    if (!out.empty()) out.back().hi = 1.0;
    if (spec.reverse_walk) {
      // A plateau at level 1 collapses to its core-side edge at alpha = 1.
      bool flat_at_top = false;
      std::size_t k = events.size();
      while (k > 0 && (events[k - 1].flat || events[k - 1].point) &&
             std::abs(events[k - 1].val_entry - 1.0) <= snap_tol) {
        if (events[k - 1].flat) flat_at_top = true;
        --k;
      }
      if (flat_at_top)
        out.push_back({1.0, 1.0, Segment::constant(events.back().pos_exit)});
    }
  } else if (!spec.reverse_walk && !events.empty() &&
             (events.back().flat || events.back().point)) {
    out.push_back({cursor_val, cursor_val, Segment::constant(1.0)});
  }

  if (out.empty())
    fail(ErrorKind::Shape, std::string(what) + ": input has no invertible content");
  return MonotoneFn(spec.out_direction, spec.out_continuity, std::move(out));
}

}  // namespace detail

/// Infimum generalized inverse.
///  - Non-decreasing right-continuous input (a left component in x): returns
///    the lower endpoint function on [0,1], non-decreasing and left-continuous.
///  - Non-increasing right-continuous input (an upper endpoint function of
///    alpha): recovers the right component, non-increasing and left-continuous.
/// Jump discontinuities of the input convert to constant intervals of the
/// output and constant intervals convert to jumps.
inline MonotoneFn inverse_inf(const MonotoneFn& f) {
  if (f.continuity() != Continuity::Right)
    fail(ErrorKind::Shape, "inverse_inf requires a right-continuous input");
  if (f.direction() == Direction::Increasing) {
    return detail::run_inverse_walk(
        f, {false, true, Direction::Increasing, Continuity::Left}, "inverse_inf");
  }
  if (!detail::nearly_equal(f.domain_lo(), 0.0) || !detail::nearly_equal(f.domain_hi(), 1.0))
    fail(ErrorKind::Shape, "inverse_inf of a non-increasing function expects domain [0,1]");
  return detail::run_inverse_walk(
      f, {true, false, Direction::Decreasing, Continuity::Left}, "inverse_inf");
}

/// Supremum generalized inverse, the mirror of inverse_inf.
///  - Non-increasing left-continuous input (a right component in x): returns
///    the upper endpoint function on [0,1], non-increasing and right-continuous.
///  - Non-decreasing left-continuous input (a lower endpoint function): recovers
///    the left component, non-decreasing and right-continuous.
inline MonotoneFn inverse_sup(const MonotoneFn& g) {
  if (g.continuity() != Continuity::Left)
    fail(ErrorKind::Shape, "inverse_sup requires a left-continuous input");
  if (g.direction() == Direction::Decreasing) {
    return detail::run_inverse_walk(
        g, {true, true, Direction::Decreasing, Continuity::Right}, "inverse_sup");
  }
  if (!detail::nearly_equal(g.domain_lo(), 0.0) || !detail::nearly_equal(g.domain_hi(), 1.0))
    fail(ErrorKind::Shape, "inverse_sup of a non-decreasing function expects domain [0,1]");
  return detail::run_inverse_walk(
      g, {false, false, Direction::Increasing, Continuity::Right}, "inverse_sup");
}

/// Applies the two generalized inverses in the order that accepts the input's
/// shape. The result equals the input at every point of its domain.
inline MonotoneFn double_inverse_roundtrip(const MonotoneFn& f) {
  if (f.continuity() == Continuity::Right) return inverse_sup(inverse_inf(f));
  return inverse_inf(inverse_sup(f));
}

}  // namespace fuzz
