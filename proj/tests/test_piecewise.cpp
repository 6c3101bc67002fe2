#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fuzz/piecewise.hpp"
#include "test_support.hpp"

using namespace fuzz;
using testsupport::max_grid_deviation;
using Catch::Approx;

namespace {

MonotoneFn example7_step_right() {
  // 1 at x=1, 0.3 on (1,2], 0.1 on (2,4]
  return MonotoneFn(Direction::Decreasing, Continuity::Left,
                    {Piece{1, 1, Segment::constant(1.0)},
                     Piece{1, 2, Segment::constant(0.3)},
                     Piece{2, 4, Segment::constant(0.1)}});
}

MonotoneFn example7_left() {  // 8x - 1 on [1/8, 1/4]
  return MonotoneFn::single(Direction::Increasing, Continuity::Right, 0.125, 0.25,
                            Segment::affine(8.0, -1.0));
}

MonotoneFn example1_xi_left() {  // x - 1 on [1, 2]
  return MonotoneFn::single(Direction::Increasing, Continuity::Right, 1, 2,
                            Segment::affine(1.0, -1.0));
}

MonotoneFn example1_xi_right() {  // 3 - x on [2, 3]
  return MonotoneFn::single(Direction::Decreasing, Continuity::Left, 2, 3,
                            Segment::affine(-1.0, 3.0));
}

MonotoneFn point_flank(double lambda) {
  return MonotoneFn(Direction::Increasing, Continuity::Right,
                    {Piece{lambda, lambda, Segment::constant(1.0)}});
}

// Cleaned-up version of the patched-together exercise function: jumps and
// plateaus mixed with affine and sine stretches.
MonotoneFn fantasy_left() {
  const double sin_end = (M_PI / 2 + 1.0) / 3.0;
  std::vector<Knot> sine;
  const int n = 512;
  for (int i = 0; i <= n; ++i) {
    double x = 2.0 / 3.0 + (sin_end - 2.0 / 3.0) * i / n;
    sine.push_back({x, std::sin(3.0 * x - 1.0) - 0.5});
  }
  sine.back().y = 0.5;  // sin(pi/2) - 1/2 exactly
  return MonotoneFn(Direction::Increasing, Continuity::Right,
                    {Piece{0.25, 2.0 / 3.0, Segment::affine(0.25, 0.0)},
                     Piece{2.0 / 3.0, sin_end, Segment::sampled(std::move(sine))},
                     Piece{sin_end, 9.0 / 8.0, Segment::constant(5.0 / 8.0)},
                     Piece{9.0 / 8.0, 6.0 / 5.0, Segment::affine(5.0 / 6.0, 0.0)}});
}

}  // namespace

TEST_CASE("eval respects the declared one-sided continuity") {
  MonotoneFn step = example7_step_right();
  CHECK(step.eval(1.5) == Approx(0.3));
  CHECK(step.eval(1.0) == 1.0);   // left-continuous: degenerate edge owns x=1
  CHECK(step.eval(2.0) == 0.3);   // value attaches to the left piece
  CHECK(step.eval(2.5) == Approx(0.1));
  CHECK(step.eval(4.0) == Approx(0.1));
  CHECK_THROWS_AS(step.eval(4.5), FuzzError);

  MonotoneFn one = MonotoneFn::constant(1.0, 0.25, 1.0);
  CHECK(one.eval(0.7) == 1.0);

  MonotoneFn left = example7_left();
  CHECK(left.eval(0.25) == Approx(1.0));
  CHECK(left.eval(0.125) == Approx(0.0));
}

TEST_CASE("construction rejects malformed shapes") {
  CHECK_THROWS_AS(MonotoneFn(Direction::Increasing, Continuity::Right,
                             {Piece{0, 1, Segment::affine(-1.0, 1.0)}}),
                  FuzzError);
  CHECK_THROWS_AS(MonotoneFn(Direction::Increasing, Continuity::Right,
                             {Piece{0, 1, Segment::constant(0.5)},
                              Piece{2, 3, Segment::constant(0.7)}}),
                  FuzzError);
  // interior degenerate piece
  CHECK_THROWS_AS(MonotoneFn(Direction::Increasing, Continuity::Right,
                             {Piece{0, 1, Segment::constant(0.2)},
                              Piece{1, 1, Segment::constant(0.5)},
                              Piece{1, 2, Segment::constant(0.7)}}),
                  FuzzError);
  // sampled knots running against the direction
  CHECK_THROWS_AS(MonotoneFn::single(
                      Direction::Increasing, Continuity::Right, 0, 1,
                      Segment::sampled({{0.0, 0.0}, {0.4, 0.8}, {0.6, 0.5}, {1.0, 1.0}})),
                  FuzzError);
}

TEST_CASE("inverse_inf of strictly monotone affine components") {
  MonotoneFn inv = inverse_inf(example1_xi_left());
  REQUIRE(inv.pieces().size() == 1);
  CHECK(inv.direction() == Direction::Increasing);
  CHECK(inv.continuity() == Continuity::Left);
  CHECK(inv.domain_lo() == 0.0);
  CHECK(inv.domain_hi() == 1.0);
  CHECK(inv.eval(0.0) == Approx(1.0));   // alpha+1
  CHECK(inv.eval(0.5) == Approx(1.5));
  CHECK(inv.eval(1.0) == Approx(2.0));
}

TEST_CASE("inverse_sup of strictly monotone affine components") {
  MonotoneFn inv = inverse_sup(example1_xi_right());
  CHECK(inv.direction() == Direction::Decreasing);
  CHECK(inv.continuity() == Continuity::Right);
  CHECK(inv.eval(0.0) == Approx(3.0));  // 3-alpha
  CHECK(inv.eval(0.25) == Approx(2.75));
  CHECK(inv.eval(1.0) == Approx(2.0));
}

TEST_CASE("inverse of a point component is a constant level line") {
  MonotoneFn inv = inverse_inf(point_flank(5.0));
  REQUIRE(inv.pieces().size() == 1);
  CHECK(inv.eval(0.0) == 5.0);
  CHECK(inv.eval(0.37) == 5.0);
  CHECK(inv.eval(1.0) == 5.0);
}

TEST_CASE("inverse_sup of the step component converts jumps to plateaus") {
  MonotoneFn u = inverse_sup(example7_step_right());
  CHECK(u.direction() == Direction::Decreasing);
  CHECK(u.continuity() == Continuity::Right);
  REQUIRE(u.pieces().size() == 3);
  // 4 on [0,0.1), 2 on [0.1,0.3), 1 on [0.3,1]
  CHECK(u.eval(0.0) == 4.0);
  CHECK(u.eval(0.05) == 4.0);
  CHECK(u.eval(0.1) == 2.0);   // right-continuous: upper piece owns the level
  CHECK(u.eval(0.2) == 2.0);
  CHECK(u.eval(0.3) == 1.0);
  CHECK(u.eval(0.9) == 1.0);
  CHECK(u.eval(1.0) == 1.0);
}

TEST_CASE("inverse_sup of a constant-1 stretch converts the plateau to a jump") {
  MonotoneFn one = MonotoneFn(Direction::Decreasing, Continuity::Left,
                              {Piece{2, 5, Segment::constant(1.0)}});
  MonotoneFn u = inverse_sup(one);
  CHECK(u.eval(0.0) == 5.0);
  CHECK(u.eval(0.999) == 5.0);
  CHECK(u.eval(1.0) == 2.0);  // at the top level only the left edge remains
}

TEST_CASE("double inversion is the identity on components") {
  SECTION("strictly monotone continuous") {
    MonotoneFn f = example1_xi_left();
    MonotoneFn back = double_inverse_roundtrip(f);
    CHECK(max_grid_deviation(f, back) < 1e-12);
  }
  SECTION("step component") {
    MonotoneFn g = example7_step_right();
    MonotoneFn back = double_inverse_roundtrip(g);
    REQUIRE(back.pieces().size() == 3);
    CHECK(back.eval(1.0) == 1.0);
    CHECK(back.eval(1.5) == Approx(0.3));
    CHECK(back.eval(2.0) == Approx(0.3));
    CHECK(back.eval(2.5) == Approx(0.1));
    CHECK(back.eval(4.0) == Approx(0.1));
    CHECK(max_grid_deviation(g, back) < 1e-12);
  }
  SECTION("fantasy function on a dense grid") {
    MonotoneFn f = fantasy_left();
    MonotoneFn back = double_inverse_roundtrip(f);
    CHECK(max_grid_deviation(f, back) < 1e-9);
  }
}

TEST_CASE("fantasy function inverse reproduces the jump/plateau pattern") {
  MonotoneFn inv = inverse_inf(fantasy_left());
  REQUIRE(inv.pieces().size() == 7);
  const auto& p = inv.pieces();
  const double s1 = std::sin(1.0) - 0.5;
  const double sin_end = (M_PI / 2 + 1.0) / 3.0;

  // plateau [0, 1/16] at 1/4 (jump at the support edge)
  CHECK(p[0].seg.kind() == Segment::Kind::Constant);
  CHECK(inv.eval(0.0) == Approx(0.25));
  CHECK(p[0].hi == Approx(1.0 / 16.0));
  // 4*alpha on (1/16, 1/6]
  CHECK(p[1].seg.kind() == Segment::Kind::Affine);
  CHECK(inv.eval(0.1) == Approx(0.4));
  // plateau at 2/3 over (1/6, sin(1)-1/2]
  CHECK(p[2].seg.kind() == Segment::Kind::Constant);
  CHECK(inv.eval(0.2) == Approx(2.0 / 3.0));
  CHECK(p[2].hi == Approx(s1));
  // arcsin stretch: (arcsin(alpha+1/2)+1)/3 on (sin(1)-1/2, 1/2]
  CHECK(inv.eval(0.45) == Approx((std::asin(0.95) + 1.0) / 3.0).margin(1e-5));
  // plateau at the sine stretch's end over (1/2, 5/8]
  CHECK(inv.eval(0.6) == Approx(sin_end));
  // plateau at 9/8 over (5/8, 15/16]
  CHECK(p[5].seg.kind() == Segment::Kind::Constant);
  CHECK(inv.eval(0.8) == Approx(9.0 / 8.0));
  CHECK(p[5].hi == Approx(15.0 / 16.0));
  // 6/5*alpha on (15/16, 1]
  CHECK(inv.eval(1.0) == Approx(6.0 / 5.0));

  CHECK(inv.continuity() == Continuity::Left);
  CHECK(inv.eval(1.0 / 16.0) == Approx(0.25));  // left side owns the seam
  CHECK(inv.eval(5.0 / 8.0) == Approx(sin_end));
}

TEST_CASE("inverse rejects components that never reach 1") {
  MonotoneFn low = MonotoneFn::single(Direction::Increasing, Continuity::Right, 0, 1,
                                      Segment::affine(0.5, 0.0));
  CHECK_THROWS_AS(inverse_inf(low), FuzzError);
}

TEST_CASE("pointwise composition keeps closed forms") {
  MonotoneFn a = MonotoneFn::single(Direction::Increasing, Continuity::Left, 0, 1,
                                    Segment::affine(1, 1));  // alpha+1
  MonotoneFn b = MonotoneFn::single(Direction::Increasing, Continuity::Left, 0, 1,
                                    Segment::affine(2, 5));  // 2alpha+5
  SECTION("sum of affine is affine: 3alpha+6") {
    std::vector<MonotoneFn> fs{a, b};
    MonotoneFn sum = compose_pointwise(PwOp::Add, fs);
    REQUIRE(sum.pieces().size() == 1);
    REQUIRE(sum.pieces()[0].seg.kind() == Segment::Kind::Affine);
    CHECK(sum.pieces()[0].seg.param(0) == Approx(3.0));
    CHECK(sum.pieces()[0].seg.param(1) == Approx(6.0));
  }
  SECTION("product of affine is quadratic: 2a^2+7a+5") {
    std::vector<MonotoneFn> fs{a, b};
    MonotoneFn prod = compose_pointwise(PwOp::Mul, fs);
    REQUIRE(prod.pieces().size() == 1);
    REQUIRE(prod.pieces()[0].seg.kind() == Segment::Kind::Quadratic);
    CHECK(prod.pieces()[0].seg.param(0) == Approx(2.0));
    CHECK(prod.pieces()[0].seg.param(1) == Approx(7.0));
    CHECK(prod.pieces()[0].seg.param(2) == Approx(5.0));
  }
  SECTION("quotient of affine is linear-fractional") {
    std::vector<MonotoneFn> fs{a, b};
    MonotoneFn q = compose_pointwise(PwOp::Div, fs);
    REQUIRE(q.pieces().size() == 1);
    CHECK(q.pieces()[0].seg.kind() == Segment::Kind::Mobius);
    CHECK(q.eval(0.0) == Approx(1.0 / 5.0));
    CHECK(q.eval(1.0) == Approx(2.0 / 7.0));
  }
  SECTION("min of four constant products") {
    std::vector<MonotoneFn> cs;
    for (double v : {2.0 * 5.0, 2.0 * 6.0, 3.0 * 5.0, 3.0 * 6.0})
      cs.push_back(MonotoneFn::constant(v, 0, 1));
    MonotoneFn lo = compose_pointwise(PwOp::Min, cs);
    CHECK(lo.eval(0.0) == 10.0);
    CHECK(lo.eval(1.0) == 10.0);
    MonotoneFn hi = compose_pointwise(PwOp::Max, cs);
    CHECK(hi.eval(0.5) == 18.0);
  }
}

TEST_CASE("envelope inserts crossing knots") {
  // 2*alpha and alpha + 0.2 cross at alpha = 0.2
  MonotoneFn a = MonotoneFn::single(Direction::Increasing, Continuity::Left, 0, 1,
                                    Segment::affine(2, 0));
  MonotoneFn b = MonotoneFn::single(Direction::Increasing, Continuity::Left, 0, 1,
                                    Segment::affine(1, 0.2));
  std::vector<MonotoneFn> fs{a, b};
  MonotoneFn lo = compose_pointwise(PwOp::Min, fs);
  CHECK(lo.eval(0.0) == Approx(0.0));
  CHECK(lo.eval(0.1) == Approx(0.2));
  CHECK(lo.eval(0.2) == Approx(0.4));
  CHECK(lo.eval(0.5) == Approx(0.7));
  CHECK(lo.eval(1.0) == Approx(1.2));
  bool has_cross = false;
  for (const Piece& p : lo.pieces())
    if (std::abs(p.hi - 0.2) < 1e-9) has_cross = true;
  CHECK(has_cross);
  MonotoneFn hi = compose_pointwise(PwOp::Max, fs);
  CHECK(hi.eval(0.1) == Approx(0.3));
  CHECK(hi.eval(0.5) == Approx(1.0));
}

TEST_CASE("non-monotone pointwise results are rejected when demanded") {
  MonotoneFn a = MonotoneFn::single(Direction::Increasing, Continuity::Left, 0, 1,
                                    Segment::affine(2, -1));  // 2alpha-1, mixed sign
  std::vector<MonotoneFn> fs{a, a};
  CHECK_THROWS_AS(compose_pointwise(PwOp::Mul, fs), FuzzError);
}

TEST_CASE("segment transforms stay exact") {
  Segment qr = Segment::quadratic(2, 7, 5).inverse_of_strictly_monotone(0.0, 1.0);
  REQUIRE(qr.kind() == Segment::Kind::QuadraticRoot);
  CHECK(qr.eval(5.0) == Approx(0.0).margin(1e-12));
  CHECK(qr.eval(14.0) == Approx(1.0));
  CHECK(qr.eval(8.75) == Approx((-7.0 + std::sqrt(9.0 + 8.0 * 8.75)) / 4.0));

  SECTION("negated quadratic root") {
    Segment neg = qr.negated();
    for (double x : {5.0, 7.0, 11.0, 14.0}) CHECK(neg.eval(x) == Approx(-qr.eval(x)));
  }
  SECTION("scaled and shifted quadratic root") {
    Segment sc = qr.scaled(2.5);
    Segment sh = qr.shifted(-1.25);
    for (double x : {5.0, 9.0, 14.0}) {
      CHECK(sc.eval(x) == Approx(2.5 * qr.eval(x)));
      CHECK(sh.eval(x) == Approx(qr.eval(x) - 1.25));
    }
  }
  SECTION("mobius inverse round trip") {
    Segment m = Segment::mobius(1, 1, -3, 10);  // (alpha+1)/(10-3alpha)
    Segment mi = m.inverse_of_strictly_monotone(0, 1);
    for (double t : {0.0, 0.3, 0.8, 1.0}) CHECK(mi.eval(m.eval(t)) == Approx(t));
  }
}

TEST_CASE("property: double inversion round-trip on random components") {
  std::mt19937_64 rng(20240811);
  for (int trial = 0; trial < 1000; ++trial) {
    auto sample = (trial % 2 == 0) ? testsupport::random_left_flank(rng)
                                   : testsupport::random_right_flank(rng);
    MonotoneFn back = double_inverse_roundtrip(sample.fn);
    double tol = sample.has_sampled ? 1e-6 : 1e-9;
    INFO("trial " << trial);
    CHECK(max_grid_deviation(sample.fn, back) < tol);
  }
}

TEST_CASE("property: jump/plateau duality and output shape") {
  std::mt19937_64 rng(77001);
  for (int trial = 0; trial < 500; ++trial) {
    INFO("trial " << trial);
    if (trial % 2 == 0) {
      auto sample = testsupport::random_left_flank(rng);
      MonotoneFn inv = inverse_inf(sample.fn);
      CHECK(inv.direction() == Direction::Increasing);
      CHECK(inv.continuity() == Continuity::Left);
      CHECK(inv.domain_lo() == 0.0);
      CHECK(inv.domain_hi() == 1.0);
      CHECK(inv.plateau_count() == sample.jumps);
      CHECK(static_cast<int>(inv.jump_points().size()) == sample.plateaus);
      // boundary anchors
      CHECK(inv.eval(0.0) == Approx(sample.fn.domain_lo()).margin(1e-9));
      CHECK(inv.eval(1.0) == Approx(sample.fn.domain_hi()).margin(1e-9));
    } else {
      auto sample = testsupport::random_right_flank(rng);
      MonotoneFn inv = inverse_sup(sample.fn);
      CHECK(inv.direction() == Direction::Decreasing);
      CHECK(inv.continuity() == Continuity::Right);
      CHECK(inv.plateau_count() == sample.jumps);
      CHECK(static_cast<int>(inv.jump_points().size()) == sample.plateaus);
      CHECK(inv.eval(1.0) == Approx(sample.fn.domain_lo()).margin(1e-9));
      CHECK(inv.eval(0.0) == Approx(sample.fn.domain_hi()).margin(1e-9));
    }
  }
}
