#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "finite_difference.hpp"
#include "peakonlab/peakon_closed_form.hpp"

using namespace peakonlab;

namespace {
// Frozen from tests/oracles/peakon_oracles.py (mpmath, 40 digits, m = c = 1 unless noted).
constexpr double amen_1 = 0.033799058949219458;
constexpr double hyp_1 = 0.048284649715835969;
constexpr double amen_small_m = -0.016886808384840927;  // m = 1e-3
constexpr double calV_009 = -0.058318992108250978;
constexpr double calV_004 = -0.013079558959508225;
constexpr double k_009 = 0.028507828476565422;
constexpr double k_004 = -0.012419102967639728;
constexpr double peakon_weight_009 = -0.069739045335452496;

struct Sample {
  double x, value;
};
const std::vector<Sample> g0inv_009{{0.5, 0.38516965338089494}, {2.0, 1.8623739769642558}, {5.0, 5.1732717645855607}};
const std::vector<Sample> g0inv_004{{0.5, 0.10233100335036566}, {2.0, 1.0295234531620258}, {5.0, 5.8667987214359613}};

// |asymptote - exact| / |exact| at v/c = 1e3 .. 1e6, m = c = 1
const std::vector<double> asymptote_deviation{1.26e-5, 1.02e-6, 8.64e-8, 7.47e-9};

PeakonParams at(double m, double r, double c = 1.0) { return PeakonParams::from_ratio(m, r, c); }

std::vector<PeakonParams> amenable_sample() {
  std::vector<PeakonParams> out;
  for (double m : {0.3, 0.8, 1.0, 1.7, 3.0}) {
    const double thr = amenability_threshold(m);
    for (double d : {1e-4, 1e-2, 0.05, 0.3}) out.push_back(at(m, thr + d * (1.0 + std::abs(thr))));
  }
  return out;
}
}  // namespace

TEST(Thresholds, ReferenceValues) {
  EXPECT_NEAR(amenability_threshold(1.0), amen_1, 1e-16);
  EXPECT_NEAR(hyperbolicity_threshold(1.0), hyp_1, 1e-16);
  EXPECT_NEAR(amenability_threshold(1e-3), amen_small_m, 1e-15);
  // small-m limit of the amenability line
  EXPECT_NEAR(amenability_threshold(1e-4), -1.0 / (6 * pi * pi), 1e-9);
  EXPECT_THROW(amenability_threshold(0.0), std::invalid_argument);
  EXPECT_THROW(hyperbolicity_threshold(-1.0), std::invalid_argument);
}

TEST(Thresholds, OrderedAndApproachingEachOtherAtLargeMass) {
  for (double m : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double a = amenability_threshold(m), h = hyperbolicity_threshold(m);
    EXPECT_LT(a, h);
    EXPECT_GT(a, -1.0 / (6 * pi * pi) - 1e-12);
    EXPECT_LT(a, m * m / 24.0);
    EXPECT_GT(h, m * m / 24.0);
  }
  EXPECT_NEAR(hyperbolicity_threshold(20.0) - amenability_threshold(20.0), 0.0, 1e-20);
}

TEST(Thresholds, PredicatesUseVOverC) {
  EXPECT_TRUE(is_amenable(at(1.0, 0.04, 5.0)));
  EXPECT_FALSE(is_hyperbolic_amenable(at(1.0, 0.04, 5.0)));
  EXPECT_FALSE(is_amenable(at(1.0, 0.03, -2.0)));
  EXPECT_TRUE(is_hyperbolic_amenable(at(1.0, 0.09, -2.0)));
}

TEST(BranchRatio, ContinuousThroughZero) {
  const double t = 0.9;
  const auto zero = branch_ratio(0.0, t);
  EXPECT_EQ(zero.value, t);
  EXPECT_NEAR(branch_ratio(1e-9, t).value, t, 1e-9);
  EXPECT_NEAR(branch_ratio(-1e-9, t).value, t, 1e-9);
  EXPECT_EQ(branch_ratio(-1e-9, t).branch, Branch::Elliptic);
  EXPECT_NEAR(branch_ratio(0.25, 0.5).value, std::atanh(0.25) / 0.5, 1e-15);
  EXPECT_NEAR(branch_ratio(-4.0, 0.5).value, std::atan(1.0) / 2.0, 1e-15);
}

TEST(CalVClosed, ReferenceValues) {
  EXPECT_NEAR(calV_closed(at(1.0, 0.09)), calV_009, 1e-15);
  EXPECT_NEAR(calV_closed(at(1.0, 0.04)), calV_004, 1e-15);
  EXPECT_THROW(calV_closed(at(1.0, 0.03)), NotAmenableError);
  EXPECT_THROW(calV_closed(at(60.0, 200.0)), std::invalid_argument);
}

TEST(CalVClosed, AgreesWithQuadratureOnBothBranches) {
  for (const auto& p : amenable_sample()) {
    const double closed = calV_closed(p);
    const double quad = calV_quadrature(peakon_wave(p));
    EXPECT_NEAR(quad, closed, 1e-10 * std::abs(closed)) << "m = " << p.m << ", v/c = " << p.v_over_c();
  }
}

TEST(CalVClosed, ScalesWithCentralCharge) {
  for (double c : {0.5, 3.0, -2.0}) {
    EXPECT_NEAR(calV_closed(at(1.3, 0.08, c)), c * calV_closed(at(1.3, 0.08)), 1e-14 * std::abs(c));
    EXPECT_NEAR(k_closed(at(1.3, 0.08, c)) / c, k_closed(at(1.3, 0.08)), 1e-15);
  }
}

TEST(G0InverseClosed, ReferenceValuesAndNormalisation) {
  for (const auto& s : g0inv_009) EXPECT_NEAR(g0_inverse_closed(at(1.0, 0.09), s.x), s.value, 1e-14);
  for (const auto& s : g0inv_004) EXPECT_NEAR(g0_inverse_closed(at(1.0, 0.04), s.x), s.value, 1e-14);
  const auto p = at(1.0, 0.09);
  EXPECT_NEAR(g0_inverse_closed(p, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(g0_inverse_closed(p, pi), pi, 1e-15);
  EXPECT_NEAR(g0_inverse_closed(p, 2.0 + 2 * two_pi), g0_inverse_closed(p, 2.0) + 2 * two_pi, 1e-13);
  EXPECT_NEAR(g0_inverse_closed(p, -1.0), -g0_inverse_closed(p, 1.0), 1e-14);
}

TEST(G0InverseClosed, MatchesQuadratureAcrossTheWavelength) {
  for (const auto& p : amenable_sample()) {
    const QuadratureUniformizer q(peakon_wave(p));
    for (double x : {0.1, 1.0, 2.5, 3.9, 6.2}) {
      EXPECT_NEAR(g0_inverse_closed(p, x), q.inverse(x), 1e-9) << "m = " << p.m << ", v/c = " << p.v_over_c();
    }
  }
}

TEST(G0InverseLift, DerivativesAndKink) {
  const auto p = at(1.0, 0.04);
  const auto h = g0_inverse_lift(p);
  EXPECT_EQ(h.smoothness(), Smoothness::C1);
  ASSERT_EQ(h.kinks().size(), 1u);
  for (double x : {0.5, 2.0, pi, 4.5, 6.0}) {
    EXPECT_NEAR(h.d1(x), fd::derivative(h, x, 1), 1e-10);
    EXPECT_NEAR(h.d2(x), fd::derivative(h, x, 2), 1e-7);
    EXPECT_NEAR(h.d3(x), fd::derivative(h, x, 3), 1e-5);
  }
  EXPECT_THROW(h.d2(0.0), KinkEvaluationError);
  EXPECT_GT(h.d1(0.0), 0.0);
}

TEST(Uniformizer, CarriesExactInverse) {
  const auto g0 = uniformizer(at(1.0, 0.09));
  EXPECT_TRUE(g0.has_exact_inverse());
  const auto h = g0.inverse();
  for (double x : {-3.0, 0.0, 0.7, 3.0, 5.5, 20.0}) EXPECT_NEAR(g0(h(x)), x, 1e-12);
}

TEST(Uniformizer, PullsUniformVectorBackToPeakon) {
  for (double r : {0.09, 0.04, 0.2}) {
    const auto p = at(1.0, r);
    const auto q = coadjoint_act(uniformizer(p), MomentumField::uniform(k_closed(p), p.c));
    for (double x : {0.3, 1.5, pi, 4.0, 5.9}) EXPECT_NEAR(q.smooth(x), 1.0 / 24, 1e-9) << "v/c = " << r;
    ASSERT_EQ(q.deltas().size(), 1u);
    EXPECT_EQ(q.deltas()[0].position, 0.0);
    EXPECT_NEAR(q.deltas()[0].weight, peakon_momentum(p).deltas()[0].weight, 1e-7) << "v/c = " << r;
  }
  const auto q = coadjoint_act(uniformizer(at(1.0, 0.09)), MomentumField::uniform(k_009, 1.0));
  EXPECT_NEAR(q.deltas()[0].weight, peakon_weight_009, 1e-7);
}

TEST(KClosed, ReferenceValuesAndBranches) {
  EXPECT_NEAR(k_closed(at(1.0, 0.09)), k_009, 1e-16);
  EXPECT_NEAR(k_closed(at(1.0, 0.04)), k_004, 1e-16);
  EXPECT_EQ(closed_form_branch(at(1.0, 0.09)), Branch::Hyperbolic);
  EXPECT_EQ(closed_form_branch(at(1.0, 0.04)), Branch::Elliptic);
  EXPECT_THROW(k_closed(at(1.0, 0.03)), NotAmenableError);
}

TEST(KClosed, LimitsAtBothThresholds) {
  for (double m : {0.5, 1.0, 2.0}) {
    const double a = amenability_threshold(m), h = hyperbolicity_threshold(m);
    EXPECT_NEAR(k_closed(at(m, a + 1e-9)), -1.0 / 24, 1e-3) << "m = " << m;
    EXPECT_NEAR(k_closed(at(m, h)), 0.0, 1e-12) << "m = " << m;
    EXPECT_LT(k_closed(at(m, h - 1e-6)), 0.0);
    EXPECT_GT(k_closed(at(m, h + 1e-6)), 0.0);
  }
}

TEST(KClosed, IncreasesWithSpeed) {
  double prev = -1.0;
  for (double r = amen_1 + 1e-4; r < 0.5; r += 0.01) {
    const double k = k_closed(at(1.0, r));
    EXPECT_GT(k, prev);
    prev = k;
  }
}

TEST(ClassifyPeakon, ThreeRegionsAndTheBoundary) {
  const auto hyp = classify_peakon(at(1.0, 0.09));
  EXPECT_EQ(hyp.kind, OrbitKind::AmenableHyperbolic);
  EXPECT_NEAR(*hyp.k_over_c, k_009, 1e-16);
  EXPECT_FALSE(hyp.winding.has_value());

  EXPECT_EQ(classify_peakon(at(1.0, 0.04)).kind, OrbitKind::AmenableElliptic);

  const auto na = classify_peakon(at(1.0, 0.03));
  EXPECT_EQ(na.kind, OrbitKind::NonAmenable);
  EXPECT_EQ(na.winding, 1);
  EXPECT_FALSE(na.k_over_c.has_value());

  const auto edge = classify_peakon(at(1.0, amen_1));
  EXPECT_EQ(edge.kind, OrbitKind::ExceptionalBoundary);
  EXPECT_DOUBLE_EQ(*edge.k_over_c, -1.0 / 24);
  EXPECT_EQ(classify_peakon(at(1.0, 0.0337995)).kind, OrbitKind::AmenableElliptic);
  EXPECT_EQ(classify_peakon(at(1.0, 0.0337995), 1e-6).kind, OrbitKind::ExceptionalBoundary);
}

TEST(ClassifyPeakon, OnlyVOverCMatters) {
  for (double r : {0.02, 0.04, 0.09}) {
    EXPECT_EQ(classify_peakon(at(1.0, r, 1.0)).kind, classify_peakon(at(1.0, r, 2.0)).kind);
    EXPECT_EQ(classify_peakon(at(1.0, r, 1.0)).kind, classify_peakon(at(1.0, r, -0.5)).kind);
  }
}

TEST(DriftClosedForm, AmenableLockedAndExceptional) {
  const auto d = drift_closed_form(at(1.0, 0.09));
  EXPECT_EQ(d.method, DriftMethod::ClosedForm);
  EXPECT_NEAR(d.v_drift, 0.09 + calV_009, 1e-15);
  const auto locked = drift_closed_form(at(1.0, 0.03));
  EXPECT_FALSE(locked.calV.has_value());
  EXPECT_EQ(locked.v_drift, 0.03);
  const auto edge = drift_closed_form(at(1.0, amen_1));
  ASSERT_TRUE(edge.calV.has_value());
  EXPECT_EQ(*edge.calV, 0.0);
  EXPECT_EQ(edge.v_drift, amen_1);
}

TEST(DriftClosedForm, ContinuousButSteepAtTheBifurcation) {
  const double eps = 1e-10;
  EXPECT_NEAR(drift_closed_form(at(1.0, amen_1 + eps)).v_drift, amen_1, 1e-4);
  EXPECT_NEAR(drift_closed_form(at(1.0, amen_1 - eps)).v_drift, amen_1, 1e-9);
}

TEST(DriftAsymptotic, ConvergesToExactDrift) {
  double prev = 1.0;
  for (std::size_t i = 0; i < asymptote_deviation.size(); ++i) {
    const auto p = at(1.0, std::pow(10.0, 3.0 + static_cast<double>(i)));
    ASSERT_TRUE(drift_asymptotic_applicable(p));
    const double exact = drift_closed_form(p).v_drift;
    const double rel = std::abs(drift_asymptotic(p) - exact) / std::abs(exact);
    EXPECT_NEAR(rel, asymptote_deviation[i], 0.05 * asymptote_deviation[i]);
    EXPECT_LT(rel, prev);
    prev = rel;
  }
  EXPECT_FALSE(drift_asymptotic_applicable(at(1.0, 0.09)));
}
