#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "tremor/calibration.hpp"
#include "tremor/engine.hpp"
#include "tremor/errors.hpp"
#include "tremor/io.hpp"

namespace tremor {
namespace {

using testing::make_exchange;

struct HandEvent {
  std::size_t exchange;
  EventKind kind;
  double time;
  double r;
};

// Observed panel from hand-written events (already in timeline order).
ReturnPanel hand_panel(std::vector<Exchange> universe, const std::vector<HandEvent>& events) {
  ReturnPanel p;
  p.timeline.universe = std::move(universe);
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    const MarketEvent ev{e.exchange, e.kind, e.time, 0, k};
    p.timeline.events.push_back(ev);
    StepRecord rec;
    rec.event = ev;
    rec.return_total = e.r;
    p.records.push_back(rec);
  }
  return p;
}

ReturnPanel two_exchange_panel() {
  return hand_panel({make_exchange("A", 1, 0, 0, 1), make_exchange("B", 2, 0, 4, 10)},
                    {{0, EventKind::Close, 0.0, 0.05},
                     {1, EventKind::Open, 4.0, 0.03},
                     {1, EventKind::Close, 10.0, 0.01}});
}

const std::filesystem::path kWorld = std::filesystem::path(TREMOR_SOURCE_DIR) / "config/world24.ini";

TEST(CTerms, NoFiredNeighbour) {
  const auto p = hand_panel({make_exchange("A", 1, 0, 0, 1), make_exchange("B", 1, 0, 4, 10)},
                            {{0, EventKind::Close, 0.0, 0.01}, {1, EventKind::Open, 4.0, 0.0}});
  const FiringTrace trace(p, 0.03, {});
  const auto t = c_terms(trace, 1, 20.0);
  EXPECT_EQ(t.c, 0.0);
  EXPECT_EQ(t.c_prime, 0.0);
}

TEST(CTerms, EqualCapitalizationZeroLag) {
  const auto p = hand_panel({make_exchange("A", 1, 0, 0, 1), make_exchange("B", 1, 0, 0, 10)},
                            {{0, EventKind::Close, 0.0, 0.05}, {1, EventKind::Open, 24.0, 0.0}});
  const FiringTrace trace(p, 0.03, {});
  const auto t = c_terms(trace, 1, 20.0);
  EXPECT_DOUBLE_EQ(t.c, 0.05);
  EXPECT_DOUBLE_EQ(t.c_prime, 0.05);
}

TEST(CTerms, CapitalizationRatio) {
  const FiringTrace trace(two_exchange_panel(), 0.03, {});
  const auto t = c_terms(trace, 1, 20.0);
  // 2 * 0.05 * exp(-0.2), mpmath
  EXPECT_NEAR(t.c, 0.08187307530779818587, 1e-16);
  EXPECT_NEAR(t.c_prime, 2.0 * t.c, 1e-16);
}

TEST(SlavedGamma, HandPanel) {
  const FiringTrace trace(two_exchange_panel(), 0.03, {});
  ASSERT_EQ(trace.used().size(), 3u);
  const std::vector<double> eta{0.05, 0.01, 0.01};
  EXPECT_NEAR(slaved_gamma(trace, 20.0, eta), 0.16410515570800794828, 1e-14);
}

TEST(SlavedGamma, NoCrossingIsUnidentifiable) {
  const auto p = hand_panel({make_exchange("A", 1, 0, 0, 1), make_exchange("B", 1, 0, 4, 10)},
                            {{0, EventKind::Close, 0.0, 0.01}, {1, EventKind::Open, 4.0, 0.02}});
  const FiringTrace trace(p, 0.03, {});
  const std::vector<double> eta{0.01, 0.02};
  try {
    slaved_gamma(trace, 20.0, eta);
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_STREQ(e.what(), "gamma unidentifiable");
  }
  EXPECT_THROW(profile_gamma(trace, 20.0), EstimationError);
  EXPECT_THROW(grid_calibrate(p, CalibrationGrid{{0.03}, {20.0}, {0.01}}), EstimationError);
}

TEST(SlavedGamma, FixedPointOnHandPanelTerminates) {
  const FiringTrace trace(two_exchange_panel(), 0.03, {});
  const auto g = slaved_gamma_fixed_point(trace, 20.0);
  EXPECT_GE(g.iterations, 1u);
  EXPECT_LE(g.iterations, 100u);
}

TEST(Residuals, ObservedMinusTransfer) {
  // Two identical neighbours with alpha = 0.5 and no decay.
  std::vector<Exchange> u{make_exchange("A", 1, 0, 0, 1), make_exchange("B", 1, 0, 0, 1)};
  const auto p = hand_panel(u, {{0, EventKind::Close, 0.0, 0.05}, {1, EventKind::Open, 24.0, 0.035}});
  const auto r = residuals(p, ModelParams{1.0 / std::log(2.0), 20.0, 0.03, 0.01});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[1], 0.010, 1e-15);
  EXPECT_EQ(r[0], 0.05);
}

TEST(Residuals, GapsAreNaN) {
  auto p = two_exchange_panel();
  p.records[1].gap = true;
  const auto r = residuals(p, ModelParams{});
  EXPECT_TRUE(std::isnan(r[1]));
  EXPECT_FALSE(std::isnan(r[2]));
}

TEST(GridValidate, RejectsBadAxes) {
  EXPECT_THROW(validate(CalibrationGrid{{}, {20}, {0.02}}), DomainError);
  EXPECT_THROW(validate(CalibrationGrid{{0.03, 0.02}, {20}, {0.02}}), DomainError);
  EXPECT_THROW(validate(CalibrationGrid{{0.03}, {-1}, {0.02}}), DomainError);
  EXPECT_NO_THROW(validate(CalibrationGrid{{0.03}, {20}, {0.0, 0.02}}));
}

// ---------------------------------------------------------------------------
// synthetic recovery

class Recovery : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto cfg = parse_universe(kWorld);
    truth_ = new ModelParams(ModelParams::from_variance(0.8, 20, 0.03, 0.0006));
    panel_ = new ReturnPanel(generate_synthetic(cfg, *truth_, 120, 4242).panel);
  }
  static void TearDownTestSuite() {
    delete truth_;
    delete panel_;
  }
  static inline ModelParams* truth_ = nullptr;
  static inline ReturnPanel* panel_ = nullptr;
};

TEST_F(Recovery, ResidualsEqualDraws) {
  const auto r = residuals(*panel_, *truth_);
  ASSERT_EQ(r.size(), panel_->records.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (panel_->records[k].gap) continue;
    ASSERT_NEAR(r[k], panel_->records[k].eta, 1e-12) << k;
  }
}

TEST_F(Recovery, ProfileGammaWithinTolerance) {
  ASSERT_GE(panel_->records.size(), 2000u);
  const FiringTrace trace(*panel_, truth_->r_c, {});
  EXPECT_NEAR(profile_gamma(trace, truth_->tau), truth_->gamma, 0.2 * truth_->gamma);
}

TEST_F(Recovery, SinglePointGrid) {
  const auto res = grid_calibrate(*panel_, CalibrationGrid{{0.03}, {20}, {truth_->sigma}});
  ASSERT_EQ(res.points.size(), 1u);
  EXPECT_EQ(res.best_index, 0u);
  EXPECT_EQ(res.params.r_c, 0.03);
  EXPECT_EQ(res.params.tau, 20.0);
  EXPECT_TRUE(res.points[0].identifiable);
  EXPECT_EQ(res.residuals.size(), panel_->records.size());  // simulated panels have no gaps
}

TEST_F(Recovery, SelectsTruePointAndMaximum) {
  const CalibrationGrid grid{{0.02, 0.03, 0.04}, {10, 20, 40},
                             {std::sqrt(0.0004), std::sqrt(0.0006), std::sqrt(0.0008)}};
  const auto res = grid_calibrate(*panel_, grid);
  EXPECT_EQ(res.params.r_c, 0.03);
  EXPECT_NEAR(res.params.tau, 20.0, 10.0);
  EXPECT_NEAR(res.params.variance(), 0.0006, 0.00015);
  EXPECT_NEAR(res.params.gamma, 0.8, 0.16);
  for (const auto& p : res.points)
    if (p.identifiable) EXPECT_GE(res.log_likelihood, p.log_likelihood);
  EXPECT_EQ(res.points[res.best_index].log_likelihood, res.log_likelihood);
}

TEST_F(Recovery, InvariantUnderCapitalizationScale) {
  auto scaled = *panel_;
  for (auto& ex : scaled.timeline.universe) ex.capitalization *= 7.5;
  const CalibrationGrid grid{{0.03}, {10, 20}, {std::sqrt(0.0006)}};
  const auto a = grid_calibrate(*panel_, grid);
  const auto b = grid_calibrate(scaled, grid);
  EXPECT_EQ(a.best_index, b.best_index);
  EXPECT_NEAR(a.params.gamma, b.params.gamma, 1e-6);
  EXPECT_NEAR(a.log_likelihood, b.log_likelihood, 1e-6 * std::fabs(a.log_likelihood));
}

}  // namespace
}  // namespace tremor
