// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "iesched/devices.hpp"

namespace {

using iesched::Bess;
using iesched::ChpUnit;
using iesched::Eb;
using iesched::Hst;
using iesched::ThermalUnit;

ChpUnit chp() {
  return ChpUnit(100.0, 200.0, 250.0, 0.15, 0.75, 50.0, 50.0, 0.0044, 13.29, 39.0, 16.2);
}

Bess bess() { return Bess(32.0, 160.0, 40.0, 0.9, 0.9, 150.0, 100.0, 20.0); }

TEST(ChpCondensingPower, DirectFormula) {
  EXPECT_DOUBLE_EQ(iesched::chp_condensing_power(chp(), 100.0, 200.0), 130.0);
  EXPECT_DOUBLE_EQ(iesched::chp_condensing_power(chp(), 150.0, 0.0), 150.0);
  EXPECT_DOUBLE_EQ(iesched::chp_condensing_power(chp(), 200.0, 250.0), 237.5);
}

TEST(EbHeatOutput, ConversionAndRange) {
  const Eb eb(30.0, 0.95);
  EXPECT_DOUBLE_EQ(iesched::eb_heat_output(eb, 30.0), 28.5);
  EXPECT_DOUBLE_EQ(iesched::eb_heat_output(eb, 0.0), 0.0);
  EXPECT_THROW(iesched::eb_heat_output(eb, 31.0), std::invalid_argument);
  EXPECT_THROW(iesched::eb_heat_output(eb, -1.0), std::invalid_argument);
  const Eb lossless(10.0, 1.0);
  EXPECT_DOUBLE_EQ(iesched::eb_heat_output(lossless, 7.25), 7.25);
}

TEST(BessStep, ChargeDischargeIdle) {
  const auto b = bess();
  EXPECT_DOUBLE_EQ(iesched::bess_step(b, 100.0, 10.0, 0.0, 1.0), 109.0);
  EXPECT_DOUBLE_EQ(iesched::bess_step(b, 100.0, 0.0, 9.0, 1.0), 90.0);
  EXPECT_DOUBLE_EQ(iesched::bess_step(b, 100.0, 0.0, 0.0, 1.0), 100.0);
}

TEST(BessStep, RoundTripLoss) {
  const auto b = bess();
  const double x = 10.0;
  const double s1 = iesched::bess_step(b, 100.0, x, 0.0, 1.0);
  // discharging the recoverable fraction returns the initial state exactly
  const double s2 = iesched::bess_step(b, s1, 0.0, b.eff_ch * b.eff_dc * x, 1.0);
  EXPECT_DOUBLE_EQ(s2, 100.0);
  EXPECT_DOUBLE_EQ(b.eff_ch * b.eff_dc * x, 0.81 * x);
}

TEST(HstStep, SignConvention) {
  const Hst h(40.0, 240.0, 50.0);
  EXPECT_DOUBLE_EQ(iesched::hst_step(h, 100.0, 50.0, 1.0), 50.0);    // release drains
  EXPECT_DOUBLE_EQ(iesched::hst_step(h, 100.0, -50.0, 1.0), 150.0);  // store fills
  EXPECT_DOUBLE_EQ(iesched::hst_step(h, 100.0, 0.0, 1.0), 100.0);
}

TEST(HstStep, LosslessAndLinear) {
  const Hst h(40.0, 240.0, 50.0);
  double c = 120.0;
  const double powers[] = {30.0, -20.0, 10.0, -40.0, 25.0, -5.0};
  double net = 0.0;
  for (double p : powers) {
    c = iesched::hst_step(h, c, p, 1.0);
    net += p;
  }
  c = iesched::hst_step(h, c, -net, 1.0);  // cancel the net transfer
  EXPECT_DOUBLE_EQ(c, 120.0);
}

TEST(HstStep, ReleaseOnlyIsMonotoneNonincreasing) {
  const Hst h(40.0, 240.0, 50.0);
  double c = 240.0;
  for (int i = 0; i < 4; ++i) {
    const double next = iesched::hst_step(h, c, 10.0 + i, 1.0);
    EXPECT_LT(next, c);
    c = next;
  }
}

TEST(DeviceInvariants, ConstructorsReject) {
  EXPECT_THROW(ThermalUnit(30.0, 20.0, 5.0, 5.0, 0.1, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ThermalUnit(10.0, 20.0, 0.0, 5.0, 0.1, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ThermalUnit(10.0, 20.0, 5.0, 5.0, -0.1, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Hst(100.0, 100.0, 10.0), std::invalid_argument);
  EXPECT_THROW(Bess(10.0, 100.0, 40.0, 0.0, 0.9, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Bess(10.0, 100.0, 40.0, 0.9, 1.1, 1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Eb(30.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ChpUnit(100.0, 90.0, 250.0, 0.15, 0.75, 50.0, 50.0, 0.0, 1.0, 1.0, 1.0),
               std::invalid_argument);
}

}  // namespace
