#pragma once

#include <cstdint>

#include "fraudaware/money.hpp"

namespace fraudaware::simkit {

/// Parameters of one stock's price process. Ticks are simulated weeks;
/// history index t is produced by the step at tick t from the price at t-1.
struct PriceProcessParams {
  std::uint64_t seed = 0;
  double drift = 0.0;       // per-tick log drift
  double volatility = 0.0;  // per-tick log volatility, >= 0
  int pump_start = 1;       // first pump step; the price entering it is the pump-start price
  int pump_len = 1;
  int dump_len = 1;
  double pump_multiple = 3.0;  // > 1
  double crash_floor = 0.2;    // in (0, 1)
  int horizon = 52;            // number of history points, ticks 0..horizon-1

  bool operator==(const PriceProcessParams&) const = default;
};

enum class FraudPhase { Accumulation, Pump, Dump, Aftermath };

/// Phase of the step taken at `tick`: [0, pump_start) accumulation,
/// [pump_start, pump_start + pump_len) pump, the next dump_len ticks dump.
FraudPhase fraud_phase(const PriceProcessParams& params, int tick);

/// Throws Config unless the pump/dump envelope is well formed and fits the horizon.
void validate_fraud_params(const PriceProcessParams& params);

/// Geometric random walk: prev * exp(drift + volatility * z), with z drawn
/// by normal_at(params.seed, tick).
double step_real_price(double prev, const PriceProcessParams& params, int tick);

/// Pump-and-dump envelope.
///  - accumulation: step_real_price
///  - pump:  prev * pump_multiple^(1/pump_len) * exp(volatility * |z|)
///  - dump:  prev * crash_floor^(1/dump_len) * exp(-volatility * |z|)
///  - after: prev * exp(-volatility * |z|)
/// Pump steps never fall and dump/after steps never rise, so the peak is the
/// pump-end price and the final price is at most crash_floor times the peak.
double step_fraud_price(double prev, const PriceProcessParams& params, int tick);

enum class Rounding { Nearest, Up, Down };

/// Quantizes a positive quote to cents, never below one cent.
Money quantize_price(double price, Rounding rounding);

}  // namespace fraudaware::simkit
