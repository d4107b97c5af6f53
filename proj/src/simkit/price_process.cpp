#include "fraudaware/simkit/price_process.hpp"

#include <cmath>
#include <string>

#include "fraudaware/error.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::simkit {

namespace {

void require_valid_prev(double prev) {
  if (!std::isfinite(prev)) throw Error(ErrorCode::Domain, "price step: non-finite previous price");
  if (prev <= 0.0) throw Error(ErrorCode::Domain, "price step: previous price must be > 0");
}

void require_tick_in_horizon(const PriceProcessParams& params, int tick) {
  if (tick < 0 || tick >= params.horizon) {
    throw Error(ErrorCode::Domain, "price step: tick " + std::to_string(tick) +
                                       " outside horizon [0, " + std::to_string(params.horizon) + ")");
  }
}

}  // namespace

FraudPhase fraud_phase(const PriceProcessParams& params, int tick) {
  if (tick < params.pump_start) return FraudPhase::Accumulation;
  if (tick < params.pump_start + params.pump_len) return FraudPhase::Pump;
  if (tick < params.pump_start + params.pump_len + params.dump_len) return FraudPhase::Dump;
  return FraudPhase::Aftermath;
}

void validate_fraud_params(const PriceProcessParams& p) {
  if (!(p.pump_multiple > 1.0)) throw Error(ErrorCode::Config, "pump_multiple must be > 1");
  if (!(p.crash_floor > 0.0 && p.crash_floor < 1.0)) {
    throw Error(ErrorCode::Config, "crash_floor must lie in (0, 1)");
  }
  if (p.pump_len < 1 || p.dump_len < 1) throw Error(ErrorCode::Config, "pump_len and dump_len must be >= 1");
  if (p.pump_start < 1) throw Error(ErrorCode::Config, "pump_start must be >= 1 (tick 0 is the listing price)");
  if (p.pump_start + p.pump_len + p.dump_len > p.horizon) {
    throw Error(ErrorCode::Config, "fraud phases (pump_start + pump_len + dump_len = " +
                                       std::to_string(p.pump_start + p.pump_len + p.dump_len) +
                                       ") exceed the horizon " + std::to_string(p.horizon));
  }
  if (p.volatility < 0.0) throw Error(ErrorCode::Config, "volatility must be >= 0");
}

double step_real_price(double prev, const PriceProcessParams& params, int tick) {
  require_valid_prev(prev);
  const double z = normal_at(params.seed, static_cast<std::uint64_t>(tick));
  return prev * std::exp(params.drift + params.volatility * z);
}

double step_fraud_price(double prev, const PriceProcessParams& params, int tick) {
  require_valid_prev(prev);
  require_tick_in_horizon(params, tick);
  const double noise = std::abs(normal_at(params.seed, static_cast<std::uint64_t>(tick))) * params.volatility;
  switch (fraud_phase(params, tick)) {
    case FraudPhase::Accumulation:
      return step_real_price(prev, params, tick);
    case FraudPhase::Pump:
      return prev * std::pow(params.pump_multiple, 1.0 / params.pump_len) * std::exp(noise);
    case FraudPhase::Dump:
      return prev * std::pow(params.crash_floor, 1.0 / params.dump_len) * std::exp(-noise);
    case FraudPhase::Aftermath:
      return prev * std::exp(-noise);
  }
  return prev;
}

Money quantize_price(double price, Rounding rounding) {
  if (!std::isfinite(price)) throw Error(ErrorCode::Domain, "non-finite price");
  const double cents = price * 100.0;
  double q = 0.0;
  switch (rounding) {
    case Rounding::Nearest: q = std::round(cents); break;
    case Rounding::Up: q = std::ceil(cents); break;
    case Rounding::Down: q = std::floor(cents); break;
  }
  return Money::from_cents(std::max<std::int64_t>(1, static_cast<std::int64_t>(q)));
}

}  // namespace fraudaware::simkit
