#pragma once

#include <cmath>
#include <compare>

namespace aqsim::units {

/// Dimension-tagged scalar. Only same-dimension arithmetic and the explicit
/// cross-dimension operators below compile.
template <class Tag>
struct Quantity {
  double value = 0.0;

  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value(v) {}

  constexpr Quantity operator+(Quantity o) const { return Quantity(value + o.value); }
  constexpr Quantity operator-(Quantity o) const { return Quantity(value - o.value); }
  constexpr Quantity operator*(double s) const { return Quantity(value * s); }
  constexpr Quantity operator/(double s) const { return Quantity(value / s); }
  constexpr double operator/(Quantity o) const { return value / o.value; }
  constexpr auto operator<=>(const Quantity&) const = default;
};

template <class Tag>
constexpr Quantity<Tag> operator*(double s, Quantity<Tag> q) {
  return q * s;
}

struct LengthTag {};
struct TimeTag {};
struct SpeedTag {};
struct InverseLengthTag {};

using Length = Quantity<LengthTag>;
using Time = Quantity<TimeTag>;
using Speed = Quantity<SpeedTag>;            // length / time
using InverseLength = Quantity<InverseLengthTag>;

constexpr Time operator/(Length l, Speed c) { return Time(l.value / c.value); }
constexpr Length operator*(Speed c, Time t) { return Length(c.value * t.value); }
constexpr Length operator*(Time t, Speed c) { return c * t; }
constexpr double operator*(InverseLength k, Length l) { return k.value * l.value; }

/// Optical path time t = n z / c.
constexpr Time propagation_time(Length z, double refractive_index, Speed c) {
  return Time(refractive_index * z.value / c.value);
}

}  // namespace aqsim::units
