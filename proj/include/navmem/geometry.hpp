#pragma once

// Shared axis convention and angle helpers.
//
// World frame: x east, y north, z up. Heading is measured clockwise from
// north (north 0, east pi/2), elevation upward from the horizontal plane.
// Every module that touches directions goes through these functions so the
// convention lives in exactly one place.

#include <Eigen/Core>
#include <cmath>

namespace navmem::geom {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;

template <typename Scalar>
constexpr Scalar pi() {
  return static_cast<Scalar>(3.14159265358979323846L);
}

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Maps an angle into [0, 2*pi).
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  const Scalar two_pi = Scalar(2) * pi<Scalar>();
  a = std::fmod(a, two_pi);
  if (a < Scalar(0)) a += two_pi;
  // fmod can return exactly two_pi after the correction when a was a tiny
  // negative value; fold that back to zero.
  if (a >= two_pi) a = Scalar(0);
  return a;
}

// Maps an angle difference into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = Scalar(2) * pi<Scalar>();
  a = std::fmod(a, two_pi);
  if (a > pi<Scalar>()) a -= two_pi;
  if (a <= -pi<Scalar>()) a += two_pi;
  return a;
}

// Heading/elevation pair under the world axis convention.
template <typename Scalar>
struct DirectionT {
  Scalar heading;    // [0, 2*pi), clockwise from north
  Scalar elevation;  // [-pi/2, pi/2], positive up
};

using Direction = DirectionT<double>;

// Direction of a displacement vector. At the elevation poles (horizontal
// component zero) the heading is undefined; it is fixed to 0 by convention.
template <typename Scalar>
DirectionT<Scalar> direction_of(const Vec3T<Scalar>& delta) {
  const Scalar horiz = std::hypot(delta.x(), delta.y());
  DirectionT<Scalar> d;
  d.elevation = std::atan2(delta.z(), horiz);
  d.heading = horiz > Scalar(0)
                  ? normalize_angle(std::atan2(delta.x(), delta.y()))
                  : Scalar(0);
  return d;
}

// Unit vector pointing along (heading, elevation).
template <typename Scalar>
Vec3T<Scalar> direction_vector(Scalar heading, Scalar elevation) {
  const Scalar c = std::cos(elevation);
  return {std::sin(heading) * c, std::cos(heading) * c, std::sin(elevation)};
}

template <typename Scalar>
Scalar degrees_to_radians(Scalar deg) {
  return deg * pi<Scalar>() / Scalar(180);
}

}  // namespace navmem::geom
