#pragma once

// Small 3D geometry kernel: vectors, convex primitives, point distances and
// surface sampling. Coordinates are meters in a z-up world frame.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace bridgesim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Axis-aligned box [lo, hi].
struct Box {
  Vec3 lo;
  Vec3 hi;
};

// Vertical (z-aligned) solid cylinder.
struct Cylinder {
  double center_x = 0.0;
  double center_y = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
  double radius = 0.0;
};

struct Triangle {
  Vec3 a;
  Vec3 b;
  Vec3 c;
};

// A thin shell around a triangle patch. The solid is every point within
// thickness/2 of some triangle.
struct MeshPatch {
  std::vector<Triangle> triangles;
  double thickness = 0.0;
};

using Shape = std::variant<Box, Cylinder, MeshPatch>;

double volume(const Shape& shape);
double surface_area(const Shape& shape);

// Euclidean distance from p to the solid; 0 when p is inside.
double distance_to_solid(const Shape& shape, const Vec3& p);

// Unsigned distance from p to the boundary of the solid (positive inside too).
double distance_to_surface(const Shape& shape, const Vec3& p);

bool contains(const Shape& shape, const Vec3& p);

// Maps two uniform variates in [0,1) to a point uniformly distributed over the
// boundary of the solid. A third variate picks the face.
Vec3 sample_surface(const Shape& shape, double u_face, double u1, double u2);

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);
Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& t);

// Oriented box with yaw about +z; used for traffic vehicles.
struct YawedBox {
  Vec3 center;
  Vec3 half_extents;
  double yaw = 0.0;
};
double distance_to_solid(const YawedBox& box, const Vec3& p);

// Polyline arc-length helpers.
double polyline_length(std::span<const Vec3> points);
// Position at arc length s (clamped to [0, length]); segment index written to
// *segment when non-null.
Vec3 polyline_point_at(std::span<const Vec3> points, double s, std::size_t* segment = nullptr);

}  // namespace bridgesim
