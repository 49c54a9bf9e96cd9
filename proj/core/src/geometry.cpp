#include "bridgesim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace bridgesim {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double triangle_area(const Triangle& t) { return 0.5 * norm(cross(t.b - t.a, t.c - t.a)); }

double mesh_distance(const MeshPatch& m, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : m.triangles) best = std::min(best, distance(p, closest_point_on_triangle(p, t)));
  return best;
}

double box_outside_distance(const Vec3& lo, const Vec3& hi, const Vec3& p) {
  const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
  const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
  const double dz = std::max({lo.z - p.z, 0.0, p.z - hi.z});
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

double volume(const Shape& shape) {
  return std::visit(overloaded{
                        [](const Box& b) {
                          const Vec3 d = b.hi - b.lo;
                          return std::max(0.0, d.x) * std::max(0.0, d.y) * std::max(0.0, d.z);
                        },
                        [](const Cylinder& c) {
                          return std::numbers::pi * c.radius * c.radius * std::max(0.0, c.z_max - c.z_min);
                        },
                        [](const MeshPatch& m) {
                          double area = 0.0;
                          for (const auto& t : m.triangles) area += triangle_area(t);
                          return area * std::max(0.0, m.thickness);
                        },
                    },
                    shape);
}

double surface_area(const Shape& shape) {
  return std::visit(overloaded{
                        [](const Box& b) {
                          const Vec3 d = b.hi - b.lo;
                          return 2.0 * (d.x * d.y + d.x * d.z + d.y * d.z);
                        },
                        [](const Cylinder& c) {
                          const double h = c.z_max - c.z_min;
                          return 2.0 * std::numbers::pi * c.radius * (h + c.radius);
                        },
                        [](const MeshPatch& m) {
                          double area = 0.0;
                          for (const auto& t : m.triangles) area += triangle_area(t);
                          return 2.0 * area;
                        },
                    },
                    shape);
}

bool contains(const Shape& shape, const Vec3& p) {
  return std::visit(overloaded{
                        [&](const Box& b) {
                          return p.x >= b.lo.x && p.x <= b.hi.x && p.y >= b.lo.y && p.y <= b.hi.y &&
                                 p.z >= b.lo.z && p.z <= b.hi.z;
                        },
                        [&](const Cylinder& c) {
                          const double dx = p.x - c.center_x;
                          const double dy = p.y - c.center_y;
                          return p.z >= c.z_min && p.z <= c.z_max && dx * dx + dy * dy <= c.radius * c.radius;
                        },
                        [&](const MeshPatch& m) { return mesh_distance(m, p) <= 0.5 * m.thickness; },
                    },
                    shape);
}

double distance_to_solid(const Shape& shape, const Vec3& p) {
  return std::visit(overloaded{
                        [&](const Box& b) { return box_outside_distance(b.lo, b.hi, p); },
                        [&](const Cylinder& c) {
                          const double r = std::hypot(p.x - c.center_x, p.y - c.center_y);
                          const double dr = std::max(0.0, r - c.radius);
                          const double dz = std::max({c.z_min - p.z, 0.0, p.z - c.z_max});
                          return std::sqrt(dr * dr + dz * dz);
                        },
                        [&](const MeshPatch& m) { return std::max(0.0, mesh_distance(m, p) - 0.5 * m.thickness); },
                    },
                    shape);
}

double distance_to_surface(const Shape& shape, const Vec3& p) {
  return std::visit(overloaded{
                        [&](const Box& b) {
                          if (!contains(shape, p)) return box_outside_distance(b.lo, b.hi, p);
                          return std::min({p.x - b.lo.x, b.hi.x - p.x, p.y - b.lo.y, b.hi.y - p.y, p.z - b.lo.z,
                                           b.hi.z - p.z});
                        },
                        [&](const Cylinder& c) {
                          if (!contains(shape, p)) return distance_to_solid(shape, p);
                          const double r = std::hypot(p.x - c.center_x, p.y - c.center_y);
                          return std::min({c.radius - r, p.z - c.z_min, c.z_max - p.z});
                        },
                        [&](const MeshPatch& m) { return std::abs(mesh_distance(m, p) - 0.5 * m.thickness); },
                    },
                    shape);
}

Vec3 sample_surface(const Shape& shape, double u_face, double u1, double u2) {
  return std::visit(
      overloaded{
          [&](const Box& b) {
            const Vec3 d = b.hi - b.lo;
            const double areas[3] = {d.y * d.z, d.x * d.z, d.x * d.y};  // faces normal to x, y, z
            const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
            double pick = u_face * total;
            int axis = 0;
            bool high = false;
            for (int k = 0; k < 6; ++k) {
              const double a = areas[k / 2];
              if (pick < a || k == 5) {
                axis = k / 2;
                high = (k % 2) == 1;
                break;
              }
              pick -= a;
            }
            Vec3 p;
            switch (axis) {
              case 0:
                p = {high ? b.hi.x : b.lo.x, b.lo.y + u1 * d.y, b.lo.z + u2 * d.z};
                break;
              case 1:
                p = {b.lo.x + u1 * d.x, high ? b.hi.y : b.lo.y, b.lo.z + u2 * d.z};
                break;
              default:
                p = {b.lo.x + u1 * d.x, b.lo.y + u2 * d.y, high ? b.hi.z : b.lo.z};
                break;
            }
            return p;
          },
          [&](const Cylinder& c) {
            const double h = c.z_max - c.z_min;
            const double lateral = 2.0 * std::numbers::pi * c.radius * h;
            const double cap = std::numbers::pi * c.radius * c.radius;
            const double pick = u_face * (lateral + 2.0 * cap);
            if (pick < lateral) {
              const double theta = 2.0 * std::numbers::pi * u1;
              return Vec3{c.center_x + c.radius * std::cos(theta), c.center_y + c.radius * std::sin(theta),
                          c.z_min + u2 * h};
            }
            const double r = c.radius * std::sqrt(u1);
            const double theta = 2.0 * std::numbers::pi * u2;
            const double z = pick < lateral + cap ? c.z_min : c.z_max;
            return Vec3{c.center_x + r * std::cos(theta), c.center_y + r * std::sin(theta), z};
          },
          [&](const MeshPatch& m) {
            double total = 0.0;
            for (const auto& t : m.triangles) total += triangle_area(t);
            // Low half of u_face selects the front shell, high half the back.
            const bool back = u_face >= 0.5;
            double pick = (back ? u_face - 0.5 : u_face) * 2.0 * total;
            const Triangle* chosen = &m.triangles.back();
            for (const auto& t : m.triangles) {
              const double a = triangle_area(t);
              if (pick < a) {
                chosen = &t;
                break;
              }
              pick -= a;
            }
            double s = u1;
            double r = u2;
            if (s + r > 1.0) {
              s = 1.0 - s;
              r = 1.0 - r;
            }
            const Vec3 e1 = chosen->b - chosen->a;
            const Vec3 e2 = chosen->c - chosen->a;
            Vec3 n = cross(e1, e2);
            n = n / norm(n);
            const double offset = (back ? -0.5 : 0.5) * m.thickness;
            return chosen->a + e1 * s + e2 * r + n * offset;
          },
      },
      shape);
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri) {
  const Vec3& a = tri.a;
  const Vec3& b = tri.b;
  const Vec3& c = tri.c;
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double distance_to_solid(const YawedBox& box, const Vec3& p) {
  const Vec3 d = p - box.center;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Vec3 local{c * d.x + s * d.y, -s * d.x + c * d.y, d.z};
  return box_outside_distance(-box.half_extents, box.half_extents, local);
}

double polyline_length(std::span<const Vec3> points) {
  double len = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) len += distance(points[k - 1], points[k]);
  return len;
}

Vec3 polyline_point_at(std::span<const Vec3> points, double s, std::size_t* segment) {
  if (points.empty()) return {};
  if (points.size() == 1 || s <= 0.0) {
    if (segment) *segment = 0;
    return points.front();
  }
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double seg = distance(points[k - 1], points[k]);
    if (s <= seg || k + 1 == points.size()) {
      if (segment) *segment = k - 1;
      const double t = seg > 0.0 ? std::min(s / seg, 1.0) : 0.0;
      return points[k - 1] + (points[k] - points[k - 1]) * t;
    }
    s -= seg;
  }
  return points.back();
}

}  // namespace bridgesim
