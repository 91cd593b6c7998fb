#include "platelab/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "platelab/error.hpp"

namespace platelab {

namespace {

constexpr double pi = std::numbers::pi;

std::atomic<GridTag> next_grid_tag{1};

// ---------------------------------------------------------------------------
// Signed distances in coordinates relative to the domain center. Every
// implementation depends on |x| and |y| only through symmetric expressions, so
// mirrored lattice points give bitwise identical values.

double disk_sd(double r, Vec2 p) { return std::hypot(p.x, p.y) - r; }

double annulus_sd(double a, double b, Vec2 p) {
  const double r = std::hypot(p.x, p.y);
  return std::max(r - b, a - r);
}

double rectangle_sd(double w, double h, Vec2 p) {
  const double qx = std::abs(p.x) - 0.5 * w;
  const double qy = std::abs(p.y) - 0.5 * h;
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
  return outside + std::min(std::max(qx, qy), 0.0);
}

double stadium_sd(double length, double r, Vec2 p) {
  const double qx = std::max(std::abs(p.x) - 0.5 * length, 0.0);
  return std::hypot(qx, p.y) - r;
}

// Root of the secular function for the closest point on an ellipse with
// semi-axes e0 >= e1, query (y0, y1) in the open first quadrant.
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int it = 0; it < 2000; ++it) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

double ellipse_distance_quadrant(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double s = ellipse_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (s + r0);
      const double x1 = y1 / (s + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

double ellipse_sd(double a, double b, Vec2 p) {
  double y0 = std::abs(p.x);
  double y1 = std::abs(p.y);
  double e0 = a;
  double e1 = b;
  if (e0 < e1) {
    std::swap(e0, e1);
    std::swap(y0, y1);
  }
  const double d = ellipse_distance_quadrant(e0, e1, y0, y1);
  const double level = (y0 / e0) * (y0 / e0) + (y1 / e1) * (y1 / e1);
  return level < 1.0 ? -d : d;
}

double local_sd(const DomainSpec& s, Vec2 p) {
  switch (s.kind) {
    case DomainKind::disk: return disk_sd(s.first, p);
    case DomainKind::annulus: return annulus_sd(s.first, s.second, p);
    case DomainKind::ellipse: return ellipse_sd(s.first, s.second, p);
    case DomainKind::rectangle: return rectangle_sd(s.first, s.second, p);
    case DomainKind::stadium: return stadium_sd(s.first, s.second, p);
  }
  return 0.0;
}

Vec2 half_extent(const DomainSpec& s) {
  switch (s.kind) {
    case DomainKind::disk: return {s.first, s.first};
    case DomainKind::annulus: return {s.second, s.second};
    case DomainKind::ellipse: return {s.first, s.second};
    case DomainKind::rectangle: return {0.5 * s.first, 0.5 * s.second};
    case DomainKind::stadium: return {0.5 * s.first + s.second, s.second};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parametric boundary loops in local coordinates.

struct Piece {
  enum class Type { segment, arc, ellipse } type = Type::segment;
  Vec2 a;          // segment start, or arc/ellipse center
  Vec2 b;          // segment end, or ellipse semi-axes
  Vec2 normal;     // segment normal
  double radius = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;
  double sign = 1.0;  // +1 outward normal points away from the arc center
  double length = 0.0;
  std::vector<double> arc_table;  // cumulative arc length, ellipse only
};

struct PointNormal {
  Vec2 point;
  Vec2 normal;
};

PointNormal eval_piece(const Piece& pc, double frac) {
  switch (pc.type) {
    case Piece::Type::segment:
      return {pc.a + frac * (pc.b - pc.a), pc.normal};
    case Piece::Type::arc: {
      const double phi = pc.phi0 + frac * (pc.phi1 - pc.phi0);
      const Vec2 dir{std::cos(phi), std::sin(phi)};
      return {pc.a + pc.radius * dir, pc.sign * dir};
    }
    case Piece::Type::ellipse: {
      const double phi = pc.phi0 + frac * (pc.phi1 - pc.phi0);
      const double c = std::cos(phi);
      const double s = std::sin(phi);
      const Vec2 g{c / pc.b.x, s / pc.b.y};
      const double gn = norm(g);
      return {pc.a + Vec2{pc.b.x * c, pc.b.y * s}, (1.0 / gn) * g};
    }
  }
  return {};
}

constexpr int ellipse_table_size = 4096;

double ellipse_speed(const Piece& pc, double phi) {
  return std::hypot(pc.b.x * std::sin(phi), pc.b.y * std::cos(phi));
}

void finish_piece(Piece& pc) {
  switch (pc.type) {
    case Piece::Type::segment: pc.length = norm(pc.b - pc.a); break;
    case Piece::Type::arc: pc.length = pc.radius * std::abs(pc.phi1 - pc.phi0); break;
    case Piece::Type::ellipse: {
      // Composite Simpson per table interval.
      pc.arc_table.assign(ellipse_table_size + 1, 0.0);
      const double dphi = (pc.phi1 - pc.phi0) / ellipse_table_size;
      for (int k = 0; k < ellipse_table_size; ++k) {
        const double p0 = pc.phi0 + k * dphi;
        const double seg = dphi / 6.0 *
                           (ellipse_speed(pc, p0) + 4.0 * ellipse_speed(pc, p0 + 0.5 * dphi) +
                            ellipse_speed(pc, p0 + dphi));
        pc.arc_table[k + 1] = pc.arc_table[k] + seg;
      }
      pc.length = pc.arc_table.back();
      break;
    }
  }
}

// Piece-local fraction at which the arc length from the piece start is s.
double fraction_at_length(const Piece& pc, double s) {
  if (pc.type != Piece::Type::ellipse) return pc.length > 0.0 ? s / pc.length : 0.0;
  const auto& t = pc.arc_table;
  auto it = std::upper_bound(t.begin(), t.end(), s);
  const int k = std::clamp(static_cast<int>(it - t.begin()) - 1, 0, ellipse_table_size - 1);
  const double dphi = (pc.phi1 - pc.phi0) / ellipse_table_size;
  double phi = pc.phi0 + dphi * (k + (s - t[k]) / (t[k + 1] - t[k]));
  // Two Newton steps on arc length using Simpson from the table node.
  for (int it2 = 0; it2 < 2; ++it2) {
    const double p0 = pc.phi0 + k * dphi;
    const double len = t[k] + (phi - p0) / 6.0 *
                                  (ellipse_speed(pc, p0) + 4.0 * ellipse_speed(pc, 0.5 * (p0 + phi)) +
                                   ellipse_speed(pc, phi));
    phi -= (len - s) / ellipse_speed(pc, phi);
  }
  return (phi - pc.phi0) / (pc.phi1 - pc.phi0);
}

using Loop = std::vector<Piece>;

Piece make_segment(Vec2 a, Vec2 b, Vec2 n) {
  Piece pc;
  pc.type = Piece::Type::segment;
  pc.a = a;
  pc.b = b;
  pc.normal = n;
  finish_piece(pc);
  return pc;
}

Piece make_arc(Vec2 c, double r, double phi0, double phi1, double sign) {
  Piece pc;
  pc.type = Piece::Type::arc;
  pc.a = c;
  pc.radius = r;
  pc.phi0 = phi0;
  pc.phi1 = phi1;
  pc.sign = sign;
  finish_piece(pc);
  return pc;
}

std::vector<Loop> boundary_loops(const DomainSpec& s) {
  std::vector<Loop> loops;
  switch (s.kind) {
    case DomainKind::disk:
      loops.push_back({make_arc({}, s.first, 0.0, 2.0 * pi, 1.0)});
      break;
    case DomainKind::annulus:
      loops.push_back({make_arc({}, s.second, 0.0, 2.0 * pi, 1.0)});
      loops.push_back({make_arc({}, s.first, 0.0, 2.0 * pi, -1.0)});
      break;
    case DomainKind::ellipse: {
      Piece pc;
      pc.type = Piece::Type::ellipse;
      pc.b = {s.first, s.second};
      pc.phi0 = 0.0;
      pc.phi1 = 2.0 * pi;
      finish_piece(pc);
      loops.push_back({pc});
      break;
    }
    case DomainKind::rectangle: {
      const double w = 0.5 * s.first;
      const double h = 0.5 * s.second;
      loops.push_back({make_segment({-w, -h}, {w, -h}, {0.0, -1.0}),
                       make_segment({w, -h}, {w, h}, {1.0, 0.0}),
                       make_segment({w, h}, {-w, h}, {0.0, 1.0}),
                       make_segment({-w, h}, {-w, -h}, {-1.0, 0.0})});
      break;
    }
    case DomainKind::stadium: {
      const double l = 0.5 * s.first;
      const double r = s.second;
      loops.push_back({make_segment({-l, -r}, {l, -r}, {0.0, -1.0}),
                       make_arc({l, 0.0}, r, -0.5 * pi, 0.5 * pi, 1.0),
                       make_segment({l, r}, {-l, r}, {0.0, 1.0}),
                       make_arc({-l, 0.0}, r, 0.5 * pi, 1.5 * pi, 1.0)});
      break;
    }
  }
  return loops;
}

double loop_length(const Loop& loop) {
  double len = 0.0;
  for (const auto& pc : loop) len += pc.length;
  return len;
}

// Dense parametric samples of one loop. Piece endpoints are included.
struct DenseSample {
  std::size_t piece = 0;
  double frac = 0.0;
  PointNormal pn;
};

std::vector<DenseSample> dense_samples(const Loop& loop, std::size_t total) {
  const double len = loop_length(loop);
  std::vector<DenseSample> out;
  for (std::size_t p = 0; p < loop.size(); ++p) {
    const auto m = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(total * loop[p].length / len)));
    for (std::size_t k = 0; k < m; ++k) {
      const double frac = static_cast<double>(k) / static_cast<double>(m);
      out.push_back({p, frac, eval_piece(loop[p], frac)});
    }
  }
  return out;
}

// Bisection on a piece-local fraction interval [f0, f1] for a sign change of
// fn(eval_piece(frac)).
template <class Fn>
PointNormal refine_crossing(const Piece& pc, double f0, double f1, Fn fn) {
  double v0 = fn(eval_piece(pc, f0));
  for (int it = 0; it < 200; ++it) {
    const double fm = 0.5 * (f0 + f1);
    if (fm == f0 || fm == f1) break;
    const double vm = fn(eval_piece(pc, fm));
    if ((vm <= 0.0) == (v0 <= 0.0)) {
      f0 = fm;
      v0 = vm;
    } else {
      f1 = fm;
    }
  }
  return eval_piece(pc, 0.5 * (f0 + f1));
}

// Visit every consecutive dense-sample pair of every loop whose function
// values change sign, refining the crossing point.
template <class Fn, class Visit>
void for_each_crossing(const std::vector<Loop>& loops, const std::vector<std::vector<DenseSample>>& dense,
                       Fn fn, Visit visit) {
  for (std::size_t l = 0; l < loops.size(); ++l) {
    const auto& ds = dense[l];
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const auto& s0 = ds[k];
      const auto& s1 = ds[(k + 1) % ds.size()];
      const double v0 = fn(s0.pn);
      const double v1 = fn(s1.pn);
      if ((v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0)) {
        // s1 either continues s0's piece or starts the next one at frac 0,
        // which coincides with the end of s0's piece.
        const double f1 = s1.piece == s0.piece ? s1.frac : 1.0;
        visit(refine_crossing(loops[l][s0.piece], s0.frac, f1, fn));
      } else if (v0 == 0.0) {
        visit(s0.pn);
      }
    }
  }
}

constexpr std::size_t dense_count = 4096;

struct CapContext {
  const DomainSpec& spec;
  int dir;
  double diam;
  std::vector<Loop> loops;
  std::vector<std::vector<DenseSample>> dense;

  CapContext(const DomainSpec& s, int d) : spec(s), dir(d), diam(s.diameter()), loops(boundary_loops(s)) {
    for (const auto& loop : loops) dense.push_back(dense_samples(loop, dense_count));
  }

  Vec2 reflect(Vec2 p, double lam) const {
    Vec2 q = p;
    q[dir] = 2.0 * lam - p[dir];
    return q;
  }

  // lam is local (relative to the center).
  bool contained(double lam) const {
    const double tol_d = 1e-12 * diam;
    for (const auto& ds : dense) {
      for (const auto& s : ds) {
        if (s.pn.point[dir] > lam && local_sd(spec, reflect(s.pn.point, lam)) > tol_d) return false;
      }
    }
    // Where the plane cuts the boundary, the cap must not turn back over the
    // plane: outward normal component along dir must be non-negative.
    bool ok = true;
    const double tol_n = 1e-12;
    for_each_crossing(
        loops, dense, [&](const PointNormal& pn) { return pn.point[dir] - lam; },
        [&](const PointNormal& q) {
          if (q.normal[dir] < -tol_n) ok = false;
        });
    return ok;
  }

  // Reflected cap touches the boundary away from the plane.
  bool touching(double lam) const {
    const double tol_d = 1e-12 * diam;
    const double margin = 1e-6 * diam;
    for (const auto& ds : dense) {
      for (const auto& s : ds) {
        if (s.pn.point[dir] > lam + margin && local_sd(spec, reflect(s.pn.point, lam)) >= -tol_d) return true;
      }
    }
    return false;
  }

  // Highest plane position at which the plane is orthogonal to the boundary.
  double orthogonal_position(double lam0) const {
    double best = -std::numeric_limits<double>::infinity();
    const double cap = lam0 - 1e-12 * diam;
    for (const auto& ds : dense) {
      for (const auto& s : ds) {
        if (std::abs(s.pn.normal[dir]) <= 1e-14 && s.pn.point[dir] < cap) best = std::max(best, s.pn.point[dir]);
      }
    }
    for_each_crossing(
        loops, dense, [&](const PointNormal& pn) { return pn.normal[dir]; },
        [&](const PointNormal& q) {
          if (q.point[dir] < cap) best = std::max(best, q.point[dir]);
        });
    return best;
  }
};

// Largest lam in (lo_limit, hi) at which pred first turns false when scanning
// downward from hi; returns lo_limit if pred never fails.
template <class Pred>
double scan_down(double hi, double lo_limit, double step, double tol, Pred pred_ok) {
  double pass = hi;
  for (int k = 1;; ++k) {
    const double lam = hi - k * step;
    if (lam <= lo_limit) return lo_limit;
    if (!pred_ok(lam)) {
      double lo = lam;
      double up = pass;
      while (up - lo > tol) {
        const double mid = 0.5 * (lo + up);
        if (mid == lo || mid == up) break;
        if (pred_ok(mid)) {
          up = mid;
        } else {
          lo = mid;
        }
      }
      return up;
    }
    pass = lam;
  }
}

}  // namespace

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::disk: return "disk";
    case DomainKind::annulus: return "annulus";
    case DomainKind::ellipse: return "ellipse";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::stadium: return "stadium";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  for (auto k : {DomainKind::disk, DomainKind::annulus, DomainKind::ellipse, DomainKind::rectangle,
                 DomainKind::stadium}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown domain kind '" + name + "'");
}

int Axis::direction() const {
  if (normal.y == 0.0 && normal.x == 1.0) return 0;
  if (normal.x == 0.0 && normal.y == 1.0) return 1;
  throw InvalidInput("axis must be axis-aligned with a positive unit normal");
}

DomainSpec DomainSpec::disk(double radius, Vec2 center) {
  return {DomainKind::disk, radius, 0.0, center, {Axis::x(center.x), Axis::y(center.y)}};
}

DomainSpec DomainSpec::annulus(double inner, double outer, Vec2 center) {
  return {DomainKind::annulus, inner, outer, center, {Axis::x(center.x), Axis::y(center.y)}};
}

DomainSpec DomainSpec::ellipse(double semi_x, double semi_y, Vec2 center) {
  return {DomainKind::ellipse, semi_x, semi_y, center, {Axis::x(center.x), Axis::y(center.y)}};
}

DomainSpec DomainSpec::rectangle(double width, double height, Vec2 center) {
  return {DomainKind::rectangle, width, height, center, {Axis::x(center.x), Axis::y(center.y)}};
}

DomainSpec DomainSpec::unit_square() { return rectangle(1.0, 1.0, {0.5, 0.5}); }

DomainSpec DomainSpec::stadium(double flat_length, double radius, Vec2 center) {
  return {DomainKind::stadium, flat_length, radius, center, {Axis::x(center.x), Axis::y(center.y)}};
}

void DomainSpec::validate() const {
  const bool two_params = kind != DomainKind::disk;
  if (!(first > 0.0) || (two_params && !(second > 0.0)) || !std::isfinite(first) ||
      (two_params && !std::isfinite(second))) {
    throw InvalidInput(to_string(kind) + ": length parameters must be strictly positive");
  }
  if (kind == DomainKind::annulus && !(first < second)) {
    throw InvalidInput("annulus: inner radius must be smaller than outer radius");
  }
  const Vec2 he = half_extent(*this);
  const double diam = diameter();
  for (const auto& axis : axes) {
    const int d = axis.direction();
    const double off = axis.offset - center[d];
    constexpr int n = 41;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        Vec2 p{(-1.2 + 2.4 * a / (n - 1)) * he.x, (-1.2 + 2.4 * b / (n - 1)) * he.y};
        Vec2 q = p;
        q[d] = 2.0 * off - p[d];
        if (std::abs(local_sd(*this, p) - local_sd(*this, q)) > 1e-12 * diam) {
          std::ostringstream msg;
          msg << "declared axis {x" << (d + 1) << " = " << axis.offset << "} is not a symmetry of the "
              << to_string(kind);
          throw InvalidInput(msg.str());
        }
      }
    }
  }
}

BoundingBox DomainSpec::bounding_box() const {
  const Vec2 he = half_extent(*this);
  return {center - he, center + he};
}

double DomainSpec::diameter() const {
  switch (kind) {
    case DomainKind::disk: return 2.0 * first;
    case DomainKind::annulus: return 2.0 * second;
    case DomainKind::ellipse: return 2.0 * std::max(first, second);
    case DomainKind::rectangle: return std::hypot(first, second);
    case DomainKind::stadium: return first + 2.0 * second;
  }
  return 0.0;
}

bool DomainSpec::convex() const { return kind != DomainKind::annulus; }

double DomainSpec::area() const {
  switch (kind) {
    case DomainKind::disk: return pi * first * first;
    case DomainKind::annulus: return pi * (second * second - first * first);
    case DomainKind::ellipse: return pi * first * second;
    case DomainKind::rectangle: return first * second;
    case DomainKind::stadium: return 2.0 * first * second + pi * second * second;
  }
  return 0.0;
}

std::size_t DomainSpec::boundary_loop_count() const { return kind == DomainKind::annulus ? 2 : 1; }

bool DomainSpec::has_axis(const Axis& axis) const {
  return std::any_of(axes.begin(), axes.end(), [&](const Axis& a) {
    return a.normal.x == axis.normal.x && a.normal.y == axis.normal.y && a.offset == axis.offset;
  });
}

double signed_distance(const DomainSpec& spec, Vec2 p) { return local_sd(spec, p - spec.center); }

Vec2 boundary_normal(const DomainSpec& spec, Vec2 p) {
  const double diam = spec.diameter();
  const Vec2 q = p - spec.center;
  if (std::abs(local_sd(spec, q)) > 1e-10 * diam) {
    throw InvalidInput("boundary_normal: point is not on the boundary");
  }
  const double h = 1e-6 * diam;
  const Vec2 g{(local_sd(spec, {q.x + h, q.y}) - local_sd(spec, {q.x - h, q.y})) / (2.0 * h),
               (local_sd(spec, {q.x, q.y + h}) - local_sd(spec, {q.x, q.y - h})) / (2.0 * h)};
  const double gn = norm(g);
  if (!(gn > 0.0)) throw InvalidInput("boundary_normal: degenerate gradient");
  return (1.0 / gn) * g;
}

std::vector<BoundarySample> sample_boundary(const DomainSpec& spec, std::size_t count) {
  const auto loops = boundary_loops(spec);
  double total = 0.0;
  for (const auto& l : loops) total += loop_length(l);
  std::vector<BoundarySample> out;
  for (std::size_t li = 0; li < loops.size(); ++li) {
    const auto& loop = loops[li];
    const double len = loop_length(loop);
    const auto n = std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(count * len / total)));
    std::size_t piece = 0;
    double start = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = (static_cast<double>(k) + 0.5) * len / static_cast<double>(n);
      while (piece + 1 < loop.size() && s > start + loop[piece].length) {
        start += loop[piece].length;
        ++piece;
      }
      const auto pn = eval_piece(loop[piece], fraction_at_length(loop[piece], s - start));
      out.push_back({pn.point + spec.center, pn.normal, static_cast<int>(li)});
    }
  }
  return out;
}

bool reflected_cap_contained(const DomainSpec& spec, int direction, double lambda) {
  const CapContext ctx(spec, direction);
  return ctx.contained(lambda - spec.center[direction]);
}

ReflectionCaps reflection_caps(const DomainSpec& spec, const Axis& axis) {
  const int d = axis.direction();
  spec.validate();
  const CapContext ctx(spec, d);
  const double c = spec.center[d];
  const double diam = spec.diameter();
  const double lam0 = half_extent(spec)[d];
  const double step = diam / 512.0;
  const double tol = 1e-12 * diam;

  ReflectionCaps caps;
  caps.direction = d;
  caps.normal = d == 0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  caps.lambda0 = c + lam0;

  const double lam2 = scan_down(lam0, -lam0, step, tol, [&](double l) { return ctx.contained(l); });

  double lam1 = lam2;
  if (spec.kind != DomainKind::rectangle) {
    const double orth = ctx.orthogonal_position(lam0);
    const double tan =
        scan_down(lam0, std::max(orth, -lam0), step, tol, [&](double l) { return !ctx.touching(l); });
    lam1 = std::max(orth, tan);
  }

  auto snap = [&](double local) {
    const double lam = c + local;
    for (const auto& a : spec.axes) {
      if (a.direction() == d && std::abs(lam - a.offset) <= 1e-10 * diam) return a.offset;
    }
    return lam;
  };
  caps.lambda2 = snap(lam2);
  caps.lambda1 = spec.kind == DomainKind::rectangle ? caps.lambda2 : snap(lam1);
  return caps;
}

// ---------------------------------------------------------------------------

double Grid::local_coordinate(int d, int i) const { return (static_cast<double>(i) - center_index_[d]) * delta_; }

double Grid::coordinate(int d, int i) const { return spec_.center[d] + local_coordinate(d, i); }

double Grid::lattice_coordinate(int d, double x) const { return (x - spec_.center[d]) / delta_ + center_index_[d]; }

int Grid::index(int i, int j) const {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  return mask_[static_cast<std::size_t>(j) * nx_ + i];
}

int Grid::neighbor(std::size_t k, Neighbor n) const {
  const auto [i, j] = nodes_[k];
  switch (n) {
    case east: return index(i + 1, j);
    case west: return index(i - 1, j);
    case north: return index(i, j + 1);
    case south: return index(i, j - 1);
  }
  return -1;
}

bool Grid::boundary_adjacent(std::size_t k) const {
  for (int n = 0; n < 4; ++n) {
    if (neighbor(k, static_cast<Neighbor>(n)) < 0) return true;
  }
  return false;
}

Grid Grid::build(const DomainSpec& spec, int nodes_per_side) {
  spec.validate();
  if (nodes_per_side < 5) {
    throw InvalidInput("build_grid: nodes_per_side must be at least 5, got " + std::to_string(nodes_per_side));
  }
  Grid g;
  g.spec_ = spec;
  g.tag_ = next_grid_tag.fetch_add(1);
  g.nodes_per_side_ = nodes_per_side;
  const Vec2 he = half_extent(spec);
  g.delta_ = 2.0 * std::max(he.x, he.y) / (nodes_per_side - 1);
  const double shift = nodes_per_side % 2 == 1 ? 0.0 : 0.5;
  int counts[2];
  for (int d = 0; d < 2; ++d) {
    const int k = static_cast<int>(std::ceil((he[d] + g.delta_) / g.delta_ - shift - 1e-9));
    counts[d] = shift == 0.0 ? 2 * k + 1 : 2 * k + 2;
    g.center_index_[d] = k + shift;
  }
  g.nx_ = counts[0];
  g.ny_ = counts[1];
  g.mask_.assign(static_cast<std::size_t>(g.nx_) * g.ny_, -1);

  for (int j = 0; j < g.ny_; ++j) {
    for (int i = 0; i < g.nx_; ++i) {
      const Vec2 p{g.local_coordinate(0, i), g.local_coordinate(1, j)};
      if (local_sd(spec, p) < 0.0) {
        g.mask_[static_cast<std::size_t>(j) * g.nx_ + i] = static_cast<int>(g.nodes_.size());
        g.nodes_.push_back({i, j});
      }
    }
  }
  if (g.nodes_.empty()) throw GridError("build_grid: no interior nodes at this resolution");

  // Cut fractions by bisection on the analytic signed distance along grid lines.
  static constexpr int di[4] = {1, -1, 0, 0};
  static constexpr int dj[4] = {0, 0, 1, -1};
  g.cuts_.assign(g.nodes_.size(), {1.0, 1.0, 1.0, 1.0});
  for (std::size_t k = 0; k < g.nodes_.size(); ++k) {
    const auto [i, j] = g.nodes_[k];
    const Vec2 p{g.local_coordinate(0, i), g.local_coordinate(1, j)};
    for (int n = 0; n < 4; ++n) {
      if (g.index(i + di[n], j + dj[n]) >= 0) continue;
      const Vec2 e{static_cast<double>(di[n]), static_cast<double>(dj[n])};
      const double end = local_sd(spec, p + g.delta_ * e);
      if (end == 0.0) continue;
      double lo = 0.0;
      double hi = g.delta_;
      while (hi - lo > 1e-13 * g.delta_) {
        const double mid = 0.5 * (lo + hi);
        if (local_sd(spec, p + mid * e) < 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double theta = std::clamp(0.5 * (lo + hi) / g.delta_, std::numeric_limits<double>::min(), 1.0);
      g.cuts_[k][n] = theta;
      if (theta < 1.0) g.has_cut_links_ = true;
    }
  }

  // Connectivity of the interior lattice graph.
  std::vector<int> comp(g.nodes_.size(), -1);
  std::vector<std::size_t> comp_size;
  for (std::size_t s = 0; s < g.nodes_.size(); ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(comp_size.size());
    comp_size.push_back(0);
    std::queue<std::size_t> q;
    q.push(s);
    comp[s] = id;
    while (!q.empty()) {
      const auto k = q.front();
      q.pop();
      ++comp_size[id];
      for (int n = 0; n < 4; ++n) {
        const int nb = g.neighbor(k, static_cast<Neighbor>(n));
        if (nb >= 0 && comp[nb] < 0) {
          comp[nb] = id;
          q.push(static_cast<std::size_t>(nb));
        }
      }
    }
  }
  if (comp_size.size() > 1) {
    std::ostringstream msg;
    msg << "build_grid: interior is disconnected into " << comp_size.size() << " components:";
    for (std::size_t c = 0; c < comp_size.size(); ++c) {
      const auto first = static_cast<std::size_t>(std::find(comp.begin(), comp.end(), static_cast<int>(c)) - comp.begin());
      const Vec2 p = g.position(first);
      msg << " [" << c << ": " << comp_size[c] << " nodes, seed (" << p.x << ", " << p.y << ")]";
    }
    throw GridError(msg.str());
  }

  double perimeter = 0.0;
  for (const auto& loop : boundary_loops(spec)) perimeter += loop_length(loop);
  const auto samples = std::max<std::size_t>(64, static_cast<std::size_t>(std::llround(perimeter / g.delta_)));
  g.boundary_ = sample_boundary(spec, samples);
  return g;
}

}  // namespace platelab
