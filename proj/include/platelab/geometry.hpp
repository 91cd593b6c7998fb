#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace platelab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double operator[](int d) const { return d == 0 ? x : y; }
  double& operator[](int d) { return d == 0 ? x : y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a);

enum class DomainKind { disk, annulus, ellipse, rectangle, stadium };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Hyperplane {x : <normal, x> = offset}. Only axis-aligned normals are
/// supported by the reflection machinery.
struct Axis {
  Vec2 normal{1.0, 0.0};
  double offset = 0.0;

  static Axis x(double offset) { return {{1.0, 0.0}, offset}; }
  static Axis y(double offset) { return {{0.0, 1.0}, offset}; }

  /// 0 for {x1 = offset}, 1 for {x2 = offset}; throws for any other normal.
  int direction() const;
};

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
};

/// Analytic description of a planar domain.
///
/// Parameter meaning by kind:
///   disk       first = radius
///   annulus    first = inner radius, second = outer radius
///   ellipse    first = semi-axis along x1, second = semi-axis along x2
///   rectangle  first = width (x1), second = height (x2)
///   stadium    first = length of the flat part (along x1), second = cap radius
struct DomainSpec {
  DomainKind kind = DomainKind::disk;
  double first = 1.0;
  double second = 0.0;
  Vec2 center;
  std::vector<Axis> axes;

  static DomainSpec disk(double radius, Vec2 center = {});
  static DomainSpec annulus(double inner, double outer, Vec2 center = {});
  static DomainSpec ellipse(double semi_x, double semi_y, Vec2 center = {});
  static DomainSpec rectangle(double width, double height, Vec2 center = {});
  /// The square (0,1)^2.
  static DomainSpec unit_square();
  static DomainSpec stadium(double flat_length, double radius, Vec2 center = {});

  /// Throws InvalidInput if a length is non-positive, the annulus radii are
  /// out of order, or a declared axis is not a symmetry of the domain.
  void validate() const;

  BoundingBox bounding_box() const;
  double diameter() const;
  bool convex() const;
  /// Exact measure of the analytic domain.
  double area() const;
  std::size_t boundary_loop_count() const;
  bool has_axis(const Axis& axis) const;
};

double signed_distance(const DomainSpec& spec, Vec2 p);

/// Outward unit normal at a boundary point, from the normalized gradient of
/// the signed distance. Throws if p is farther than 1e-10 * diameter from the
/// boundary.
Vec2 boundary_normal(const DomainSpec& spec, Vec2 p);

struct BoundarySample {
  Vec2 point;
  Vec2 normal;
  int loop = 0;
};

/// Boundary points equispaced in arc length, count distributed over the
/// loops in proportion to their length (at least 8 per loop). Exact corner
/// points of the rectangle are never sampled.
std::vector<BoundarySample> sample_boundary(const DomainSpec& spec, std::size_t count);

struct ReflectionCaps {
  int direction = 0;
  Vec2 normal{1.0, 0.0};
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Moving-plane landmarks for planes orthogonal to axis.normal swept from
/// the top of the domain downward.
ReflectionCaps reflection_caps(const DomainSpec& spec, const Axis& axis);

/// True when the reflection of the cap {x in Omega : x_dir > lambda} across
/// {x_dir = lambda} lies in the closure of Omega.
bool reflected_cap_contained(const DomainSpec& spec, int direction, double lambda);

enum Neighbor : int { east = 0, west = 1, north = 2, south = 3 };

using GridTag = std::uint64_t;

struct LatticeIndex {
  int i = 0;
  int j = 0;
};

/// Masked finite-difference lattice over a domain. Immutable after build.
class Grid {
public:
  /// Lattice spacing is max(bbox extent) / (nodes_per_side - 1). The lattice
  /// is centered on the domain center (a node sits on the center when
  /// nodes_per_side is odd, a cell midpoint otherwise) and covers the bounding
  /// box inflated by one spacing. Interior nodes have signed distance < 0.
  static Grid build(const DomainSpec& spec, int nodes_per_side);

  const DomainSpec& domain() const { return spec_; }
  GridTag tag() const { return tag_; }
  int nodes_per_side() const { return nodes_per_side_; }
  double spacing() const { return delta_; }
  double cell_area() const { return delta_ * delta_; }
  /// Discrete measure |Omega|_delta = (interior count) * delta^2.
  double area() const { return static_cast<double>(size()) * cell_area(); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return nodes_.size(); }

  /// Coordinate of lattice line i along direction d.
  double coordinate(int d, int i) const;
  Vec2 position(LatticeIndex ij) const { return {coordinate(0, ij.i), coordinate(1, ij.j)}; }
  Vec2 position(std::size_t k) const { return position(nodes_[k]); }
  /// Offset of lattice line i from the domain center along d (exactly
  /// antisymmetric under mirroring of i).
  double local_coordinate(int d, int i) const;

  /// Interior node number at lattice (i, j), or -1.
  int index(int i, int j) const;
  LatticeIndex lattice(std::size_t k) const { return nodes_[k]; }
  int neighbor(std::size_t k, Neighbor n) const;

  /// Distance to the boundary in units of delta per direction (east, west,
  /// north, south); exactly 1 when the neighbor is not cut.
  const std::array<double, 4>& cuts(std::size_t k) const { return cuts_[k]; }
  /// A node with at least one non-interior lattice neighbor.
  bool boundary_adjacent(std::size_t k) const;
  bool has_cut_links() const { return has_cut_links_; }

  const std::vector<BoundarySample>& boundary() const { return boundary_; }
  std::size_t boundary_loop_count() const { return spec_.boundary_loop_count(); }

  /// Lattice coordinate (fractional index) of a position along d.
  double lattice_coordinate(int d, double x) const;

private:
  Grid() = default;

  DomainSpec spec_;
  GridTag tag_ = 0;
  int nodes_per_side_ = 0;
  double delta_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::array<double, 2> center_index_{};  // fractional lattice index of the center
  std::vector<int> mask_;
  std::vector<LatticeIndex> nodes_;
  std::vector<std::array<double, 4>> cuts_;
  std::vector<BoundarySample> boundary_;
  bool has_cut_links_ = false;
};

inline Grid build_grid(const DomainSpec& spec, int nodes_per_side) {
  return Grid::build(spec, nodes_per_side);
}

}  // namespace platelab
