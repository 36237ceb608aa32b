#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "tsfbp/geometry.hpp"

namespace tsfbp {

enum class EdgeTag { Free, SonicEdge, Wall, Symmetry, Inflow, Outflow, FarField, Matching };
const char* edge_tag_name(EdgeTag t);

/// Reference-square sides. South/north are t = 0/1, west/east are s = 0/1.
enum class Side : int { South = 0, East = 1, North = 2, West = 3 };

using Curve = std::function<Vec2(double)>;  // parameterized over [0, 1]

/// Curvilinear quadrilateral: an n1 x n2 node grid on the unit (s,t) square
/// mapped to physical coordinates, with tagged edges and nodal metric terms.
struct MappedDomain {
  int n1 = 0, n2 = 0;
  std::vector<Vec2> nodes;  // row-major, idx = j*n1 + i
  std::array<EdgeTag, 4> tags{EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall, EdgeTag::Wall};
  double jac_floor = 1e-12;

  // Derived metric (finalize()):
  std::vector<Mat2> fwd;   // [[x_s, x_t],[y_s, y_t]]
  std::vector<double> jac; // det(fwd), bounded away from 0
  std::vector<Mat2> inv;   // [[s_x, s_y],[t_x, t_y]]
  double hs = 0.0, ht = 0.0;

  int idx(int i, int j) const { return j * n1 + i; }
  const Vec2& node(int i, int j) const { return nodes[idx(i, j)]; }
  int size() const { return n1 * n2; }
  EdgeTag tag(Side s) const { return tags[int(s)]; }

  void finalize();

  static MappedDomain from_map(int n1, int n2, const std::function<Vec2(double, double)>& map,
                               const std::array<EdgeTag, 4>& tags);
  /// Transfinite interpolation of four boundary curves with shared corners.
  static MappedDomain transfinite(int n1, int n2, const Curve& south, const Curve& east,
                                  const Curve& north, const Curve& west,
                                  const std::array<EdgeTag, 4>& tags);
};

/// Nodal scalar field on a MappedDomain.
struct Field {
  std::string quantity;
  std::vector<double> v;
  Field() = default;
  Field(std::string q, int n, double fill = 0.0) : quantity(std::move(q)), v(n, fill) {}
  double& operator()(const MappedDomain& d, int i, int j) { return v[d.idx(i, j)]; }
  double operator()(const MappedDomain& d, int i, int j) const { return v[d.idx(i, j)]; }
};

/// Computational-space derivatives by second-order differences.
void diff_st(const MappedDomain& d, const std::vector<double>& u, std::vector<double>& us,
             std::vector<double>& ut);
/// Physical nodal gradients of a field.
std::vector<Vec2> gradient(const MappedDomain& d, const Field& f);

/// Bilinear interpolation of nodal data with structured-grid point location.
class FieldSampler {
 public:
  FieldSampler(const MappedDomain& d, const Field& f);
  /// Value at a physical point; clamps to the nearest cell if `p` is slightly
  /// outside the domain (the caller controls how far it strays).
  double value(const Vec2& p) const;
  Vec2 grad(const Vec2& p) const;
  bool locate(const Vec2& p, double& s, double& t) const;

 private:
  const MappedDomain& dom_;
  const Field& field_;
  std::vector<Vec2> grad_nodes_;
  std::vector<double> gx_, gy_;
  mutable int hint_i_ = 0, hint_j_ = 0;
  bool to_cell_coords(int ci, int cj, const Vec2& p, double& a, double& b) const;
};

/// Observed convergence order from errors on a refinement pair sequence.
double observed_order(double err_coarse, double err_fine, double ratio = 2.0);

}  // namespace tsfbp
