#include "tsfbp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsfbp {

const char* edge_tag_name(EdgeTag t) {
  switch (t) {
    case EdgeTag::Free: return "free";
    case EdgeTag::SonicEdge: return "sonic";
    case EdgeTag::Wall: return "wall";
    case EdgeTag::Symmetry: return "symmetry";
    case EdgeTag::Inflow: return "inflow";
    case EdgeTag::Outflow: return "outflow";
    case EdgeTag::FarField: return "far-field";
    case EdgeTag::Matching: return "matching";
  }
  return "?";
}

namespace {

/// Second-order difference of a node-indexed quantity along one grid direction.
template <class Get>
double d1(const Get& g, int k, int n, double h) {
  if (k == 0) return (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * h);
  if (k == n - 1) return (3.0 * g(n - 1) - 4.0 * g(n - 2) + g(n - 3)) / (2.0 * h);
  return (g(k + 1) - g(k - 1)) / (2.0 * h);
}

}  // namespace

void MappedDomain::finalize() {
  if (n1 < 3 || n2 < 3) throw std::invalid_argument("MappedDomain: need at least 3x3 nodes");
  hs = 1.0 / (n1 - 1);
  ht = 1.0 / (n2 - 1);
  fwd.assign(size(), Mat2{});
  jac.assign(size(), 0.0);
  inv.assign(size(), Mat2{});
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      auto gx_s = [&](int k) { return node(k, j).x; };
      auto gy_s = [&](int k) { return node(k, j).y; };
      auto gx_t = [&](int k) { return node(i, k).x; };
      auto gy_t = [&](int k) { return node(i, k).y; };
      Mat2 F;
      F.a = d1(gx_s, i, n1, hs);
      F.c = d1(gy_s, i, n1, hs);
      F.b = d1(gx_t, j, n2, ht);
      F.d = d1(gy_t, j, n2, ht);
      const int k = idx(i, j);
      fwd[k] = F;
      jac[k] = F.det();
      // Positive orientation is required by the conservative-flux signs.
      if (!(jac[k] > jac_floor))
        throw std::domain_error("MappedDomain: jacobian below floor at node (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
      inv[k] = F.inverse();
    }
  }
}

MappedDomain MappedDomain::from_map(int n1, int n2, const std::function<Vec2(double, double)>& map,
                                    const std::array<EdgeTag, 4>& tags) {
  MappedDomain d;
  d.n1 = n1;
  d.n2 = n2;
  d.tags = tags;
  d.nodes.resize(size_t(n1) * n2);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      d.nodes[d.idx(i, j)] = map(double(i) / (n1 - 1), double(j) / (n2 - 1));
  d.finalize();
  return d;
}

MappedDomain MappedDomain::transfinite(int n1, int n2, const Curve& south, const Curve& east,
                                       const Curve& north, const Curve& west,
                                       const std::array<EdgeTag, 4>& tags) {
  const Vec2 sw = south(0.0), se = south(1.0), nw = north(0.0), ne = north(1.0);
  auto map = [=](double s, double t) {
    const Vec2 blend = (1.0 - t) * south(s) + t * north(s) + (1.0 - s) * west(t) + s * east(t);
    const Vec2 corner = (1.0 - s) * (1.0 - t) * sw + s * (1.0 - t) * se + (1.0 - s) * t * nw + s * t * ne;
    return blend - corner;
  };
  return from_map(n1, n2, map, tags);
}

void diff_st(const MappedDomain& d, const std::vector<double>& u, std::vector<double>& us,
             std::vector<double>& ut) {
  us.assign(d.size(), 0.0);
  ut.assign(d.size(), 0.0);
  for (int j = 0; j < d.n2; ++j) {
    for (int i = 0; i < d.n1; ++i) {
      auto gs = [&](int k) { return u[d.idx(k, j)]; };
      auto gt = [&](int k) { return u[d.idx(i, k)]; };
      us[d.idx(i, j)] = d1(gs, i, d.n1, d.hs);
      ut[d.idx(i, j)] = d1(gt, j, d.n2, d.ht);
    }
  }
}

std::vector<Vec2> gradient(const MappedDomain& d, const Field& f) {
  std::vector<double> us, ut;
  diff_st(d, f.v, us, ut);
  std::vector<Vec2> g(d.size());
  for (int k = 0; k < d.size(); ++k) {
    // Du = Jinv^T (u_s, u_t)
    const Mat2& JI = d.inv[k];
    g[k] = {JI.a * us[k] + JI.c * ut[k], JI.b * us[k] + JI.d * ut[k]};
  }
  return g;
}

FieldSampler::FieldSampler(const MappedDomain& d, const Field& f)
    : dom_(d), field_(f), grad_nodes_(gradient(d, f)) {
  gx_.resize(d.size());
  gy_.resize(d.size());
  for (int k = 0; k < d.size(); ++k) {
    gx_[k] = grad_nodes_[k].x;
    gy_[k] = grad_nodes_[k].y;
  }
}

bool FieldSampler::to_cell_coords(int ci, int cj, const Vec2& p, double& a, double& b) const {
  // Invert the bilinear patch of cell (ci, cj) by Newton.
  const Vec2 p00 = dom_.node(ci, cj), p10 = dom_.node(ci + 1, cj);
  const Vec2 p01 = dom_.node(ci, cj + 1), p11 = dom_.node(ci + 1, cj + 1);
  a = 0.5;
  b = 0.5;
  for (int it = 0; it < 30; ++it) {
    const Vec2 q = (1 - a) * (1 - b) * p00 + a * (1 - b) * p10 + (1 - a) * b * p01 + a * b * p11;
    const Vec2 r = q - p;
    if (r.norm() < 1e-13 * (1.0 + p.norm())) break;
    const Vec2 qa = (1 - b) * (p10 - p00) + b * (p11 - p01);
    const Vec2 qb = (1 - a) * (p01 - p00) + a * (p11 - p10);
    const Mat2 J{qa.x, qb.x, qa.y, qb.y};
    if (std::fabs(J.det()) < 1e-30) return false;
    const Vec2 d = J.inverse().apply(r);
    a -= d.x;
    b -= d.y;
    a = std::clamp(a, -1.5, 2.5);
    b = std::clamp(b, -1.5, 2.5);
  }
  return true;
}

bool FieldSampler::locate(const Vec2& p, double& s, double& t) const {
  int ci = std::clamp(hint_i_, 0, dom_.n1 - 2);
  int cj = std::clamp(hint_j_, 0, dom_.n2 - 2);
  for (int step = 0; step < dom_.n1 + dom_.n2; ++step) {
    double a, b;
    if (!to_cell_coords(ci, cj, p, a, b)) return false;
    const double eps = 1e-10;
    int di = 0, dj = 0;
    if (a < -eps && ci > 0) di = -1;
    if (a > 1.0 + eps && ci < dom_.n1 - 2) di = 1;
    if (b < -eps && cj > 0) dj = -1;
    if (b > 1.0 + eps && cj < dom_.n2 - 2) dj = 1;
    if (di == 0 && dj == 0) {
      hint_i_ = ci;
      hint_j_ = cj;
      s = (ci + std::clamp(a, -1.0, 2.0)) * dom_.hs;
      t = (cj + std::clamp(b, -1.0, 2.0)) * dom_.ht;
      return true;
    }
    ci += di;
    cj += dj;
  }
  return false;
}

namespace {

double bilinear(const MappedDomain& d, const std::vector<double>& u, double s, double t) {
  const double si = std::clamp(s / d.hs, 0.0, double(d.n1 - 1) - 1e-12);
  const double tj = std::clamp(t / d.ht, 0.0, double(d.n2 - 1) - 1e-12);
  const int i = int(si), j = int(tj);
  const double a = si - i, b = tj - j;
  return (1 - a) * (1 - b) * u[d.idx(i, j)] + a * (1 - b) * u[d.idx(i + 1, j)] +
         (1 - a) * b * u[d.idx(i, j + 1)] + a * b * u[d.idx(i + 1, j + 1)];
}

}  // namespace

double FieldSampler::value(const Vec2& p) const {
  double s, t;
  if (!locate(p, s, t)) throw std::domain_error("FieldSampler: point location failed");
  return bilinear(dom_, field_.v, std::clamp(s, 0.0, 1.0), std::clamp(t, 0.0, 1.0));
}

Vec2 FieldSampler::grad(const Vec2& p) const {
  double s, t;
  if (!locate(p, s, t)) throw std::domain_error("FieldSampler: point location failed");
  s = std::clamp(s, 0.0, 1.0);
  t = std::clamp(t, 0.0, 1.0);
  return {bilinear(dom_, gx_, s, t), bilinear(dom_, gy_, s, t)};
}

double observed_order(double err_coarse, double err_fine, double ratio) {
  if (!(err_coarse > 0.0) || !(err_fine > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log(err_coarse / err_fine) / std::log(ratio);
}

}  // namespace tsfbp
