#include "fraclap/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace fraclap {

namespace {

// Gauss-Legendre on [-1,1] by Newton iteration on the recurrence.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      if (n == 1) p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? t : p1;
      const double pn1 = (n == 1) ? 1.0 : p0;
      dp = n * (t * pn - pn1) / (t * t - 1.0);
      const double dt = pn / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

struct Rule1D {
  std::vector<double> x, w;
};

Rule1D gauss01(int n) {
  if (n < 1) throw std::invalid_argument("gauss rule: order must be >= 1");
  Rule1D r;
  legendre_nodes(n, r.x, r.w);
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (r.x[i] + 1.0);
    r.w[i] *= 0.5;
  }
  return r;
}

// Gauss-Jacobi for weight t^beta on [0,1] via Golub-Welsch on the
// (alpha=0, beta) Jacobi recurrence.
Rule1D jacobi01(int n, double beta) {
  if (n < 1) throw std::invalid_argument("jacobi rule: order must be >= 1");
  if (beta <= -1.0) throw std::invalid_argument("jacobi rule: beta must exceed -1");
  const double a = 0.0, b = beta;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double diag;
    if (k == 0)
      diag = (b - a) / (a + b + 2.0);
    else {
      const double q = 2.0 * k + a + b;
      diag = (b * b - a * a) / (q * (q + 2.0));
    }
    J(k, k) = diag;
    if (k >= 1) {
      double off2;
      if (k == 1)
        off2 = 4.0 * (1.0 + a) * (1.0 + b) / ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0));
      else {
        const double q = 2.0 * k + a + b;
        off2 = 4.0 * k * (k + a) * (k + b) * (k + a + b) / (q * q * (q + 1.0) * (q - 1.0));
      }
      const double off = std::sqrt(off2);
      J(k, k - 1) = off;
      J(k - 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  const double scale = std::pow(2.0, -(beta + 1.0));
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    r.w[i] = mu0 * v0 * v0 * scale;
  }
  return r;
}

}  // namespace

QuadRule gauss_interval(int order) {
  if (order < 1 || order > 30) throw std::invalid_argument("gauss_interval: order must be in [1,30]");
  Rule1D r = gauss01(order);
  QuadRule q;
  q.dim = 1;
  q.exactness_degree = 2 * order - 1;
  q.points.resize(order);
  q.weights = r.w;
  for (int i = 0; i < order; ++i) q.points[i] = {r.x[i], 0.0};
  return q;
}

QuadRule gauss_jacobi_interval(int n, double beta) {
  Rule1D r = jacobi01(n, beta);
  QuadRule q;
  q.dim = 1;
  q.exactness_degree = 2 * n - 1;
  q.points.resize(n);
  q.weights = r.w;
  for (int i = 0; i < n; ++i) q.points[i] = {r.x[i], 0.0};
  return q;
}

QuadRule gauss_triangle(int order) {
  if (order < 1 || order > 20) throw std::invalid_argument("gauss_triangle: order must be in [1,20]");
  QuadRule q;
  q.dim = 2;
  q.exactness_degree = order;
  if (order == 1) {
    q.points = {{1.0 / 3.0, 1.0 / 3.0}};
    q.weights = {0.5};
    return q;
  }
  // collapsed tensor rule: x = xi, y = eta*(1-xi), Jacobian (1-xi)
  const int n = (order + 3) / 2;
  Rule1D g = gauss01(n);
  q.points.reserve(n * n);
  q.weights.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double xi = g.x[i], eta = g.x[j];
      q.points.push_back({xi, eta * (1.0 - xi)});
      q.weights.push_back(g.w[i] * g.w[j] * (1.0 - xi));
    }
  return q;
}

namespace {

void push_pair(PairQuadRule& r, const Vec2& x, const Vec2& y, double w) {
  r.x_ref.push_back(x);
  r.y_ref.push_back(y);
  r.weights.push_back(w);
}

// dim 2 reference coordinates from the {0 <= x2 <= x1 <= 1} parametrization
Vec2 ss_to_ref(double x1, double x2) { return {x1 - x2, x2}; }

void identical_rule_1d(PairQuadRule& r, int n, double s) {
  const Rule1D gj = jacobi01(n, 1.0 - 2.0 * s);
  const Rule1D gl = gauss01(n);
  for (int a = 0; a < n; ++a) {
    const double w = gj.x[a];
    const double radial = std::pow(w, 2.0 * s - 1.0) * (1.0 - w);
    for (int b = 0; b < n; ++b) {
      const double xi = w + (1.0 - w) * gl.x[b];
      const double th = (1.0 - w) * gl.x[b];
      const double wt = gj.w[a] * gl.w[b] * radial;
      push_pair(r, {xi, 0.0}, {th, 0.0}, wt);
      push_pair(r, {th, 0.0}, {xi, 0.0}, wt);
    }
  }
}

void vertex_rule_1d(PairQuadRule& r, int n, double s) {
  // shared vertex at reference coordinate 0 of both cells
  const Rule1D gj = jacobi01(n, 2.0 - 2.0 * s);
  const Rule1D gl = gauss01(n);
  for (int a = 0; a < n; ++a) {
    const double t = gj.x[a];
    const double radial = std::pow(t, 2.0 * s - 1.0);
    for (int b = 0; b < n; ++b) {
      const double wt = gj.w[a] * gl.w[b] * radial;
      push_pair(r, {t, 0.0}, {t * gl.x[b], 0.0}, wt);
      push_pair(r, {t * gl.x[b], 0.0}, {t, 0.0}, wt);
    }
  }
}

void identical_rule_2d(PairQuadRule& r, int n, double s) {
  const Rule1D gj = jacobi01(n, 1.0 - 2.0 * s);
  const Rule1D gl = gauss01(n);
  for (int ia = 0; ia < n; ++ia) {
    const double xi = gj.x[ia];
    const double radial = std::pow(xi, 2.0 * s) * (1.0 - xi) * (1.0 - xi);
    for (int ib = 0; ib < n; ++ib) {
      const double eta = gl.x[ib];
      for (int ic = 0; ic < n; ++ic) {
        const double u = gl.x[ic];
        for (int id = 0; id < n; ++id) {
          const double v = gl.x[id];
          const double wt = gj.w[ia] * gl.w[ib] * gl.w[ic] * gl.w[id] * radial * u;
          // relative coordinate cones (z1,z2), x-domain parametrized by (u,v)
          const double zA1 = xi, zA2 = xi * eta;            // 0 <= z2 <= z1
          const double xA1 = (1.0 - xi) * u, xA2 = (1.0 - xi) * u * v;
          const double zM1 = xi * eta, zM2 = xi;            // 0 <= z1 <= z2
          const double xM1 = xi * (1.0 - eta) + (1.0 - xi) * u, xM2 = (1.0 - xi) * u * v;
          const double zB1 = xi * (1.0 - eta), zB2 = -xi * eta;  // z2 <= 0 <= z1
          const double xB1 = xi * eta + (1.0 - xi) * u, xB2 = xi * eta + (1.0 - xi) * u * v;
          const Vec2 xs[3] = {ss_to_ref(xA1, xA2), ss_to_ref(xM1, xM2), ss_to_ref(xB1, xB2)};
          const Vec2 ys[3] = {ss_to_ref(xA1 + zA1, xA2 + zA2), ss_to_ref(xM1 + zM1, xM2 + zM2),
                              ss_to_ref(xB1 + zB1, xB2 + zB2)};
          for (int p = 0; p < 3; ++p) {
            push_pair(r, xs[p], ys[p], wt);
            push_pair(r, ys[p], xs[p], wt);
          }
        }
      }
    }
  }
}

void edge_rule_2d(PairQuadRule& r, int n, double s) {
  // x = E0 + a*(E1-E0) + b*(P-E0), y = E0 + c*(E1-E0) + e*(Q-E0), delta = c-a
  const Rule1D gj = jacobi01(n, 2.0 - 2.0 * s);
  const Rule1D gl = gauss01(n);
  for (int ia = 0; ia < n; ++ia) {
    const double t = gj.x[ia];
    const double radial = std::pow(t, 2.0 * s);
    for (int ib = 0; ib < n; ++ib) {
      const double e1 = gl.x[ib];  // zeta in piece A, eta1 in piece B
      for (int ic = 0; ic < n; ++ic) {
        const double e2 = gl.x[ic];  // w in piece A, eta2 in piece B
        for (int id = 0; id < n; ++id) {
          const double a = (1.0 - t) * gl.x[id];
          const double wbase = gj.w[ia] * gl.w[ib] * gl.w[ic] * gl.w[id] * radial * (1.0 - t);
          {
            // piece A: b = t, (e,delta) = t*zeta*(1-w, w); covers b >= e+delta
            const double b = t, e = t * e1 * (1.0 - e2), del = t * e1 * e2;
            const Vec2 x{a, b}, y{a + del, e};
            const double wt = wbase * e1;
            push_pair(r, x, y, wt);
            push_pair(r, y, x, wt);
          }
          {
            // piece B: delta = t*eta1, e = t*(1-eta1), b = t*eta2; covers b <= e+delta
            const double b = t * e2, e = t * (1.0 - e1), del = t * e1;
            const Vec2 x{a, b}, y{a + del, e};
            const double wt = wbase;
            push_pair(r, x, y, wt);
            push_pair(r, y, x, wt);
          }
        }
      }
    }
  }
}

void vertex_rule_2d(PairQuadRule& r, int n, double s) {
  const Rule1D gj = jacobi01(n, 3.0 - 2.0 * s);
  const Rule1D gl = gauss01(n);
  for (int ia = 0; ia < n; ++ia) {
    const double t = gj.x[ia];
    const double radial = std::pow(t, 2.0 * s);
    for (int ib = 0; ib < n; ++ib) {
      const double eta1 = gl.x[ib];
      for (int ic = 0; ic < n; ++ic) {
        const double zeta = gl.x[ic];
        for (int id = 0; id < n; ++id) {
          const double eta2 = gl.x[id];
          const double wt = gj.w[ia] * gl.w[ib] * gl.w[ic] * gl.w[id] * radial * zeta;
          const Vec2 x{t * (1.0 - eta1), t * eta1};
          const Vec2 y{t * zeta * (1.0 - eta2), t * zeta * eta2};
          push_pair(r, x, y, wt);
          push_pair(r, y, x, wt);
        }
      }
    }
  }
}

void disjoint_rule(PairQuadRule& r, int n, int dim) {
  if (dim == 1) {
    const Rule1D gl = gauss01(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        push_pair(r, {gl.x[i], 0.0}, {gl.x[j], 0.0}, gl.w[i] * gl.w[j]);
  } else {
    QuadRule tri = gauss_triangle(std::max(1, 2 * n - 2));
    for (int i = 0; i < tri.size(); ++i)
      for (int j = 0; j < tri.size(); ++j)
        push_pair(r, tri.points[i], tri.points[j], tri.weights[i] * tri.weights[j]);
  }
}

}  // namespace

PairQuadRule singular_pair_rule(PairCase pair_case, int order, double s, int dim) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("singular_pair_rule: s must be in (0,1)");
  if (order < 1 || order > 30) throw std::invalid_argument("singular_pair_rule: order out of range");
  if (dim != 1 && dim != 2) throw std::invalid_argument("singular_pair_rule: dim must be 1 or 2");
  if (dim == 1 && pair_case == PairCase::shared_edge)
    throw std::invalid_argument("singular_pair_rule: no shared-edge case in 1D");
  PairQuadRule r;
  r.pair_case = pair_case;
  r.dim = dim;
  r.order = order;
  switch (pair_case) {
    case PairCase::identical:
      dim == 1 ? identical_rule_1d(r, order, s) : identical_rule_2d(r, order, s);
      break;
    case PairCase::shared_edge:
      edge_rule_2d(r, order, s);
      break;
    case PairCase::shared_vertex:
      dim == 1 ? vertex_rule_1d(r, order, s) : vertex_rule_2d(r, order, s);
      break;
    case PairCase::disjoint:
      disjoint_rule(r, order, dim);
      break;
  }
  return r;
}

QuadRule adaptive_edge_rule(double distance_ratio, int base_order) {
  if (!(distance_ratio > 0.0)) throw std::invalid_argument("adaptive_edge_rule: ratio must be positive");
  if (base_order < 1) throw std::invalid_argument("adaptive_edge_rule: base_order must be >= 1");
  if (distance_ratio >= 1.0) return gauss_interval(base_order);
  const int levels = std::min(60, static_cast<int>(std::ceil(std::log2(1.0 / distance_ratio))));
  const Rule1D g = gauss01(base_order);
  QuadRule q;
  q.dim = 1;
  q.exactness_degree = 2 * base_order - 1;
  double hi = 1.0;
  for (int k = 0; k < levels; ++k) {
    const double lo = hi * 0.5;
    for (int i = 0; i < base_order; ++i) {
      q.points.push_back({lo + (hi - lo) * g.x[i], 0.0});
      q.weights.push_back((hi - lo) * g.w[i]);
    }
    hi = lo;
  }
  for (int i = 0; i < base_order; ++i) {  // innermost cell [0, hi]
    q.points.push_back({hi * g.x[i], 0.0});
    q.weights.push_back(hi * g.w[i]);
  }
  return q;
}

}  // namespace fraclap
