#include "rodflow/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rodflow {

Exec default_exec() { return omp_get_max_threads() > 1 ? Exec::parallel : Exec::serial; }

double QuadCloud::param_distance(int a, int b) const {
  double d = std::abs(x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)]);
  if (period > 0.0) d = std::min(d, period - d);
  return d;
}

QuadCloud sample_quadrature(const HermiteCurve& curve, const Mesh1D& mesh, int subdivisions) {
  if (subdivisions < 1) throw InvalidArgument("sample_quadrature: subdivisions must be >= 1");
  const GaussRule& g = gauss3();
  QuadCloud c;
  c.elements = mesh.num_elements();
  c.per_element = 3 * subdivisions;
  c.period = mesh.periodic() ? mesh.length() : 0.0;
  const auto n = static_cast<std::size_t>(c.elements * c.per_element);
  c.x.reserve(n);
  c.w.reserve(n);
  c.y.reserve(n);
  c.dy.reserve(n);
  c.basis.reserve(n);
  for (int e = 0; e < c.elements; ++e) {
    const ElementCurve ec = element_curve(curve, mesh, e);
    for (int s = 0; s < subdivisions; ++s) {
      for (int a = 0; a < 3; ++a) {
        const double t = (s + g.t[static_cast<std::size_t>(a)]) / subdivisions;
        const HermiteBasis B = hermite_basis(t, ec.h);
        c.x.push_back(mesh.node(e) + t * ec.h);
        c.w.push_back(g.w[static_cast<std::size_t>(a)] * ec.h / subdivisions);
        c.y.push_back(ec.value(B));
        c.dy.push_back(ec.first(B));
        c.basis.push_back(B);
      }
    }
  }
  return c;
}

namespace {

// Closer than the cutoff; exact ties count as separated.
inline bool inside(double d, double cutoff) { return d < cutoff * (1.0 - 1e-9); }


// x^q, with a multiplication chain when q is a small integer.
struct Power {
  double q;
  int iq;
  explicit Power(double q_) : q(q_), iq(-1) {
    if (q_ == std::round(q_) && q_ >= 0.0 && q_ <= 16.0) iq = static_cast<int>(q_);
  }
  double operator()(double x, double shift) const {
    const double e = q + shift;
    if (iq >= 0 && e == std::round(e) && e >= -40.0 && e <= 40.0) {
      int k = static_cast<int>(e);
      const bool inv = k < 0;
      if (inv) k = -k;
      double r = 1.0, b = x;
      while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
      }
      return inv ? 1.0 / r : r;
    }
    return std::pow(x, e);
  }
};

// Integrand of the tangent-point sum at one ordered pair.
inline double tp_value_fast(const Vec3& u, const Vec3& T, const Vec3& S, const Power& P) {
  const double C = u.cross(T).norm();
  const double U2 = u.squaredNorm();
  const double Tn = T.norm();
  return P(C / U2, 0.0) * P(1.0 / Tn, 0.0) * Tn * S.norm() / P.q;
}

struct PairGrad {
  double f;
  Vec3 gu, gT, gS;
};

inline PairGrad tp_pair_grad(const Vec3& u, const Vec3& T, const Vec3& S, const Power& P) {
  const double q = P.q;
  const Vec3 c = u.cross(T);
  const double C = c.norm();
  const double U2 = u.squaredNorm();
  const double Tn = T.norm();
  const double Sn = S.norm();
  // f = (1/q) (C/U2)^q Tn^{1-q} Sn
  const double ratio = C / U2;
  const double rq = P(ratio, 0.0);
  const double Tq = P(1.0 / Tn, 0.0);  // Tn^{-q}
  const double f = rq * Tq * Tn * Sn / q;
  PairGrad g;
  g.f = f;
  // C^{q-2} / U2^q = (C/U2)^q / C^2, written to stay finite when C -> 0.
  const double cq2 = P(C, -2.0) / P(U2, 0.0);
  const double tfac = Tq * Tn * Sn;
  g.gu = (cq2 * T.cross(c) - 2.0 * rq / U2 * u) * tfac;
  g.gT = cq2 * c.cross(u) * tfac + rq * ((1.0 - q) / q) * Tq / Tn * Sn * T;
  g.gS = (rq * Tq * Tn / (q * Sn)) * S;
  return g;
}

}  // namespace

double tp_energy_kernel(const QuadCloud& cloud, double q, double cutoff, Exec exec) {
  const Power P(q);
  const int ne = cloud.elements;
  const int pe = cloud.per_element;
  std::vector<double> row(static_cast<std::size_t>(ne), 0.0);
  std::vector<long> bad(static_cast<std::size_t>(ne), -1);

  auto do_row = [&](int i) {
    double sum = 0.0;
    for (int j = 0; j < ne; ++j) {
      double block = 0.0;
      for (int a = i * pe; a < (i + 1) * pe; ++a) {
        for (int b = j * pe; b < (j + 1) * pe; ++b) {
          if (a == b || inside(cloud.param_distance(a, b), cutoff)) continue;
          const auto A = static_cast<std::size_t>(a);
          const auto Bi = static_cast<std::size_t>(b);
          const double f = tp_value_fast(cloud.y[A] - cloud.y[Bi], cloud.dy[Bi], cloud.dy[A], P);
          block += cloud.w[A] * cloud.w[Bi] * f;
        }
      }
      if (!std::isfinite(block) && bad[static_cast<std::size_t>(i)] < 0) bad[static_cast<std::size_t>(i)] = j;
      sum += block;
    }
    row[static_cast<std::size_t>(i)] = sum;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < ne; ++i) do_row(i);
  } else {
    for (int i = 0; i < ne; ++i) do_row(i);
  }

  double total = 0.0;
  for (int i = 0; i < ne; ++i) {
    if (bad[static_cast<std::size_t>(i)] >= 0) {
      throw CorruptStateError("tp_energy: non-finite contribution at element pair (" + std::to_string(i) + ", " +
                              std::to_string(bad[static_cast<std::size_t>(i)]) + ")");
    }
    total += row[static_cast<std::size_t>(i)];
  }
  return total;
}

PointGradient tp_gradient_kernel(const QuadCloud& cloud, double q, double cutoff, Exec exec) {
  const Power P(q);
  const int ne = cloud.elements;
  const int pe = cloud.per_element;
  const int np = cloud.size();
  const auto npe = static_cast<std::size_t>(pe);

  // Row i owns its own points and buffers contributions to points of j > i.
  std::vector<double> row(static_cast<std::size_t>(ne), 0.0);
  std::vector<long> bad(static_cast<std::size_t>(ne), -1);
  std::vector<Vec3> own_y(static_cast<std::size_t>(np), Vec3::Zero());
  std::vector<Vec3> own_dy(static_cast<std::size_t>(np), Vec3::Zero());
  auto pair_index = [ne](int i, int j) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * ne - i - 1) / 2 + static_cast<std::size_t>(j - i - 1);
  };
  const std::size_t npairs = static_cast<std::size_t>(ne) * static_cast<std::size_t>(ne - 1) / 2;
  std::vector<Vec3> buf_y(npairs * npe), buf_dy(npairs * npe);

  auto do_row = [&](int i) {
    double sum = 0.0;
    for (int j = i; j < ne; ++j) {
      Vec3* by = nullptr;
      Vec3* bdy = nullptr;
      if (j > i) {
        by = &buf_y[pair_index(i, j) * npe];
        bdy = &buf_dy[pair_index(i, j) * npe];
        for (int k = 0; k < pe; ++k) {
          by[k].setZero();
          bdy[k].setZero();
        }
      }
      double block = 0.0;
      for (int a = i * pe; a < (i + 1) * pe; ++a) {
        const int b0 = (j == i) ? a + 1 : j * pe;
        for (int b = b0; b < (j + 1) * pe; ++b) {
          if (inside(cloud.param_distance(a, b), cutoff)) continue;
          const auto A = static_cast<std::size_t>(a);
          const auto Bi = static_cast<std::size_t>(b);
          const double ww = cloud.w[A] * cloud.w[Bi];
          const Vec3 u = cloud.y[A] - cloud.y[Bi];
          // (s, s~) = (a, b) and (b, a)
          const PairGrad g1 = tp_pair_grad(u, cloud.dy[Bi], cloud.dy[A], P);
          const PairGrad g2 = tp_pair_grad(-u, cloud.dy[A], cloud.dy[Bi], P);
          block += ww * (g1.f + g2.f);
          const Vec3 gua = ww * (g1.gu - g2.gu);
          const Vec3 gdya = ww * (g1.gS + g2.gT);
          const Vec3 gdyb = ww * (g1.gT + g2.gS);
          own_y[A] += gua;
          own_dy[A] += gdya;
          if (j == i) {
            own_y[Bi] -= gua;
            own_dy[Bi] += gdyb;
          } else {
            by[b - j * pe] -= gua;
            bdy[b - j * pe] += gdyb;
          }
        }
      }
      if (!std::isfinite(block) && bad[static_cast<std::size_t>(i)] < 0) bad[static_cast<std::size_t>(i)] = j;
      sum += block;
    }
    row[static_cast<std::size_t>(i)] = sum;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < ne; ++i) do_row(i);
  } else {
    for (int i = 0; i < ne; ++i) do_row(i);
  }

  PointGradient out;
  out.gy = std::move(own_y);
  out.gdy = std::move(own_dy);
  for (int i = 0; i < ne; ++i) {
    if (bad[static_cast<std::size_t>(i)] >= 0) {
      throw CorruptStateError("tp_energy: non-finite contribution at element pair (" + std::to_string(i) + ", " +
                              std::to_string(bad[static_cast<std::size_t>(i)]) + ")");
    }
    out.energy += row[static_cast<std::size_t>(i)];
  }
  auto reduce = [&](int j) {
    for (int i = 0; i < j; ++i) {
      const std::size_t base = pair_index(i, j) * npe;
      for (int k = 0; k < pe; ++k) {
        const auto p = static_cast<std::size_t>(j * pe + k);
        out.gy[p] += buf_y[base + static_cast<std::size_t>(k)];
        out.gdy[p] += buf_dy[base + static_cast<std::size_t>(k)];
      }
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ne; ++j) reduce(j);
  } else {
    for (int j = 0; j < ne; ++j) reduce(j);
  }
  return out;
}

double writhe_kernel(const QuadCloud& cloud, double cutoff, Exec exec) {
  const int ne = cloud.elements;
  const int pe = cloud.per_element;
  std::vector<double> row(static_cast<std::size_t>(ne), 0.0);

  auto do_row = [&](int i) {
    double sum = 0.0;
    for (int j = i; j < ne; ++j) {
      double block = 0.0;
      for (int a = i * pe; a < (i + 1) * pe; ++a) {
        const int b0 = (j == i) ? a + 1 : j * pe;
        for (int b = b0; b < (j + 1) * pe; ++b) {
          if (inside(cloud.param_distance(a, b), cutoff)) continue;
          const auto A = static_cast<std::size_t>(a);
          const auto Bi = static_cast<std::size_t>(b);
          const Vec3 u = cloud.y[A] - cloud.y[Bi];
          const double r = u.norm();
          block += cloud.w[A] * cloud.w[Bi] * u.dot(cloud.dy[A].cross(cloud.dy[Bi])) / (r * r * r);
        }
      }
      sum += block;
    }
    row[static_cast<std::size_t>(i)] = 2.0 * sum;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < ne; ++i) do_row(i);
  } else {
    for (int i = 0; i < ne; ++i) do_row(i);
  }
  double total = 0.0;
  for (double r : row) total += r;
  return total / (4.0 * kPi);
}

namespace {

inline double clamped_asin(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }

// Signed solid angle of the segment pair (p1,p2), (p3,p4), divided by 4pi.
inline double segment_pair_linking(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
  const Vec3 r13 = p3 - p1, r14 = p4 - p1, r23 = p3 - p2, r24 = p4 - p2;
  Vec3 n[4] = {r13.cross(r14), r14.cross(r24), r24.cross(r23), r23.cross(r13)};
  for (auto& v : n) {
    const double len = v.norm();
    if (len == 0.0) return 0.0;
    v /= len;
  }
  const double omega = clamped_asin(n[0].dot(n[1])) + clamped_asin(n[1].dot(n[2])) +
                       clamped_asin(n[2].dot(n[3])) + clamped_asin(n[3].dot(n[0]));
  const double s = (p4 - p3).cross(p2 - p1).dot(r13);
  if (s == 0.0) return 0.0;
  return (s > 0.0 ? omega : -omega) / (4.0 * kPi);
}

}  // namespace

double linking_kernel(const std::vector<Vec3>& a, const std::vector<Vec3>& b, Exec exec) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  if (na < 3 || nb < 3) throw InvalidArgument("linking_kernel: polygons need at least 3 vertices");
  std::vector<double> row(static_cast<std::size_t>(na), 0.0);
  auto do_row = [&](int i) {
    const Vec3& p1 = a[static_cast<std::size_t>(i)];
    const Vec3& p2 = a[static_cast<std::size_t>((i + 1) % na)];
    double sum = 0.0;
    for (int j = 0; j < nb; ++j) {
      sum += segment_pair_linking(p1, p2, b[static_cast<std::size_t>(j)], b[static_cast<std::size_t>((j + 1) % nb)]);
    }
    row[static_cast<std::size_t>(i)] = sum;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < na; ++i) do_row(i);
  } else {
    for (int i = 0; i < na; ++i) do_row(i);
  }
  double total = 0.0;
  for (double r : row) total += r;
  return total;
}

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= 0.0 && e <= 0.0) return r.norm();
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

SegmentDistance min_segment_distance_kernel(const std::vector<Vec3>& vertices, const std::vector<double>& params,
                                            double period, double cutoff, Exec exec) {
  const int nv = static_cast<int>(vertices.size());
  const int ns = period > 0.0 ? nv : nv - 1;
  std::vector<double> mid(static_cast<std::size_t>(ns));
  for (int i = 0; i < ns; ++i) {
    const double x0 = params[static_cast<std::size_t>(i)];
    const double x1 = (i + 1 < nv) ? params[static_cast<std::size_t>(i + 1)] : period;
    mid[static_cast<std::size_t>(i)] = 0.5 * (x0 + x1);
  }
  std::vector<SegmentDistance> row(static_cast<std::size_t>(ns));
  auto do_row = [&](int i) {
    SegmentDistance best{std::numeric_limits<double>::infinity(), -1, -1};
    const Vec3& p0 = vertices[static_cast<std::size_t>(i)];
    const Vec3& p1 = vertices[static_cast<std::size_t>((i + 1) % nv)];
    for (int j = i + 1; j < ns; ++j) {
      double d = std::abs(mid[static_cast<std::size_t>(i)] - mid[static_cast<std::size_t>(j)]);
      if (period > 0.0) d = std::min(d, period - d);
      if (inside(d, cutoff)) continue;
      const double dist = segment_distance(p0, p1, vertices[static_cast<std::size_t>(j)],
                                           vertices[static_cast<std::size_t>((j + 1) % nv)]);
      if (dist < best.distance) best = {dist, i, j};
    }
    row[static_cast<std::size_t>(i)] = best;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < ns; ++i) do_row(i);
  } else {
    for (int i = 0; i < ns; ++i) do_row(i);
  }
  SegmentDistance best{std::numeric_limits<double>::infinity(), -1, -1};
  for (const auto& r : row)
    if (r.distance < best.distance) best = r;
  return best;
}

}  // namespace rodflow
