#include "rodflow/experiments.hpp"

#include "rodflow/specialfn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace rodflow {

namespace {

std::shared_ptr<const Mesh1D> shared_mesh(double L, int N, bool periodic) {
  return std::make_shared<const Mesh1D>(build_mesh(L, N, periodic));
}

RodState from_functions(const SmoothCurveFn& y, const SmoothDirectorFn& b, std::shared_ptr<const Mesh1D> mesh) {
  InterpolatedRod rod = interpolate_smooth(y, b, *mesh);
  return RodState{std::move(mesh), std::move(rod.curve), std::move(rod.director)};
}

constexpr double kFiveNodeX[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                  0.9061798459386640};
constexpr double kFiveNodeW[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                  0.2369268850561891};

}  // namespace

RodState make_circle_rod(double L, int N, double beta) {
  if (!(L > 0.0)) throw InvalidArgument("make_circle_rod: L must be positive");
  const double R = L / (2.0 * kPi);
  auto y = [R](double s) {
    const double a = s / R;
    return std::pair<Vec3, Vec3>{Vec3(R * std::cos(a), R * std::sin(a), 0.0), Vec3(-std::sin(a), std::cos(a), 0.0)};
  };
  auto b = [R, beta](double s) {
    const double a = s / R;
    return Vec3(std::cos(beta * s) * Vec3(-std::cos(a), -std::sin(a), 0.0) + std::sin(beta * s) * Vec3::UnitZ());
  };
  return from_functions(y, b, shared_mesh(L, N, true));
}

RodState make_straight_piecewise_twist(double L, int N, const std::vector<TwistInterval>& rates) {
  if (rates.empty()) throw InvalidArgument("make_straight_piecewise_twist: no intervals");
  double prev = 0.0;
  for (const auto& r : rates) {
    if (!(r.end > prev)) throw InvalidArgument("make_straight_piecewise_twist: intervals must increase");
    prev = r.end;
  }
  if (std::abs(prev - L) > 1e-12 * L) throw InvalidArgument("make_straight_piecewise_twist: intervals must end at L");
  // Cumulative angle, continuous across interval ends.
  auto angle = [rates](double s) {
    double phi = 0.0, start = 0.0;
    for (const auto& r : rates) {
      const double hi = std::min(s, r.end);
      if (hi > start) phi += r.rate * (hi - start);
      if (s <= r.end) break;
      start = r.end;
    }
    return phi;
  };
  auto y = [](double s) { return std::pair<Vec3, Vec3>{Vec3(s, 0.0, 0.0), Vec3::UnitX()}; };
  auto b = [angle](double s) {
    const double phi = angle(s);
    return Vec3(0.0, std::cos(phi), std::sin(phi));
  };
  return from_functions(y, b, shared_mesh(L, N, false));
}

RodState perturb_out_of_plane(const RodState& state, double amplitude, double frequency) {
  if (amplitude == 0.0) return state;
  const Mesh1D& m = *state.mesh;
  const double w = frequency * 2.0 * kPi / m.length();
  RodState out = state;
  for (int i = 0; i < m.num_curve_nodes(); ++i) {
    const double x = m.node(i);
    auto& p = out.curve.pos[static_cast<std::size_t>(i)];
    auto& d = out.curve.der[static_cast<std::size_t>(i)];
    p.z() += amplitude * std::sin(w * x);
    d.z() += amplitude * w * std::cos(w * x);
    d.normalize();
  }
  for (int j = 0; j < m.num_director_nodes(); ++j) {
    const Vec3& t = out.curve.der[static_cast<std::size_t>(m.curve_node(j))];
    Vec3& b = out.director.dir[static_cast<std::size_t>(j)];
    b -= b.dot(t) * t;
    b.normalize();
  }
  return out;
}

ArclengthMap::ArclengthMap(Speed speed, double s0, double s1, int panels)
    : speed_(std::move(speed)), s0_(s0), s1_(s1) {
  if (!(s1 > s0) || panels < 1) throw InvalidArgument("ArclengthMap: invalid interval");
  table_.resize(static_cast<std::size_t>(panels) + 1, 0.0);
  const double h = (s1 - s0) / panels;
  for (int i = 0; i < panels; ++i) {
    table_[static_cast<std::size_t>(i) + 1] =
        table_[static_cast<std::size_t>(i)] + panel_integral(s0 + i * h, s0 + (i + 1) * h);
  }
}

double ArclengthMap::panel_integral(double a, double b) const {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) sum += kFiveNodeW[k] * speed_(c + r * kFiveNodeX[k]);
  return sum * r;
}

double ArclengthMap::arclength(double s) const {
  if (s <= s0_) return 0.0;
  if (s >= s1_) return length();
  const int panels = static_cast<int>(table_.size()) - 1;
  const double h = (s1_ - s0_) / panels;
  const int i = std::min(panels - 1, static_cast<int>((s - s0_) / h));
  return table_[static_cast<std::size_t>(i)] + panel_integral(s0_ + i * h, s);
}

double ArclengthMap::parameter(double sigma) const {
  if (sigma <= 0.0) return s0_;
  if (sigma >= length()) return s1_;
  const auto it = std::upper_bound(table_.begin(), table_.end(), sigma);
  const int panels = static_cast<int>(table_.size()) - 1;
  const double h = (s1_ - s0_) / panels;
  const int i = std::clamp(static_cast<int>(it - table_.begin()) - 1, 0, panels - 1);
  double lo = s0_ + i * h, hi = lo + h;
  double s = lo + h * (sigma - table_[static_cast<std::size_t>(i)]) /
                      (table_[static_cast<std::size_t>(i) + 1] - table_[static_cast<std::size_t>(i)]);
  for (int it2 = 0; it2 < 50; ++it2) {
    const double f = arclength(s) - sigma;
    if (f > 0.0) hi = s;
    else lo = s;
    double next = s - f / speed_(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * std::max(1.0, std::abs(s))) return next;
    s = next;
  }
  return s;
}

Scenario make_figure_eight(int N, double kappa) {
  const double m = figure_eight_modulus();
  const double K = complete_K(m);
  const double L = 4.0 * K;
  const double sm = std::sqrt(m);
  auto y = [m, sm](double s) {
    const JacobiValues j = jacobi(s, m);
    return std::pair<Vec3, Vec3>{Vec3(2.0 * incomplete_E(j.am, m) - s, 2.0 * sm * j.cn, 0.0),
                                 Vec3(2.0 * j.dn * j.dn - 1.0, -2.0 * sm * j.sn * j.dn, 0.0)};
  };
  auto b = [](double) { return Vec3(Vec3::UnitZ()); };
  Scenario sc;
  sc.name = "f8";
  sc.initial = from_functions(y, b, shared_mesh(L, N, true));
  sc.config.kappa = kappa;
  sc.config.epsilon = sc.initial.mesh->h_max();
  sc.config.tau = sc.initial.mesh->h_max() / 8.0;
  sc.bc = bc_from_state(sc.initial, BcKind::periodic);
  sc.beta_ini = 0.0;
  return sc;
}

Scenario make_clamped_cosine(int N, double beta_ini) {
  auto speed = [](double s) { return std::sqrt(0.25 + std::sin(s) * std::sin(s)); };
  const auto map = std::make_shared<ArclengthMap>(speed, 0.0, 4.0 * kPi, 8192);
  const double L = map->length();
  auto y = [map, speed](double sigma) {
    const double s = map->parameter(sigma);
    const Vec3 dc(0.5, -std::sin(s), 0.0);
    return std::pair<Vec3, Vec3>{Vec3(0.5 * s, std::cos(s) - 1.0, 0.0), dc / speed(s)};
  };
  auto b = [map, beta_ini](double sigma) {
    const double s = map->parameter(sigma);
    const Vec3 t = Vec3(0.5, -std::sin(s), 0.0).normalized();
    const double phi = beta_ini * s;
    return Vec3(std::cos(phi) * Vec3::UnitZ() + std::sin(phi) * t.cross(Vec3::UnitZ()));
  };
  Scenario sc;
  sc.name = "clamped";
  sc.initial = from_functions(y, b, shared_mesh(L, N, false));
  sc.config.kappa = 2.0;
  sc.config.epsilon = 1e-3;
  sc.config.tau = sc.initial.mesh->h_max() / 8.0;
  sc.bc = bc_from_state(sc.initial, BcKind::clamped_both);
  sc.beta_ini = beta_ini;
  return sc;
}

namespace {

struct ParsedName {
  std::string base;
  std::optional<double> arg;
};

ParsedName parse_name(std::string_view name) {
  ParsedName p;
  const auto open = name.find('(');
  if (open == std::string_view::npos) {
    p.base = std::string(name);
    return p;
  }
  if (name.back() != ')') throw InvalidArgument("malformed scenario name '" + std::string(name) + "'");
  p.base = std::string(name.substr(0, open));
  const std::string_view inner = name.substr(open + 1, name.size() - open - 2);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), v);
  if (ec != std::errc() || ptr != inner.data() + inner.size())
    throw InvalidArgument("malformed scenario argument in '" + std::string(name) + "'");
  p.arg = v;
  return p;
}

std::string format_name(const std::string& base, double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << base << '(' << v << ')';
  return os.str();
}

Scenario circle_scenario(const std::string& name, int N, double kappa, double beta, double eps, double amp) {
  Scenario sc;
  sc.name = name;
  sc.initial = make_circle_rod(2.0 * kPi, N, beta);
  sc.perturbation = {amp, 7.0};
  sc.initial = perturb_out_of_plane(sc.initial, amp, 7.0);
  sc.config.kappa = kappa;
  sc.config.epsilon = eps;
  sc.config.tau = sc.initial.mesh->h_max() / 8.0;
  sc.bc = bc_from_state(sc.initial, BcKind::periodic);
  sc.beta_ini = beta;
  return sc;
}

}  // namespace

Scenario build_scenario(std::string_view name, const ScenarioOverrides& ov) {
  const ParsedName p = parse_name(name);
  Scenario sc;
  if (p.base == "uniframe") {
    if (p.arg) throw InvalidArgument("uniframe takes no argument");
    const int N = ov.N.value_or(100);
    const double L = 2.0 * kPi;
    sc.initial = make_straight_piecewise_twist(L, N, {{0.5 * kPi, 4.0}, {L, 0.0}});
    sc.name = "uniframe";
    sc.config.kappa = 2.0;
    sc.config.epsilon = sc.initial.mesh->h_max();
    sc.config.tau = sc.initial.mesh->h_max() / 8.0;
    sc.bc = bc_from_state(sc.initial, BcKind::clamped_both);
  } else if (p.base == "michell") {
    const double beta = ov.beta.value_or(p.arg.value_or(4.2));
    sc = circle_scenario(format_name("michell", beta), ov.N.value_or(400), 1.5, beta, 1e-5,
                         ov.perturbation.value_or(1e-3));
  } else if (p.base == "overtwist") {
    if (p.arg) throw InvalidArgument("overtwist takes no argument");
    sc = circle_scenario("overtwist", ov.N.value_or(400), 2.0, ov.beta.value_or(5.0), 1e-3,
                         ov.perturbation.value_or(1e-3));
  } else if (p.base == "f8") {
    const double kappa = ov.kappa.value_or(p.arg.value_or(0.7));
    sc = make_figure_eight(ov.N.value_or(400), kappa);
    sc.name = format_name("f8", kappa);
    const double amp = ov.perturbation.value_or(1e-3);
    sc.perturbation = {amp, 7.0};
    sc.initial = perturb_out_of_plane(sc.initial, amp, 7.0);
    sc.bc = bc_from_state(sc.initial, BcKind::periodic);
  } else if (p.base == "clamped" || p.base == "imper_b") {
    if (p.arg) throw InvalidArgument(p.base + " takes no argument");
    sc = make_clamped_cosine(ov.N.value_or(400), ov.beta.value_or(4.0));
    sc.name = p.base;
    if (p.base == "imper_b") sc.config.rho = 0.1;
  } else if (p.base == "imper_a") {
    if (p.arg) throw InvalidArgument("imper_a takes no argument");
    const int N = ov.N.value_or(800);
    sc = circle_scenario("imper_a", N, 2.0, ov.beta.value_or(5.0), 2.0 * kPi / N, ov.perturbation.value_or(0.0));
    sc.config.rho = 0.1;
  } else {
    throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
  }
  if (ov.kappa && p.base != "f8") sc.config.kappa = *ov.kappa;
  if (ov.tau) sc.config.tau = *ov.tau;
  if (ov.epsilon) sc.config.epsilon = *ov.epsilon;
  if (ov.rho) sc.config.rho = *ov.rho;
  if (ov.q) sc.config.q = *ov.q;
  sc.config.validate();
  return sc;
}

std::vector<std::string> scenario_names() {
  return {"uniframe", "michell", "overtwist", "f8", "clamped", "imper_a", "imper_b"};
}

std::vector<std::string> sweep_preset(std::string_view family) {
  std::vector<std::string> out;
  if (family == "michell") {
    const double beta_star = 1.5 * std::sqrt(3.0);
    for (int l = -1; l <= 4; ++l) {
      const double beta = (l == 2) ? 2.98 : beta_star + std::ldexp(1.0, l) / 10.0;
      out.push_back(format_name("michell", beta));
    }
  } else if (family == "f8") {
    for (int l = -2; l <= 4; ++l) out.push_back(format_name("f8", 0.5 + std::ldexp(1.0, l) / 10.0));
  } else {
    throw InvalidArgument("unknown sweep family '" + std::string(family) + "'");
  }
  return out;
}

}  // namespace rodflow
