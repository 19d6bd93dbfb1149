#include "pwr/models.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "pwr/error.hpp"
#include "pwr/sampling.hpp"

namespace pwr {

std::pair<double, double> sync_order(const double* phases, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    re += std::cos(phases[j]);
    im += std::sin(phases[j]);
  }
  re /= static_cast<double>(n);
  im /= static_cast<double>(n);
  double phi = std::atan2(im, re);
  if (phi <= -M_PI) phi = M_PI;
  return {std::hypot(re, im), phi};
}

NetworkSystem kuramoto(const KuramotoSpec& spec) {
  const std::size_t n = spec.omega.size();
  if (static_cast<std::size_t>(spec.coupling.rows()) != n || static_cast<std::size_t>(spec.coupling.cols()) != n ||
      spec.uncertain.size() != n || spec.x0.size() != n)
    throw Error(ErrorKind::length_mismatch, "kuramoto: coupling, frequencies and phases must agree in size");

  struct Data {
    std::vector<std::vector<std::pair<std::size_t, double>>> nbr;
    std::vector<double> omega;
    std::vector<std::ptrdiff_t> param;
  };
  auto data = std::make_shared<Data>();
  data->nbr.resize(n);
  data->omega = spec.omega;
  data->param.assign(n, -1);

  NetworkSystem sys;
  sys.name = "kuramoto";
  sys.kind = NetworkSystem::Kind::ode;
  sys.n = n;
  sys.x0 = spec.x0;
  sys.horizon = spec.horizon;
  sys.steps = spec.steps;
  sys.params.owner.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && spec.coupling(i, j) != 0.0) data->nbr[i].push_back({j, spec.coupling(i, j)});
    if (spec.uncertain[i]) {
      data->param[i] = static_cast<std::ptrdiff_t>(
          sys.params.add(Distribution::gaussian_tolerance(spec.omega[i], spec.tolerance), "omega" + std::to_string(i)));
      sys.params.owner[i].push_back(static_cast<std::size_t>(data->param[i]));
    }
  }

  sys.rhs_rows = [data](std::span<const std::size_t> rows, const double* x, const double* xi, double, double* out) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::size_t i = rows[k];
      double v = data->param[i] >= 0 ? xi[data->param[i]] : data->omega[i];
      for (const auto& [j, kij] : data->nbr[i]) v += kij * std::sin(x[j] - x[i]);
      out[k] = v;
    }
  };
  sys.jacobian = [data, n](const double* x, const double*, double, Eigen::MatrixXd& jac) {
    jac.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [j, kij] : data->nbr[i]) {
        const double c = kij * std::cos(x[j] - x[i]);
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= c;
      }
  };
  sys.observables.push_back({"R", [n](const double* x, const double*, double) { return sync_order(x, n).first; }});
  sys.observables.push_back({"phi", [n](const double* x, const double*, double) { return sync_order(x, n).second; }});
  return sys;
}

NetworkSystem kuramoto_chain3(double eps, double tolerance, double horizon, std::size_t steps) {
  KuramotoSpec spec;
  spec.coupling = Eigen::MatrixXd::Zero(3, 3);
  spec.coupling(0, 1) = eps;
  spec.coupling(1, 0) = eps;
  spec.coupling(1, 2) = 0.8 * eps;
  spec.coupling(2, 1) = 0.8 * eps;
  spec.omega = {1.0, 1.2, 0.8};
  spec.uncertain = {true, true, true};
  spec.tolerance = tolerance;
  spec.x0 = {0.0, 0.3, 0.6};
  spec.horizon = horizon;
  spec.steps = steps;
  NetworkSystem sys = kuramoto(spec);
  sys.name = "kuramoto-chain3";
  return sys;
}

NetworkSystem kuramoto80(std::uint64_t seed, const Kuramoto80Options& opt) {
  constexpr std::size_t n = 80;
  constexpr std::size_t pairs = n / 2;
  std::mt19937_64 rng(derive_seed(seed, kStreamModel));
  KuramotoSpec spec;
  spec.coupling = Eigen::MatrixXd::Zero(n, n);
  spec.omega.resize(n);
  spec.uncertain.resize(n);
  spec.x0.resize(n);
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t a = 2 * k, b = 2 * k + 1, next = (2 * k + 2) % n;
    spec.coupling(a, b) = spec.coupling(b, a) = opt.intra;
    spec.coupling(b, next) = spec.coupling(next, b) = opt.inter;
  }
  for (std::size_t i = 0; i < n; ++i) {
    spec.omega[i] = 0.8 + 0.4 * uniform01(rng);
    spec.uncertain[i] = (i % 2 == 0);
  }
  for (std::size_t i = 0; i < n; ++i)
    spec.x0[i] = M_PI * static_cast<double>(i / 2) / static_cast<double>(pairs) + 0.05 * (uniform01(rng) - 0.5);
  spec.tolerance = opt.tolerance;
  spec.horizon = opt.horizon;
  spec.steps = opt.steps;
  NetworkSystem sys = kuramoto(spec);
  sys.name = "kuramoto-80";
  return sys;
}

double stability_lambda_max(double a, double b, double c, double x1, double x2) {
  const double j11 = 2 * a * x1, j12 = 2 * c * x2, j21 = 2 * c * x1, j22 = 2 * b * x2;
  const double tr = j11 + j22;
  const double disc = 0.25 * (j11 - j22) * (j11 - j22) + j12 * j21;
  if (disc < 0) return 0.5 * tr;
  return 0.5 * tr + std::sqrt(disc);
}

NetworkSystem stability_system(const StabilitySpec& spec) {
  NetworkSystem sys;
  sys.name = "stability";
  sys.kind = NetworkSystem::Kind::algebraic;
  sys.n = 2;
  sys.x0 = spec.guess;
  sys.horizon = 0.0;
  sys.steps = 0;
  sys.params.add(spec.a, "a");
  sys.params.add(spec.b, "b");
  sys.params.owner = {{0}, {1}};
  const double c = spec.c, v1 = spec.v1, v2 = spec.v2;
  sys.rhs_rows = [c, v1, v2](std::span<const std::size_t> rows, const double* x, const double* xi, double,
                             double* out) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] == 0)
        out[k] = xi[0] * x[0] * x[0] + c * x[1] * x[1] - v1;
      else
        out[k] = c * x[0] * x[0] + xi[1] * x[1] * x[1] - v2;
    }
  };
  sys.jacobian = [c](const double* x, const double* xi, double, Eigen::MatrixXd& jac) {
    jac.resize(2, 2);
    jac << 2 * xi[0] * x[0], 2 * c * x[1], 2 * c * x[0], 2 * xi[1] * x[1];
  };
  sys.observables.push_back(
      {"lambda_max", [c](const double* x, const double* xi, double) { return stability_lambda_max(xi[0], xi[1], c, x[0], x[1]); }});
  return sys;
}

NetworkSystem thermal_rc(const ThermalSpec& spec, ThermalLayout* layout_out) {
  if (spec.zones < 1 || spec.walls_per_zone < 1)
    throw Error(ErrorKind::invalid_topology, "thermal network needs at least one zone and one wall per zone");
  if (spec.coupling < 0 || spec.area <= 0 || spec.thickness <= 0 || spec.c_air <= 0 || spec.c_wall <= 0)
    throw Error(ErrorKind::invalid_topology, "thermal network constants must be positive");

  const auto zones = static_cast<std::size_t>(spec.zones);
  const auto walls = static_cast<std::size_t>(spec.walls_per_zone);
  ThermalLayout lay;
  std::size_t next = 0;
  lay.air.resize(zones);
  lay.walls.resize(zones);
  lay.outer.resize(zones);
  for (std::size_t z = 0; z < zones; ++z) {
    lay.air[z] = next++;
    lay.zone_of.push_back(z);
    for (std::size_t w = 0; w < walls; ++w) {
      lay.walls[z].push_back(next++);
      lay.zone_of.push_back(z);
    }
    if (spec.outer_nodes)
      for (std::size_t w = 0; w + 1 < walls; ++w) {
        lay.outer[z].push_back(next++);
        lay.zone_of.push_back(z);
      }
  }
  const std::size_t n = next;

  NetworkSystem sys;
  sys.name = "thermal-rc";
  sys.kind = NetworkSystem::Kind::ode;
  sys.n = n;
  sys.horizon = spec.horizon;
  sys.steps = spec.steps;
  sys.x0.assign(n, spec.wall0);
  for (std::size_t z = 0; z < zones; ++z) sys.x0[lay.air[z]] = spec.air0;

  const std::size_t ph = sys.params.add(Distribution::gaussian_tolerance(spec.h_nominal, spec.tolerance), "h");
  std::vector<std::size_t> pk(zones);
  for (std::size_t z = 0; z < zones; ++z)
    pk[z] = sys.params.add(Distribution::gaussian_tolerance(spec.k_nominal, spec.tolerance), "k" + std::to_string(z));
  std::vector<std::size_t> pload;
  if (spec.load)
    for (std::size_t q = 0; q < spec.load->model.truncation(); ++q)
      pload.push_back(sys.params.add(Distribution::gaussian(0.0, 1.0), "load" + std::to_string(q)));

  sys.params.owner.assign(n, {});
  for (std::size_t z = 0; z < zones; ++z) {
    sys.params.owner[lay.air[z]] = {ph};
    for (std::size_t p : pload) sys.params.owner[lay.air[z]].push_back(p);
    for (std::size_t w = 0; w < walls; ++w) {
      const bool exterior = w + 1 < walls;
      if (!exterior || spec.outer_nodes)
        sys.params.owner[lay.walls[z][w]] = {ph};
      else
        sys.params.owner[lay.walls[z][w]] = {ph, pk[z]};
    }
    for (std::size_t o : lay.outer[z]) sys.params.owner[o] = {pk[z]};
  }

  // Conductance terms: (i, j, kind) with kind 0 = h*A, 1 = k*A/L, 2 = fixed value.
  struct Link {
    std::size_t i, j;
    int kind;
    std::size_t zone;
    double value;
  };
  struct Ground {
    std::size_t i;
    int kind;
    std::size_t zone;
    double value;
  };
  struct Data {
    std::size_t n;
    std::vector<double> cap;
    std::vector<Link> links;
    std::vector<Ground> grounds;
    std::vector<std::pair<std::size_t, double>> sources;
    std::size_t ph;
    std::vector<std::size_t> pk;
    std::vector<std::size_t> pload;
    double area, thickness, t_amb;
    std::optional<ThermalLoad> load;
    std::vector<std::size_t> load_nodes;
    double horizon;
  };
  auto d = std::make_shared<Data>();
  d->n = n;
  d->cap.assign(n, spec.c_wall);
  d->ph = ph;
  d->pk = pk;
  d->pload = pload;
  d->area = spec.area;
  d->thickness = spec.thickness;
  d->t_amb = spec.t_amb;
  d->load = spec.load;
  d->horizon = spec.horizon;
  for (std::size_t z = 0; z < zones; ++z) {
    const std::size_t air = lay.air[z];
    d->cap[air] = spec.c_air;
    d->grounds.push_back({air, 2, z, spec.infiltration});
    d->load_nodes.push_back(air);
    for (std::size_t w = 0; w < walls; ++w) {
      const std::size_t node = lay.walls[z][w];
      d->links.push_back({air, node, 0, z, 0.0});
      const bool exterior = w + 1 < walls;
      if (exterior) {
        if (spec.outer_nodes) {
          const std::size_t o = lay.outer[z][w];
          d->links.push_back({node, o, 1, z, 0.0});
          d->grounds.push_back({o, 2, z, spec.h_out * spec.area});
        } else {
          d->grounds.push_back({node, 1, z, 0.0});
        }
      } else if (zones > 1 && spec.coupling > 0) {
        d->links.push_back({node, lay.air[(z + 1) % zones], 2, z, spec.coupling});
      }
    }
    d->sources.push_back({spec.outer_nodes && walls > 1 ? lay.outer[z][0] : lay.walls[z][0], spec.solar});
  }

  auto conductance = [d](int kind, std::size_t zone, double value, const double* xi) {
    if (kind == 0) return xi[d->ph] * d->area;
    if (kind == 1) return xi[d->pk[zone]] * d->area / d->thickness;
    return value;
  };
  auto load_power = [d](const double* xi, double t) {
    if (!d->load) return 0.0;
    const double tau = d->horizon > 0 ? t / d->horizon : 0.0;
    double v = d->load->model.mean;
    for (std::size_t q = 0; q < d->pload.size(); ++q)
      v += std::sqrt(std::max(d->load->model.lambda[static_cast<Eigen::Index>(q)], 0.0)) * xi[d->pload[q]] *
           d->load->model.mode(q, tau);
    return d->load->mean + d->load->scale * v;
  };

  sys.rhs_rows = [d, conductance, load_power](std::span<const std::size_t> rows, const double* x, const double* xi,
                                              double t, double* out) {
    std::vector<double> flow(d->n, 0.0);
    for (const auto& l : d->links) {
      const double q = conductance(l.kind, l.zone, l.value, xi) * (x[l.j] - x[l.i]);
      flow[l.i] += q;
      flow[l.j] -= q;
    }
    for (const auto& g : d->grounds) flow[g.i] += conductance(g.kind, g.zone, g.value, xi) * (d->t_amb - x[g.i]);
    for (const auto& [node, q] : d->sources) flow[node] += q;
    if (d->load) {
      const double q = load_power(xi, t);
      for (std::size_t node : d->load_nodes) flow[node] += q;
    }
    for (std::size_t k = 0; k < rows.size(); ++k) out[k] = flow[rows[k]] / d->cap[rows[k]];
  };
  sys.jacobian = [d, conductance](const double*, const double* xi, double, Eigen::MatrixXd& jac) {
    const auto nn = static_cast<Eigen::Index>(d->n);
    jac.setZero(nn, nn);
    for (const auto& l : d->links) {
      const double g = conductance(l.kind, l.zone, l.value, xi);
      const auto i = static_cast<Eigen::Index>(l.i), j = static_cast<Eigen::Index>(l.j);
      jac(i, j) += g / d->cap[l.i];
      jac(i, i) -= g / d->cap[l.i];
      jac(j, i) += g / d->cap[l.j];
      jac(j, j) -= g / d->cap[l.j];
    }
    for (const auto& g : d->grounds) {
      const auto i = static_cast<Eigen::Index>(g.i);
      jac(i, i) -= conductance(g.kind, g.zone, g.value, xi) / d->cap[g.i];
    }
  };
  for (std::size_t z = 0; z < zones; ++z) {
    const std::size_t air = lay.air[z];
    sys.observables.push_back(
        {"T_air" + std::to_string(z), [air](const double* x, const double*, double) { return x[air]; }});
  }
  if (layout_out) *layout_out = lay;
  return sys;
}

NetworkSystem linear_system(const LinearSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.a.rows());
  if (static_cast<std::size_t>(spec.a.cols()) != n || spec.x0.size() != n)
    throw Error(ErrorKind::length_mismatch, "linear system: A must be square and match x0");
  const std::size_t p = spec.params.size();
  Eigen::MatrixXd g = spec.g;
  if (g.size() == 0) g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  if (static_cast<std::size_t>(g.rows()) != n || static_cast<std::size_t>(g.cols()) != p)
    throw Error(ErrorKind::length_mismatch, "linear system: G must be n x p");

  NetworkSystem sys;
  sys.name = "linear";
  sys.kind = NetworkSystem::Kind::ode;
  sys.n = n;
  sys.x0 = spec.x0;
  sys.horizon = spec.horizon;
  sys.steps = spec.steps;
  for (std::size_t k = 0; k < p; ++k) sys.params.add(spec.params[k], "xi" + std::to_string(k));
  sys.params.owner.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p; ++k)
      if (g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) != 0.0) sys.params.owner[i].push_back(k);

  auto a = std::make_shared<Eigen::MatrixXd>(spec.a);
  auto gm = std::make_shared<Eigen::MatrixXd>(g);
  auto forcing = spec.forcing;
  sys.rhs_rows = [a, gm, forcing, n, p](std::span<const std::size_t> rows, const double* x, const double* xi,
                                         double t, double* out) {
    std::vector<double> f;
    if (forcing) {
      f.resize(n);
      forcing(t, f.data());
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(rows[k]);
      double v = forcing ? f[rows[k]] : 0.0;
      for (std::size_t j = 0; j < n; ++j) v += (*a)(i, static_cast<Eigen::Index>(j)) * x[j];
      for (std::size_t j = 0; j < p; ++j) v += (*gm)(i, static_cast<Eigen::Index>(j)) * xi[j];
      out[k] = v;
    }
  };
  sys.jacobian = [a](const double*, const double*, double, Eigen::MatrixXd& jac) { jac = *a; };
  for (std::size_t i = 0; i < n; ++i)
    sys.observables.push_back({"x" + std::to_string(i), [i](const double* x, const double*, double) { return x[i]; }});
  return sys;
}

}  // namespace pwr
