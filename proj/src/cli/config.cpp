#include "pwr/cli/config.hpp"

#include <set>

#include "pwr/models.hpp"
#include "pwr/sampling.hpp"

namespace pwr::cli {

namespace {

Json kernel_defaults() {
  return Json{{"kind", "exponential"}, {"sigma", 0.1}, {"tc", 0.1}, {"a", 20.0}, {"t1", 0.3}, {"t2", 0.7}};
}

Json system_defaults(const std::string& kind) {
  if (kind == "stability")
    return Json{{"kind", kind},
                {"c", 0.1},
                {"v1", 10.0},
                {"v2", 10.0},
                {"a", Json{{"kind", "gaussian"}, {"mean", 10.0}, {"std", 2.0}}},
                {"b", Json{{"kind", "gaussian"}, {"mean", 10.0}, {"std", 2.0}}},
                {"guess", Json::array({1.0, 1.0})}};
  if (kind == "kuramoto80")
    return Json{{"kind", kind}, {"intra", 1.0}, {"inter", 0.05}, {"tolerance", 0.2}, {"horizon", 0.5}, {"steps", 500}};
  if (kind == "kuramoto_chain3")
    return Json{{"kind", kind}, {"eps", 0.05}, {"tolerance", 0.2}, {"horizon", 1.0}, {"steps", 500}};
  if (kind == "kuramoto")
    return Json{{"kind", kind},       {"coupling", nullptr}, {"omega", nullptr}, {"uncertain", nullptr},
                {"tolerance", 0.2},   {"x0", nullptr},       {"horizon", 0.5},   {"steps", 500}};
  if (kind == "thermal")
    return Json{{"kind", kind},  {"zones", 2},        {"walls_per_zone", 4}, {"outer_nodes", false},
                {"h", 3.16},     {"k", 4.65},         {"tolerance", 0.1},    {"coupling", 20.0},
                {"solar", 200.0}, {"horizon", 28800.0}, {"steps", 500},       {"load", nullptr}};
  if (kind == "linear")
    return Json{{"kind", kind}, {"a", nullptr},     {"g", nullptr},  {"params", nullptr},
                {"x0", nullptr}, {"horizon", 1.0}, {"steps", 500}};
  throw ConfigError("system.kind", "unknown system kind '" + kind + "'");
}

Json load_defaults() {
  Json k = kernel_defaults();
  k["kind"] = "occupancy";
  return Json{{"kernel", k}, {"basis_order", 20}, {"truncation", 3}, {"mean", 0.0}, {"scale", 100.0}};
}

Json pwr_defaults() {
  return Json{{"ls", 5},
              {"lc", 2},
              {"local_order", Json::array()},
              {"indirect_order", Json::array()},
              {"default_local_order", -1},
              {"default_indirect_order", -1},
              {"total_order", -1},
              {"eps", 1e-4},
              {"max_iter", 50},
              {"project_from_iteration", 3},
              {"q_max", kDefaultQmax},
              {"observable_samples", 4096},
              {"observable_grid_budget", 1e5},
              {"observable_order", -1},
              {"bins", 50},
              {"intrusive",
               Json{{"adaptive", false},
                    {"wr_eps", 1e-8},
                    {"wr_max_iter", 50},
                    {"order", 2},
                    {"initial_window", 0.0},
                    {"min_window", 0.0},
                    {"r", 5}}}};
}

Json method_defaults() {
  return Json{{"kind", "pwr-nonintrusive"},
              {"pwr", pwr_defaults()},
              {"pcm", Json{{"level", 5}, {"total_order", -1}, {"q_max", kDefaultQmax}, {"bins", 50}, {"hist_samples", 4096}}},
              {"mc", Json{{"samples", 1000}, {"bins", 50}}},
              {"qmc", Json{{"samples", 2000}, {"bins", 50}}}};
}

Json decomposition_defaults() {
  return Json{{"method", "spectral"},
              {"m", 0},
              {"clusters", nullptr},
              {"horizon", 0.0},
              {"wave", Json{{"c", 1.0}, {"t_max", 4096}}}};
}

bool same_type(const Json& def, const Json& v) {
  if (def.is_null()) return true;
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  return false;
}

const char* type_name(const Json& def) {
  if (def.is_number()) return "a number";
  if (def.is_boolean()) return "a boolean";
  if (def.is_string()) return "a string";
  if (def.is_array()) return "an array";
  return "an object";
}

Json merge(const Json& defaults, const Json& in, const std::string& path) {
  if (!in.is_object()) throw ConfigError(path, path + " must be an object");
  Json out = defaults;
  for (auto it = in.begin(); it != in.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError(key, "unknown key '" + key + "'");
    const Json& def = defaults[it.key()];
    if (!same_type(def, it.value())) throw ConfigError(key, key + " must be " + type_name(def));
    if (def.is_object())
      out[it.key()] = merge(def, it.value(), key);
    else
      out[it.key()] = it.value();
  }
  return out;
}

void require(const Json& section, const std::string& key, const std::string& path) {
  if (section[key].is_null()) throw ConfigError(path + "." + key, "missing required key '" + path + "." + key + "'");
}

Json canonical_distribution(const Json& j, const std::string& key) {
  return distribution_json(distribution_from(j, key));
}

std::vector<double> vec(const Json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, key + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(key, key + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Eigen::MatrixXd matrix(const Json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ConfigError(key, key + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = vec(j[r], key);
    if (row.size() != cols) throw ConfigError(key, key + " rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

int int_at(const Json& j, const std::string& key) {
  const Json& v = j[key];
  if (!v.is_number_integer()) throw ConfigError(key, key + " must be an integer");
  return v.get<int>();
}

std::size_t count_at(const Json& j, const std::string& key) {
  const int v = int_at(j, key);
  if (v < 0) throw ConfigError(key, key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::vector<int> ints(const Json& j, const std::string& key) {
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ConfigError(key, key + " must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

Json distribution_json(const Distribution& d) {
  if (d.kind == Distribution::Kind::uniform) return Json{{"kind", "uniform"}};
  return Json{{"kind", "gaussian"}, {"mean", d.mu}, {"std", d.sigma}};
}

Distribution distribution_from(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ConfigError(key, key + " must be an object with a kind");
  const std::string kind = j["kind"];
  if (kind == "uniform") {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "kind") throw ConfigError(key + "." + it.key(), "unknown key '" + key + "." + it.key() + "'");
    return Distribution::uniform();
  }
  if (kind != "gaussian") throw ConfigError(key + ".kind", "unknown distribution kind '" + kind + "'");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "kind" && it.key() != "mean" && it.key() != "std" && it.key() != "tolerance")
      throw ConfigError(key + "." + it.key(), "unknown key '" + key + "." + it.key() + "'");
  if (!j.contains("mean") || !j["mean"].is_number()) throw ConfigError(key + ".mean", key + ".mean must be a number");
  const double mean = j["mean"];
  if (j.contains("std") == j.contains("tolerance"))
    throw ConfigError(key, key + " needs exactly one of std or tolerance");
  try {
    if (j.contains("std")) return Distribution::gaussian(mean, j["std"].get<double>());
    return Distribution::gaussian_tolerance(mean, j["tolerance"].get<double>());
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, key + " std/tolerance must be a number");
  }
}

Json default_method(const std::string& kind) {
  static const std::set<std::string> kinds{"pwr-nonintrusive", "pwr-intrusive", "pcm", "mc", "qmc"};
  if (!kinds.count(kind)) throw ConfigError("method.kind", "unknown method kind '" + kind + "'");
  Json m = method_defaults();
  m["kind"] = kind;
  return m;
}

Json resolve_config(const Json& in) {
  if (!in.is_object()) throw ConfigError("", "config must be a JSON object");
  static const std::set<std::string> top{"system", "decomposition", "method", "output", "seed", "kl", "cost"};
  for (auto it = in.begin(); it != in.end(); ++it)
    if (!top.count(it.key())) throw ConfigError(it.key(), "unknown key '" + it.key() + "'");

  Json out;
  if (in.contains("system")) {
    const Json& s = in["system"];
    if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string())
      throw ConfigError("system.kind", "system needs a kind");
    Json sys = merge(system_defaults(s["kind"]), s, "system");
    const std::string kind = sys["kind"];
    if (kind == "stability") {
      sys["a"] = canonical_distribution(sys["a"], "system.a");
      sys["b"] = canonical_distribution(sys["b"], "system.b");
    } else if (kind == "kuramoto") {
      require(sys, "coupling", "system");
      require(sys, "omega", "system");
      const std::size_t n = sys["omega"].size();
      if (sys["uncertain"].is_null()) sys["uncertain"] = Json(std::vector<bool>(n, false));
      if (sys["x0"].is_null()) sys["x0"] = Json(std::vector<double>(n, 0.0));
    } else if (kind == "linear") {
      require(sys, "a", "system");
      require(sys, "g", "system");
      require(sys, "params", "system");
      Json params = Json::array();
      for (std::size_t k = 0; k < sys["params"].size(); ++k)
        params.push_back(canonical_distribution(sys["params"][k], "system.params[" + std::to_string(k) + "]"));
      sys["params"] = params;
      if (sys["x0"].is_null()) sys["x0"] = Json(std::vector<double>(sys["a"].size(), 0.0));
    } else if (kind == "thermal" && !sys["load"].is_null()) {
      sys["load"] = merge(load_defaults(), sys["load"], "system.load");
    }
    out["system"] = sys;
  }
  out["decomposition"] = merge(decomposition_defaults(), in.value("decomposition", Json::object()), "decomposition");
  {
    const Json m = in.value("method", Json::object());
    if (!m.is_object()) throw ConfigError("method", "method must be an object");
    const std::string kind = m.contains("kind") && m["kind"].is_string() ? m["kind"].get<std::string>() : "pwr-nonintrusive";
    out["method"] = merge(default_method(kind), m, "method");
  }
  out["output"] = merge(Json{{"dir", "out"}}, in.value("output", Json::object()), "output");
  if (in.contains("seed")) {
    const Json& seed = in["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
      throw ConfigError("seed", "seed must be a non-negative integer");
    out["seed"] = seed.get<std::uint64_t>();
  } else {
    out["seed"] = std::uint64_t{0};
  }
  out["kl"] = merge(Json{{"kernel", kernel_defaults()}, {"basis_order", 30}, {"truncation", 10}, {"mean", 0.0}, {"points", 201}},
                    in.value("kl", Json::object()), "kl");
  out["cost"] = merge(Json{{"p", Json::array({5, 5})}, {"l", 5}, {"ls", 5}, {"lc", 3}, {"i_max", 10}},
                      in.value("cost", Json::object()), "cost");
  return out;
}

CovarianceKernel kernel_from(const Json& k) {
  const std::string kind = k["kind"];
  if (kind == "exponential") return CovarianceKernel::exponential(k["sigma"], k["tc"]);
  if (kind == "occupancy") return CovarianceKernel::occupancy(k["sigma"], k["a"], k["t1"], k["t2"]);
  throw ConfigError("kernel.kind", "unknown kernel kind '" + kind + "'");
}

NetworkSystem build_system(const Json& s, std::uint64_t seed) {
  const std::string kind = s["kind"];
  if (kind == "stability") {
    StabilitySpec sp;
    sp.c = s["c"];
    sp.v1 = s["v1"];
    sp.v2 = s["v2"];
    sp.a = distribution_from(s["a"], "system.a");
    sp.b = distribution_from(s["b"], "system.b");
    sp.guess = vec(s["guess"], "system.guess");
    if (sp.guess.size() != 2) throw ConfigError("system.guess", "system.guess needs two entries");
    return stability_system(sp);
  }
  if (kind == "kuramoto80") {
    Kuramoto80Options o;
    o.intra = s["intra"];
    o.inter = s["inter"];
    o.tolerance = s["tolerance"];
    o.horizon = s["horizon"];
    o.steps = count_at(s, "steps");
    return kuramoto80(seed, o);
  }
  if (kind == "kuramoto_chain3") return kuramoto_chain3(s["eps"], s["tolerance"], s["horizon"], count_at(s, "steps"));
  if (kind == "kuramoto") {
    KuramotoSpec sp;
    sp.coupling = matrix(s["coupling"], "system.coupling");
    sp.omega = vec(s["omega"], "system.omega");
    for (const auto& u : s["uncertain"]) {
      if (!u.is_boolean()) throw ConfigError("system.uncertain", "system.uncertain must hold booleans");
      sp.uncertain.push_back(u.get<bool>());
    }
    sp.tolerance = s["tolerance"];
    sp.x0 = vec(s["x0"], "system.x0");
    sp.horizon = s["horizon"];
    sp.steps = count_at(s, "steps");
    return kuramoto(sp);
  }
  if (kind == "thermal") {
    ThermalSpec sp;
    sp.zones = int_at(s, "zones");
    sp.walls_per_zone = int_at(s, "walls_per_zone");
    sp.outer_nodes = s["outer_nodes"];
    sp.h_nominal = s["h"];
    sp.k_nominal = s["k"];
    sp.tolerance = s["tolerance"];
    sp.coupling = s["coupling"];
    sp.solar = s["solar"];
    sp.horizon = s["horizon"];
    sp.steps = count_at(s, "steps");
    if (!s["load"].is_null()) {
      const Json& l = s["load"];
      ThermalLoad load;
      load.model = kl_solve(kernel_from(l["kernel"]), count_at(l, "basis_order"), count_at(l, "truncation"));
      load.mean = l["mean"];
      load.scale = l["scale"];
      sp.load = load;
    }
    return thermal_rc(sp);
  }
  if (kind == "linear") {
    LinearSpec sp;
    sp.a = matrix(s["a"], "system.a");
    sp.g = matrix(s["g"], "system.g");
    for (std::size_t k = 0; k < s["params"].size(); ++k)
      sp.params.push_back(distribution_from(s["params"][k], "system.params[" + std::to_string(k) + "]"));
    sp.x0 = vec(s["x0"], "system.x0");
    sp.horizon = s["horizon"];
    sp.steps = count_at(s, "steps");
    return linear_system(sp);
  }
  throw ConfigError("system.kind", "unknown system kind '" + kind + "'");
}

Decomposition build_decomposition(const Json& dec, const NetworkSystem& sys, std::uint64_t seed, ExecPolicy policy) {
  const std::string method = dec["method"];
  const InteractionGraph g = adjacency_from_jacobian(sys, sys.params.means(), dec["horizon"].get<double>());
  const std::size_t m = count_at(dec, "m");
  Decomposition d;
  if (method == "spectral") {
    d = spectral_partition(g, m);
  } else if (method == "wave") {
    WaveOptions o;
    o.c = dec["wave"]["c"];
    o.t_max = count_at(dec["wave"], "t_max");
    o.seed = derive_seed(seed, kStreamWaveCluster);
    o.policy = policy;
    d = wave_equation_cluster(g, m, o);
  } else if (method == "explicit") {
    if (dec["clusters"].is_null()) throw ConfigError("decomposition.clusters", "explicit decomposition needs clusters");
    std::vector<std::vector<std::size_t>> clusters;
    for (const auto& c : dec["clusters"]) {
      std::vector<std::size_t> row;
      for (const auto& v : c) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
          throw ConfigError("decomposition.clusters", "cluster members must be state indices");
        row.push_back(v.get<std::size_t>());
      }
      clusters.push_back(row);
    }
    try {
      d = decomposition_from_clusters(clusters, sys.n);
    } catch (const Error& e) {
      throw ConfigError("decomposition.clusters", e.what());
    }
  } else if (method == "single") {
    d = decomposition_from_assign(std::vector<std::size_t>(sys.n, 0));
  } else {
    throw ConfigError("decomposition.method", "unknown decomposition method '" + method + "'");
  }
  derive_parameter_sets(d, sys, g.pattern);
  return d;
}

PwrConfig pwr_config(const Json& p, std::uint64_t seed) {
  PwrConfig c;
  c.ls = int_at(p, "ls");
  c.lc = int_at(p, "lc");
  c.local_order = ints(p["local_order"], "method.pwr.local_order");
  c.indirect_order = ints(p["indirect_order"], "method.pwr.indirect_order");
  c.default_local_order = int_at(p, "default_local_order");
  c.default_indirect_order = int_at(p, "default_indirect_order");
  c.total_order = int_at(p, "total_order");
  c.eps = p["eps"];
  c.max_iter = count_at(p, "max_iter");
  c.project_from_iteration = count_at(p, "project_from_iteration");
  c.q_max = p["q_max"];
  c.observable_samples = count_at(p, "observable_samples");
  c.observable_grid_budget = p["observable_grid_budget"];
  c.observable_order = int_at(p, "observable_order");
  c.bins = count_at(p, "bins");
  c.seed = seed;
  if (c.ls < 1 || c.lc < 1) throw ConfigError("method.pwr", "grid levels must be >= 1");
  return c;
}

IntrusiveOptions intrusive_options(const Json& p) {
  const Json& i = p["intrusive"];
  IntrusiveOptions o;
  o.adaptive = i["adaptive"];
  o.awr.wr.eps = i["wr_eps"];
  o.awr.wr.max_iter = count_at(i, "wr_max_iter");
  o.awr.order = int_at(i, "order");
  o.awr.initial_window = i["initial_window"];
  o.awr.min_window = i["min_window"];
  o.awr.r = int_at(i, "r");
  return o;
}

PcmOptions pcm_options(const Json& p) {
  PcmOptions o;
  o.level = int_at(p, "level");
  o.total_order = int_at(p, "total_order");
  o.q_max = p["q_max"];
  o.bins = count_at(p, "bins");
  o.hist_samples = count_at(p, "hist_samples");
  if (o.level < 1) throw ConfigError("method.pcm.level", "method.pcm.level must be >= 1");
  return o;
}

}  // namespace pwr::cli
