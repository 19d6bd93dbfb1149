#include "pwr/cli/app.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pwr/cli/config.hpp"
#include "pwr/exec.hpp"

namespace pwr::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file);
  if (!os) throw Error(ErrorKind::io_error, "cannot write " + file.string());
  return os;
}

void write_json(const fs::path& file, const Json& j) {
  auto os = open_out(file);
  os << j.dump(2) << "\n";
}

void write_moments(const fs::path& file, const ObservableStats& st) {
  auto os = open_out(file);
  os << "t";
  for (const auto& n : st.names) os << "," << n << "_mean," << n << "_var";
  os << "\n";
  for (Eigen::Index k = 0; k < st.mean.rows(); ++k) {
    os << num(st.grid.at(static_cast<std::size_t>(k)));
    for (Eigen::Index j = 0; j < st.mean.cols(); ++j) os << "," << num(st.mean(k, j)) << "," << num(st.var(k, j));
    os << "\n";
  }
}

void write_histograms(const fs::path& file, const ObservableStats& st) {
  auto os = open_out(file);
  os << "observable,bin,lo,hi,count\n";
  for (const auto& h : st.histograms) {
    const double width = h.counts.empty() ? 0.0 : (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      os << h.name << "," << b << "," << num(h.lo + width * static_cast<double>(b)) << ","
         << num(h.lo + width * static_cast<double>(b + 1)) << "," << h.counts[b] << "\n";
  }
}

Json decomposition_json(const Decomposition& d) {
  Json lambda = Json::array();
  for (Eigen::Index k = 0; k < d.lambda.size(); ++k) lambda.push_back(d.lambda[k]);
  return Json{{"m", d.m},
              {"clusters", d.clusters},
              {"neighbors", d.neighbors},
              {"local_params", d.local_params},
              {"indirect_params", d.indirect_params},
              {"sigma", d.sigma},
              {"lambda", lambda},
              {"gap_at", d.gap_at}};
}

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

Json load_config(const Common& c) {
  std::ifstream is(c.config);
  if (!is) throw Error(ErrorKind::io_error, "cannot read config " + c.config);
  Json raw;
  try {
    raw = Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  Json cfg = resolve_config(raw);
  if (c.seed_set) cfg["seed"] = c.seed;
  if (!c.out.empty()) cfg["output"]["dir"] = c.out;
  return cfg;
}

fs::path prepare_out(const Json& cfg) {
  const fs::path dir = cfg["output"]["dir"].get<std::string>();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io_error, "cannot create " + dir.string() + ": " + ec.message());
  write_json(dir / "resolved_config.json", cfg);
  return dir;
}

const Json& need_system(const Json& cfg) {
  if (!cfg.contains("system")) throw ConfigError("system", "missing required key 'system'");
  return cfg["system"];
}

int cmd_decompose(const Common& c) {
  Json cfg = load_config(c);
  const fs::path dir = prepare_out(cfg);
  const std::uint64_t seed = cfg["seed"];
  const NetworkSystem sys = build_system(need_system(cfg), seed);
  const Decomposition d = build_decomposition(cfg["decomposition"], sys, seed, ExecPolicy::parallel);
  const Json j = decomposition_json(d);
  write_json(dir / "decomposition.json", j);
  std::cout << Json{{"m", d.m}, {"gap_at", d.gap_at}}.dump() << "\n";
  return 0;
}

Json pwr_report(const PwrResult& r, const std::string& method, std::size_t m) {
  Json j{{"method", method},
         {"subsystems", m},
         {"iterations", r.report.iterations},
         {"converged", r.report.converged},
         {"changes", r.report.changes},
         {"evaluations", r.report.evaluations}};
  if (method == "pwr-nonintrusive") {
    j["predicted_evaluations"] = r.report.predicted_evaluations.str();
    j["first_grid_sizes"] = r.report.first_grid_sizes;
    j["grid_sizes"] = r.report.grid_sizes;
  } else {
    Json windows = Json::array();
    for (const auto& w : r.report.relaxation.windows) windows.push_back(Json::array({w.first, w.second}));
    j["windows"] = windows;
    j["window_iterations"] = r.report.relaxation.window_iterations;
  }
  return j;
}

void write_iterations(const fs::path& file, const PwrResult& r) {
  auto os = open_out(file);
  os << "iteration,change";
  const ObservableStats* first = r.report.history.empty() ? nullptr : &r.report.history.front();
  if (first)
    for (const auto& n : first->names) os << "," << n << "_mean_final," << n << "_var_final";
  os << "\n";
  for (std::size_t it = 0; it < r.report.changes.size(); ++it) {
    os << it + 1 << "," << num(r.report.changes[it]);
    if (it < r.report.history.size()) {
      const auto& h = r.report.history[it];
      const Eigen::Index last = h.mean.rows() - 1;
      for (Eigen::Index j = 0; j < h.mean.cols(); ++j) os << "," << num(h.mean(last, j)) << "," << num(h.var(last, j));
    }
    os << "\n";
  }
}

int cmd_run(const Common& c, const std::string& forced_kind) {
  Json cfg = load_config(c);
  if (!forced_kind.empty()) {
    std::string kind = forced_kind;
    if (forced_kind == "pwr") {
      const std::string current = cfg["method"]["kind"];
      kind = current.rfind("pwr-", 0) == 0 ? current : "pwr-nonintrusive";
    }
    cfg["method"]["kind"] = kind;
  }
  const fs::path dir = prepare_out(cfg);
  const std::uint64_t seed = cfg["seed"];
  const NetworkSystem sys = build_system(need_system(cfg), seed);
  const Json& method = cfg["method"];
  const std::string kind = method["kind"];
  ObservableStats stats;
  Json report;
  if (kind == "pwr-nonintrusive" || kind == "pwr-intrusive") {
    const Decomposition d = build_decomposition(cfg["decomposition"], sys, seed, ExecPolicy::parallel);
    write_json(dir / "decomposition.json", decomposition_json(d));
    const PwrConfig pc = pwr_config(method["pwr"], seed);
    const PwrResult r = kind == "pwr-nonintrusive" ? pwr_nonintrusive(sys, d, pc)
                                                   : pwr_intrusive(sys, d, pc, intrusive_options(method["pwr"]));
    write_iterations(dir / "iterations.csv", r);
    stats = r.stats;
    report = pwr_report(r, kind, d.m);
  } else if (kind == "pcm") {
    const PcmOptions po = pcm_options(method["pcm"]);
    const PcmResult r = full_grid_pcm(sys, po);
    stats = r.stats;
    report = Json{{"method", kind}, {"evaluations", r.evaluations}, {"basis_size", r.basis.size()}};
  } else {
    const Json& m = method[kind];
    const std::size_t samples = m["samples"].get<std::size_t>();
    const std::size_t bins = m["bins"].get<std::size_t>();
    const SamplingResult r = kind == "mc" ? mc_run(sys, samples, seed, ExecPolicy::parallel, bins)
                                          : qmc_run(sys, samples, ExecPolicy::parallel, bins);
    stats = r.stats;
    report = Json{{"method", kind}, {"evaluations", r.evaluations}};
    auto os = open_out(dir / "std_error.csv");
    os << "t";
    for (const auto& n : stats.names) os << "," << n << "_mean_se";
    os << "\n";
    for (Eigen::Index k = 0; k < r.std_error.rows(); ++k) {
      os << num(stats.grid.at(static_cast<std::size_t>(k)));
      for (Eigen::Index j = 0; j < r.std_error.cols(); ++j) os << "," << num(r.std_error(k, j));
      os << "\n";
    }
  }
  report["system"] = sys.name;
  report["parameters"] = sys.params.size();
  report["states"] = sys.n;
  write_moments(dir / "moments.csv", stats);
  write_histograms(dir / "hist.csv", stats);
  write_json(dir / "report.json", report);
  Json summary{{"method", kind}, {"out", dir.string()}};
  if (report.contains("converged")) summary["converged"] = report["converged"];
  if (report.contains("iterations")) summary["iterations"] = report["iterations"];
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_kl(const Common& c) {
  Json cfg = load_config(c);
  const fs::path dir = prepare_out(cfg);
  const Json& k = cfg["kl"];
  const CovarianceKernel kernel = kernel_from(k["kernel"]);
  const KLModel model = kl_solve(kernel, k["basis_order"].get<std::size_t>(), k["truncation"].get<std::size_t>(),
                                 k["mean"].get<double>());
  const double captured = variance_captured(model, kernel);
  {
    auto os = open_out(dir / "eigenvalues.csv");
    os << "n,lambda\n";
    for (Eigen::Index n = 0; n < model.lambda.size(); ++n) os << n + 1 << "," << num(model.lambda[n]) << "\n";
  }
  {
    auto os = open_out(dir / "modes.csv");
    os << "t";
    for (std::size_t n = 0; n < model.truncation(); ++n) os << ",phi_" << n + 1;
    os << "\n";
    const std::size_t pts = std::max<std::size_t>(2, k["points"].get<std::size_t>());
    for (std::size_t i = 0; i < pts; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(pts - 1);
      os << num(t);
      for (std::size_t n = 0; n < model.truncation(); ++n) os << "," << num(model.mode(n, t));
      os << "\n";
    }
  }
  const Json report{{"variance_captured", captured},
                    {"trace", kernel_trace(kernel)},
                    {"basis_order", model.basis_order},
                    {"truncation", model.truncation()}};
  write_json(dir / "report.json", report);
  std::cout << Json{{"variance_captured", captured}}.dump() << "\n";
  return 0;
}

int cmd_predict_cost(const Common& c) {
  Json cfg = load_config(c);
  const fs::path dir = prepare_out(cfg);
  const Json& k = cfg["cost"];
  std::vector<int> p;
  for (const auto& v : k["p"]) p.push_back(v.get<int>());
  const CostPrediction cp = predicted_cost(p, k["l"], k["ls"], k["lc"], k["i_max"]);
  const Json report{{"full", cp.full.str()}, {"pwr", cp.pwr.str()}, {"ratio", cp.ratio}};
  write_json(dir / "report.json", report);
  std::cout << report.dump() << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out) {
  if (dirs.size() < 2) throw ConfigError("runs", "compare needs at least two run directories");
  std::vector<MomentsTable> tables;
  for (const auto& d : dirs) tables.push_back(read_moments(fs::path(d) / "moments.csv"));
  const MomentsTable& ref = tables.front();
  for (std::size_t r = 1; r < tables.size(); ++r) {
    const MomentsTable& t = tables[r];
    if (t.header != ref.header || t.rows.size() != ref.rows.size())
      throw Error(ErrorKind::length_mismatch, "grid mismatch between " + dirs.front() + " and " + dirs[r]);
    for (std::size_t k = 0; k < t.rows.size(); ++k)
      if (std::abs(t.rows[k][0] - ref.rows[k][0]) > 1e-12 * (1.0 + std::abs(ref.rows[k][0])))
        throw Error(ErrorKind::length_mismatch, "time grid mismatch between " + dirs.front() + " and " + dirs[r]);
  }
  const fs::path dir = out.empty() ? fs::path("comparison") : fs::path(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io_error, "cannot create " + dir.string());
  auto os = open_out(dir / "comparison.csv");
  os << "t,run";
  for (std::size_t c = 1; c < ref.header.size(); ++c) os << "," << ref.header[c] << "_diff";
  os << "\n";
  Json runs = Json::array();
  for (std::size_t r = 1; r < tables.size(); ++r) {
    Json sup = Json::object(), rel = Json::object();
    std::vector<double> s(ref.header.size(), 0.0), sr(ref.header.size(), 0.0);
    for (std::size_t k = 0; k < ref.rows.size(); ++k) {
      os << num(ref.rows[k][0]) << "," << r;
      for (std::size_t c = 1; c < ref.header.size(); ++c) {
        const double diff = tables[r].rows[k][c] - ref.rows[k][c];
        os << "," << num(diff);
        s[c] = std::max(s[c], std::abs(diff));
        if (ref.rows[k][c] != 0.0) sr[c] = std::max(sr[c], std::abs(diff) / std::abs(ref.rows[k][c]));
      }
      os << "\n";
    }
    for (std::size_t c = 1; c < ref.header.size(); ++c) {
      sup[ref.header[c]] = s[c];
      rel[ref.header[c]] = sr[c];
    }
    runs.push_back(Json{{"dir", dirs[r]}, {"sup", sup}, {"relative_sup", rel}});
  }
  const Json summary{{"reference", dirs.front()}, {"runs", runs}};
  write_json(dir / "comparison.json", summary);
  std::cout << summary.dump() << "\n";
  return 0;
}

void diagnostic(const std::string& kind, const std::string& message, const std::string& key = "") {
  Json j{{"error", kind}, {"message", message}};
  if (!key.empty()) j["key"] = key;
  std::cerr << j.dump() << "\n";
}

}  // namespace

MomentsTable read_moments(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw Error(ErrorKind::io_error, "cannot read " + file.string());
  MomentsTable t;
  std::string line, cell;
  if (!std::getline(is, line)) throw Error(ErrorKind::io_error, file.string() + " is empty");
  std::stringstream hs(line);
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.header.size()) throw Error(ErrorKind::length_mismatch, "ragged row in " + file.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

int run(int argc, char** argv) {
  CLI::App app{"Probabilistic waveform relaxation and uncertainty propagation baselines", "pwr"};
  app.require_subcommand(1);
  Common common;
  std::vector<std::string> compare_dirs;
  std::string compare_out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON experiment config")->required();
    sub->add_option("--out", common.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", common.seed, "master seed (overrides seed)")->each([&](const std::string&) {
      common.seed_set = true;
    });
    sub->add_option("--threads", common.threads, "worker threads (fallback: PWR_THREADS)");
  };
  struct Entry {
    std::string name, help, kind;
  };
  const std::vector<Entry> runs{{"run", "run the method selected in the config", ""},
                                {"run-pwr", "probabilistic waveform relaxation", "pwr"},
                                {"run-pcm", "full tensor-grid collocation", "pcm"},
                                {"run-mc", "Monte Carlo sampling", "mc"},
                                {"run-qmc", "Sobol quasi Monte Carlo sampling", "qmc"}};
  std::vector<std::pair<CLI::App*, std::string>> run_subs;
  for (const auto& e : runs) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    run_subs.push_back({sub, e.kind});
  }
  CLI::App* decompose = app.add_subcommand("decompose", "partition the interaction graph");
  add_common(decompose);
  CLI::App* kl = app.add_subcommand("kl", "Karhunen-Loeve expansion of a covariance kernel");
  add_common(kl);
  CLI::App* cost = app.add_subcommand("predict-cost", "predicted evaluation counts");
  add_common(cost);
  CLI::App* compare = app.add_subcommand("compare", "difference of moments between runs");
  compare->add_option("runs", compare_dirs, "run directories, the first is the reference")->required();
  compare->add_option("--out", compare_out, "output directory");
  compare->add_option("--threads", common.threads, "ignored");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diagnostic("usage-error", e.what());
    return 2;
  }

  int threads = common.threads;
  if (threads <= 0)
    if (const char* env = std::getenv("PWR_THREADS")) threads = std::atoi(env);
  if (threads > 0) set_thread_count(threads);

  try {
    for (const auto& [sub, kind] : run_subs)
      if (sub->parsed()) return cmd_run(common, kind);
    if (decompose->parsed()) return cmd_decompose(common);
    if (kl->parsed()) return cmd_kl(common);
    if (cost->parsed()) return cmd_predict_cost(common);
    if (compare->parsed()) return cmd_compare(compare_dirs, compare_out);
  } catch (const ConfigError& e) {
    diagnostic(to_string(e.kind()), e.what(), e.key());
    return 2;
  } catch (const Error& e) {
    diagnostic(to_string(e.kind()), e.what());
    return is_numerical(e.kind()) ? 3 : 2;
  } catch (const nlohmann::json::exception& e) {
    diagnostic("config-error", e.what());
    return 2;
  } catch (const std::exception& e) {
    diagnostic("internal", e.what());
    return 3;
  }
  return 2;
}

}  // namespace pwr::cli
