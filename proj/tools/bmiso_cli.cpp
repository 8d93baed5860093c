#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bmiso/config.hpp"
#include "bmiso/excursion.hpp"
#include "bmiso/pipeline.hpp"
#include "bmiso/report.hpp"
#include "bmiso/suites.hpp"

using namespace bmiso;

namespace {

struct CommonFlags {
  std::string config_file;
  ExperimentConfig overrides;
  CLI::App* cmd = nullptr;

  void attach(CLI::App* app) {
    cmd = app;
    app->add_option("--config", config_file, "key=value config file");
    app->add_option("--task", overrides.task, "suite name");
    app->add_option("--height", overrides.h, "band height");
    app->add_option("--m", overrides.m, "value steps per band");
    app->add_option("--sigma", overrides.sigma, "diffusivity");
    app->add_option("--bands", overrides.bands, "bands on the circle");
    app->add_option("--num", overrides.num, "band ratio numerator");
    app->add_option("--den", overrides.den, "band ratio denominator");
    app->add_option("--rate", overrides.rate, "factor intensity");
    app->add_option("--samples", overrides.samples, "sample count");
    app->add_option("--paths", overrides.paths, "replica count");
    app->add_option("--ticks", overrides.ticks, "path length in ticks");
    app->add_option("--alpha", overrides.alpha, "family significance level");
    app->add_option("--seed", overrides.seed, "base random seed");
    app->add_option("--threads", overrides.threads, "worker threads");
    app->add_option("--out-dir", overrides.out_dir, "report directory");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_file.empty()) cfg = ExperimentConfig::load(config_file);
    auto take = [&](const char* flag, auto member) {
      if (cmd->count(flag)) cfg.*member = overrides.*member;
    };
    take("--task", &ExperimentConfig::task);
    take("--height", &ExperimentConfig::h);
    take("--m", &ExperimentConfig::m);
    take("--sigma", &ExperimentConfig::sigma);
    take("--bands", &ExperimentConfig::bands);
    take("--num", &ExperimentConfig::num);
    take("--den", &ExperimentConfig::den);
    take("--rate", &ExperimentConfig::rate);
    take("--samples", &ExperimentConfig::samples);
    take("--paths", &ExperimentConfig::paths);
    take("--ticks", &ExperimentConfig::ticks);
    take("--alpha", &ExperimentConfig::alpha);
    take("--seed", &ExperimentConfig::seed);
    take("--threads", &ExperimentConfig::threads);
    take("--out-dir", &ExperimentConfig::out_dir);
    cfg.validate();
    return cfg;
  }
};

void write_points_csv(const MarkedPointProcess& mpp, const MapDescriptor& d,
                      const std::string& file) {
  std::ofstream os(file);
  require(os.good(), ErrorCode::ConfigError, "cannot write " + file);
  os << d.stamp() << "\n";
  os << "tick,time,colour,code_bits,code_hex\n";
  os.precision(17);
  double dt = d.par.dt();
  for (std::size_t i = 0; i < mpp.size(); ++i) {
    Tick t = mpp.base.points[i];
    os << t << ',' << static_cast<double>(t) * dt << ',' << mpp.colours[i]
       << ',';
    if (mpp.has_ucodes)
      os << mpp.ucodes[i].size() << ',' << mpp.ucodes[i].to_hex();
    else
      os << 0 << ',';
    os << '\n';
  }
}

int run_simulate(const ExperimentConfig& cfg, const std::string& kind,
                 Tick t0, const std::string& out, const std::string& csv) {
  RngStream rng(cfg.seed, 0);
  PathSample p;
  if (kind == "reflected")
    p = sample_stationary_reflected(cfg.lattice(), cfg.ticks, rng, t0);
  else if (kind == "periodic")
    p = sample_stationary_periodic(cfg.lattice(), cfg.bands, cfg.ticks, rng,
                                   t0);
  else
    require(false, ErrorCode::ConfigError, "unknown kind " + kind);
  save_path(p, out);
  if (!csv.empty()) export_csv(p, csv);
  std::cout << "wrote " << out << " (" << p.length() << " ticks from "
            << p.t0 << ")\n";
  return 0;
}

int run_extract(const std::string& in, const std::string& out) {
  auto p = load_path(in);
  auto part = extract_partition(p);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    require(file.good(), ErrorCode::ConfigError, "cannot write " + out);
    os = &file;
  }
  *os << "tick,time,level\n";
  os->precision(17);
  for (const auto& pt : part.points)
    *os << pt.t << ',' << static_cast<double>(pt.t) * p.par.dt() << ','
        << pt.level << '\n';
  std::cerr << part.size() << " partition points\n";
  return 0;
}

int run_map(const ExperimentConfig& cfg, const std::string& name,
            const std::string& in, const std::string& out,
            const std::string& cache_dir) {
  KernelCache cache(cache_dir);
  auto p = load_path(in);
  MapDescriptor d;
  d.name = name;
  d.par = p.par;
  d.bands = p.bands;

  if (name == "points") {
    auto app = p.codomain == Codomain::Reflected ? reflected_to_app(p, cache)
                                                 : periodic_to_app(p, cache);
    write_points_csv(app.mpp, d, out);
    std::cout << "wrote " << out << " (" << app.mpp.size() << " points)\n";
  } else if (name == "marked") {
    auto mpp = periodic_to_marked_app(p, cache);
    write_points_csv(mpp, d, out);
    std::cout << "wrote " << out << " (" << mpp.size() << " points)\n";
  } else if (name == "unfold") {
    auto y = unfold_reflected(p, cfg.seed);
    save_path(y, out);
    std::cout << "wrote " << out << " (" << y.length() << " ticks)\n";
  } else if (name == "fold") {
    auto y = fold_periodic(p);
    save_path(y, out);
    std::cout << "wrote " << out << " (" << y.length() << " ticks)\n";
  } else if (name == "rescale" || name == "rescale-back") {
    d.num = cfg.num;
    d.den = cfg.den;
    TimeWindow covered{};
    auto y = name == "rescale"
                 ? scale_reflected(p, cfg.num, cfg.den, cfg.seed, 0, &covered)
                 : scale_reflected_back(p, cfg.num, cfg.den);
    save_path(y, out);
    std::cout << "wrote " << out << " (" << y.length() << " ticks";
    if (name == "rescale")
      std::cout << ", certified [" << covered.lo << ", " << covered.hi << "]";
    std::cout << ")\n";
  } else if (name == "factor") {
    d.rate = cfg.rate;
    auto pts = poisson_factor(p, cfg.rate);
    std::ofstream os(out);
    require(os.good(), ErrorCode::ConfigError, "cannot write " + out);
    os << d.stamp() << "\n";
    os << "subtick,time\n";
    os.precision(17);
    for (Tick t : pts.points)
      os << t << ',' << static_cast<double>(t) * pts.tick_size << '\n';
    std::cout << "wrote " << out << " (" << pts.points.size()
              << " points)\n";
  } else {
    require(false, ErrorCode::ConfigError, "unknown map " + name);
  }
  return 0;
}

int run_suite_cmd(const ExperimentConfig& cfg, const std::string& cache_dir) {
  KernelCache cache(cache_dir);
  if (cfg.task == "acceptance") {
    auto results = run_acceptance(cache, cfg.seed, cfg.threads);
    bool all = true;
    for (auto& r : results) {
      r.report.config_text = cfg.to_text();
      r.report.write(cfg.out_dir);
      all = all && r.report.passed();
      std::printf("criterion %2d %s  %s\n", r.number,
                  r.report.passed() ? "PASS" : "FAIL", r.title.c_str());
    }
    return all ? 0 : 1;
  }
  auto rep = run_suite(cfg, cache);
  rep.write(cfg.out_dir);
  std::cout << rep.to_text();
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"band walk isomorphism laboratory"};
  app.require_subcommand(1);

  CommonFlags sim_flags, map_flags, suite_flags, window_flags;

  auto* sim = app.add_subcommand("simulate", "sample a stationary walk");
  sim_flags.attach(sim);
  std::string sim_kind = "reflected", sim_out, sim_csv;
  Tick sim_t0 = 0;
  sim->add_option("--kind", sim_kind, "reflected or periodic");
  sim->add_option("--t0", sim_t0, "first tick");
  sim->add_option("--out", sim_out, "output path file")->required();
  sim->add_option("--csv", sim_csv, "also export csv");

  auto* ext = app.add_subcommand("extract", "list certified passage points");
  std::string ext_in, ext_out;
  ext->add_option("--in", ext_in, "input path file")->required();
  ext->add_option("--out", ext_out, "output csv (default stdout)");

  auto* mp = app.add_subcommand("map", "apply a coding map to a path file");
  map_flags.attach(mp);
  std::string map_name, map_in, map_out, map_cache;
  mp->add_option("--name", map_name,
                 "points, marked, unfold, fold, rescale, rescale-back, "
                 "factor")
      ->required();
  mp->add_option("--in", map_in, "input path file")->required();
  mp->add_option("--out", map_out, "output file")->required();
  mp->add_option("--cache", map_cache, "kernel cache directory");

  auto* st = app.add_subcommand("suite", "run a named statistical suite");
  suite_flags.attach(st);
  std::string suite_cache;
  st->add_option("--cache", suite_cache, "kernel cache directory");

  auto* wn = app.add_subcommand("window", "measure coding windows");
  window_flags.attach(wn);
  std::string window_cache;
  wn->add_option("--cache", window_cache, "kernel cache directory");

  try {
    app.parse(argc, argv);
    if (sim->parsed())
      return run_simulate(sim_flags.resolve(), sim_kind, sim_t0, sim_out,
                          sim_csv);
    if (ext->parsed()) return run_extract(ext_in, ext_out);
    if (mp->parsed())
      return run_map(map_flags.resolve(), map_name, map_in, map_out,
                     map_cache);
    if (st->parsed()) return run_suite_cmd(suite_flags.resolve(), suite_cache);
    if (wn->parsed()) {
      auto cfg = window_flags.resolve();
      cfg.task = "window";
      return run_suite_cmd(cfg, window_cache);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
