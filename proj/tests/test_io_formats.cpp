#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bmiso/config.hpp"
#include "bmiso/kernel.hpp"
#include "bmiso/lattice.hpp"
#include "bmiso/pipeline.hpp"
#include "bmiso/report.hpp"
#include "matchers.hpp"

using namespace bmiso;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("bmiso_io_" + std::to_string(
                             std::chrono::steady_clock::now()
                                 .time_since_epoch()
                                 .count()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const std::string& name) const {
    return (dir / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config text survives a round trip") {
  ExperimentConfig cfg;
  cfg.task = "battery";
  cfg.h = 0.5;
  cfg.m = 8;
  cfg.sigma = 2.0;
  cfg.bands = 4;
  cfg.num = 6;
  cfg.den = 4;
  cfg.rate = 1.5;
  cfg.samples = 1234;
  cfg.paths = 77;
  cfg.ticks = 4096;
  cfg.alpha = 0.05;
  cfg.seed = 987654321;
  cfg.threads = 3;
  cfg.out_dir = "out/run1";

  auto back = ExperimentConfig::parse(cfg.to_text());
  REQUIRE(back == cfg);

  TempDir tmp;
  cfg.save(tmp.file("run.cfg"));
  REQUIRE(ExperimentConfig::load(tmp.file("run.cfg")) == cfg);
}

TEST_CASE("config parsing skips comments and trims spaces") {
  auto cfg = ExperimentConfig::parse(
      "# produced by hand\n"
      "\n"
      "  task = skeleton  \n"
      "\tm=4\n"
      "seed=9\n");
  REQUIRE(cfg.task == "skeleton");
  REQUIRE(cfg.m == 4);
  REQUIRE(cfg.seed == 9);
  REQUIRE(cfg.h == 1.0);  // untouched default
}

TEST_CASE("config parsing rejects malformed input") {
  REQUIRE_THROWS_MATCHES(ExperimentConfig::parse("task simulate\n"), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
  REQUIRE_THROWS_MATCHES(ExperimentConfig::parse("m=4\nm=5\n"), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
  REQUIRE_THROWS_MATCHES(ExperimentConfig::parse("mm=4\n"), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
  REQUIRE_THROWS_MATCHES(ExperimentConfig::parse("m=four\n"), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
  REQUIRE_THROWS_MATCHES(ExperimentConfig::parse("alpha=1.5\n"), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
  REQUIRE_THROWS_MATCHES(ExperimentConfig::parse("m=1\n"), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
  REQUIRE_THROWS_MATCHES(ExperimentConfig::load("/no/such/dir/x.cfg"), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
}

TEST_CASE("report files carry the lines, quantiles and plot data") {
  StatReport rep;
  rep.suite = "demo";
  rep.config_text = "task=demo\n";
  rep.runtime_seconds = 1.25;
  rep.lines.push_back(target_line("transform", 0.79, 0.002, 0.793278,
                                  TargetOrigin::ClosedForm, 0.01));
  rep.lines.push_back(pvalue_line("uniform marks", 0.4, 0.01,
                                  TargetOrigin::ExactEnumeration, "n=100"));
  rep.lines.push_back(check_line("colours alternate", true, "12 transitions"));
  rep.lines.push_back(measured_line("median window", 38.0, 0.0));
  rep.quantiles.push_back({"unfold", {0.5, 1.0}, {38.0, 122.0}});
  PlotSeries ps;
  ps.name = "curve";
  ps.columns = {"s", "value"};
  ps.rows = {{0.25, 0.793278}, {1.0, 0.459099}};
  rep.plots.push_back(ps);

  REQUIRE(rep.passed());
  auto text = rep.to_text();
  REQUIRE(text.find("suite demo PASS") != std::string::npos);
  REQUIRE(text.find("ok   transform") != std::string::npos);
  REQUIRE(text.find("[closed-form]") != std::string::npos);
  REQUIRE(text.find("window unfold: q0.5=38") != std::string::npos);

  TempDir tmp;
  rep.write(tmp.dir.string());
  auto j = nlohmann::json::parse(slurp(tmp.file("demo.json")));
  REQUIRE(j["suite"] == "demo");
  REQUIRE(j["pass"] == true);
  REQUIRE(j["lines"].size() == 4);
  REQUIRE(j["lines"][0]["origin"] == "closed-form");
  REQUIRE(j["lines"][1]["origin"] == "exact-enumeration");
  REQUIRE(j["config"] == "task=demo\n");
  REQUIRE(j["quantiles"][0]["name"] == "unfold");

  auto dat = slurp(tmp.file("demo_curve.dat"));
  REQUIRE(dat.find("# s value") != std::string::npos);
  REQUIRE(dat.find("0.25 0.793278") != std::string::npos);

  rep.lines.push_back(check_line("deliberately failing", false));
  REQUIRE_FALSE(rep.passed());
  REQUIRE(rep.to_text().find("suite demo FAIL") != std::string::npos);
  REQUIRE(rep.to_text().find("FAIL deliberately failing") !=
          std::string::npos);
}

TEST_CASE("path files reload bit for bit") {
  RngStream rng(41, 1);
  LatticeParams par{0.75, 6, 1.5};
  auto p = sample_stationary_periodic(par, 4, 300, rng, -37);

  TempDir tmp;
  save_path(p, tmp.file("walk.bmps"));
  auto q = load_path(tmp.file("walk.bmps"));
  REQUIRE(q.t0 == p.t0);
  REQUIRE(q.par.h == p.par.h);
  REQUIRE(q.par.m == p.par.m);
  REQUIRE(q.par.sigma == p.par.sigma);
  REQUIRE(q.codomain == p.codomain);
  REQUIRE(q.bands == p.bands);
  REQUIRE(q.sites == p.sites);

  export_csv(p, tmp.file("walk.csv"));
  auto csv = slurp(tmp.file("walk.csv"));
  REQUIRE(csv.rfind("tick,time,site,value", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 301);

  std::ofstream(tmp.file("bad.bmps")) << "not a path file";
  REQUIRE_THROWS_MATCHES(load_path(tmp.file("bad.bmps")), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
}

TEST_CASE("kernel files reload and reject disagreement") {
  auto k = build_kernel(KernelKind::CyclicDouble, 3, 9);
  std::stringstream buf;
  save_kernel(k, buf);
  auto back = load_kernel(buf);
  REQUIRE(back.kind == k.kind);
  REQUIRE(back.m == k.m);
  REQUIRE(back.L == k.L);
  REQUIRE(back.D == k.D);
  REQUIRE(back.F == k.F);

  // A file whose payload disagrees with its own header must not load.
  std::string raw = buf.str();
  raw[raw.size() - 1] ^= 0x5a;
  std::stringstream tampered(raw);
  REQUIRE_THROWS_MATCHES(load_kernel(tampered), Error,
                         ErrorMatcher(ErrorCode::ConfigError));
}

TEST_CASE("the kernel cache persists to disk and survives corruption") {
  TempDir tmp;
  {
    KernelCache cache(tmp.dir.string());
    auto k = cache.get(KernelKind::ReflectedUp, 3, 7);
    REQUIRE(k->D > 0);
    REQUIRE(fs::exists(cache.file_name(KernelKind::ReflectedUp, 3, 7)));
    REQUIRE(cache.in_memory() == 1);
  }
  {
    // Fresh cache instance reads the stored table back.
    KernelCache cache(tmp.dir.string());
    auto k = cache.get(KernelKind::ReflectedUp, 3, 7);
    REQUIRE(k->D == build_kernel(KernelKind::ReflectedUp, 3, 7).D);
  }
  {
    // Corrupt file: silently rebuilt and rewritten.
    KernelCache cache(tmp.dir.string());
    std::ofstream(cache.file_name(KernelKind::ReflectedUp, 3, 7))
        << "garbage";
    auto k = cache.get(KernelKind::ReflectedUp, 3, 7);
    REQUIRE(k->D == build_kernel(KernelKind::ReflectedUp, 3, 7).D);
  }
}

TEST_CASE("cache retention keeps long kernels out of memory and disk") {
  TempDir tmp;
  KernelCache cache(tmp.dir.string());
  cache.set_retention(10);
  auto small = cache.get(KernelKind::ReflectedUp, 2, 8);
  auto big = cache.get(KernelKind::ReflectedUp, 2, 20);
  REQUIRE(big->D > 0);
  REQUIRE(cache.in_memory() == 1);
  REQUIRE(fs::exists(cache.file_name(KernelKind::ReflectedUp, 2, 8)));
  REQUIRE_FALSE(fs::exists(cache.file_name(KernelKind::ReflectedUp, 2, 20)));
}

TEST_CASE("map stamps describe the producing run") {
  MapDescriptor d;
  d.name = "rescale";
  d.par = LatticeParams{1.0, 8, 1.0};
  d.bands = 2;
  d.num = 4;
  d.den = 2;
  auto s = d.stamp();
  REQUIRE(s.rfind("# map=rescale", 0) == 0);
  REQUIRE(s.find("ratio=4/2") != std::string::npos);
  REQUIRE(s.find("m=8") != std::string::npos);
}
