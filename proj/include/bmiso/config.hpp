#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bmiso/errors.hpp"
#include "bmiso/lattice.hpp"

namespace bmiso {

// Experiment description, round-trippable through key=value text so a run
// can be reproduced from the file it logs.
struct ExperimentConfig {
  std::string task = "gaplaw";
  double h = 1.0;
  std::uint32_t m = 16;
  double sigma = 1.0;
  std::uint32_t bands = 2;
  std::uint32_t num = 2;
  std::uint32_t den = 1;
  double rate = 1.0;
  std::size_t samples = 100000;
  std::size_t paths = 1000;
  std::size_t ticks = 4096;
  double alpha = 0.01;
  std::uint64_t seed = 20260815;
  unsigned threads = 1;
  std::string out_dir = ".";

  LatticeParams lattice() const { return LatticeParams{h, m, sigma}; }

  void validate() const {
    try {
      lattice().validate();
    } catch (const Error& e) {
      require(false, ErrorCode::ConfigError, e.what());
    }
    require(!task.empty(), ErrorCode::ConfigError, "task must be named");
    require(bands >= 1, ErrorCode::ConfigError, "bands must be positive");
    require(num >= 1 && den >= 1, ErrorCode::ConfigError,
            "band ratio parts must be positive");
    require(rate >= 0.0, ErrorCode::ConfigError, "rate must be >= 0");
    require(samples >= 1 && paths >= 1 && ticks >= 2, ErrorCode::ConfigError,
            "sample counts must be positive");
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::ConfigError,
            "significance level must lie in (0, 1)");
    require(threads >= 1, ErrorCode::ConfigError, "threads must be >= 1");
    require(!out_dir.empty(), ErrorCode::ConfigError,
            "output directory must be named");
  }

  std::string to_text() const {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "task=" << task << "\n";
    out << "h=" << h << "\n";
    out << "m=" << m << "\n";
    out << "sigma=" << sigma << "\n";
    out << "bands=" << bands << "\n";
    out << "num=" << num << "\n";
    out << "den=" << den << "\n";
    out << "rate=" << rate << "\n";
    out << "samples=" << samples << "\n";
    out << "paths=" << paths << "\n";
    out << "ticks=" << ticks << "\n";
    out << "alpha=" << alpha << "\n";
    out << "seed=" << seed << "\n";
    out << "threads=" << threads << "\n";
    out << "out_dir=" << out_dir << "\n";
    return out.str();
  }

  static ExperimentConfig parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      if (line[start] == '#') continue;
      std::size_t eq = line.find('=', start);
      require(eq != std::string::npos, ErrorCode::ConfigError,
              "line " + std::to_string(lineno) + " is not key=value");
      std::string key = line.substr(start, eq - start);
      std::size_t kend = key.find_last_not_of(" \t");
      key = key.substr(0, kend + 1);
      std::string value = line.substr(eq + 1);
      std::size_t vstart = value.find_first_not_of(" \t");
      std::size_t vend = value.find_last_not_of(" \t\r");
      value = vstart == std::string::npos
                  ? std::string{}
                  : value.substr(vstart, vend - vstart + 1);
      for (const auto& k : seen)
        require(k != key, ErrorCode::ConfigError, "duplicate key " + key);
      seen.push_back(key);
      cfg.set(key, value);
    }
    cfg.validate();
    return cfg;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::ConfigError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), ErrorCode::ConfigError, "cannot write " + path);
    out << to_text();
  }

  bool operator==(const ExperimentConfig& o) const {
    return task == o.task && h == o.h && m == o.m && sigma == o.sigma &&
           bands == o.bands && num == o.num && den == o.den &&
           rate == o.rate && samples == o.samples && paths == o.paths &&
           ticks == o.ticks && alpha == o.alpha && seed == o.seed &&
           threads == o.threads && out_dir == o.out_dir;
  }

 private:
  template <typename T>
  static T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out;
    in >> out;
    require(!in.fail() && in.eof(), ErrorCode::ConfigError,
            "bad value for " + key + ": " + value);
    return out;
  }

  void set(const std::string& key, const std::string& value) {
    if (key == "task")
      task = value;
    else if (key == "h")
      h = parse_number<double>(key, value);
    else if (key == "m")
      m = parse_number<std::uint32_t>(key, value);
    else if (key == "sigma")
      sigma = parse_number<double>(key, value);
    else if (key == "bands")
      bands = parse_number<std::uint32_t>(key, value);
    else if (key == "num")
      num = parse_number<std::uint32_t>(key, value);
    else if (key == "den")
      den = parse_number<std::uint32_t>(key, value);
    else if (key == "rate")
      rate = parse_number<double>(key, value);
    else if (key == "samples")
      samples = parse_number<std::size_t>(key, value);
    else if (key == "paths")
      paths = parse_number<std::size_t>(key, value);
    else if (key == "ticks")
      ticks = parse_number<std::size_t>(key, value);
    else if (key == "alpha")
      alpha = parse_number<double>(key, value);
    else if (key == "seed")
      seed = parse_number<std::uint64_t>(key, value);
    else if (key == "threads")
      threads = parse_number<unsigned>(key, value);
    else if (key == "out_dir")
      out_dir = value;
    else
      require(false, ErrorCode::ConfigError, "unknown key " + key);
  }
};

}  // namespace bmiso
