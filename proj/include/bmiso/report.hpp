#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmiso/errors.hpp"

namespace bmiso {

// Where a target number comes from, so every pass/fail verdict names a
// source that can be checked without rerunning the simulation.
enum class TargetOrigin {
  ClosedForm,        // evaluated from a formula pinned in the code
  ExactEnumeration,  // counted or computed exactly at build time
  Definition,        // structural property, no estimation involved
  Literature,        // standard constant (e.g. a chi-square quantile)
  Measured,          // no external target; value reported for the record
};

inline const char* origin_name(TargetOrigin o) {
  switch (o) {
    case TargetOrigin::ClosedForm: return "closed-form";
    case TargetOrigin::ExactEnumeration: return "exact-enumeration";
    case TargetOrigin::Definition: return "definition";
    case TargetOrigin::Literature: return "literature";
    case TargetOrigin::Measured: return "measured";
  }
  return "unknown";
}

struct StatLine {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  bool has_target = false;
  double target = 0.0;
  TargetOrigin origin = TargetOrigin::Measured;
  double tolerance = 0.0;
  bool pass = true;
  std::string note;
};

inline StatLine measured_line(const std::string& name, double estimate,
                              double se, const std::string& note = {}) {
  StatLine l;
  l.name = name;
  l.estimate = estimate;
  l.se = se;
  l.note = note;
  return l;
}

inline StatLine target_line(const std::string& name, double estimate,
                            double se, double target, TargetOrigin origin,
                            double tolerance, const std::string& note = {}) {
  StatLine l;
  l.name = name;
  l.estimate = estimate;
  l.se = se;
  l.has_target = true;
  l.target = target;
  l.origin = origin;
  l.tolerance = tolerance;
  l.pass = std::abs(estimate - target) <= tolerance;
  l.note = note;
  return l;
}

inline StatLine check_line(const std::string& name, bool pass,
                           const std::string& note = {}) {
  StatLine l;
  l.name = name;
  l.estimate = pass ? 1.0 : 0.0;
  l.has_target = true;
  l.target = 1.0;
  l.origin = TargetOrigin::Definition;
  l.tolerance = 0.0;
  l.pass = pass;
  l.note = note;
  return l;
}

inline StatLine pvalue_line(const std::string& name, double p, double level,
                            TargetOrigin origin = TargetOrigin::Literature,
                            const std::string& note = {}) {
  StatLine l;
  l.name = name;
  l.estimate = p;
  l.has_target = true;
  l.target = level;
  l.origin = origin;
  l.tolerance = 0.0;
  l.pass = p > level;
  l.note = note.empty() ? "p-value against level" : note;
  return l;
}

struct QuantileSet {
  std::string name;
  std::vector<double> probs;
  std::vector<double> values;
};

// Columnar plot data: one named series, fixed column headers, numeric rows.
struct PlotSeries {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct StatReport {
  std::string suite;
  std::string config_text;
  double runtime_seconds = 0.0;
  std::vector<StatLine> lines;
  std::vector<QuantileSet> quantiles;
  std::vector<PlotSeries> plots;

  bool passed() const {
    for (const auto& l : lines)
      if (!l.pass) return false;
    return true;
  }

  std::string to_text() const {
    std::ostringstream out;
    out.precision(10);
    out << "suite " << suite << (passed() ? " PASS" : " FAIL") << "\n";
    for (const auto& l : lines) {
      out << (l.pass ? "  ok   " : "  FAIL ") << l.name << ": " << l.estimate;
      if (l.se > 0.0) out << " +- " << l.se;
      if (l.has_target)
        out << " vs " << l.target << " [" << origin_name(l.origin)
            << "] tol " << l.tolerance;
      if (!l.note.empty()) out << " (" << l.note << ")";
      out << "\n";
    }
    for (const auto& q : quantiles) {
      out << "  window " << q.name << ":";
      for (std::size_t i = 0; i < q.probs.size(); ++i)
        out << " q" << q.probs[i] << "=" << q.values[i];
      out << "\n";
    }
    out << "  runtime " << runtime_seconds << " s\n";
    return out.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["suite"] = suite;
    j["pass"] = passed();
    j["runtime_seconds"] = runtime_seconds;
    j["config"] = config_text;
    j["lines"] = nlohmann::json::array();
    for (const auto& l : lines) {
      nlohmann::json e;
      e["name"] = l.name;
      e["estimate"] = l.estimate;
      e["se"] = l.se;
      if (l.has_target) {
        e["target"] = l.target;
        e["origin"] = origin_name(l.origin);
        e["tolerance"] = l.tolerance;
      }
      e["pass"] = l.pass;
      if (!l.note.empty()) e["note"] = l.note;
      j["lines"].push_back(e);
    }
    j["quantiles"] = nlohmann::json::array();
    for (const auto& q : quantiles) {
      nlohmann::json e;
      e["name"] = q.name;
      e["probs"] = q.probs;
      e["values"] = q.values;
      j["quantiles"].push_back(e);
    }
    return j;
  }

  // Writes <dir>/<suite>.txt, <dir>/<suite>.json and one .dat per series.
  void write(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    auto base = std::filesystem::path(dir) / suite;
    {
      std::ofstream out(base.string() + ".txt");
      require(out.good(), ErrorCode::ConfigError,
              "cannot write report text for " + suite);
      out << to_text();
    }
    {
      std::ofstream out(base.string() + ".json");
      require(out.good(), ErrorCode::ConfigError,
              "cannot write report json for " + suite);
      out << to_json().dump(2) << "\n";
    }
    for (const auto& p : plots) {
      std::ofstream out(base.string() + "_" + p.name + ".dat");
      require(out.good(), ErrorCode::ConfigError,
              "cannot write plot data " + p.name);
      out.precision(std::numeric_limits<double>::max_digits10);
      out << "#";
      for (const auto& c : p.columns) out << " " << c;
      out << "\n";
      for (const auto& row : p.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
          out << (i ? " " : "") << row[i];
        out << "\n";
      }
    }
  }
};

}  // namespace bmiso
