#pragma once
// Report generation over analysis results.
//
// For each reported node the report lists, per variable, the value range in
// both the signed and the unsigned reading, plus a `bounded` flag.  A
// variable counts as bounded at a point when at least one of its two
// interval views holds no more than 2^31 machine words — i.e. when the
// analysis pinned it to at most half of the value space.  Degenerate
// residues such as [-2^31, 2^31-2], which exclude a single value, are
// deliberately not bounded under this rule.
//
// Nodes whose state is unreachable render as the string "unreachable"
// rather than a variable table.
//
// JSON schema (see report_to_json):
//   { function: { node: { var: { "signed":   [lo, hi] | "bot",
//                                "unsigned": [lo, hi] | "bot",
//                                "bounded":  bool } } | "unreachable" } }

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "varan/analysis.hpp"
#include "varan/cfg.hpp"
#include "varan/interval.hpp"

namespace varan {

// At most 2^31 of the 2^32 machine words.
inline bool interval_is_small(const Interval& iv) {
  return iv.hi - iv.lo + 1 <= (Big(1) << 31);
}

struct VarReport {
  Lifted<Interval> signed_view = Lifted<Interval>::bottom();
  Lifted<Interval> unsigned_view = Lifted<Interval>::bottom();
  bool bounded = false;
};

inline VarReport make_var_report(const ProgramDomain::State& s, VarId v) {
  VarReport r;
  r.signed_view = ProgramDomain::var_range(s, v, Signedness::Signed);
  r.unsigned_view = ProgramDomain::var_range(s, v, Signedness::Unsigned);
  r.bounded =
      (!r.signed_view.is_bottom() && interval_is_small(r.signed_view.value())) ||
      (!r.unsigned_view.is_bottom() &&
       interval_is_small(r.unsigned_view.value()));
  return r;
}

struct NodeReport {
  bool reachable = false;
  // Keyed by variable name for presentation; names are unique per function.
  std::map<std::string, VarReport> vars;
};

struct FunctionReport {
  std::string name;
  bool fallback = false;
  std::map<NodeId, NodeReport> nodes;
};

struct ProgramReport {
  std::vector<FunctionReport> functions;
};

enum class ReportNodes { All, Marked };

inline ProgramReport build_report(const AnalysisResult& ar,
                                  ReportNodes which = ReportNodes::All) {
  ProgramReport rep;
  for (const FunctionResult& fr : ar.functions) {
    const CfgFunction& f = *fr.fn;
    FunctionReport out;
    out.name = f.name;
    out.fallback = fr.fallback;
    std::set<VarId> vars = function_vars(f);
    for (const auto& [node, ins] : f.body) {
      if (which == ReportNodes::Marked && !f.report_nodes.count(node))
        continue;
      NodeReport nr;
      auto it = fr.values.find(node);
      const ProgramDomain::State* s =
          it == fr.values.end() ? nullptr : &it->second;
      nr.reachable = s != nullptr && !ProgramDomain::is_bottom(*s);
      if (nr.reachable) {
        for (VarId v : vars) nr.vars.emplace(var_name(f, v), make_var_report(*s, v));
      }
      out.nodes.emplace(node, std::move(nr));
    }
    rep.functions.push_back(std::move(out));
  }
  return rep;
}

// --- JSON ------------------------------------------------------------------

namespace report_detail {

inline nlohmann::ordered_json interval_json(const Lifted<Interval>& r) {
  if (r.is_bottom()) return "bot";
  return nlohmann::ordered_json::array({
      static_cast<std::int64_t>(r.value().lo),
      static_cast<std::int64_t>(r.value().hi),
  });
}

}  // namespace report_detail

inline nlohmann::ordered_json report_to_json(const ProgramReport& rep) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const FunctionReport& f : rep.functions) {
    nlohmann::ordered_json fn = nlohmann::ordered_json::object();
    for (const auto& [node, nr] : f.nodes) {
      std::string key = std::to_string(node);
      if (!nr.reachable) {
        fn[key] = "unreachable";
        continue;
      }
      nlohmann::ordered_json vars = nlohmann::ordered_json::object();
      for (const auto& [name, vr] : nr.vars) {
        vars[name] = {
            {"signed", report_detail::interval_json(vr.signed_view)},
            {"unsigned", report_detail::interval_json(vr.unsigned_view)},
            {"bounded", vr.bounded},
        };
      }
      fn[key] = std::move(vars);
    }
    doc[f.name] = std::move(fn);
  }
  return doc;
}

// --- text ------------------------------------------------------------------

namespace report_detail {

inline std::string interval_text(const Lifted<Interval>& r) {
  if (r.is_bottom()) return "bot";
  std::ostringstream os;
  os << "[" << r.value().lo << ", " << r.value().hi << "]";
  return os.str();
}

}  // namespace report_detail

// One aligned table per function: node, variable, both views, bounded flag.
inline std::string report_to_text(const ProgramReport& rep) {
  std::ostringstream os;
  for (const FunctionReport& f : rep.functions) {
    os << "function " << f.name;
    if (f.fallback) os << "  (budget exhausted; result degraded to top)";
    os << "\n";

    // Column widths over the whole function table.
    std::size_t wvar = 3, wsig = 6, wuns = 8;
    for (const auto& [node, nr] : f.nodes) {
      for (const auto& [name, vr] : nr.vars) {
        wvar = std::max(wvar, name.size());
        wsig = std::max(wsig, report_detail::interval_text(vr.signed_view).size());
        wuns = std::max(wuns, report_detail::interval_text(vr.unsigned_view).size());
      }
    }

    for (const auto& [node, nr] : f.nodes) {
      if (!nr.reachable) {
        os << "  node " << node << ": unreachable\n";
        continue;
      }
      os << "  node " << node << ":\n";
      for (const auto& [name, vr] : nr.vars) {
        os << "    " << std::left << std::setw(static_cast<int>(wvar)) << name
           << "  " << std::setw(static_cast<int>(wsig))
           << report_detail::interval_text(vr.signed_view) << "  "
           << std::setw(static_cast<int>(wuns))
           << report_detail::interval_text(vr.unsigned_view) << "  "
           << (vr.bounded ? "bounded" : "unbounded") << "\n";
      }
    }
  }
  return os.str();
}

}  // namespace varan
