#pragma once
// Snapshot analysis pipeline: field -> topology -> labeled COT -> filtered
// tree -> terminal vortices, plus the artifact writers and the batch runner
// the command-line front end drives.

#include <atomic>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfda/cot.hpp"
#include "tfda/field_io.hpp"
#include "tfda/spectral.hpp"
#include "tfda/vortex.hpp"

namespace tfda {

struct RunConfig {
  double eps0 = 0.1;
  int coarse_factor = 1;
  bool normalize = true;
  ParseMode mode = ParseMode::strict;
  std::string output_dir;
  std::uint64_t seed = 0;
};

inline void validate_config(const RunConfig& cfg) {
  if (!(cfg.eps0 >= 0.0)) throw argument_error("eps0 must be >= 0");
  if (cfg.coarse_factor < 1) throw argument_error("coarse factor must be >= 1");
}

/* Everything one snapshot produces.  When the stability check fails only
   `stability` is meaningful and `stable` stays false; the caller still gets a
   report out of it. */
struct AnalysisArtifacts {
  bool stable = false;
  StabilityReport stability;
  ScalarField work;       // coarse-grained physical field (vortex quantities)
  TopologyAnalysis topo;  // topology of the working field, normalized if asked
  LabeledCot labeled;
  CotTree filtered;
  std::vector<TerminalVortex> vortices;
};

/* Normalization only rescales values, so it cannot change which COT comes
   out; it fixes the scale that eps0 and the reported node values live on.
   Enstrophy and energy always come from the physical (un-normalized) field. */
inline AnalysisArtifacts analyze_field(const ScalarField& raw, const RunConfig& cfg) {
  validate_config(cfg);
  AnalysisArtifacts a;
  a.work = coarse_grain(raw, cfg.coarse_factor);
  ScalarField topo_field = a.work;
  if (cfg.normalize) {
    auto [lo, hi] = std::minmax_element(a.work.values.begin(), a.work.values.end());
    // a constant field cannot be normalized; let the stability check below
    // produce the degenerate report instead of throwing here
    if (*hi - *lo > 0.0) topo_field = normalize(a.work);
  }
  try {
    a.stability = validate_stability(detect_critical_points(topo_field));
  } catch (const degenerate_field_error& e) {
    // constant fields are rejected before classification; fold the message
    // into the report so the degenerate verdict still reaches disk
    a.stability.stable = false;
    a.stability.reasons.emplace_back(e.what());
  }
  if (!a.stability.stable) return a;

  a.topo = analyze_topology(topo_field);
  a.labeled = analyze_cot(a.topo, topo_field);
  a.filtered = filter_cot(a.labeled.tree, cfg.eps0);

  ScalarField omega = vorticity_from_stream(a.work);
  VectorField vel = velocity_from_stream(a.work);
  for (const TerminalVortex& v : extract_terminal_vortices(a.filtered, a.topo.seg, a.work))
    a.vortices.push_back(vortex_quantities(v, omega, vel));
  a.stable = true;
  return a;
}

inline nlohmann::json report_json(const AnalysisArtifacts& a, const RunConfig& cfg,
                                  const std::string& input_name) {
  nlohmann::json j;
  j["input"] = input_name;
  j["config"] = {{"eps0", cfg.eps0},
                 {"coarse_factor", cfg.coarse_factor},
                 {"normalize", cfg.normalize},
                 {"mode", cfg.mode == ParseMode::strict ? "strict" : "permissive"},
                 {"seed", cfg.seed}};
  j["verdict"] = a.stable ? "stable" : "degenerate";
  j["stability"] = stability_to_json(a.stability);
  if (!a.stable) return j;

  int n_min = 0, n_max = 0, n_saddle = 0;
  for (const CriticalPoint& p : a.topo.cps) {
    n_min += p.kind == CritKind::minimum;
    n_max += p.kind == CritKind::maximum;
    n_saddle += p.kind == CritKind::saddle;
  }
  int essential = 0;
  for (const ReebEdge& e : a.topo.graph.edges) essential += e.essential;
  int plus = 0, minus = 0;
  for (const TerminalVortex& v : a.vortices) (v.orientation == VortexOrientation::plus ? plus : minus)++;

  const CutChoice& c = a.labeled.cut;
  j["cut"] = {{"edge", c.cut_edge},
              {"value", c.cut_value},
              {"winding", {c.winding_x, c.winding_y}},
              {"shift_axis", std::string(1, c.shift_axis)}};
  j["counts"] = {{"minima", n_min},
                 {"maxima", n_max},
                 {"saddles", n_saddle},
                 {"reeb_nodes", a.topo.graph.nodes.size()},
                 {"reeb_edges", a.topo.graph.edges.size()},
                 {"essential_edges", essential},
                 {"cot_nodes", count_nodes(a.filtered.root)},
                 {"cot_nodes_unfiltered", count_nodes(a.labeled.tree.root)},
                 {"vortices", a.vortices.size()},
                 {"vortices_plus", plus},
                 {"vortices_minus", minus}};
  j["cot"] = emit_cot(a.filtered);
  j["cot_unfiltered"] = emit_cot(a.labeled.tree);
  bool parses = true;
  try {
    parse_cot(emit_cot(a.filtered), cfg.mode);
  } catch (const cot_parse_error&) {
    parses = false;  // heavy filtering can leave a chain only the permissive grammar accepts
  }
  j["cot_parses"] = parses;
  return j;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline void make_dirs(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace detail

/* report.json is always written; cot.txt, reeb.json and vortices.csv only
   exist for stable fields.  Nothing here carries a timestamp, so reruns are
   byte-identical. */
inline void write_analysis_artifacts(const AnalysisArtifacts& a, const RunConfig& cfg,
                                     const std::string& dir, const std::string& input_name) {
  detail::make_dirs(dir);
  detail::write_text(dir + "/report.json", report_json(a, cfg, input_name).dump(2) + "\n");
  if (!a.stable) return;
  detail::write_text(dir + "/cot.txt", emit_cot(a.filtered) + "\n");
  detail::write_text(dir + "/reeb.json", reeb_to_json(a.topo.graph).dump(2) + "\n");
  save_vortices_csv(a.vortices, dir + "/vortices.csv");
}

/* The manifest is the one file allowed to carry wall-clock state; determinism
   checks compare everything else and skip it. */
inline void write_manifest(const RunConfig& cfg, const std::vector<std::string>& inputs,
                           const std::string& path) {
  std::time_t now = std::time(nullptr);
  char stamp[32] = "unknown";
  if (std::tm tm{}; gmtime_r(&now, &tm) != nullptr)
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::json j;
  j["generated_at"] = stamp;
  j["inputs"] = inputs;
  j["config"] = {{"eps0", cfg.eps0},
                 {"coarse_factor", cfg.coarse_factor},
                 {"normalize", cfg.normalize},
                 {"mode", cfg.mode == ParseMode::strict ? "strict" : "permissive"},
                 {"output_dir", cfg.output_dir},
                 {"seed", cfg.seed}};
  detail::write_text(path, j.dump(2) + "\n");
}

struct SnapshotOutcome {
  std::string name;   // snapshot stem, also the output subdirectory in batches
  std::string input;  // path as given
  int exit_code = 0;  // 0 stable, 3 degenerate, 1/2 per the error contract
  std::string error;  // diagnostic when exit_code is 1 or 2
  std::size_t n_vortices = 0;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const io_error*>(&e)) return 1;
  if (dynamic_cast<const cot_parse_error*>(&e)) return 2;
  if (dynamic_cast<const degenerate_field_error*>(&e)) return 3;
  return 1;
}

/* Batch analysis over independent snapshots with a fixed-size worker pool.
   Snapshots are processed in sorted-name order and every output location is a
   pure function of the input list, so the run is deterministic for any job
   count.  A single input writes into `output_dir` directly; several inputs
   get one subdirectory each plus a summary.json merged in sorted order. */
inline std::vector<SnapshotOutcome> run_batch(std::vector<std::string> inputs,
                                              const RunConfig& cfg, int jobs = 1) {
  validate_config(cfg);
  if (inputs.empty()) throw argument_error("no input fields given");
  if (jobs < 1) throw argument_error("jobs must be >= 1");
  std::sort(inputs.begin(), inputs.end(), [](const std::string& p, const std::string& q) {
    auto sp = std::filesystem::path(p).filename().string();
    auto sq = std::filesystem::path(q).filename().string();
    return sp != sq ? sp < sq : p < q;
  });
  const bool flat = inputs.size() == 1;

  std::vector<SnapshotOutcome> out(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    out[k].input = inputs[k];
    out[k].name = std::filesystem::path(inputs[k]).stem().string();
  }
  for (std::size_t k = 1; k < out.size(); ++k)
    if (out[k].name == out[k - 1].name)
      throw argument_error("duplicate snapshot name '" + out[k].name +
                           "'; outputs would collide");

  detail::make_dirs(cfg.output_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < inputs.size(); k = next.fetch_add(1)) {
      SnapshotOutcome& o = out[k];
      try {
        ScalarField raw = load_field(o.input);
        AnalysisArtifacts a = analyze_field(raw, cfg);
        std::string dir = flat ? cfg.output_dir : cfg.output_dir + "/" + o.name;
        write_analysis_artifacts(a, cfg, dir, o.input);
        o.exit_code = a.stable ? 0 : 3;
        o.n_vortices = a.vortices.size();
      } catch (const std::exception& e) {
        o.exit_code = exit_code_for(e);
        o.error = e.what();
      }
    }
  };
  int n_threads = int(std::min<std::size_t>(std::size_t(jobs), inputs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  if (!flat) {
    nlohmann::json rows = nlohmann::json::array();
    for (const SnapshotOutcome& o : out) {
      nlohmann::json r = {{"name", o.name},
                          {"input", o.input},
                          {"verdict", o.exit_code == 0   ? "stable"
                                      : o.exit_code == 3 ? "degenerate"
                                                         : "error"},
                          {"vortices", o.n_vortices}};
      if (!o.error.empty()) r["error"] = o.error;
      rows.push_back(r);
    }
    detail::write_text(cfg.output_dir + "/summary.json",
                       nlohmann::json{{"snapshots", rows}}.dump(2) + "\n");
  }
  write_manifest(cfg, inputs, cfg.output_dir + "/manifest.json");
  return out;
}

/* Worst outcome wins: any hard failure beats degenerate beats success. */
inline int batch_exit_code(const std::vector<SnapshotOutcome>& outcomes) {
  int code = 0;
  for (const SnapshotOutcome& o : outcomes) {
    if (o.exit_code == 1 || o.exit_code == 2) return o.exit_code;
    if (o.exit_code != 0) code = o.exit_code;
  }
  return code;
}

}  // namespace tfda
