// tfda: topological analysis of doubly periodic 2-D stream functions.
// Subcommands: analyze, synth, spectrum, parse, stats.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tfda/pipeline.hpp"
#include "tfda/stats.hpp"

namespace {

using namespace tfda;

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  RunConfig cfg;
  bool permissive = false;
  int jobs = 1;
};

int run_analyze(AnalyzeArgs& a) {
  a.cfg.mode = a.permissive ? ParseMode::permissive : ParseMode::strict;
  std::vector<SnapshotOutcome> outcomes = run_batch(a.inputs, a.cfg, a.jobs);
  for (const SnapshotOutcome& o : outcomes) {
    if (o.exit_code == 0)
      std::printf("%s: stable, %zu vortices\n", o.name.c_str(), o.n_vortices);
    else if (o.exit_code == 3)
      std::printf("%s: degenerate\n", o.name.c_str());
    else
      std::fprintf(stderr, "%s: error: %s\n", o.name.c_str(), o.error.c_str());
  }
  return batch_exit_code(outcomes);
}

struct SynthArgs {
  std::string out_dir = "tfda_out";
  double exponent = -3.0;
  std::uint32_t size = 256;
  int kmin = 10, kmax = 40;
  int count = 1;
  std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& s) {
  detail::make_dirs(s.out_dir);
  for (int k = 0; k < s.count; ++k) {
    ScalarField f = synth_field(s.size, s.size, s.exponent, s.kmin, s.kmax, s.seed + std::uint64_t(k));
    char name[32];
    std::snprintf(name, sizeof name, "snap_%04d.tfd", k);
    std::string path = s.out_dir + "/" + name;
    save_field(f, path);
    std::printf("%s\n", path.c_str());
  }
  return 0;
}

int run_spectrum(const std::string& input, const std::string& out) {
  Spectrum s = energy_spectrum(load_field(input));
  save_spectrum_csv(s, out);
  std::printf("%s\n", out.c_str());
  return 0;
}

int run_parse(const std::string& text, bool ascii, bool permissive) {
  CotTree t = parse_cot(text, permissive ? ParseMode::permissive : ParseMode::strict);
  std::printf("%s\n", emit_cot(t, ascii).c_str());
  return 0;
}

struct StatsArgs {
  std::vector<std::string> csvs;
  std::string column = "area";
  std::string orientation = "both";
  int bins = 50;
  bool log_bins = false;
  std::string out_dir;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::vector<double> read_csv_column(const StatsArgs& s) {
  std::vector<double> samples;
  for (const std::string& path : s.csvs) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw io_error("'" + path + "' is empty");
    std::vector<std::string> header = split_csv_line(line);
    std::size_t ci = header.size(), oi = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == s.column) ci = c;
      if (header[c] == "orientation") oi = c;
    }
    if (ci == header.size())
      throw argument_error("column '" + s.column + "' not present in '" + path + "'");
    if (s.orientation != "both" && oi == header.size())
      throw argument_error("'" + path + "' has no orientation column to filter on");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields = split_csv_line(line);
      if (fields.size() < header.size())
        throw argument_error("short row in '" + path + "': " + line);
      if (s.orientation != "both" && fields[oi] != s.orientation) continue;
      samples.push_back(std::strtod(fields[ci].c_str(), nullptr));
    }
  }
  return samples;
}

int run_stats(const StatsArgs& s) {
  std::vector<double> samples = read_csv_column(s);
  std::vector<FitResult> fits = fit_all(samples);
  if (s.out_dir.empty()) {
    write_fits_csv(fits, std::cout);
  } else {
    detail::make_dirs(s.out_dir);
    save_fits_csv(fits, s.out_dir + "/fits_" + s.column + ".csv");
    Hist1D h = hist1d(samples, s.bins, s.log_bins);
    std::ofstream out(s.out_dir + "/hist_" + s.column + ".csv", std::ios::trunc);
    if (!out) throw io_error("cannot open histogram csv for writing");
    write_hist1d_csv(h, out);
    std::printf("%s: %zu samples, best fit %s\n", s.column.c_str(), samples.size(),
                family_name(fits.front().family));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological flow data analysis of doubly periodic stream functions"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  an.cfg.output_dir = "tfda_out";
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Extract the COT, Reeb graph and terminal vortices of field snapshots");
  analyze->add_option("fields", an.inputs, "field files (.tfd binary or .csv)")->required();
  analyze->add_option("--out", an.cfg.output_dir, "output directory")->capture_default_str();
  analyze->add_option("--eps0", an.cfg.eps0, "filtering threshold")->capture_default_str();
  analyze->add_option("--coarse", an.cfg.coarse_factor, "coarse-graining factor")
      ->capture_default_str();
  analyze->add_flag("--normalize,!--no-normalize", an.cfg.normalize,
                    "divide by the field's max-min extent (default on)");
  analyze->add_flag("--permissive,!--strict", an.permissive, "grammar used when re-parsing");
  analyze->add_option("--seed", an.cfg.seed, "seed recorded with the run")->capture_default_str();
  analyze->add_option("--jobs", an.jobs, "parallel snapshot workers")->capture_default_str();

  SynthArgs sy;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate random-phase fields with a power-law spectrum");
  synth->add_option("--out", sy.out_dir, "output directory")->capture_default_str();
  synth->add_option("--exponent", sy.exponent, "energy spectrum exponent g in E(k) ~ k^g")
      ->capture_default_str();
  synth->add_option("--size", sy.size, "grid points per side")->capture_default_str();
  synth->add_option("--kmin", sy.kmin, "lowest wavenumber in the shell")->capture_default_str();
  synth->add_option("--kmax", sy.kmax, "highest wavenumber in the shell")->capture_default_str();
  synth->add_option("--count", sy.count, "number of snapshots")->capture_default_str();
  synth->add_option("--seed", sy.seed, "base seed; snapshot k uses seed+k")->capture_default_str();

  std::string sp_input, sp_out = "spectrum.csv";
  CLI::App* spectrum = app.add_subcommand("spectrum", "Write the energy spectrum of a field");
  spectrum->add_option("field", sp_input, "field file")->required();
  spectrum->add_option("--out", sp_out, "output CSV path")->capture_default_str();

  std::string pa_text;
  bool pa_ascii = false, pa_permissive = false;
  CLI::App* parse = app.add_subcommand("parse", "Validate a COT string and echo it canonically");
  parse->add_option("cot", pa_text, "COT string (Unicode or ASCII surface)")->required();
  parse->add_flag("--ascii", pa_ascii, "echo using the ASCII alphabet");
  parse->add_flag("--permissive,!--strict", pa_permissive, "accept the permissive grammar");

  StatsArgs st;
  CLI::App* stats =
      app.add_subcommand("stats", "Fit distribution families to a column of vortex tables");
  stats->add_option("csvs", st.csvs, "vortices.csv files")->required();
  stats->add_option("--fit", st.column, "column to fit")->capture_default_str();
  stats->add_option("--orientation", st.orientation, "plus, minus or both")
      ->check(CLI::IsMember({"plus", "minus", "both"}))
      ->capture_default_str();
  stats->add_option("--bins", st.bins, "histogram bin count")->capture_default_str();
  stats->add_flag("--log-bins", st.log_bins, "log-spaced histogram bins");
  stats->add_option("--out", st.out_dir, "directory for fit + histogram CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return run_analyze(an);
    if (synth->parsed()) return run_synth(sy);
    if (spectrum->parsed()) return run_spectrum(sp_input, sp_out);
    if (parse->parsed()) return run_parse(pa_text, pa_ascii, pa_permissive);
    if (stats->parsed()) return run_stats(st);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tfda: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
