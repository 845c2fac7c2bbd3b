#pragma once

// Subcommands of the `fiedler` command-line tool:
//   fiedler    Fiedler vector (and optionally p smallest eigenpairs)
//   reorder    spectral permutation, reordered matrix, bandweight profiles
//   bandweight relative bandweight profile of a matrix
//
// Exit status: 0 success, 1 input or setup error, 2 solver did not converge.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fiedler/fiedler.hpp"

namespace fiedler::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitUnconverged = 2;

struct Options {
  std::string input;
  std::string output_dir = ".";
  std::string output;  // bandweight: CSV destination, stdout when empty
  double eps_out = 1e-5;
  std::optional<double> eps_in;  // defaults to eps_out / 10
  std::size_t max_inner = 30;
  std::size_t max_outer = 200;
  std::size_t p = 2;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: FIEDLER_THREADS, then hardware concurrency
  bool unweighted = false;
  bool keep_diagonal = false;
  bool per_component = false;
  bool plots = false;
  std::vector<std::size_t> ks;
};

inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FIEDLER_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline SolverConfig solver_config(const Options& o) {
  SolverConfig cfg;
  cfg.p = o.p;
  cfg.eps_out = o.eps_out;
  cfg.pcg.eps_in = o.eps_in.value_or(o.eps_out / 10);
  cfg.pcg.max_iters = o.max_inner;
  cfg.max_outer = o.max_outer;
  cfg.seed = o.seed;
  return cfg;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class PhaseTimer {
public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  double stop() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Fiedler vector over the original vertex set: isolated vertices hold 0 and
// each connected component carries its own unit Fiedler vector.
struct Solution {
  GraphSource graph;
  std::size_t components = 1;
  std::vector<GraphSource> parts;
  std::vector<FiedlerResult> results;
  std::vector<double> full_vector;
  bool converged = true;
};

inline Solution solve(const SparseMatrix& A, const Options& o, const Parallel& par, nlohmann::json& timings) {
  Solution sol;
  PhaseTimer t;
  sol.graph = preprocess(A);
  const Components comp = connected_components(sol.graph);
  sol.components = comp.count;
  if (comp.count > 1 && !o.per_component)
    throw DisconnectedGraphError("graph has " + std::to_string(comp.count) +
                                 " connected components; rerun with --per-component");
  sol.parts = comp.count > 1 ? split_components(sol.graph) : std::vector<GraphSource>{sol.graph};
  timings["preprocess"] = t.stop();

  t.start();
  const LaplacianOptions lopts{!o.unweighted, o.keep_diagonal};
  sol.full_vector.assign(A.rows(), 0.0);
  for (const auto& part : sol.parts) {
    SolverConfig cfg = solver_config(o);
    cfg.p = std::min(cfg.p, part.size());
    const LaplacianPair pair = build_laplacian(part, lopts);
    const Parallel local(std::min(par.workers(), part.size()));
    sol.results.push_back(tracemin_fiedler(pair, cfg, local));
    const auto& x = sol.results.back().fiedler_vector;
    for (std::size_t i = 0; i < x.size(); ++i) sol.full_vector[part.kept_vertices[i]] = x[i];
    sol.converged = sol.converged && sol.results.back().converged;
  }
  timings["solve"] = t.stop();
  return sol;
}

// Components in order, each sorted by its Fiedler vector; isolated vertices last.
inline Permutation spectral_permutation(const Solution& sol) {
  std::vector<std::size_t> forward;
  forward.reserve(sol.graph.original_n);
  std::vector<bool> placed(sol.graph.original_n, false);
  for (std::size_t c = 0; c < sol.parts.size(); ++c) {
    const Permutation local = fiedler_permutation(sol.results[c].fiedler_vector);
    for (std::size_t v : local.forward()) {
      forward.push_back(sol.parts[c].kept_vertices[v]);
      placed[forward.back()] = true;
    }
  }
  for (std::size_t v = 0; v < placed.size(); ++v)
    if (!placed[v]) forward.push_back(v);
  return Permutation(std::move(forward));
}

inline nlohmann::json config_json(const Options& o, std::size_t threads) {
  const SolverConfig cfg = solver_config(o);
  return {{"p", cfg.p},
          {"q", cfg.width()},
          {"eps_out", cfg.eps_out},
          {"eps_in", cfg.pcg.eps_in},
          {"max_inner", cfg.pcg.max_iters},
          {"max_outer", cfg.max_outer},
          {"seed", cfg.seed},
          {"threads", threads},
          {"weighted", !o.unweighted},
          {"keep_diagonal", o.keep_diagonal},
          {"per_component", o.per_component}};
}

inline nlohmann::json solution_json(const Solution& sol) {
  nlohmann::json comps = nlohmann::json::array();
  std::size_t outer = 0;
  double inner_sum = 0.0;
  std::size_t solves = 0;
  for (std::size_t c = 0; c < sol.results.size(); ++c) {
    const auto& r = sol.results[c];
    comps.push_back({{"size", sol.parts[c].size()},
                     {"lambda2", r.lambda2},
                     {"relative_residual", r.relative_residual},
                     {"converged", r.converged},
                     {"outer_iterations", r.outer_iterations},
                     {"avg_inner_iterations", r.avg_inner_iterations},
                     {"max_inner_used", r.max_inner_used},
                     {"eigenvalues", r.eigenvalues}});
    outer = std::max(outer, r.outer_iterations);
    inner_sum += static_cast<double>(r.inner_iterations);
    solves += r.inner_solves;
  }
  const auto& first = sol.results.front();
  return {{"converged", sol.converged},
          {"lambda2", first.lambda2},
          {"relative_residual", first.relative_residual},
          {"eigenvalues", first.eigenvalues},
          {"outer_iterations", outer},
          {"avg_inner_iterations", solves ? inner_sum / static_cast<double>(solves) : 0.0},
          {"components", comps}};
}

inline nlohmann::json graph_json(const SparseMatrix& A, const Solution& sol) {
  return {{"original_n", A.rows()},
          {"input_nnz", A.nnz()},
          {"n", sol.graph.size()},
          {"isolated_removed", A.rows() - sol.graph.size()},
          {"components", sol.components}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

class Outputs {
public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    const auto path = dir_ / name;
    std::ofstream f(path);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    files_.push_back(path.string());
    return f;
  }
  const std::vector<std::string>& files() const { return files_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline void write_manifest(Outputs& out, nlohmann::json manifest) {
  const auto path = out.path("manifest.json");
  auto files = out.files();
  files.push_back(path.string());
  manifest["outputs"] = files;
  write_text(path, manifest.dump(2) + "\n");
}

// Requested half-widths sorted and deduplicated, those beyond n clamped to n;
// the default log-spaced set when none were given.
inline std::vector<std::size_t> half_widths(const std::vector<std::size_t>& requested, std::size_t n,
                                            const char* cmd, std::ostream& err) {
  if (requested.empty()) return default_half_widths(n);
  std::vector<std::size_t> ks;
  for (std::size_t k : requested) {
    if (k < 1) throw std::invalid_argument("--k must be at least 1");
    if (k > n) {
      err << cmd << ": warning: k=" << k << " exceeds n=" << n << ", clamped to " << n << "\n";
      k = n;
    }
    ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

//------------------------------------------------------------------------------

inline int cmd_fiedler(const Options& o, std::ostream& out, std::ostream& err) {
  const std::size_t threads = resolve_threads(o.threads);
  const Parallel par(threads);
  nlohmann::json timings;
  std::string phase = "load";
  try {
    PhaseTimer t;
    const SparseMatrix A = load_matrix_market(o.input);
    timings["load"] = t.stop();
    phase = "solve";
    const Solution sol = solve(A, o, par, timings);

    phase = "write";
    t.start();
    Outputs files(o.output_dir);
    {
      auto f = files.open("fiedler.txt");
      for (double v : sol.full_vector) f << format_double(v) << "\n";
    }
    if (o.p > 2) {
      auto f = files.open("eigenvalues.txt");
      for (double v : sol.results.front().eigenvalues) f << format_double(v) << "\n";
    }
    timings["write"] = t.stop();
    write_manifest(files, {{"subcommand", "fiedler"},
                           {"input", o.input},
                           {"config", config_json(o, threads)},
                           {"graph", graph_json(A, sol)},
                           {"solver", solution_json(sol)},
                           {"timings", timings}});

    out << "lambda2 " << format_double(sol.results.front().lambda2) << "\n";
    out << "relative_residual " << format_double(sol.results.front().relative_residual) << "\n";
    if (!sol.converged) {
      err << "fiedler: solver did not converge within " << o.max_outer << " outer iterations\n";
      return kExitUnconverged;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "fiedler: " << phase << " failed: " << e.what() << "\n";
    return kExitInputError;
  }
}

inline int cmd_reorder(const Options& o, std::ostream& out, std::ostream& err) {
  const std::size_t threads = resolve_threads(o.threads);
  const Parallel par(threads);
  nlohmann::json timings;
  std::string phase = "load";
  try {
    PhaseTimer t;
    const SparseMatrix A = load_matrix_market(o.input);
    timings["load"] = t.stop();
    phase = "solve";
    const Solution sol = solve(A, o, par, timings);

    phase = "reorder";
    t.start();
    const Permutation P = spectral_permutation(sol);
    const SparseMatrix B = apply_permutation(A, P);
    const auto ks = half_widths(o.ks, A.rows(), "reorder", err);
    const BandweightProfile before = bandweight_profile(A, ks);
    const BandweightProfile after = bandweight_profile(B, ks);
    timings["reorder"] = t.stop();

    phase = "write";
    t.start();
    Outputs files(o.output_dir);
    const std::string name = std::filesystem::path(o.input).stem().string();
    {
      auto f = files.open("permutation.txt");
      write_permutation(f, P, name, sol.results.front().lambda2);
    }
    {
      auto f = files.open("reordered.mtx");
      write_matrix_market(f, B, "spectral reordering of " + name);
    }
    {
      auto f = files.open("bandweight_original.csv");
      write_bandweight_csv(f, before);
    }
    {
      auto f = files.open("bandweight_reordered.csv");
      write_bandweight_csv(f, after);
    }
    if (o.plots) {
      {
        auto f = files.open("spy_original.svg");
        write_spy_svg(f, A, {128, 512, name + " (original)"});
      }
      {
        auto f = files.open("spy_reordered.svg");
        write_spy_svg(f, B, {128, 512, name + " (reordered)"});
      }
      auto f = files.open("bandweight.svg");
      write_profile_svg(f, {{"original", before}, {"reordered", after}});
    }
    timings["write"] = t.stop();

    nlohmann::json profile = nlohmann::json::array();
    for (std::size_t i = 0; i < ks.size(); ++i)
      profile.push_back({{"k", ks[i]}, {"original", before.weights[i]}, {"reordered", after.weights[i]}});
    write_manifest(files, {{"subcommand", "reorder"},
                           {"input", o.input},
                           {"config", config_json(o, threads)},
                           {"graph", graph_json(A, sol)},
                           {"solver", solution_json(sol)},
                           {"bandweight", profile},
                           {"timings", timings}});

    out << "lambda2 " << format_double(sol.results.front().lambda2) << "\n";
    if (!sol.converged) {
      err << "reorder: solver did not converge; permutation is best effort\n";
      return kExitUnconverged;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "reorder: " << phase << " failed: " << e.what() << "\n";
    return kExitInputError;
  }
}

inline int cmd_bandweight(const Options& o, std::ostream& out, std::ostream& err) {
  try {
    const SparseMatrix A = load_matrix_market(o.input);
    const std::vector<std::size_t> ks = half_widths(o.ks, A.rows(), "bandweight", err);
    const BandweightProfile profile = bandweight_profile(A, ks);
    if (o.output.empty()) {
      write_bandweight_csv(out, profile);
    } else {
      std::ofstream f(o.output);
      if (!f) throw InputError("cannot write '" + o.output + "'");
      write_bandweight_csv(f, profile);
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "bandweight: " << e.what() << "\n";
    return kExitInputError;
  }
}

//------------------------------------------------------------------------------

inline void add_solver_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--eps-out", o.eps_out, "outer residual tolerance")->check(CLI::PositiveNumber);
  cmd.add_option("--eps-in", o.eps_in, "inner PCG relative residual (default eps-out/10)")->check(CLI::PositiveNumber);
  cmd.add_option("--max-inner", o.max_inner, "PCG iteration cap")->check(CLI::PositiveNumber);
  cmd.add_option("--max-outer", o.max_outer, "outer iteration cap")->check(CLI::PositiveNumber);
  cmd.add_option("--p", o.p, "number of smallest eigenpairs")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", o.seed, "seed of the starting block");
  cmd.add_option("--threads", o.threads, "row blocks / workers (default FIEDLER_THREADS or all cores)");
  cmd.add_flag("--unweighted", o.unweighted, "use the 0/1 Laplacian");
  cmd.add_flag("--keep-diagonal", o.keep_diagonal, "add |A(i,i)| to the Laplacian diagonal");
  cmd.add_flag("--per-component", o.per_component, "solve each connected component separately");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Fiedler vectors of weighted graph Laplacians and spectral reordering"};
  app.require_subcommand(1);
  Options o;

  auto* fiedler = app.add_subcommand("fiedler", "compute the Fiedler vector");
  fiedler->add_option("--input", o.input, "Matrix Market file")->required();
  fiedler->add_option("--output-dir", o.output_dir, "directory for results");
  add_solver_flags(*fiedler, o);

  auto* reorder = app.add_subcommand("reorder", "spectral reordering and bandweight profiles");
  reorder->add_option("--input", o.input, "Matrix Market file")->required();
  reorder->add_option("--output-dir", o.output_dir, "directory for results");
  reorder->add_flag("--plots", o.plots, "emit SVG spy images and the profile plot");
  reorder->add_option("--k", o.ks, "half-width to sample (repeatable)")->take_all();
  add_solver_flags(*reorder, o);

  auto* band = app.add_subcommand("bandweight", "relative bandweight profile");
  band->add_option("--input", o.input, "Matrix Market file")->required();
  band->add_option("--k", o.ks, "half-width to sample (repeatable)")->take_all();
  band->add_option("--output", o.output, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (*fiedler) return cmd_fiedler(o, out, err);
  if (*reorder) return cmd_reorder(o, out, err);
  return cmd_bandweight(o, out, err);
}

}  // namespace fiedler::cli
