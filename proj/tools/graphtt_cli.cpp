// Command-line front end: completion jobs, synthetic benchmarks, the
// fiber-vs-core update comparison, and metric evaluation.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "graphtt/data.hpp"
#include "graphtt/graph.hpp"
#include "graphtt/image.hpp"
#include "graphtt/io.hpp"
#include "graphtt/metrics.hpp"
#include "graphtt/solver_opt.hpp"
#include "graphtt/solver_vi.hpp"

namespace fs = std::filesystem;
using namespace graphtt;

namespace {

std::vector<Index> expand_ranks(const std::vector<Index>& spec, Index order) {
  if (static_cast<Index>(spec.size()) == order + 1) return spec;
  if (spec.size() == 1) {
    std::vector<Index> r(static_cast<std::size_t>(order) + 1, spec[0]);
    r.front() = r.back() = 1;
    return r;
  }
  throw std::runtime_error("ranks must be a single interior value or D+1 entries");
}

std::vector<GraphLaplacian> build_laplacians(const std::string& kind, double alpha,
                                             const Shape& shape) {
  std::vector<GraphLaplacian> ls;
  for (Index jd : shape) {
    WeightSpec w;
    w.n = jd;
    w.alpha = alpha;
    w.kind = (kind == "exp") ? WeightSpec::Kind::ExpDecay : WeightSpec::Kind::Identity;
    ls.push_back(laplacian_from_spec(w));
  }
  return ls;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

DenseTensor load_any(const std::string& path) {
  if (ends_with(path, ".png")) return read_png(path);
  return load_tensor(path);
}

int worker_count() {
  if (const char* env = std::getenv("GRAPHTT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

void write_effective_config(const CLI::App& app, const std::string& out_dir) {
  std::ofstream os(out_dir + "/effective_config.ini");
  os << app.config_to_str(true, true);
}

struct SolveOutput {
  TTFormat tt;
  std::vector<std::string> convergence_rows;  // CSV body rows
  std::string convergence_header;
  Index iters = 0;
};

SolveOutput run_solver(const std::string& solver, const DenseTensor& y, const ObservationMask& o,
                       const DenseTensor& truth, const std::vector<Index>& ranks, double beta0,
                       const std::vector<GraphLaplacian>& laplacians, Index max_iters,
                       std::uint64_t seed) {
  SolveOutput out;
  const auto t_start = std::chrono::steady_clock::now();
  if (solver == "vi") {
    VIConfig cfg;
    cfg.init_ranks = ranks;
    cfg.laplacians = laplacians;
    cfg.max_iters = max_iters;
    cfg.seed = seed;
    out.convergence_header = "iter,rse,current_ranks,e_tau,seconds";
    std::vector<std::string> rows;
    const auto t0 = t_start;
    VISolver* solver_ptr = nullptr;
    VIConfig cfg2 = cfg;
    cfg2.on_iter = [&rows, &truth, t0, &solver_ptr](Index iter, const TTFormat& mean) {
      const double r = rse(truth, tt_reconstruct(mean));
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::ostringstream ss;
      ss << iter << "," << r << ",";
      const auto rk = mean.ranks();
      for (std::size_t i = 0; i < rk.size(); ++i) ss << (i ? ";" : "") << rk[i];
      ss << "," << solver_ptr->e_tau() << "," << secs;
      rows.push_back(ss.str());
    };
    VISolver vs2(y, o, cfg2);
    solver_ptr = &vs2;
    VIResult res = vs2.run();
    out.convergence_rows = std::move(rows);
    out.tt = res.mean;
    out.iters = res.iters;
    return out;
  }

  OptConfig cfg;
  cfg.ranks = ranks;
  cfg.beta0 = (solver == "baseline") ? 0.0 : beta0;
  cfg.update = (solver == "baseline") ? UpdateKind::Slice : UpdateKind::Fiber;
  cfg.laplacians = laplacians;
  cfg.max_sweeps = max_iters;
  cfg.seed = seed;
  out.convergence_header = "sweep,objective,rse,seconds";
  std::vector<double> rses;
  cfg.on_sweep = [&](Index, const TTFormat& tt) { rses.push_back(rse(truth, tt_reconstruct(tt))); };
  OptSolver solver_obj(y, o, cfg);
  OptResult res = solver_obj.run();
  for (Index s = 0; s < res.sweeps; ++s) {
    std::ostringstream ss;
    ss << (s + 1) << "," << res.objective_trace[static_cast<std::size_t>(s) + 1] << ","
       << rses[static_cast<std::size_t>(s)] << "," << res.sweep_seconds[static_cast<std::size_t>(s)];
    out.convergence_rows.push_back(ss.str());
  }
  out.tt = res.tt;
  out.iters = res.sweeps;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphtt: tensor-train completion with graph regularization"};
  app.set_config("--config", "", "Read options from an INI/TOML config file");
  app.require_subcommand(1);

  // Shared options.
  std::string input, mask_path, out_dir = ".", solver = "opt", graph_kind = "exp";
  double beta0 = 0.5, alpha = 1.0, missing_rate = -1.0, snr_db = 1e9, noise_var = -1.0;
  std::uint64_t seed = 0;
  Index max_iters = 100;
  std::vector<Index> ranks_spec{10};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--solver", solver, "opt | vi | baseline")
        ->check(CLI::IsMember({"opt", "vi", "baseline"}));
    sub->add_option("--beta0", beta0, "GraphTT-opt regularization strength");
    sub->add_option("--ranks", ranks_spec, "TT ranks: one interior value or D+1 entries");
    sub->add_option("--missing-rate", missing_rate, "random missing rate in [0,1)");
    sub->add_option("--snr-db", snr_db, "additive noise level as SNR (dB)");
    sub->add_option("--noise-var", noise_var, "additive noise variance (overrides --snr-db)");
    sub->add_option("--seed", seed, "master RNG seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--max-iters", max_iters, "sweep/iteration cap");
    sub->add_option("--graph", graph_kind, "exp | none")->check(CLI::IsMember({"exp", "none"}));
    sub->add_option("--alpha", alpha, "graph weight decay exp(-alpha |j-k|^2)");
  };

  auto* cmd_complete = app.add_subcommand("complete", "complete a tensor or image");
  cmd_complete->add_option("--input", input, "input tensor (.gtt) or image (.png)")->required();
  cmd_complete->add_option("--mask", mask_path, "observation mask file (GTT1 of 0/1)");
  add_common(cmd_complete);

  auto* cmd_bench = app.add_subcommand("synth-bench", "Monte-Carlo synthetic benchmark");
  std::vector<Index> shape_spec{20, 20, 20, 20}, true_ranks_spec{5};
  std::vector<double> snr_list{10.0}, mr_list{0.9}, beta0_list;
  std::vector<Index> init_ranks_list;
  Index trials = 1;
  cmd_bench->add_option("--shape", shape_spec, "tensor dimensions");
  cmd_bench->add_option("--true-ranks", true_ranks_spec, "generator TT ranks");
  cmd_bench->add_option("--snr-list", snr_list, "SNR grid (dB)");
  cmd_bench->add_option("--mr-list", mr_list, "missing-rate grid");
  cmd_bench->add_option("--beta0-list", beta0_list, "beta0 grid (opt solver)");
  cmd_bench->add_option("--init-ranks-list", init_ranks_list, "init-rank grid");
  cmd_bench->add_option("--trials", trials, "Monte-Carlo trials per grid cell");
  add_common(cmd_bench);

  auto* cmd_compare = app.add_subcommand("compare-updates", "fiber vs core update comparison");
  cmd_compare->add_option("--shape", shape_spec, "tensor dimensions");
  cmd_compare->add_option("--true-ranks", true_ranks_spec, "generator TT ranks");
  Index core_cap = 4096;
  cmd_compare->add_option("--core-cap", core_cap, "core-update system-size guard");
  add_common(cmd_compare);

  auto* cmd_metrics = app.add_subcommand("metrics", "evaluate RSE/PSNR/SSIM");
  std::string ref_path, est_path;
  cmd_metrics->add_option("--ref", ref_path, "reference tensor/image")->required();
  cmd_metrics->add_option("--est", est_path, "estimate tensor/image")->required();
  cmd_metrics->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir);

    if (*cmd_metrics) {
      const DenseTensor ref = load_any(ref_path);
      const DenseTensor est = load_any(est_path);
      std::ofstream os(out_dir + "/metrics.csv");
      os << "name,rse,psnr,ssim\n";
      os << fs::path(est_path).filename().string() << "," << rse(ref, est) << ","
         << psnr(ref, est) << "," << (ref.order() >= 2 ? ssim(ref, est) : 0.0) << "\n";
      std::cerr << "metrics written to " << out_dir << "/metrics.csv\n";
      return 0;
    }

    if (*cmd_complete) {
      if (!fs::exists(input)) {
        std::cerr << "error: input file not found: " << input << "\n";
        return 1;
      }
      const DenseTensor truth = load_any(input);
      const std::vector<Index> ranks = expand_ranks(ranks_spec, truth.order());
      ObservationMask mask = (mask_path.empty())
                                 ? random_mask(truth.shape(),
                                               missing_rate >= 0.0 ? missing_rate : 0.9, seed)
                                 : ObservationMask::from_tensor(load_tensor(mask_path));
      if (!mask_path.empty() && missing_rate >= 0.0)
        mask = mask & random_mask(truth.shape(), missing_rate, seed);
      double sigma2 = 0.0;
      if (noise_var >= 0.0)
        sigma2 = noise_var;
      else if (snr_db < 1e8)
        sigma2 = snr_to_sigma2(truth, snr_db);
      const DenseTensor y = add_noise(truth, sigma2, seed);
      const auto laplacians = build_laplacians(graph_kind, alpha, truth.shape());

      SolveOutput res =
          run_solver(solver, y, mask, truth, ranks, beta0, laplacians, max_iters, seed);
      const DenseTensor recon = tt_reconstruct(res.tt);
      save_tensor(out_dir + "/recovered.gtt", recon);
      save_tt(out_dir + "/recovered_tt.gttc", res.tt);
      if (ends_with(input, ".png")) write_png(out_dir + "/recovered.png", recon);
      {
        std::ofstream os(out_dir + "/convergence.csv");
        os << res.convergence_header << "\n";
        for (const auto& r : res.convergence_rows) os << r << "\n";
      }
      {
        std::ofstream os(out_dir + "/metrics.csv");
        os << "name,rse,psnr,ssim\n";
        os << fs::path(input).filename().string() << "," << rse(truth, recon) << ","
           << psnr(truth, recon) << "," << (truth.order() >= 2 ? ssim(truth, recon) : 0.0)
           << "\n";
      }
      write_effective_config(app, out_dir);
      std::cerr << "effective beta0=" << beta0 << " solver=" << solver << " iters=" << res.iters
                << "\n";
      return 0;
    }

    if (*cmd_bench) {
      const std::vector<Index> true_ranks =
          expand_ranks(true_ranks_spec, static_cast<Index>(shape_spec.size()));
      if (beta0_list.empty()) beta0_list.push_back(beta0);
      if (init_ranks_list.empty()) init_ranks_list.push_back(ranks_spec[0]);

      struct Cell {
        Index trial;
        double snr, mr, param;
        Index init_rank;
      };
      std::vector<Cell> cells;
      for (double s : snr_list)
        for (double mr : mr_list)
          for (double b0 : beta0_list)
            for (Index ir : init_ranks_list)
              for (Index t = 0; t < trials; ++t) cells.push_back({t, s, mr, b0, ir});

      std::vector<std::string> rows(cells.size());
      std::atomic<std::size_t> next{0};
      auto work = [&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) break;
          const Cell& c = cells[i];
          SyntheticSpec sp;
          sp.shape = shape_spec;
          sp.ranks = true_ranks;
          sp.seed = seed + 1000003ULL * static_cast<std::uint64_t>(c.trial);
          const SyntheticData data = gen_synthetic_tt(sp);
          const double sigma2 = snr_to_sigma2(data.truth, c.snr);
          const DenseTensor y = add_noise(data.truth, sigma2, sp.seed + 1);
          const ObservationMask mask = random_mask(sp.shape, c.mr, sp.seed + 2);
          const auto laplacians = build_laplacians(graph_kind, alpha, sp.shape);
          const std::vector<Index> init_ranks =
              expand_ranks({c.init_rank}, static_cast<Index>(shape_spec.size()));
          const auto t0 = std::chrono::steady_clock::now();
          SolveOutput res = run_solver(solver, y, mask, data.truth, init_ranks, c.param,
                                       laplacians, max_iters, sp.seed + 3);
          const double secs =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          const double final_rse = rse(data.truth, tt_reconstruct(res.tt));
          std::ostringstream ss;
          ss << c.trial << "," << c.snr << "," << c.mr << "," << solver << "," << c.param << ","
             << c.init_rank << "," << final_rse << "," << res.iters << "," << secs;
          rows[i] = ss.str();
        }
      };
      const int nw = worker_count();
      std::vector<std::thread> pool;
      for (int w = 1; w < nw; ++w) pool.emplace_back(work);
      work();
      for (auto& th : pool) th.join();

      std::ofstream os(out_dir + "/results.csv");
      os << "trial,snr,mr,solver,param,init_rank,final_rse,iters,seconds\n";
      for (const auto& r : rows) os << r << "\n";
      write_effective_config(app, out_dir);
      std::cerr << "wrote " << rows.size() << " rows to " << out_dir << "/results.csv\n";
      return 0;
    }

    if (*cmd_compare) {
      const std::vector<Index> true_ranks =
          expand_ranks(true_ranks_spec, static_cast<Index>(shape_spec.size()));
      const std::vector<Index> init_ranks =
          expand_ranks(ranks_spec, static_cast<Index>(shape_spec.size()));
      for (std::size_t d = 0; d + 1 < init_ranks.size(); ++d) {
        const Index dim = core_system_dim(shape_spec, init_ranks, static_cast<Index>(d));
        if (dim > core_cap) {
          std::cerr << "error: core update refused; mode " << d << " joint system is "
                    << shape_spec[d] << "*" << init_ranks[d] << "*" << init_ranks[d + 1] << " = "
                    << dim << " > cap " << core_cap << "\n";
          return 1;
        }
      }
      SyntheticSpec sp;
      sp.shape = shape_spec;
      sp.ranks = true_ranks;
      sp.seed = seed;
      const SyntheticData data = gen_synthetic_tt(sp);
      double sigma2 = (noise_var >= 0.0)  ? noise_var
                      : (snr_db < 1e8)    ? snr_to_sigma2(data.truth, snr_db)
                                          : 0.0;
      const DenseTensor y = add_noise(data.truth, sigma2, seed + 1);
      const ObservationMask mask =
          random_mask(sp.shape, missing_rate >= 0.0 ? missing_rate : 0.9, seed + 2);
      const auto laplacians = build_laplacians(graph_kind, alpha, sp.shape);

      std::ofstream os(out_dir + "/compare.csv");
      os << "kind,sweep,objective,rse,seconds\n";
      for (const std::string kind : {"fiber", "core"}) {
        OptConfig cfg;
        cfg.ranks = init_ranks;
        cfg.beta0 = beta0;
        cfg.update = (kind == "core") ? UpdateKind::Core : UpdateKind::Fiber;
        cfg.core_system_cap = core_cap;
        cfg.laplacians = laplacians;
        cfg.max_sweeps = max_iters;
        cfg.seed = seed + 3;
        std::vector<double> rses;
        cfg.on_sweep = [&](Index, const TTFormat& tt) {
          rses.push_back(rse(data.truth, tt_reconstruct(tt)));
        };
        OptSolver solver_obj(y, mask, cfg);
        OptResult res = solver_obj.run();
        for (Index s = 0; s < res.sweeps; ++s)
          os << kind << "," << (s + 1) << ","
             << res.objective_trace[static_cast<std::size_t>(s) + 1] << ","
             << rses[static_cast<std::size_t>(s)] << ","
             << res.sweep_seconds[static_cast<std::size_t>(s)] << "\n";
      }
      write_effective_config(app, out_dir);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
