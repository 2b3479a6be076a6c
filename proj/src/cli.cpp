#include "mfsp/cli.hpp"

#include "mfsp/baselines.hpp"
#include "mfsp/errors.hpp"
#include "mfsp/greedy.hpp"
#include "mfsp/io.hpp"
#include "mfsp/iterative.hpp"
#include "mfsp/random.hpp"
#include "mfsp/reconstruct.hpp"
#include "mfsp/reduced_basis.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace mfsp::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
T resolve(const std::optional<T>& flag, const std::optional<T>& config, const char* name) {
  if (flag) return *flag;
  if (config) return *config;
  throw UsageError(std::string("missing required parameter --") + name);
}

template <class T>
T resolve(const std::optional<T>& flag, const std::optional<T>& config, T fallback) {
  if (flag) return *flag;
  if (config) return *config;
  return fallback;
}

// Flags shared by every subcommand that poses a design problem.
struct ProblemFlags {
  std::optional<double> cost_cheap, cost_exp, sigma_cheap, sigma_exp, budget;

  void attach(CLI::App* app) {
    app->add_option("--cost-cheap", cost_cheap, "Cost of one cheap sensor");
    app->add_option("--cost-exp", cost_exp, "Cost of one expensive sensor");
    app->add_option("--sigma-cheap", sigma_cheap, "Noise standard deviation of cheap sensors");
    app->add_option("--sigma-exp", sigma_exp, "Noise standard deviation of expensive sensors");
    app->add_option("--budget", budget, "Total budget");
  }

  FidelityClass cheap(const io::RunConfig& cfg) const {
    return {resolve(cost_cheap, cfg.cost_cheap, "cost-cheap"),
            resolve(sigma_cheap, cfg.sigma_cheap, "sigma-cheap")};
  }
  FidelityClass exp(const io::RunConfig& cfg) const {
    return {resolve(cost_exp, cfg.cost_exp, "cost-exp"),
            resolve(sigma_exp, cfg.sigma_exp, "sigma-exp")};
  }
  double total(const io::RunConfig& cfg) const { return resolve(budget, cfg.budget, "budget"); }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string config_path;

  io::RunConfig config() const {
    return config_path.empty() ? io::RunConfig{} : io::load_config(config_path);
  }
};

io::DesignFile to_file(const ProblemInstance& inst, DesignResult result) {
  io::DesignFile file;
  file.result = std::move(result);
  file.cheap = inst.cheap;
  file.exp = inst.exp;
  file.fingerprint = io::instance_fingerprint(inst);
  return file;
}

void print_design(std::ostream& out, const DesignResult& r) {
  out << r.algorithm << " k_ch=" << r.selection.cheap_idx.size()
      << " k_exp=" << r.selection.exp_idx.size() << " spend=" << io::format_double(r.spend)
      << " phi_d=" << io::format_double(r.phi_d);
  if (r.iterative) {
    out << " |K|=" << r.iterative->candidates << " t=" << r.iterative->refinements;
  }
  out << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budget-constrained multifidelity D-optimal sensor placement"};
  app.require_subcommand(1);
  Context ctx{out, err, {}};
  app.add_option("--config", ctx.config_path, "key=value configuration file (flags override it)");

  std::function<void()> action;

  // basis ------------------------------------------------------------------
  auto* basis = app.add_subcommand("basis", "Build and persist a reduced model from snapshots");
  struct {
    std::string data, format, out, mask, measure;
    std::optional<double> energy, lambda, train_frac;
    std::optional<std::size_t> max_modes;
    bool no_center = false;
  } b;
  basis->add_option("--data", b.data, "Snapshot matrix (N x p), CSV or MFSM")->required();
  basis->add_option("--format", b.format, "csv | mfsm (default: from extension)");
  basis->add_option("--out", b.out, "Model output directory")->required();
  basis->add_option("--energy", b.energy, "Cumulative energy threshold (default 0.99)");
  basis->add_option("--energy-measure", b.measure, "squared | linear (default squared)");
  basis->add_option("--lambda", b.lambda, "Prior scale (default 0.01)");
  basis->add_option("--train-frac", b.train_frac, "Chronological training fraction (default 0.70)");
  basis->add_option("--max-modes", b.max_modes, "Upper bound on retained modes");
  basis->add_option("--mask", b.mask, "Candidate mask (N x 1, nonzero = candidate)");
  basis->add_flag("--no-center", b.no_center, "Do not subtract the training mean");
  basis->callback([&] {
    action = [&] {
      const io::RunConfig cfg = ctx.config();
      const Matrix raw = io::load_matrix(
          b.data, b.format.empty() ? std::nullopt : std::optional(io::parse_format(b.format)));
      const double frac = resolve(b.train_frac, cfg.train_frac, io::kDefaultTrainFrac);
      auto [train, test] = split_chronological(raw, frac);
      const bool center = b.no_center ? false : cfg.center.value_or(true);
      BasisOptions opts;
      opts.energy = resolve(b.energy, cfg.energy, io::kDefaultEnergy);
      opts.max_modes = b.max_modes;
      const std::string measure =
          !b.measure.empty() ? b.measure : cfg.energy_measure.value_or("squared");
      if (measure == "squared") opts.measure = EnergyMeasure::squared;
      else if (measure == "linear") opts.measure = EnergyMeasure::linear;
      else throw UsageError("--energy-measure must be squared or linear");
      IndexSet cand;
      const std::string mask = !b.mask.empty() ? b.mask : cfg.candidate_mask.value_or("");
      if (!mask.empty()) cand = io::load_candidate_mask(mask);
      const ReducedModel model =
          make_reduced_model(make_snapshots(std::move(train), center),
                             resolve(b.lambda, cfg.lambda, io::kDefaultLambda), opts, cand);
      io::save_model(b.out, model);
      if (test.cols() > 0) io::write_mfsm(fs::path(b.out) / "test.mfsm", test);
      ctx.out << "modes=" << model.dim() << " locations=" << model.phi.rows()
              << " candidates=" << model.locations() << " train=" << model.snapshot_count
              << " test=" << test.cols() << '\n';
    };
  });

  // design -----------------------------------------------------------------
  auto* design = app.add_subcommand("design", "Select sensors and write a design file");
  struct {
    std::string model, out;
    std::optional<std::string> algorithm;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_iters;
    std::optional<unsigned> threads;
    std::optional<std::size_t> k_cheap, k_exp;
    ProblemFlags problem;
  } d;
  design->add_option("--model", d.model, "Model directory")->required();
  design->add_option("--algorithm", d.algorithm, "greedy | greedy-naive | iterative | random");
  design->add_option("--out", d.out, "Design file to write")->required();
  design->add_option("--seed", d.seed, "Run seed (random designs)");
  design->add_option("--max-iters", d.max_iters, "Refinement cap per allocation (default 20)");
  design->add_option("--threads", d.threads, "Worker threads");
  design->add_option("--k-cheap", d.k_cheap, "Cheap sensor count (random)");
  design->add_option("--k-exp", d.k_exp, "Expensive sensor count (random)");
  d.problem.attach(design);
  design->callback([&] {
    action = [&] {
      const io::RunConfig cfg = ctx.config();
      const std::string algorithm = resolve(d.algorithm, cfg.algorithm, std::string("greedy"));
      if (algorithm != "greedy" && algorithm != "greedy-naive" && algorithm != "iterative" &&
          algorithm != "random") {
        throw UsageError("unknown algorithm '" + algorithm + "'");
      }
      const FidelityClass cheap = d.problem.cheap(cfg);
      const FidelityClass exp = d.problem.exp(cfg);
      const double budget = d.problem.total(cfg);
      const ReducedModel model = io::load_model(d.model);
      const ProblemInstance inst = assemble_instance(model, cheap, exp, budget);

      DesignResult result;
      if (algorithm == "greedy") {
        result = greedy_sm(inst);
      } else if (algorithm == "greedy-naive") {
        result = greedy_naive(inst);
      } else if (algorithm == "iterative") {
        IterativeOptions opts;
        opts.max_iters = resolve(d.max_iters, cfg.max_iters, io::kDefaultMaxIters);
        opts.threads = resolve(d.threads, cfg.threads, 1u);
        IterativeReport report = iterative_select(inst, opts);
        for (const auto& c : report.per_candidate) {
          if (c.skipped) ctx.err << "warning: " << c.warning << '\n';
        }
        result = std::move(report.winner);
      } else {
        if (!d.k_cheap || !d.k_exp) throw UsageError("random designs need --k-cheap and --k-exp");
        const Allocation alloc{*d.k_cheap, *d.k_exp};
        if (!fits_budget(alloc.k_cheap, alloc.k_exp, cheap, exp, budget)) {
          throw InvalidInput("requested allocation exceeds the budget");
        }
        const std::uint64_t seed = resolve(d.seed, cfg.seed, std::uint64_t{0});
        result.algorithm = "random";
        result.selection =
            random_design(alloc, inst.locations(), derive_seed(seed, "random-design"));
        result.phi_d = phi_d(inst, result.selection);
        result.budget = budget;
        result.spend = spend(alloc.k_cheap, alloc.k_exp, cheap, exp);
      }
      io::write_design(d.out, to_file(inst, result));
      print_design(ctx.out, result);
    };
  });

  // reconstruct ------------------------------------------------------------
  auto* recon = app.add_subcommand("reconstruct", "MAP reconstruction of one snapshot");
  struct {
    std::string model, design, data, out;
    std::size_t snapshot = 0;
    std::optional<std::uint64_t> seed;
    bool noise_free = false;
  } r;
  recon->add_option("--model", r.model, "Model directory")->required();
  recon->add_option("--design", r.design, "Design file")->required();
  recon->add_option("--data", r.data, "Snapshot matrix holding the truth")->required();
  recon->add_option("--snapshot", r.snapshot, "Column of --data to reconstruct (default 0)");
  recon->add_option("--out", r.out, "Estimated state (N x 1), CSV or MFSM")->required();
  recon->add_option("--seed", r.seed, "Noise seed");
  recon->add_flag("--noise-free", r.noise_free, "Measure the truth without noise");
  recon->callback([&] {
    action = [&] {
      const io::RunConfig cfg = ctx.config();
      const ReducedModel model = io::load_model(r.model);
      const io::DesignFile file = io::read_design(r.design);
      io::instance_for_design(model, file);
      const Matrix data = io::load_matrix(r.data);
      if (static_cast<Eigen::Index>(r.snapshot) >= data.cols()) {
        throw InvalidInput("--snapshot is out of range");
      }
      if (data.rows() != model.phi.rows()) {
        throw InvalidInput("--data rows do not match the model");
      }
      const Vector truth = data.col(static_cast<Eigen::Index>(r.snapshot));
      const std::uint64_t seed = resolve(r.seed, cfg.seed, std::uint64_t{0});
      const Measurement y = simulate_measurement(
          truth, file.result.selection, model.cand_idx, r.noise_free ? 0.0 : file.cheap.sigma,
          r.noise_free ? 0.0 : file.exp.sigma, derive_seed(seed, "noise", r.snapshot));
      const Reconstruction rec = reconstruct(model, file.cheap, file.exp, y);
      io::save_matrix(r.out, rec.state);
      ctx.out << "sensors=" << y.values.size();
      if (truth.norm() > 0.0) ctx.out << " rel_err=" << io::format_double(relative_error(truth, rec.state));
      ctx.out << '\n';
    };
  });

  // evaluate ---------------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "Average relative reconstruction error on a test set");
  struct {
    std::string model, design, data, out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool noise_free = false;
  } e;
  eval->add_option("--model", e.model, "Model directory")->required();
  eval->add_option("--design", e.design, "Design file")->required();
  eval->add_option("--data", e.data, "Test snapshots (default: <model>/test.mfsm)");
  eval->add_option("--out", e.out, "Write per-snapshot errors as CSV");
  eval->add_option("--seed", e.seed, "Noise seed");
  eval->add_option("--threads", e.threads, "Worker threads");
  eval->add_flag("--noise-free", e.noise_free, "Measure the truth without noise");
  eval->callback([&] {
    action = [&] {
      const io::RunConfig cfg = ctx.config();
      const ReducedModel model = io::load_model(e.model);
      const io::DesignFile file = io::read_design(e.design);
      io::instance_for_design(model, file);
      const fs::path data = e.data.empty() ? fs::path(e.model) / "test.mfsm" : fs::path(e.data);
      EvalOptions opts;
      opts.seed = resolve(e.seed, cfg.seed, std::uint64_t{0});
      opts.noise_free = e.noise_free;
      opts.threads = resolve(e.threads, cfg.threads, 1u);
      const EvalSummary s =
          evaluate(model, file.cheap, file.exp, file.result.selection, io::load_matrix(data), opts);
      for (const auto& w : s.warnings) ctx.err << "warning: " << w << '\n';
      if (!e.out.empty()) io::save_matrix(e.out, s.per_snapshot_rel_err);
      ctx.out << "mean_rel_err=" << io::format_double(s.mean_rel_err)
              << " snapshots=" << s.per_snapshot_rel_err.size()
              << " k_ch=" << s.allocation.k_cheap << " k_exp=" << s.allocation.k_exp
              << " phi_d=" << io::format_double(s.phi_d) << '\n';
    };
  });

  // prune ------------------------------------------------------------------
  auto* prune = app.add_subcommand("prune", "Print feasible allocation count, |K|, and its bound");
  struct {
    std::optional<double> cost_cheap, cost_exp, budget;
    bool list = false;
  } p;
  prune->add_option("--cost-cheap", p.cost_cheap, "Cost of one cheap sensor");
  prune->add_option("--cost-exp", p.cost_exp, "Cost of one expensive sensor");
  prune->add_option("--budget", p.budget, "Total budget");
  prune->add_flag("--list", p.list, "Also list the candidate allocations");
  prune->callback([&] {
    action = [&] {
      const io::RunConfig cfg = ctx.config();
      const CandidateSet set =
          prune_allocations(resolve(p.cost_cheap, cfg.cost_cheap, "cost-cheap"),
                            resolve(p.cost_exp, cfg.cost_exp, "cost-exp"),
                            resolve(p.budget, cfg.budget, "budget"));
      ctx.out << set.feasible_count << ' ' << set.allocations.size() << ' ' << set.bound << '\n';
      if (p.list) {
        for (const auto& a : set.allocations) ctx.out << a.k_cheap << ' ' << a.k_exp << '\n';
      }
    };
  });

  // compare ----------------------------------------------------------------
  auto* compare = app.add_subcommand("compare", "Compare designs against random designs");
  struct {
    std::string model, data, out_table, out_hist;
    std::vector<std::string> designs;
    std::size_t samples = 1000, bins = 40;
    std::optional<std::uint64_t> seed;
    bool noise_free = false;
  } c;
  compare->add_option("--model", c.model, "Model directory")->required();
  compare->add_option("--designs", c.designs, "Design files sharing one instance")->required();
  compare->add_option("--samples", c.samples, "Random designs per candidate allocation (default 1000)");
  compare->add_option("--bins", c.bins, "Histogram bins (default 40)");
  compare->add_option("--seed", c.seed, "Run seed");
  compare->add_option("--data", c.data, "Test snapshots for the mean_rel_err column");
  compare->add_flag("--noise-free", c.noise_free, "Evaluate without measurement noise");
  compare->add_option("--out-table", c.out_table, "Comparison CSV")->required();
  compare->add_option("--out-hist", c.out_hist, "Histogram CSV")->required();
  compare->callback([&] {
    action = [&] {
      const io::RunConfig cfg = ctx.config();
      const ReducedModel model = io::load_model(c.model);
      std::vector<io::DesignFile> files;
      for (const auto& path : c.designs) files.push_back(io::read_design(path));
      const ProblemInstance inst = io::instance_for_design(model, files.front());
      std::vector<DesignResult> results;
      for (const auto& f : files) {
        if (f.fingerprint != files.front().fingerprint) {
          throw InvalidInput("designs were computed for different problem instances");
        }
        results.push_back(f.result);
      }
      RandomSpec spec;
      spec.samples_per_allocation = c.samples;
      spec.bins = c.bins;
      spec.seed = resolve(c.seed, cfg.seed, std::uint64_t{0});
      Comparison cmp = compare_designs(inst, results, spec);
      if (!c.data.empty()) {
        const Matrix test = io::load_matrix(c.data);
        EvalOptions opts;
        opts.seed = spec.seed;
        opts.noise_free = c.noise_free;
        for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
          cmp.rows[i].mean_rel_err =
              evaluate(model, inst.cheap, inst.exp, results[i].selection, test, opts).mean_rel_err;
        }
      }
      io::write_text(c.out_table, io::format_comparison_csv(cmp));
      io::write_text(c.out_hist, io::format_histogram_csv(cmp));
      for (const auto& row : cmp.rows) {
        ctx.out << row.name << " phi_d=" << io::format_double(row.phi_d) << '\n';
      }
      if (!cmp.random_phi_d.empty()) {
        const auto [lo, hi] = std::minmax_element(cmp.random_phi_d.begin(), cmp.random_phi_d.end());
        ctx.out << "random samples=" << cmp.random_phi_d.size() << " min=" << io::format_double(*lo)
                << " max=" << io::format_double(*hi) << '\n';
      }
    };
  });

  // oracle -----------------------------------------------------------------
  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum for small candidate sets");
  struct {
    std::string model, out;
    ProblemFlags problem;
  } o;
  oracle->add_option("--model", o.model, "Model directory")->required();
  oracle->add_option("--out", o.out, "Design file to write");
  o.problem.attach(oracle);
  oracle->callback([&] {
    action = [&] {
      const io::RunConfig cfg = ctx.config();
      const ReducedModel model = io::load_model(o.model);
      const ProblemInstance inst =
          assemble_instance(model, o.problem.cheap(cfg), o.problem.exp(cfg), o.problem.total(cfg));
      const DesignResult result = exhaustive_search(inst);
      if (!o.out.empty()) io::write_design(o.out, to_file(inst, result));
      print_design(ctx.out, result);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    action();
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalBreakdown& e) {
    err << "numerical breakdown: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace mfsp::cli
