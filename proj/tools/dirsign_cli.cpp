// Command-line front end: loss evaluation, persistence diagrams, calibration,
// demo training and the scaling benchmark.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <new>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dirsign/dirsign.hpp"

// Allocation accounting for the benchmark's peak-memory column.
namespace {
std::atomic<std::size_t> g_live_bytes{0};
std::atomic<std::size_t> g_peak_bytes{0};
std::atomic<std::size_t> g_peak_base{0};

void note_alloc(std::size_t n) {
  std::size_t now = g_live_bytes.fetch_add(n) + n;
  std::size_t peak = g_peak_bytes.load();
  while (now > peak && !g_peak_bytes.compare_exchange_weak(peak, now)) {}
}
}  // namespace

void* operator new(std::size_t n) {
  // Size header keeps the accounting exact on delete.
  auto* p = static_cast<std::size_t*>(std::malloc(n + sizeof(std::max_align_t)));
  if (!p) throw std::bad_alloc();
  *p = n;
  note_alloc(n);
  return reinterpret_cast<char*>(p) + sizeof(std::max_align_t);
}
void operator delete(void* p) noexcept {
  if (!p) return;
  auto* base = reinterpret_cast<std::size_t*>(static_cast<char*>(p) - sizeof(std::max_align_t));
  g_live_bytes.fetch_sub(*base);
  std::free(base);
}
void operator delete(void* p, std::size_t) noexcept { operator delete(p); }

namespace {

using namespace dirsign;
namespace fs = std::filesystem;

std::string fmt17(double v) { return format_diagram_value(v); }

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::stringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw Error(Errc::config, "bad list item '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(Errc::config, "empty list");
  return out;
}

struct DslArgs {
  std::string x, y;
  double sharpness = 32.0;
  std::string sign = "tanh";
  std::string weights;
  bool exact_units = false;
  bool scale = false;
  bool skip_batch = false;
  std::string reduction = "mean";
  std::string grad_prefix;
};

int run_dsl(const DslArgs& a) {
  DslConfig cfg;
  cfg.sharpness = a.sharpness;
  cfg.sign_kind = a.sign == "exact" ? SignKind::exact : a.sign == "softsign" ? SignKind::softsign : SignKind::tanh;
  cfg.match_exact_units = !a.scale;  // unit matching is the default
  cfg.scale_by_comparisons = a.scale;
  cfg.skip_batch_axis = a.skip_batch;
  cfg.reduction = a.reduction == "sum" ? Reduction::sum : a.reduction == "none" ? Reduction::none : Reduction::mean;
  if (!a.weights.empty()) cfg.weights = parse_list<double>(a.weights);

  Tensor x = read_tensor(a.x), y = read_tensor(a.y);
  if (cfg.skip_batch_axis && cfg.reduction == Reduction::none) {
    for (double v : dsl_forward_per_example(x, y, cfg).values()) std::cout << fmt17(v) << '\n';
  } else {
    std::cout << fmt17(dsl_forward(x, y, cfg)) << '\n';
  }
  if (!a.grad_prefix.empty()) {
    auto g = dsl_gradient(x, y, cfg);
    write_tensor(g.d_y, a.grad_prefix + "_dy.dst");
    write_tensor(g.d_x, a.grad_prefix + "_dx.dst");
    write_tensor(Tensor(Shape{1}, std::vector<double>{g.d_sharpness}), a.grad_prefix + "_ds.dst");
  }
  return 0;
}

int run_persistence(const std::string& in, const std::string& out) {
  auto diagram = sublevel_persistence_0d(read_tensor(in));
  if (out.empty()) std::cout << format_diagram(diagram);
  else write_diagram(diagram, out);
  return 0;
}

InfiniteDeathPolicy parse_policy(const std::string& s) {
  if (s == "cap") return InfiniteDeathPolicy::cap_at_global_max;
  if (s == "drop") return InfiniteDeathPolicy::drop;
  if (s == "reject") return InfiniteDeathPolicy::reject;
  throw Error(Errc::config, "unknown infinite-death policy '" + s + "'");
}

std::vector<Tensor> load_examples(const fs::path& dir, bool stacked) {
  if (!fs::is_directory(dir)) throw Error(Errc::io, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".dst") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Tensor> out;
  for (const auto& f : files) {
    Tensor t = read_tensor(f);
    if (!stacked) {
      out.push_back(std::move(t));
      continue;
    }
    if (t.rank() < 2) throw Error(Errc::shape, f.string() + ": stacked files need rank >= 2");
    for (std::size_t i = 0; i < t.extent(0); ++i) out.push_back(slice_leading(t, i));
  }
  if (out.empty()) throw Error(Errc::io, "no .dst files in " + dir.string());
  return out;
}

struct CalibrateArgs {
  std::string dir;
  std::string ref = "mse";
  std::size_t max_steps = 5000;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t batch = 64;
  double step_size = 0.5;
  double initial = 1.0;
  bool stacked = false;
  std::string log = "calibration_log.csv";
};

int run_calibrate(const CalibrateArgs& a) {
  CalibrationConfig cfg;
  cfg.max_steps = a.max_steps;
  cfg.threshold = a.eps;
  cfg.seed = a.seed;
  cfg.batch_size = a.batch;
  cfg.step_size = a.step_size;
  cfg.initial_sharpness = a.initial;
  cfg.reference_loss = a.ref == "mae" ? ReferenceLoss::mae : ReferenceLoss::mse;
  auto data = load_examples(a.dir, a.stacked);
  auto result = find_sharpness(data, cfg);
  std::ofstream log(a.log, std::ios::trunc);
  if (!log) throw Error(Errc::io, "cannot write " + a.log);
  log << "step,s,opt_loss\n";
  for (const auto& s : result.log) log << s.step << ',' << fmt17(s.sharpness) << ',' << fmt17(s.opt_loss) << '\n';
  std::cout << fmt17(result.sharpness) << '\n';
  std::cerr << "steps " << result.steps_taken << ", final opt loss " << fmt17(result.final_opt_loss) << '\n';
  return 0;
}

struct DemoArgs {
  std::string kind;
  double mse = 1.0;
  double dsl = 128.0;
  std::uint64_t seed = 0;
  std::string out = "demo_out";
  std::size_t batches = 0;
  std::size_t batch_size = 0;
  std::size_t count = 0;
};

int run_train_demo(const DemoArgs& a) {
  DemoKind kind = parse_demo_kind(a.kind);
  DemoPreset preset = demo_preset(kind);
  preset.train.mse_weight = a.mse;
  preset.train.dsl_weight = a.dsl;
  preset.train.seed = a.seed;
  if (a.batches) preset.train.total_batches = a.batches;
  if (a.batch_size) preset.train.batch_size = a.batch_size;
  if (a.count) preset.dataset_size = a.count;
  if (preset.dataset_size < 2) throw Error(Errc::config, "dataset needs at least 2 examples");

  DemoRun run = run_demo(kind, preset, a.seed);
  fs::path out(a.out);
  fs::create_directories(out);
  save_checkpoint(run.trained.model, out / "checkpoint");

  std::ofstream log(out / "train_log.csv", std::ios::trunc);
  log << "batch,mse_term,dsl_term,total\n";
  for (const auto& e : run.trained.log)
    log << e.batch << ',' << fmt17(e.mse_term) << ',' << (e.dsl_term ? fmt17(*e.dsl_term) : "") << ','
        << fmt17(e.total) << '\n';

  auto evals = evaluate_reconstructions(run.held_out, run.reconstruction);
  std::ofstream ev(out / "evaluation.csv", std::ios::trunc);
  ev << "example,directional_agreement,persistence_wasserstein,correlation_distance\n";
  double agree = 0.0, wass = 0.0, corr = 0.0;
  for (const auto& e : evals) {
    ev << e.index << ',' << fmt17(e.directional_agreement) << ',' << fmt17(e.wasserstein) << ','
       << fmt17(e.correlation_distance) << '\n';
    agree += e.directional_agreement;
    wass += e.wasserstein;
    corr += e.correlation_distance;
  }
  double n = static_cast<double>(evals.size());
  std::cout << "held-out examples " << evals.size() << "\nmean directional agreement " << agree / n
            << "\nmean persistence wasserstein " << wass / n << "\nmean correlation distance " << corr / n << '\n';
  return 0;
}

struct BenchArgs {
  std::string kinds = "dsl,mse,exact-sign,persistence-wasserstein,correlation-distance";
  std::string ranks = "1,2";
  std::string sizes = "16,64,256,1024,4096";
  std::size_t reps = 3;
  double budget = 1.0;
  std::string csv;
  std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& a) {
  BenchOptions opt;
  opt.kinds.clear();
  for (const auto& k : parse_list<std::string>(a.kinds)) opt.kinds.push_back(parse_loss_kind(k));
  opt.ranks = parse_list<std::size_t>(a.ranks);
  opt.sizes = parse_list<std::size_t>(a.sizes);
  opt.repetitions = a.reps;
  opt.time_budget_seconds = a.budget;
  opt.seed = a.seed;
  opt.reset_peak_alloc = [] {
    g_peak_base = g_live_bytes.load();
    g_peak_bytes = g_live_bytes.load();
  };
  opt.peak_alloc = [] { return g_peak_bytes.load() - g_peak_base.load(); };
  auto records = benchmark_losses(opt);

  std::ostringstream csv;
  csv << "loss_kind,rank,size,elements,wall_time_seconds,repetitions,peak_alloc_bytes,over_budget\n";
  for (const auto& r : records) {
    csv << loss_kind_name(r.kind) << ',' << r.rank << ',' << r.size << ',' << r.elements << ','
        << fmt17(r.wall_time_seconds) << ',' << r.repetitions << ','
        << (r.peak_alloc_bytes ? std::to_string(*r.peak_alloc_bytes) : "") << ',' << (r.over_budget ? 1 : 0)
        << '\n';
  }
  if (a.csv.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(a.csv, std::ios::trunc);
    if (!f) throw Error(Errc::io, "cannot write " + a.csv);
    f << csv.str();
    std::cout << "wrote " << records.size() << " records to " << a.csv << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directional sign loss and topological comparison tools"};
  app.require_subcommand(1);

  DslArgs dsl;
  auto* dsl_cmd = app.add_subcommand("dsl", "directional sign loss between two tensors");
  dsl_cmd->add_option("X", dsl.x, "first tensor (.dst)")->required();
  dsl_cmd->add_option("Y", dsl.y, "second tensor (.dst)")->required();
  dsl_cmd->add_option("--sharpness", dsl.sharpness, "sharpness s")->capture_default_str();
  dsl_cmd->add_option("--sign", dsl.sign, "sign-like function")
      ->check(CLI::IsMember({"tanh", "softsign", "exact"}))
      ->capture_default_str();
  dsl_cmd->add_option("--weights", dsl.weights, "comma-separated per-axis weights");
  auto* units = dsl_cmd->add_flag("--exact-units", dsl.exact_units, "halve mismatches to count flips (default)");
  auto* scale = dsl_cmd->add_flag("--scale", dsl.scale, "divide by the number of comparisons instead");
  units->excludes(scale);
  dsl_cmd->add_flag("--skip-batch", dsl.skip_batch, "treat axis 0 as the example index");
  dsl_cmd->add_option("--reduction", dsl.reduction, "batch reduction")
      ->check(CLI::IsMember({"mean", "sum", "none"}))
      ->capture_default_str();
  dsl_cmd->add_option("--grad", dsl.grad_prefix, "write PREFIX_dy.dst, PREFIX_dx.dst, PREFIX_ds.dst");

  std::string pers_in, pers_out;
  auto* pers_cmd = app.add_subcommand("persistence", "0-dimensional sublevel persistence diagram");
  pers_cmd->add_option("T", pers_in, "tensor (.dst, rank 1-3)")->required();
  pers_cmd->add_option("--out", pers_out, "diagram CSV path (default stdout)");

  std::string d1, d2, policy = "cap";
  double order = 2.0;
  auto* w_cmd = app.add_subcommand("wasserstein", "Wasserstein distance between two diagrams");
  w_cmd->add_option("D1", d1)->required();
  w_cmd->add_option("D2", d2)->required();
  w_cmd->add_option("--p", order, "order p >= 1")->capture_default_str();
  w_cmd->add_option("--inf", policy, "essential points")
      ->check(CLI::IsMember({"cap", "drop", "reject"}))
      ->capture_default_str();

  std::string cx, cy;
  std::optional<std::size_t> feature_axis;
  auto* c_cmd = app.add_subcommand("corrdist", "pairwise linear correlation distance");
  c_cmd->add_option("X", cx)->required();
  c_cmd->add_option("Y", cy)->required();
  c_cmd->add_option("--feature-axis", feature_axis, "axis holding feature vectors (default: scalar features)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit the sharpness against a reference loss");
  cal_cmd->add_option("DATA_DIR", cal.dir, "directory of .dst examples")->required();
  cal_cmd->add_option("--ref", cal.ref, "reference loss")->check(CLI::IsMember({"mse", "mae"}))->required();
  cal_cmd->add_option("--max-steps", cal.max_steps)->capture_default_str();
  cal_cmd->add_option("--eps", cal.eps, "stopping threshold on the squared gap")->capture_default_str();
  cal_cmd->add_option("--seed", cal.seed)->capture_default_str();
  cal_cmd->add_option("--batch", cal.batch)->capture_default_str();
  cal_cmd->add_option("--step-size", cal.step_size)->capture_default_str();
  cal_cmd->add_option("--initial", cal.initial, "initial sharpness")->capture_default_str();
  cal_cmd->add_flag("--stacked", cal.stacked, "split each file along axis 0 into examples");
  cal_cmd->add_option("--log", cal.log, "step log CSV")->capture_default_str();

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("train-demo", "train the demo autoencoder and evaluate held-out data");
  demo_cmd->add_option("DATASET", demo.kind)->check(CLI::IsMember({"wave", "walk"}))->required();
  demo_cmd->add_option("--mse", demo.mse, "MSE coefficient")->capture_default_str();
  demo_cmd->add_option("--dsl", demo.dsl, "DSL coefficient")->capture_default_str();
  demo_cmd->add_option("--seed", demo.seed)->capture_default_str();
  demo_cmd->add_option("--out", demo.out)->capture_default_str();
  demo_cmd->add_option("--batches", demo.batches, "override the preset batch count");
  demo_cmd->add_option("--batch-size", demo.batch_size, "override the preset batch size");
  demo_cmd->add_option("--count", demo.count, "override the generated dataset size");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "time losses over growing inputs");
  bench_cmd->add_option("--kinds", bench.kinds)->capture_default_str();
  bench_cmd->add_option("--ranks", bench.ranks)->capture_default_str();
  bench_cmd->add_option("--sizes", bench.sizes, "extent per axis, ascending")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps)->capture_default_str();
  bench_cmd->add_option("--budget", bench.budget, "seconds")->capture_default_str();
  bench_cmd->add_option("--csv", bench.csv);
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*dsl_cmd) return run_dsl(dsl);
    if (*pers_cmd) return run_persistence(pers_in, pers_out);
    if (*w_cmd) {
      std::cout << fmt17(wasserstein_distance(read_diagram(d1), read_diagram(d2), order, parse_policy(policy)))
                << '\n';
      return 0;
    }
    if (*c_cmd) {
      std::cout << fmt17(pairwise_correlation_distance(read_tensor(cx), read_tensor(cy), feature_axis)) << '\n';
      return 0;
    }
    if (*cal_cmd) return run_calibrate(cal);
    if (*demo_cmd) return run_train_demo(demo);
    if (*bench_cmd) return run_bench(bench);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
