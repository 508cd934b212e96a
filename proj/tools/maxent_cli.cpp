// Command-line front end. Every output file starts with a commented header
// echoing the resolved configuration; floats are written with 17 significant
// digits. Exit codes: 0 success, 2 input error, 3 numerical infeasibility,
// 4 training divergence.

#include "maxent/batch.hpp"
#include "maxent/csv.hpp"
#include "maxent/errors.hpp"
#include "maxent/manifold_sampler.hpp"
#include "maxent/model_io.hpp"
#include "maxent/pbn.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

using namespace maxent;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitDiverged = 4;

using Config = std::vector<std::pair<std::string, std::string>>;

// Raised for conditions the library treats as valid but the command cannot
// complete, mapped to the numerical-infeasibility exit code.
class CommandInfeasible : public Error {
 public:
  using Error::Error;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw InvalidInput("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_header(std::ostream& out, const std::string& command, const Config& cfg) {
  out << "# maxent " << command << '\n';
  for (const auto& [key, value] : cfg) out << "# " << key << '=' << value << '\n';
}

std::string join(const Vector& v, int digits = 17) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ',';
    s += format_real(v[i], digits);
  }
  return s;
}

std::string column_names(const std::string& prefix, Eigen::Index n) {
  std::string s;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) s += ',';
    s += prefix + std::to_string(i + 1);
  }
  return s;
}

struct SolverOptions {
  double tol = 1e-10;
  std::size_t max_iter = 200;

  void add_to(CLI::App* app) {
    app->add_option("--tol", tol, "gamma inverse tolerance on the feature residual")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--max-iter", max_iter, "gamma inverse iteration limit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
  SolverConfig config() const {
    SolverConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    return cfg;
  }
  void echo(Config& cfg) const {
    cfg.emplace_back("tol", format_real(tol));
    cfg.emplace_back("max_iter", std::to_string(max_iter));
  }
};

// Inputs shared by the commands that work on one layer map.
struct LayerInputs {
  std::string weights;
  std::string features;
  std::string kind = "tg";
  bool header = false;

  void add_to(CLI::App* app) {
    app->add_option("--weights,-w", weights, "CSV of W, N rows by M columns")->required();
    app->add_option("--features,-z", features, "CSV of feature vectors, one per row")->required();
    app->add_option("--kind,-k", kind, "prior kind: ted, tg, exp or linear")->capture_default_str();
    app->add_flag("--header", header, "input CSV files start with a header row");
  }
  void echo(Config& cfg) const {
    cfg.emplace_back("weights", weights);
    cfg.emplace_back("features", features);
    cfg.emplace_back("kind", kind);
    cfg.emplace_back("header", header ? "true" : "false");
  }
  LayerMap map() const { return LayerMap(read_csv(weights, header), parse_kind(kind)); }
  Matrix z_rows(const LayerMap& map) const {
    Matrix z = read_csv(features, header);
    if (static_cast<std::size_t>(z.cols()) != map.feature_dim()) {
      throw InvalidInput("feature file has " + std::to_string(z.cols()) + " columns but W has " +
                         std::to_string(map.feature_dim()));
    }
    return z;
  }
};

// ---------------------------------------------------------------- activations

struct ActivationsCmd {
  std::string kind;
  double theta_min = -8.0;
  double theta_max = 8.0;
  std::size_t points = 161;
  std::string out;

  int run() const {
    const ActivationKind k = parse_kind(kind);
    if (points < 2) throw InvalidInput("activations: need at least two grid points");
    if (!(theta_min < theta_max)) throw InvalidInput("activations: --min must be below --max");
    if (!in_theta_domain(k, theta_min) || !in_theta_domain(k, theta_max)) {
      throw DomainViolation("activations: grid leaves the natural-parameter domain of " +
                            std::string(to_string(k)));
    }
    Config cfg{{"kind", std::string(to_string(k))},
               {"min", format_real(theta_min)},
               {"max", format_real(theta_max)},
               {"n", std::to_string(points)}};
    Output o(out);
    auto& s = o.stream();
    write_header(s, "activations", cfg);
    s << "theta,lambda,lambda_prime,sigmoid,softplus\n";
    double gap_softplus = 0.0;
    double gap_sigmoid = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      const double t = i + 1 == points
                           ? theta_max
                           : theta_min + (theta_max - theta_min) * static_cast<double>(i) /
                                             static_cast<double>(points - 1);
      const double lam = mean_lambda(k, t);
      const double sigmoid = 1.0 / (1.0 + std::exp(-t));
      const double softplus = t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
      gap_softplus = std::max(gap_softplus, std::abs(lam - softplus));
      gap_sigmoid = std::max(gap_sigmoid, std::abs(lam - sigmoid));
      s << format_real(t) << ',' << format_real(lam) << ',' << format_real(lambda_prime(k, t)) << ','
        << format_real(sigmoid) << ',' << format_real(softplus) << '\n';
    }
    s << "# max_abs_lambda_minus_sigmoid=" << format_real(gap_sigmoid) << '\n';
    s << "# max_abs_lambda_minus_softplus=" << format_real(gap_softplus) << '\n';
    return kExitOk;
  }
};

// --------------------------------------------------------------------- invert

struct InvertCmd {
  LayerInputs in;
  SolverOptions solver;
  std::string out;

  int run() const {
    const LayerMap map = in.map();
    const Matrix z = in.z_rows(map);
    Config cfg;
    in.echo(cfg);
    solver.echo(cfg);
    const auto sols = batch_gamma_inverse(map, z, solver.config(), Execution::serial);

    Output o(out);
    auto& s = o.stream();
    write_header(s, "invert", cfg);
    s << column_names("h", z.cols()) << ',' << column_names("x_hat", map.w().rows())
      << ",residual,iterations,converged\n";
    std::size_t failures = 0;
    for (const auto& sol : sols) {
      if (!sol.converged) ++failures;
      s << join(sol.h) << ',' << join(sol.x_hat) << ',' << format_real(sol.residual_inf) << ','
        << sol.iterations << ',' << (sol.converged ? 1 : 0) << '\n';
    }
    s << "# rows=" << sols.size() << " not_converged=" << failures << '\n';
    if (failures > 0) {
      std::cerr << "maxent invert: " << failures << " of " << sols.size()
                << " feature vectors did not converge (outside the image of gamma?)\n";
      return kExitInfeasible;
    }
    return kExitOk;
  }
};

// --------------------------------------------------------------------- sample

struct SampleCmd {
  LayerInputs in;
  SolverOptions solver;
  std::size_t burn_in = 1000;
  std::size_t n_samples = 1000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::string out;

  int run() const {
    const LayerMap map = in.map();
    const Matrix z_rows = in.z_rows(map);
    if (z_rows.rows() != 1) throw InvalidInput("sample: the feature file must contain exactly one row");
    const Vector z = z_rows.row(0).transpose();
    Config cfg;
    in.echo(cfg);
    solver.echo(cfg);
    cfg.emplace_back("burn_in", std::to_string(burn_in));
    cfg.emplace_back("samples", std::to_string(n_samples));
    cfg.emplace_back("thin", std::to_string(thin));
    cfg.emplace_back("seed", std::to_string(seed));
    cfg.emplace_back("chains", std::to_string(chains));

    const SaddleSolution sol = gamma_inverse(map, z, solver.config());
    const Vector x0 = default_start(map, z, solver.config());
    const auto blocks = run_chains(map, z, x0, {burn_in, n_samples, thin}, seed, chains, Execution::parallel);
    const Matrix samples = stack_rows(blocks);

    const Vector mean = samples.colwise().mean();
    const Matrix features = map.w().transpose() * samples.transpose();
    const double drift = (features.colwise() - z).cwiseAbs().maxCoeff();

    Output o(out);
    auto& s = o.stream();
    write_header(s, "sample", cfg);
    s << "chain," << column_names("x", samples.cols()) << '\n';
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < blocks.size(); ++c) {
      for (Eigen::Index r = 0; r < blocks[c].rows(); ++r, ++row) {
        s << c << ',' << join(samples.row(row).transpose()) << '\n';
      }
    }
    s << "# summary\n";
    s << "# mean=" << join(mean) << '\n';
    s << "# x_hat=" << join(sol.x_hat) << '\n';
    s << "# max_abs_mean_minus_x_hat=" << format_real((mean - sol.x_hat).cwiseAbs().maxCoeff()) << '\n';
    s << "# max_manifold_residual=" << format_real(drift) << '\n';
    return kExitOk;
  }
};

// --------------------------------------------------------------------- oracle

struct OracleCmd {
  LayerInputs in;
  std::size_t grid = 2001;
  std::string out;

  int run() const {
    const LayerMap map = in.map();
    const Matrix z = in.z_rows(map);
    if (map.input_dim() - map.feature_dim() > 2) {
      throw InvalidInput("oracle restricted to desk scale (N - M <= 2)");
    }
    Config cfg;
    in.echo(cfg);
    cfg.emplace_back("grid", std::to_string(grid));
    std::vector<Vector> means;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      try {
        means.push_back(conditional_mean_oracle(map, z.row(r).transpose(), grid));
      } catch (const OracleUnavailable& e) {
        throw CommandInfeasible(std::string("oracle: ") + e.what());
      }
    }
    Output o(out);
    auto& s = o.stream();
    write_header(s, "oracle", cfg);
    s << column_names("x_bar", map.w().rows()) << '\n';
    for (const auto& m : means) s << join(m) << '\n';
    return kExitOk;
  }
};

// ---------------------------------------------------------------------- train

struct Architecture {
  std::vector<std::size_t> widths;
  std::vector<ActivationKind> kinds;
};

// "16:tg,8:tg,4": each width but the last carries the prior kind of the
// layer it feeds.
Architecture parse_architecture(const std::string& text) {
  Architecture arch;
  std::stringstream ss(text);
  std::string item;
  std::vector<std::string> items;
  while (std::getline(ss, item, ',')) items.push_back(item);
  if (items.size() < 2) throw InvalidInput("arch: need at least two widths, e.g. 8:tg,2");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto colon = items[i].find(':');
    const bool last = i + 1 == items.size();
    if (last != (colon == std::string::npos)) {
      throw InvalidInput("arch: every width except the last needs a kind (" + items[i] + ")");
    }
    const std::string width = items[i].substr(0, colon);
    std::size_t used = 0;
    unsigned long w = 0;
    try {
      w = std::stoul(width, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != width.size() || w == 0) throw InvalidInput("arch: bad width '" + width + "'");
    arch.widths.push_back(w);
    if (!last) arch.kinds.push_back(parse_kind(items[i].substr(colon + 1)));
    if (i > 0 && arch.widths[i] >= arch.widths[i - 1]) {
      throw InvalidInput("arch: widths must be strictly decreasing");
    }
  }
  return arch;
}

struct TrainCmd {
  std::string data;
  bool header = false;
  std::string arch;
  std::size_t epochs = 200;
  double step = 0.01;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
  SolverOptions solver;
  std::string model_out;
  std::string trace_out;

  int run() const {
    const Architecture a = parse_architecture(arch);
    const Matrix x = read_csv(data, header);
    if (static_cast<std::size_t>(x.cols()) != a.widths.front()) {
      throw InvalidInput("data has " + std::to_string(x.cols()) + " columns but the first width is " +
                         std::to_string(a.widths.front()));
    }
    Config cfg{{"data", data},
               {"header", header ? "true" : "false"},
               {"arch", arch},
               {"epochs", std::to_string(epochs)},
               {"step", format_real(step)},
               {"batch", std::to_string(batch)},
               {"seed", std::to_string(seed)}};
    solver.echo(cfg);
    cfg.emplace_back("model_out", model_out);

    RngStream init(seed, 0);
    PbnNetwork net = random_network(a.widths, a.kinds, init);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.step_size = step;
    tc.batch_size = batch;
    tc.solver = solver.config();
    tc.exec = Execution::parallel;
    RngStream shuffle(seed, 1);
    const auto trace = train_autoencoder(net, x, tc, shuffle);

    save_model(net, model_out);
    Output o(trace_out);
    auto& s = o.stream();
    write_header(s, "train", cfg);
    s << "epoch,loss,failed\n";
    for (const auto& r : trace) s << r.epoch << ',' << format_real(r.loss) << ',' << r.failed << '\n';
    return kExitOk;
  }
};

// ---------------------------------------------------------------- reconstruct

struct ReconstructCmd {
  std::string model;
  std::string data;
  bool header = false;
  std::string mode = "deterministic";
  std::uint64_t seed = 0;
  std::size_t draws = 1;
  SolverOptions solver;
  std::string out;

  int run() const {
    const PbnNetwork net = load_model(model);
    const Matrix x = read_csv(data, header);
    if (static_cast<std::size_t>(x.cols()) != net.input_dim()) {
      throw InvalidInput("data has " + std::to_string(x.cols()) + " columns but the model expects " +
                         std::to_string(net.input_dim()));
    }
    ReconstructionMode m;
    if (mode == "deterministic") {
      m = ReconstructionMode::deterministic;
    } else if (mode == "stochastic") {
      m = ReconstructionMode::stochastic;
    } else {
      throw InvalidInput("mode must be deterministic or stochastic");
    }
    const std::size_t per_sample = m == ReconstructionMode::stochastic ? draws : 1;
    Config cfg{{"model", model},
               {"data", data},
               {"header", header ? "true" : "false"},
               {"mode", mode},
               {"seed", std::to_string(seed)},
               {"draws", std::to_string(per_sample)}};
    solver.echo(cfg);

    std::vector<ForwardPass> passes;
    for (Eigen::Index r = 0; r < x.rows(); ++r) passes.push_back(forward(net, x.row(r).transpose()));

    RngStream rng(seed);
    Output o(out);
    auto& s = o.stream();
    write_header(s, "reconstruct", cfg);
    s << "sample,draw," << column_names("x", x.cols()) << ",feature_residual,squared_error\n";
    std::size_t attempts = 0;
    std::size_t successes = 0;
    double sse = 0.0;
    const Vector nan_row = Vector::Constant(x.cols(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Vector target = x.row(r).transpose();
      const Vector& z = passes[static_cast<std::size_t>(r)].final_feature();
      for (std::size_t d = 0; d < per_sample; ++d) {
        ++attempts;
        s << r << ',' << d << ',';
        try {
          const Reconstruction rec = backward_reconstruct(net, z, m, &rng, solver.config());
          double residual = std::numeric_limits<double>::quiet_NaN();
          try {
            residual = (forward(net, rec.x).final_feature() - z).lpNorm<Eigen::Infinity>();
          } catch (const SupportViolation&) {
          }
          const double err = (rec.x - target).squaredNorm();
          sse += err;
          ++successes;
          s << join(rec.x) << ',' << format_real(residual) << ',' << format_real(err) << '\n';
        } catch (const ReconstructionInfeasible&) {
          s << join(nan_row) << ",nan,nan\n";
        }
      }
    }
    const SamplingEfficiencyReport fwd = forward_path_efficiency(net, x, solver.config());
    s << "# summary\n";
    s << "# mse=" << format_real(successes > 0 ? sse / static_cast<double>(successes) : std::nan(""))
      << '\n';
    s << "# forward_path_efficiency=" << format_real(fwd.efficiency) << " (" << fwd.successes << '/'
      << fwd.attempts << ")\n";
    s << "# sampling_efficiency="
      << format_real(static_cast<double>(successes) / static_cast<double>(attempts)) << " (" << successes
      << '/' << attempts << ")\n";
    return kExitOk;
  }
};

template <typename F>
int guarded(const std::string& command, F&& body) {
  try {
    return body();
  } catch (const TrainingDiverged& e) {
    std::cerr << "maxent " << command << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const CommandInfeasible& e) {
    std::cerr << "maxent " << command << ": " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InfeasibleStart& e) {
    std::cerr << "maxent " << command << ": " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ReconstructionInfeasible& e) {
    std::cerr << "maxent " << command << ": " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "maxent " << command << ": " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const BoundaryState& e) {
    std::cerr << "maxent " << command << ": " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "maxent " << command << ": " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MaxEnt activations, gamma inverse, manifold sampling and PBN autoencoders"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "reserved; configuration files are not supported");

  ActivationsCmd act;
  auto* a = app.add_subcommand("activations", "tabulate lambda, lambda' and reference curves");
  a->add_option("--kind,-k", act.kind, "ted, tg, exp or linear")->required();
  a->add_option("--min", act.theta_min, "first theta")->capture_default_str();
  a->add_option("--max", act.theta_max, "last theta")->capture_default_str();
  a->add_option("-n,--points", act.points, "grid size")->capture_default_str();
  a->add_option("--out,-o", act.out, "output CSV (default stdout)");

  InvertCmd inv;
  auto* i = app.add_subcommand("invert", "solve gamma(h) = z for each feature row");
  inv.in.add_to(i);
  inv.solver.add_to(i);
  i->add_option("--out,-o", inv.out, "output CSV (default stdout)");

  SampleCmd smp;
  auto* s = app.add_subcommand("sample", "hit-and-run samples of x given W'x = z");
  smp.in.add_to(s);
  smp.solver.add_to(s);
  s->add_option("--burn-in", smp.burn_in, "sweeps discarded per chain")->capture_default_str();
  s->add_option("--samples", smp.n_samples, "samples kept per chain")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--thin", smp.thin, "sweeps per kept sample")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--seed", smp.seed, "random seed")->capture_default_str();
  s->add_option("--chains", smp.chains, "independent chains, run concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--out,-o", smp.out, "output CSV (default stdout)");

  OracleCmd orc;
  auto* q = app.add_subcommand("oracle", "quadrature conditional mean for N - M <= 2");
  orc.in.add_to(q);
  q->add_option("--grid", orc.grid, "Simpson nodes per axis")->check(CLI::Range(3, 100001))->capture_default_str();
  q->add_option("--out,-o", orc.out, "output CSV (default stdout)");

  TrainCmd trn;
  auto* t = app.add_subcommand("train", "train a PBN autoencoder by gradient descent");
  t->add_option("--data,-d", trn.data, "training CSV, one sample per row")->required();
  t->add_flag("--header", trn.header, "the data file starts with a header row");
  t->add_option("--arch", trn.arch, "widths and kinds, e.g. 16:tg,8:tg,4")->required();
  t->add_option("--epochs", trn.epochs, "passes over the data")->capture_default_str();
  t->add_option("--step", trn.step, "gradient step size")->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--batch", trn.batch, "mini-batch size")->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--seed", trn.seed, "random seed")->capture_default_str();
  trn.solver.add_to(t);
  t->add_option("--model-out", trn.model_out, "PBN1 model file to write")->required();
  t->add_option("--trace-out", trn.trace_out, "loss trace CSV (default stdout)");

  ReconstructCmd rec;
  auto* r = app.add_subcommand("reconstruct", "backward reconstruction of data through a model");
  r->add_option("--model,-m", rec.model, "PBN1 model file")->required();
  r->add_option("--data,-d", rec.data, "CSV of inputs")->required();
  r->add_flag("--header", rec.header, "the data file starts with a header row");
  r->add_option("--mode", rec.mode, "deterministic or stochastic")->capture_default_str();
  r->add_option("--seed", rec.seed, "random seed for stochastic mode")->capture_default_str();
  r->add_option("--draws", rec.draws, "stochastic draws per sample")->check(CLI::PositiveNumber)->capture_default_str();
  rec.solver.add_to(r);
  r->add_option("--out,-o", rec.out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }
  if (!config_file.empty()) {
    std::cerr << "maxent: --config is reserved and not supported; pass flags instead\n";
    return kExitInput;
  }

  if (a->parsed()) return guarded("activations", [&] { return act.run(); });
  if (i->parsed()) return guarded("invert", [&] { return inv.run(); });
  if (s->parsed()) return guarded("sample", [&] { return smp.run(); });
  if (q->parsed()) return guarded("oracle", [&] { return orc.run(); });
  if (t->parsed()) return guarded("train", [&] { return trn.run(); });
  if (r->parsed()) return guarded("reconstruct", [&] { return rec.run(); });
  return kExitInput;
}
