#include "maxent/pbn.hpp"

#include "maxent/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>

namespace maxent {

namespace {

bool in_support(ActivationKind kind, double x) {
  if (!std::isfinite(x)) return false;
  switch (kind_info(kind).support) {
    case Support::unit_interval:
      return x >= 0.0 && x <= 1.0;
    case Support::positive:
      return x >= 0.0;
    case Support::real:
      return true;
  }
  return false;
}

NetworkGradient zero_gradient(const PbnNetwork& net) {
  NetworkGradient g;
  for (const auto& layer : net.layers()) {
    g.weights.push_back(Matrix::Zero(layer.map.w().rows(), layer.map.w().cols()));
    g.biases.push_back(Vector::Zero(layer.bias.size()));
  }
  return g;
}

void accumulate(NetworkGradient& into, const NetworkGradient& from) {
  for (std::size_t k = 0; k < into.weights.size(); ++k) {
    into.weights[k] += from.weights[k];
    into.biases[k] += from.biases[k];
  }
  into.loss += from.loss;
  into.used += from.used;
  into.failed += from.failed;
}

// Unscaled squared error and gradient for one sample; `failed` is set when
// the reconstruction is infeasible.
NetworkGradient sample_gradient(const PbnNetwork& net, const Vector& x, const SolverConfig& cfg) {
  NetworkGradient g = zero_gradient(net);
  const std::size_t depth = net.depth();
  const ForwardPass fp = forward(net, x);

  // Deterministic backward path, keeping each layer's linearization.
  std::vector<SaddleSolution> sols(depth);
  std::vector<std::optional<Linearization>> lins(depth);
  Vector s = fp.final_feature();
  for (std::size_t i = depth; i-- > 0;) {
    const auto& layer = net.layer(i);
    sols[i] = gamma_inverse(layer.map, s, cfg);
    if (!sols[i].converged) {
      g.failed = 1;
      return g;
    }
    lins[i].emplace(layer.map, sols[i].h);
    if (i > 0) s = lins[i]->theta - net.layer(i - 1).bias;
  }

  const Vector diff = lins[0]->lambda - x;
  g.loss = diff.squaredNorm();
  g.used = 1;

  // Reverse through the reconstruction path, bottom layer first.
  Vector theta_bar = lins[0]->dlambda.cwiseProduct(2.0 * diff);
  Vector top_bar;
  for (std::size_t i = 0; i < depth; ++i) {
    const auto& layer = net.layer(i);
    const Matrix& w = layer.map.w();
    const Linearization& lin = *lins[i];
    const Vector& h = sols[i].h;
    // theta = theta0 + W h
    g.weights[i] += theta_bar * h.transpose();
    const Vector h_bar = w.transpose() * theta_bar;
    // h = gamma^{-1}(s; W): dh = J^{-1} (ds - dW' lambda - W' D dW h)
    const Vector v = lin.normal.solve(h_bar);
    g.weights[i] -= lin.lambda * v.transpose();
    g.weights[i] -= lin.dlambda.cwiseProduct(w * v) * h.transpose();
    if (i + 1 < depth) {
      // s_i = theta_{i+1} - bias_i
      g.biases[i] -= v;
      theta_bar = v;
    } else {
      top_bar = v;
    }
  }

  // Forward path into the deepest feature.
  Vector z_bar = top_bar;
  for (std::size_t i = depth; i-- > 0;) {
    g.weights[i] += fp.inputs[i] * z_bar.transpose();
    if (i == 0) break;
    const Vector a_bar = net.layer(i).map.w() * z_bar;
    const Vector u_bar =
        prime_vector(net.layer(i).map.kind(), fp.preactivations[i - 1]).cwiseProduct(a_bar);
    g.biases[i - 1] += u_bar;
    z_bar = u_bar;
  }
  return g;
}

NetworkGradient reduce_samples(const PbnNetwork& net, const Matrix& data,
                               const std::vector<std::size_t>& rows, const SolverConfig& cfg,
                               Execution exec) {
  std::vector<NetworkGradient> parts(rows.size());
  for_each_index(rows.size(), exec, [&](std::size_t i) {
    parts[i] = sample_gradient(net, data.row(static_cast<Eigen::Index>(rows[i])).transpose(), cfg);
  });
  NetworkGradient total = zero_gradient(net);
  for (const auto& p : parts) accumulate(total, p);
  if (total.used > 0) {
    const double scale = 1.0 / static_cast<double>(total.used);
    for (std::size_t k = 0; k < total.weights.size(); ++k) {
      total.weights[k] *= scale;
      total.biases[k] *= scale;
    }
    total.loss *= scale;
  }
  return total;
}

std::vector<std::size_t> all_rows(const Matrix& data) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(data.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

PbnNetwork::PbnNetwork(std::vector<PbnLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidInput("PbnNetwork: at least one layer is required");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    if (layer.map.feature_dim() >= layer.map.input_dim()) {
      throw InvalidInput("PbnNetwork: layer " + std::to_string(k) + " must reduce dimension");
    }
    if (static_cast<std::size_t>(layer.bias.size()) != layer.map.feature_dim()) {
      throw InvalidInput("PbnNetwork: bias of layer " + std::to_string(k) + " has the wrong length");
    }
    if (!layer.bias.allFinite()) throw InvalidInput("PbnNetwork: non-finite bias");
    if (k + 1 < layers_.size() && layers_[k + 1].map.input_dim() != layer.map.feature_dim()) {
      throw InvalidInput("PbnNetwork: width of layer " + std::to_string(k + 1) +
                         " does not match the output of layer " + std::to_string(k));
    }
  }
}

void PbnNetwork::set_parameters(std::size_t k, Matrix w, Vector bias) {
  PbnLayer& layer = layers_.at(k);
  if (w.rows() != layer.map.w().rows() || w.cols() != layer.map.w().cols() ||
      bias.size() != layer.bias.size()) {
    throw InvalidInput("set_parameters: shape mismatch");
  }
  if (!bias.allFinite()) throw InvalidInput("set_parameters: non-finite bias");
  layer.map = LayerMap(std::move(w), layer.map.kind(), layer.map.theta0());
  layer.bias = std::move(bias);
}

PbnNetwork random_network(const std::vector<std::size_t>& widths,
                          const std::vector<ActivationKind>& kinds, RngStream& rng) {
  if (widths.size() < 2 || kinds.size() != widths.size() - 1) {
    throw InvalidInput("random_network: need L+1 widths and L kinds");
  }
  std::vector<PbnLayer> layers;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const auto n = static_cast<Eigen::Index>(widths[k]);
    const auto m = static_cast<Eigen::Index>(widths[k + 1]);
    Matrix w(n, m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) w(i, j) = scale * rng.normal();
    }
    layers.push_back({LayerMap(std::move(w), kinds[k]), Vector::Zero(m)});
  }
  return PbnNetwork(std::move(layers));
}

ForwardPass forward(const PbnNetwork& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim()) {
    throw InvalidInput("forward: input has the wrong length");
  }
  const ActivationKind first = net.layer(0).map.kind();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!in_support(first, x[i])) throw SupportViolation("input outside the support", 0);
  }

  ForwardPass fp;
  fp.inputs.push_back(x);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    const auto& layer = net.layer(k);
    fp.features.push_back(layer.map.w().transpose() * fp.inputs.back());
    if (k + 1 == net.depth()) break;
    Vector u = fp.features.back() + layer.bias;
    const ActivationKind next = net.layer(k + 1).map.kind();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (!in_theta_domain(next, u[i])) {
        throw SupportViolation("pre-activation outside the activation domain", k + 1);
      }
    }
    fp.inputs.push_back(mean_vector(next, u));
    fp.preactivations.push_back(std::move(u));
  }
  return fp;
}

Reconstruction backward_reconstruct(const PbnNetwork& net, const Vector& z_final,
                                    ReconstructionMode mode, RngStream* rng,
                                    const SolverConfig& cfg) {
  if (static_cast<std::size_t>(z_final.size()) != net.output_dim()) {
    throw InvalidInput("backward_reconstruct: feature has the wrong length");
  }
  const bool stochastic = mode == ReconstructionMode::stochastic;
  if (stochastic && rng == nullptr) {
    throw InvalidInput("backward_reconstruct: stochastic mode needs a random stream");
  }

  const std::size_t depth = net.depth();
  Reconstruction rec;
  rec.features.resize(depth);
  rec.solutions.resize(depth);
  Vector s = z_final;
  for (std::size_t i = depth; i-- > 0;) {
    const auto& layer = net.layer(i);
    rec.features[i] = s;
    SaddleSolution sol = gamma_inverse(layer.map, s, cfg);
    if (!sol.converged) throw ReconstructionInfeasible(i);
    const ActivationKind kind = layer.map.kind();
    const Vector theta = layer.map.natural_params(sol.h);

    Vector estimate;
    if (stochastic) {
      estimate.resize(theta.size());
      for (Eigen::Index j = 0; j < theta.size(); ++j) {
        estimate[j] = sample_univariate({kind, theta[j]}, *rng);
      }
    } else {
      estimate = sol.x_hat;
    }

    if (i == 0) {
      rec.x = std::move(estimate);
    } else if (stochastic) {
      Vector pre(estimate.size());
      for (Eigen::Index j = 0; j < pre.size(); ++j) {
        if (!in_support_interior(kind, estimate[j])) throw ReconstructionInfeasible(i);
        pre[j] = inverse_mean(kind, estimate[j]);
      }
      s = pre - net.layer(i - 1).bias;
    } else {
      s = theta - net.layer(i - 1).bias;
    }
    rec.solutions[i] = std::move(sol);
  }
  return rec;
}

double round_trip_residual(const PbnNetwork& net, const Reconstruction& rec) {
  const ForwardPass fp = forward(net, rec.x);
  double worst = 0.0;
  for (std::size_t k = 0; k < net.depth(); ++k) {
    worst = std::max(worst, (fp.features[k] - rec.features[k]).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

SamplingEfficiencyReport sampling_efficiency(const PbnNetwork& net, const Matrix& z_samples,
                                             ReconstructionMode mode, RngStream& rng,
                                             const SolverConfig& cfg) {
  SamplingEfficiencyReport report;
  for (Eigen::Index r = 0; r < z_samples.rows(); ++r) {
    ++report.attempts;
    try {
      backward_reconstruct(net, z_samples.row(r).transpose(), mode, &rng, cfg);
      ++report.successes;
    } catch (const ReconstructionInfeasible&) {
    }
  }
  report.efficiency = report.attempts == 0
                          ? 0.0
                          : static_cast<double>(report.successes) / static_cast<double>(report.attempts);
  return report;
}

SamplingEfficiencyReport forward_path_efficiency(const PbnNetwork& net, const Matrix& data,
                                                 const SolverConfig& cfg) {
  SamplingEfficiencyReport report;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    ++report.attempts;
    const ForwardPass fp = forward(net, data.row(r).transpose());
    bool ok = true;
    for (std::size_t k = 0; k < net.depth() && ok; ++k) {
      ok = gamma_inverse(net.layer(k).map, fp.features[k], cfg).converged;
    }
    if (ok) ++report.successes;
  }
  report.efficiency = report.attempts == 0
                          ? 0.0
                          : static_cast<double>(report.successes) / static_cast<double>(report.attempts);
  return report;
}

NetworkGradient loss_gradient(const PbnNetwork& net, const Matrix& data,
                              const std::vector<std::size_t>& rows, const SolverConfig& cfg,
                              Execution exec) {
  return reduce_samples(net, data, rows, cfg, exec);
}

NetworkGradient loss_gradient(const PbnNetwork& net, const Matrix& data, const SolverConfig& cfg,
                              Execution exec) {
  return reduce_samples(net, data, all_rows(data), cfg, exec);
}

double reconstruction_loss(const PbnNetwork& net, const Matrix& data, const SolverConfig& cfg,
                           Execution exec) {
  const std::vector<std::size_t> rows = all_rows(data);
  std::vector<double> losses(rows.size(), 0.0);
  std::vector<char> ok(rows.size(), 0);
  for_each_index(rows.size(), exec, [&](std::size_t i) {
    const Vector x = data.row(static_cast<Eigen::Index>(i)).transpose();
    try {
      const Reconstruction rec = backward_reconstruct(net, forward(net, x).final_feature(),
                                                      ReconstructionMode::deterministic, nullptr, cfg);
      losses[i] = (rec.x - x).squaredNorm();
      ok[i] = 1;
    } catch (const ReconstructionInfeasible&) {
    }
  });
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (ok[i]) {
      total += losses[i];
      ++used;
    }
  }
  return used == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(used);
}

std::vector<EpochRecord> train_autoencoder(PbnNetwork& net, const Matrix& data,
                                           const TrainConfig& cfg, RngStream& rng) {
  if (data.rows() == 0) throw InvalidInput("train_autoencoder: no data");
  if (!(cfg.step_size > 0.0) || cfg.batch_size == 0) {
    throw InvalidInput("train_autoencoder: step size and batch size must be positive");
  }
  for (Eigen::Index r = 0; r < data.rows(); ++r) forward(net, data.row(r).transpose());

  std::vector<EpochRecord> trace;
  auto record = [&](std::size_t epoch) {
    const NetworkGradient full = loss_gradient(net, data, cfg.solver, cfg.exec);
    if (full.used == 0) throw TrainingDiverged(epoch, "no sample is reconstructible");
    if (!std::isfinite(full.loss)) throw TrainingDiverged(epoch);
    trace.push_back({epoch, full.loss, full.failed});
  };
  record(0);

  std::vector<std::size_t> order = all_rows(data);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with the library stream, so the order is platform independent.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(stop));
      const NetworkGradient g = loss_gradient(net, data, batch, cfg.solver, cfg.exec);
      if (g.used == 0) continue;
      if (!std::isfinite(g.loss)) throw TrainingDiverged(epoch);
      for (std::size_t k = 0; k < net.depth(); ++k) {
        Matrix w = net.layer(k).map.w() - cfg.step_size * g.weights[k];
        Vector b = net.layer(k).bias - cfg.step_size * g.biases[k];
        if (!w.allFinite() || !b.allFinite()) throw TrainingDiverged(epoch, "parameters are not finite");
        try {
          net.set_parameters(k, std::move(w), std::move(b));
        } catch (const RankDeficient&) {
          throw TrainingDiverged(epoch, "weights lost rank");
        }
      }
    }
    record(epoch);
  }
  return trace;
}

}  // namespace maxent
