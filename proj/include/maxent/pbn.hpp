#pragma once

#include "maxent/execution.hpp"
#include "maxent/gamma_inverse.hpp"
#include "maxent/rng.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace maxent {

/// Layer k maps its input a_k (N_k) to z_k = W_k' a_k (M_k). The bias is
/// added to z_k before the next layer's activation; the last layer's bias
/// is stored but unused.
struct PbnLayer {
  LayerMap map;
  Vector bias;
};

/// Projected belief network: a feed-forward analysis path and a
/// reconstruction path that reuses the same weights through gamma inverse.
/// Layers are indexed from 0 (closest to the data).
class PbnNetwork {
 public:
  /// Validates dimension chaining (N_{k+1} == M_k, strictly decreasing
  /// widths) and bias lengths. Throws InvalidInput.
  explicit PbnNetwork(std::vector<PbnLayer> layers);

  const std::vector<PbnLayer>& layers() const { return layers_; }
  const PbnLayer& layer(std::size_t k) const { return layers_.at(k); }
  std::size_t depth() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.front().map.input_dim(); }
  std::size_t output_dim() const { return layers_.back().map.feature_dim(); }

  /// Replaces the parameters of layer k (same shape). Throws on rank loss.
  void set_parameters(std::size_t k, Matrix w, Vector bias);

 private:
  std::vector<PbnLayer> layers_;
};

/// Random network with Gaussian weights scaled by 1/sqrt(N_k) and zero bias.
/// widths = {N_0, N_1, ..., N_L}; kinds[k] is the prior of layer k's input.
PbnNetwork random_network(const std::vector<std::size_t>& widths,
                          const std::vector<ActivationKind>& kinds, RngStream& rng);

struct ForwardPass {
  std::vector<Vector> inputs;           ///< a_k, the input of layer k (inputs[0] = x)
  std::vector<Vector> features;         ///< z_k = W_k' a_k
  std::vector<Vector> preactivations;   ///< z_k + bias_k for k < depth - 1
  const Vector& final_feature() const { return features.back(); }
};

/// Throws SupportViolation (naming the layer) when x or an intermediate
/// pre-activation is outside the admissible range of the consuming layer.
ForwardPass forward(const PbnNetwork& net, const Vector& x);

enum class ReconstructionMode { deterministic, stochastic };

struct Reconstruction {
  Vector x;                                ///< reconstructed network input
  std::vector<Vector> features;            ///< feature fed to gamma inverse at each layer
  std::vector<SaddleSolution> solutions;   ///< per layer
};

/// Backward path from the deepest feature. At each layer h = gamma^{-1}(z);
/// the layer input estimate is lambda(theta0 + W h) (deterministic) or a
/// draw from the per-coordinate surrogate laws (stochastic). The feature
/// handed to the layer below is theta0 + W h - bias (the activation and its
/// inverse cancel); in stochastic mode it is lambda^{-1}(draw) - bias.
/// Throws ReconstructionInfeasible(layer) when a solve does not converge.
Reconstruction backward_reconstruct(const PbnNetwork& net, const Vector& z_final,
                                    ReconstructionMode mode, RngStream* rng = nullptr,
                                    const SolverConfig& cfg = {});

/// Max over layers of |z - feature| after running `forward` on the
/// reconstruction (deterministic reconstructions only).
double round_trip_residual(const PbnNetwork& net, const Reconstruction& rec);

struct SamplingEfficiencyReport {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  double efficiency = 0.0;
};

/// Fraction of rows of z_samples whose full backward reconstruction
/// completes at every layer.
SamplingEfficiencyReport sampling_efficiency(const PbnNetwork& net, const Matrix& z_samples,
                                             ReconstructionMode mode, RngStream& rng,
                                             const SolverConfig& cfg = {});

/// Layer-wise efficiency along the forward path: each layer's gamma inverse
/// is applied to the feature the forward path produced for it.
SamplingEfficiencyReport forward_path_efficiency(const PbnNetwork& net, const Matrix& data,
                                                 const SolverConfig& cfg = {});

struct NetworkGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  double loss = 0.0;           ///< mean of |x - x_hat|^2 over successful samples
  std::size_t used = 0;        ///< samples that reconstructed successfully
  std::size_t failed = 0;
};

/// Loss and its gradient over the rows of `data` (rows listed by `rows`, or
/// all rows). Samples whose reconstruction is infeasible are skipped and
/// counted in `failed`.
NetworkGradient loss_gradient(const PbnNetwork& net, const Matrix& data,
                              const std::vector<std::size_t>& rows, const SolverConfig& cfg = {},
                              Execution exec = Execution::serial);
NetworkGradient loss_gradient(const PbnNetwork& net, const Matrix& data,
                              const SolverConfig& cfg = {}, Execution exec = Execution::serial);

/// Mean reconstruction loss over all rows (infeasible rows skipped).
double reconstruction_loss(const PbnNetwork& net, const Matrix& data, const SolverConfig& cfg = {},
                           Execution exec = Execution::serial);

struct TrainConfig {
  std::size_t epochs = 200;
  double step_size = 0.01;
  std::size_t batch_size = 32;
  SolverConfig solver;
  Execution exec = Execution::serial;
};

struct EpochRecord {
  std::size_t epoch = 0;       ///< 0 is the untrained network
  double loss = 0.0;
  std::size_t failed = 0;
};

/// Mini-batch gradient descent with a fixed step size on the mean squared
/// reconstruction error. The row order is reshuffled every epoch from rng.
/// Throws TrainingDiverged when the loss stops being finite.
std::vector<EpochRecord> train_autoencoder(PbnNetwork& net, const Matrix& data,
                                           const TrainConfig& cfg, RngStream& rng);

}  // namespace maxent
