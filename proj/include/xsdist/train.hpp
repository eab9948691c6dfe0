#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xsdist/energy.hpp"
#include "xsdist/point_cloud.hpp"
#include "xsdist/rng.hpp"

namespace xsdist {

// ---------------------------------------------------------------------------
// Particle flow
// ---------------------------------------------------------------------------

enum class FlowInit { Normal, Cluster };

struct FlowConfig {
    std::size_t n_particles = 256;
    int n_dim = 8;
    double step_size = 1.0;
    std::size_t n_steps = 1000;
    Seed seed;
    FlowInit init = FlowInit::Normal;
    double cluster_radius = 5.0;  // distance of the initial cluster from the origin
    double cluster_spread = 0.05;
    bool halve_on_increase = false;  // step-size halving on loss increase
};

struct FlowResult {
    PointCloud particles;
    std::vector<double> trajectory;  // latent loss per step (surrogate form)
    bool diverged = false;           // loss increased 10 consecutive steps
    bool step_warning = false;       // step_size out of the stability heuristic
};

/// Gradient descent on particle positions minimizing the surrogate latent
/// loss; drives an empirical cloud toward N(0, I).
FlowResult particle_flow(const FlowConfig& cfg);

// ---------------------------------------------------------------------------
// Dense encoder/decoder
// ---------------------------------------------------------------------------

enum class Activation { Identity, ReLU, Sigmoid };

struct DenseLayer {
    std::size_t in = 0, out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
    Activation act = Activation::Identity;
};

struct Mlp {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.front().in; }
    std::size_t output_dim() const { return layers.back().out; }
    std::size_t parameter_count() const;
};

/// Hidden layers use ReLU; the final layer uses `out_act`.
Mlp make_mlp(const std::vector<std::size_t>& widths, Activation out_act, Seed seed,
             std::uint64_t sample_offset = 0);

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainState {
    Mlp encoder;
    Mlp decoder;
    std::vector<double> adam_m;  // first moments, one slot per parameter
    std::vector<double> adam_v;  // second moments
    double lambda = 100.0;
    long step = 0;

    std::size_t parameter_count() const {
        return encoder.parameter_count() + decoder.parameter_count();
    }
};

struct ForwardCache {
    std::vector<PointCloud> pre;   // pre-activation per layer
    std::vector<PointCloud> post;  // post-activation per layer (post.back() = output)
};

/// Batch forward through one MLP.
PointCloud mlp_forward(const Mlp& net, const PointCloud& batch, ForwardCache* cache = nullptr);

/// Backprop: fills parameter gradients (same layout as the net) and returns
/// the gradient w.r.t. the batch inputs.
PointCloud mlp_backward(const Mlp& net, const PointCloud& batch, const ForwardCache& cache,
                        const PointCloud& grad_output, Mlp& grads);

/// Encoder+decoder forward: (codes, reconstructions).
std::pair<PointCloud, PointCloud> dense_forward(const TrainState& state, const PointCloud& batch);

/// Full backward of the composed loss given dLoss/dcodes (direct latent part)
/// and dLoss/dreconstructions; returns gradients shaped like the state nets.
std::pair<Mlp, Mlp> dense_backward(const TrainState& state, const PointCloud& batch,
                                   const PointCloud& grad_codes, const PointCloud& grad_recon);

// ---------------------------------------------------------------------------
// XS-VAE training
// ---------------------------------------------------------------------------

struct EpochLog {
    long step = 0;
    double loss_rec = 0.0;
    double loss_lat = 0.0;
    double loss_global = 0.0;  // logged exactly as loss_rec + lambda * loss_lat
};

struct VaeConfig {
    std::vector<std::size_t> encoder_widths;  // input..latent
    std::vector<std::size_t> decoder_widths;  // latent..output
    Activation decoder_out = Activation::Identity;  // Sigmoid for [0,1] image data
    double lambda = 100.0;
    AdamConfig adam;
    std::size_t epochs = 100;
    std::size_t batch = 64;
    Seed seed;
    bool train_reconstruction = true;  // lambda=0 handled separately: this drops the term
    bool train_latent = true;
};

struct VaeResult {
    TrainState state;
    std::vector<EpochLog> logs;  // one entry per optimization step
};

/// Algorithm: sample a batch, encode, latent loss (surrogate form), decode,
/// mean-squared reconstruction loss, additive combination with weight lambda,
/// Adam step. Throws TrainDiverged on non-finite losses.
VaeResult xsvae_train(const PointCloud& dataset, const VaeConfig& cfg);

/// Decode n_samples latent draws z ~ N(0, I).
PointCloud generate(const TrainState& state, std::size_t n_samples, Seed seed);

// Parameter-vector helpers (gradient checks, Adam).
std::vector<double> flatten_parameters(const TrainState& state);
void unflatten_parameters(TrainState& state, std::span<const double> params);
std::vector<double> flatten_gradients(const Mlp& enc_grads, const Mlp& dec_grads);

/// Global loss of one batch at the current parameters (no update).
EpochLog evaluate_losses(const TrainState& state, const PointCloud& batch,
                         const XiEvaluator& ev, bool with_rec = true, bool with_lat = true);

// ---------------------------------------------------------------------------
// Checkpoints & logs
// ---------------------------------------------------------------------------

/// Text checkpoint: JSON header line (shapes, lambda, seed, step) followed by
/// one CSV line per layer of 17-significant-digit weights.
void save_checkpoint(std::ostream& out, const TrainState& state, Seed seed);
void save_checkpoint_file(const std::string& path, const TrainState& state, Seed seed);
TrainState load_checkpoint(std::istream& in);
TrainState load_checkpoint_file(const std::string& path);

void write_epoch_log_csv(std::ostream& out, const std::vector<EpochLog>& logs);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Ring of 8 Gaussian modes at the given radius.
PointCloud eight_gaussians(std::size_t count, double radius, double sigma, Seed seed);
/// Two interleaved half-circles in 2-D with additive noise.
PointCloud two_moons(std::size_t count, double noise, Seed seed);
/// Uniform direction times a radius in [radius - thickness/2, radius + thickness/2].
PointCloud spherical_shell(std::size_t count, int n_dim, double radius, double thickness,
                           Seed seed);

/// IDX (MNIST layout) readers: big-endian, magic 0x803 for images (scaled to
/// [0,1]) and 0x801 for labels.
PointCloud read_idx_images(const std::string& path, std::size_t max_count = 0);
std::vector<int> read_idx_labels(const std::string& path, std::size_t max_count = 0);
void write_idx_images(const std::string& path, const PointCloud& images, int rows, int cols);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

}  // namespace xsdist
