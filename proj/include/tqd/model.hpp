#pragma once

#include "tqd/video.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tqd {

struct ModelConfig {
    VideoShape shape{};
    int hidden1 = 128;
    int hidden2 = 128;
    /// Sinusoidal timestep features: sin/cos of 2^k * pi * t for k < frequencies.
    int frequencies = 8;
    std::uint64_t seed = 0;
    /// Start the output layer at zero (the model then predicts 0 everywhere).
    bool zero_output_layer = false;
    /// Adds g(t) * x_t to the output, with g linear in the timestep features.
    bool gated_skip = true;
    /// Apply the MLP to each frame with shared weights (input gets a one-hot frame
    /// position); otherwise the whole flattened video is one input vector.
    bool per_frame = true;
    /// Per-frame layout only: frames f-k..f+k (k <= this) are appended to the input
    /// of frame f, so the shared MLP sees local motion.
    int temporal_context = 1;
    /// Width of a pointwise pathway applied to every pixel value on its own:
    ///   sum_k (pO_k . gate(t) + po_k) tanh(pa_k x + pB_k . emb(t) + pc_k).
    /// Lets the model denoise near-clean pixels sharply. 0 disables it.
    int pixel_hidden = 16;

    std::size_t video_dim() const { return shape.size(); }
    std::size_t embed_dim() const { return 2 * static_cast<std::size_t>(frequencies); }
    /// Length of gate_features: the embedding plus 1 / (t + 0.1).
    std::size_t gate_dim() const { return embed_dim() + 1; }
    /// Length of one MLP input/output unit: a frame, or the whole video.
    std::size_t unit_dim() const;
    std::size_t units_per_video() const;
    std::size_t input_dim() const;
    std::size_t parameter_count() const;

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

Eigen::VectorXd time_embedding(double t, int frequencies);
/// Inputs of the skip gain and of the pixel-pathway output weights.
Eigen::VectorXd gate_features(double t, int frequencies);

/// Unconditional velocity field. For each unit u of x_t (a frame by default):
///   v_u = W3[pos] tanh(W2 tanh(W1 [u; emb(t); pos; ctx] + b1) + b2) + b3[pos] + (ws . gate(t) + bs) u
/// where pos is the one-hot frame index and ctx the neighbouring frames (per-frame
/// layout only; the output layer W3, b3 is separate per frame position), and the gated skip
/// term is optional, plus the pixel pathway described on ModelConfig. Parameters
/// live in one flat vector (W1, b1, W2, b2, W3, b3, ws, bs, pa, pB, pc, pO, po;
/// matrices column-major).
class VelocityModel {
public:
    VelocityModel() = default;
    explicit VelocityModel(const ModelConfig& config);
    VelocityModel(const ModelConfig& config, Eigen::VectorXd parameters);

    const ModelConfig& config() const { return config_; }
    const Eigen::VectorXd& parameters() const { return theta_; }
    Eigen::VectorXd& parameters() { return theta_; }

    /// Velocity for one state. Throws on shape mismatch.
    Eigen::VectorXd forward(std::span<const double> x_t, double t) const;

    /// Batched forward: `x_t` is video_dim x N, one column per sample.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x_t, std::span<const double> t) const;

    struct LossGrad {
        double loss = 0.0;
        Eigen::VectorXd grad;
    };

    /// Mean squared error between v(x_t, t) and (x1 - x0) over all elements and
    /// samples, with its exact reverse-mode gradient. x_t = t*x1 + (1-t)*x0.
    LossGrad loss_and_grad(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x1, std::span<const double> t) const;
    LossGrad loss_and_grad(std::span<const double> x0, std::span<const double> x1, double t) const;

    /// Loss only (used by finite-difference checks).
    double loss(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x1, std::span<const double> t) const;

    struct Block {
        const char* name;
        std::size_t offset;
        std::size_t size;
    };
    /// Parameter blocks in storage order.
    std::array<Block, 13> blocks() const;

private:
    struct Trace;
    Trace run(const Eigen::MatrixXd& x_t, std::span<const double> t) const;

    ModelConfig config_{};
    Eigen::VectorXd theta_;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected moment-based SGD.
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    AdamOptimizer(std::size_t n, AdamConfig config);

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

    const AdamConfig& config() const { return config_; }
    std::uint64_t steps() const { return t_; }
    const Eigen::VectorXd& first_moment() const { return m_; }
    const Eigen::VectorXd& second_moment() const { return v_; }

private:
    AdamConfig config_{};
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    std::uint64_t t_ = 0;
};

/// Checkpoint: "TQDCKPT1", u32 LE header length, JSON header, then float64 LE parameters.
struct Checkpoint {
    VelocityModel model;
    std::uint64_t step = 0;
    std::uint64_t seed = 0;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tqd
