#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crc/data.hpp"
#include "crc/gradcheck.hpp"
#include "crc/model.hpp"

namespace crc {

struct AdamOptions {
    double learning_rate = 8e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    std::uint64_t step = 0;
};

// Bias-corrected Adam. State buffers are created on the first call.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamOptions& options);

struct LossTerms {
    double total = 0.0;
    double consistency = 0.0;
    double compact = 0.0;
    double separate = 0.0;
    double cluster = 0.0;
};

struct BatchLoss {
    Var total;
    LossTerms terms;
    std::vector<Tensor> features;  // F per clip, for the memory write
    Tensor shared_repr;            // R, b x n
    Tensor private_repr;           // R~, b x n
    Tensor c1, c2, c3;
    std::vector<Tensor> alpha, beta;
};

// L = consistency + mu_c compactness + mu_s separateness [+ mu_k clustering in phase 2].
BatchLoss total_loss(Binder& bind, const Model& model, const TrainConfig& config, std::span<const Tensor> clips,
                     int phase);

// Shared-branch representations of every clip of every video, m x n.
Tensor training_representations(const Model& model, const TrainConfig& config, const std::vector<Video>& videos);

struct EpochLog {
    std::size_t epoch = 0;  // 1-based
    int phase = 1;
    LossTerms mean;
};

struct TrainState {
    TrainConfig config;
    Model model;
    AdamState adam;
    std::size_t epoch = 0;  // completed epochs
    Rng rng;

    // Seeded initialization: parameters, memory, RNG stream.
    static TrainState initial(const TrainConfig& config);
};

struct TrainObserver {
    // Called after each optimizer step and memory write.
    std::function<void(const BatchLoss&, const TrainState&)> on_batch;
    std::function<void(const EpochLog&, const TrainState&)> on_epoch;
};

// Runs epochs state.epoch .. config.total_epochs. Phase 1 omits the
// clustering term; at the first phase-2 epoch k-means is fitted on all
// training representations, and centers are refreshed after every phase-2
// epoch. Returns the log of the epochs that were run.
std::vector<EpochLog> train(TrainState& state, const std::vector<Video>& data, const TrainObserver& observer = {});

TrainState train(const std::vector<Video>& data, const TrainConfig& config);

// Tiny configuration for the full-loss gradient check: b=2, 16x16 frames,
// C=8, n=4, N=4, k=2 when clustering is enabled.
TrainConfig gradcheck_config(bool with_clusters);

// Finite-difference check of total_loss with respect to every trainable
// tensor of a tiny model: random initialization and biases, then 50 Adam
// steps (lr 3e-3) on the fixture batch. With clustering the phase-2 loss is
// checked against random centers.
GradCheckReport check_total_loss(std::uint64_t seed, bool with_clusters, double eps = 1e-6);

// CSV with header epoch,phase,total,consistency,compact,separate,cluster
std::string loss_log_header();
std::string loss_log_row(const EpochLog& log);

}  // namespace crc
