#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace crc {

struct Interval {
    std::size_t begin = 0;  // first frame
    std::size_t end = 0;    // one past the last frame

    friend bool operator==(const Interval&, const Interval&) = default;
};

struct TrainConfig {
    std::string profile = "default";

    // Data geometry
    std::size_t clip_length = 4;  // T frames stacked on channels
    std::size_t frame_height = 224;
    std::size_t frame_width = 224;
    std::size_t input_channels = 1;

    // Architecture
    std::vector<std::size_t> encoder_channels = {16, 32, 64, 128};  // first four extractor layers
    std::size_t feature_channels = 128;                              // C, fifth layer
    std::size_t encoder_downsample = 5;                              // stride-2 layers among the five
    std::size_t cic_width = 64;
    std::size_t factors = 64;          // n
    std::size_t memory_entries = 64;   // N
    std::size_t clusters = 16;         // k

    // Optimisation
    std::size_t batch_size = 8;  // b
    double learning_rate = 8e-5;
    double lambda = 10.0;
    double mu_compact = 0.1;
    double mu_separate = 0.1;
    double mu_cluster = 0.1;
    double separate_margin = 1.0;
    std::size_t phase1_epochs = 100;
    std::size_t total_epochs = 200;
    std::size_t kmeans_iterations = 100;
    std::uint64_t seed = 1;
    bool standardize_clips = false;  // zero-mean, unit-variance input per clip
    bool center_factors = false;     // center R and R~ over the batch before correlating

    // Ablation switches
    bool use_clustering = true;
    bool use_c1 = true;
    bool use_c2 = true;
    bool use_c3 = true;
    bool use_avg_pool = true;
    bool use_max_pool = true;

    std::size_t feature_height() const;
    std::size_t feature_width() const;
    // Throws ConfigError on inconsistent settings.
    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct SyntheticSpec {
    std::size_t frame_size = 32;
    std::size_t channels = 1;
    std::size_t train_videos = 8;
    std::size_t train_frames_per_video = 250;
    std::size_t test_frames = 1000;
    std::vector<Interval> anomaly_intervals = {{250, 375}, {650, 775}};

    // Normal motif: a Gaussian blob drifting across a torus-wrapped frame.
    double blob_sigma = 2.0;
    double speed = 1.0;               // pixels per frame
    std::size_t directions = 4;       // allowed headings, evenly spaced
    double intensity_min = 0.5;
    double intensity_max = 1.0;
    double noise_min = 0.0;           // per-segment pixel noise std range
    double noise_max = 0.05;
    double background = 0.1;
    std::size_t segment_length = 50;  // frames between jitter redraws

    // Anomaly motif
    double anomaly_speed_multiplier = 3.0;
    double anomaly_sigma_scale = 2.5;     // shape change: blob width factor
    double anomaly_heading_offset = 0.0;  // off-pattern trajectory, radians

    std::uint64_t seed = 7;

    void validate() const;

    friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Named presets. "synth" is sized for CPU-minutes runs on the synthetic set;
// "gradcheck" is the tiny network used by finite-difference checks.
TrainConfig profile_config(const std::string& name);

// Flat key=value configuration covering TrainConfig (bare keys) and
// SyntheticSpec ("synth." keys). '#' starts a comment; unknown keys and
// malformed values throw ConfigError.
struct RunConfig {
    TrainConfig train;
    SyntheticSpec synth;

    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string serialize() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// key, default value, description; for documentation and `crc defaults`.
std::vector<std::pair<std::string, std::string>> documented_keys();

}  // namespace crc
