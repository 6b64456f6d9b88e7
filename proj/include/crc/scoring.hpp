#pragma once

#include <span>
#include <string>
#include <vector>

#include "crc/data.hpp"
#include "crc/metrics.hpp"
#include "crc/model.hpp"

namespace crc {

struct ClipRepresentation {
    Tensor shared;   // r, [n]
    Tensor private_; // r~, [n]
};

// Forward pass for every clip of the video with a frozen model; the memory is not written.
std::vector<ClipRepresentation> clip_representations(const Model& model, const TrainConfig& config,
                                                     const Video& video);

struct WindowScore {
    double raw = 0.0;              // consistency_gap * distance
    double consistency_gap = 0.0;  // |C1 - I|_F^2 over the window
    double distance = 0.0;         // mean nearest-center distance of the shared rows
    Tensor c1, c2, c3;
};

// Scores b consecutive clips. D is the mean nearest-center distance over
// the window's shared rows (1 when the clustering ablation is active).
// Throws InferenceError when clustering is enabled but no centers exist.
WindowScore window_score(std::span<const ClipRepresentation> window, const Model& model, const TrainConfig& config);
WindowScore window_score(std::span<const Tensor> clips, const Model& model, const TrainConfig& config);

struct ScoreSeries {
    std::vector<double> raw;         // per frame
    std::vector<double> normalized;  // per frame, max-min over the video
    std::vector<int> labels;         // optional, per frame
    std::vector<WindowScore> windows;
    std::size_t first_scored_frame = 0;
};

// Sliding windows of b clips with clip stride 1. Each window's score lands
// on its last frame; earlier frames repeat the first score.
ScoreSeries score_video(const Model& model, const TrainConfig& config, const Video& video);

// frame_index,raw,normalized[,label]
std::string score_csv(const ScoreSeries& series);
void save_scores(const std::string& path, const ScoreSeries& series);
// Reads a score CSV; returns normalized scores and labels when the column is present.
ScoreSeries load_scores(const std::string& path);

std::string report_text(const EvalReport& report);
std::string sweep_csv(const EvalReport& report);

}  // namespace crc
