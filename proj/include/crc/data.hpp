#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crc/config.hpp"
#include "crc/tensor.hpp"

namespace crc {

// Frames as one tensor: num_frames x H x W x C, pixel values in [0, 1].
struct Video {
    Tensor frames;

    std::size_t num_frames() const { return frames.dim(0); }
    std::size_t height() const { return frames.dim(1); }
    std::size_t width() const { return frames.dim(2); }
    std::size_t channels() const { return frames.dim(3); }
};

struct SyntheticData {
    std::vector<Video> train;  // normal only
    Video test;
    std::vector<int> test_labels;  // per test frame, 1 inside anomaly intervals
};

SyntheticData generate(const SyntheticSpec& spec);

// Raw format: "CRCV", little-endian u32 num_frames, height, width, channels,
// then f32 pixels frame-major (each frame row-major H x W x C).
void save_video(const std::string& path, const Video& video);
Video load_video(const std::string& path);
std::vector<std::uint8_t> encode_video(const Video& video);
Video decode_video(const std::vector<std::uint8_t>& bytes);

// One 0/1 per line.
void save_labels(const std::string& path, const std::vector<int>& labels);
std::vector<int> load_labels(const std::string& path);

// Clip starting at frame `start`: T consecutive frames stacked on channels,
// H x W x (T*C) with channel index t*C + c.
Tensor clip_at(const Video& video, std::size_t start, std::size_t clip_length);
std::size_t clip_count(const Video& video, std::size_t clip_length);

// Mean absolute difference to the previous frame; frame 0 copies frame 1.
std::vector<double> frame_difference_scores(const Video& video);

}  // namespace crc
