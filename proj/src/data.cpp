#include "crc/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "crc/error.hpp"
#include "crc/random.hpp"

namespace crc {
namespace {

constexpr char kVideoMagic[4] = {'C', 'R', 'C', 'V'};
constexpr std::size_t kVideoHeader = 20;

struct MotionState {
    double x = 0.0, y = 0.0;
    double heading = 0.0;
    double intensity = 1.0;
    double noise = 0.0;
};

void redraw_segment(MotionState& s, const SyntheticSpec& spec, Rng& rng) {
    const auto d = rng.below(spec.directions);
    s.heading = 2.0 * M_PI * static_cast<double>(d) / static_cast<double>(spec.directions);
    s.intensity = rng.uniform(spec.intensity_min, spec.intensity_max);
    s.noise = rng.uniform(spec.noise_min, spec.noise_max);
}

// Renders `frames` frames; frames with anomalous[i] move at the boosted speed.
Video render(const SyntheticSpec& spec, std::size_t frames, const std::vector<int>& anomalous, Rng& rng) {
    const std::size_t s = spec.frame_size, c = spec.channels;
    Video v{Tensor({frames, s, s, c})};
    MotionState st;
    st.x = rng.uniform(0.0, static_cast<double>(s));
    st.y = rng.uniform(0.0, static_cast<double>(s));
    const double size = static_cast<double>(s);
    for (std::size_t f = 0; f < frames; ++f) {
        if (f % spec.segment_length == 0) redraw_segment(st, spec, rng);
        const bool odd = anomalous[f] != 0;
        if (f > 0) {
            const double sp = spec.speed * (odd ? spec.anomaly_speed_multiplier : 1.0);
            const double heading = st.heading + (odd ? spec.anomaly_heading_offset : 0.0);
            st.x = std::fmod(st.x + sp * std::cos(heading) + size, size);
            st.y = std::fmod(st.y + sp * std::sin(heading) + size, size);
        }
        const double sigma = spec.blob_sigma * (odd ? spec.anomaly_sigma_scale : 1.0);
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
        double* frame = v.frames.data() + f * s * s * c;
        for (std::size_t py = 0; py < s; ++py) {
            double dy = std::abs(static_cast<double>(py) - st.y);
            dy = std::min(dy, size - dy);
            for (std::size_t px = 0; px < s; ++px) {
                double dx = std::abs(static_cast<double>(px) - st.x);
                dx = std::min(dx, size - dx);
                const double blob = st.intensity * std::exp(-(dx * dx + dy * dy) * inv2s2);
                for (std::size_t ch = 0; ch < c; ++ch) {
                    double p = spec.background + blob + st.noise * rng.normal();
                    p = std::clamp(p, 0.0, 1.0);
                    frame[(py * s + px) * c + ch] = static_cast<double>(static_cast<float>(p));
                }
            }
        }
    }
    return v;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
    return v;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SyntheticData out;
    const std::vector<int> normal(spec.train_frames_per_video, 0);
    for (std::size_t i = 0; i < spec.train_videos; ++i)
        out.train.push_back(render(spec, spec.train_frames_per_video, normal, rng));
    out.test_labels.assign(spec.test_frames, 0);
    for (const auto& iv : spec.anomaly_intervals)
        std::fill(out.test_labels.begin() + static_cast<long>(iv.begin),
                  out.test_labels.begin() + static_cast<long>(iv.end), 1);
    out.test = render(spec, spec.test_frames, out.test_labels, rng);
    return out;
}

std::vector<std::uint8_t> encode_video(const Video& video) {
    const Tensor& f = video.frames;
    if (f.rank() != 4) throw DimensionError("video tensor must be frames x H x W x C");
    std::vector<std::uint8_t> out;
    out.reserve(kVideoHeader + 4 * f.size());
    out.insert(out.end(), std::begin(kVideoMagic), std::end(kVideoMagic));
    for (std::size_t a = 0; a < 4; ++a) put_u32(out, static_cast<std::uint32_t>(f.dim(a)));
    for (double v : f.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

Video decode_video(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw FormatError("video: truncated magic", bytes.size());
    if (!std::equal(std::begin(kVideoMagic), std::end(kVideoMagic), bytes.begin()))
        throw FormatError("video: bad magic, expected CRCV", 0);
    if (bytes.size() < kVideoHeader) throw FormatError("video: truncated header", bytes.size());
    Shape shape(4);
    for (std::size_t a = 0; a < 4; ++a) {
        shape[a] = get_u32(bytes, 4 + 4 * a);
        if (shape[a] == 0) throw FormatError("video: zero extent in header", 4 + 4 * a);
    }
    const std::uint64_t count = static_cast<std::uint64_t>(shape[0]) * shape[1] * shape[2] * shape[3];
    const std::uint64_t need = kVideoHeader + 4 * count;
    if (bytes.size() < need) {
        // offset of the first pixel that is not fully present
        const std::uint64_t complete = (bytes.size() - kVideoHeader) / 4;
        throw FormatError("video: truncated pixel payload, expected " + std::to_string(need) + " bytes",
                          kVideoHeader + 4 * complete);
    }
    if (bytes.size() > need) throw FormatError("video: trailing bytes after payload", need);
    Tensor frames(shape);
    for (std::uint64_t i = 0; i < count; ++i) {
        const float p = std::bit_cast<float>(get_u32(bytes, kVideoHeader + 4 * i));
        if (!(p >= 0.0f && p <= 1.0f)) throw FormatError("video: pixel outside [0, 1]", kVideoHeader + 4 * i);
        frames[i] = static_cast<double>(p);
    }
    return Video{std::move(frames)};
}

void save_video(const std::string& path, const Video& video) {
    const auto bytes = encode_video(video);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write video '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + path + "'");
}

Video load_video(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open video '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_video(bytes);
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write labels '" + path + "'");
    for (int l : labels) out << l << '\n';
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open labels '" + path + "'");
    std::vector<int> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line != "0" && line != "1")
            throw DataError("labels '" + path + "' line " + std::to_string(lineno) + ": expected 0 or 1");
        out.push_back(line == "1");
    }
    return out;
}

std::size_t clip_count(const Video& video, std::size_t clip_length) {
    return video.num_frames() >= clip_length ? video.num_frames() - clip_length + 1 : 0;
}

Tensor clip_at(const Video& video, std::size_t start, std::size_t clip_length) {
    if (start + clip_length > video.num_frames()) throw DataError("clip extends past the end of the video");
    const std::size_t h = video.height(), w = video.width(), c = video.channels();
    Tensor clip({h, w, clip_length * c});
    const std::size_t frame = h * w * c;
    for (std::size_t t = 0; t < clip_length; ++t) {
        const double* src = video.frames.data() + (start + t) * frame;
        for (std::size_t p = 0; p < h * w; ++p)
            for (std::size_t ch = 0; ch < c; ++ch) clip[p * clip_length * c + t * c + ch] = src[p * c + ch];
    }
    return clip;
}

std::vector<double> frame_difference_scores(const Video& video) {
    const std::size_t n = video.num_frames();
    const std::size_t frame = video.height() * video.width() * video.channels();
    std::vector<double> out(n, 0.0);
    for (std::size_t f = 1; f < n; ++f) {
        const double* a = video.frames.data() + f * frame;
        const double* b = a - frame;
        double s = 0.0;
        for (std::size_t i = 0; i < frame; ++i) s += std::abs(a[i] - b[i]);
        out[f] = s / static_cast<double>(frame);
    }
    if (n > 1) out[0] = out[1];
    return out;
}

}  // namespace crc
