#include "crc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "crc/error.hpp"

namespace crc {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_u64(key, trim(item)));
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

std::string format_list(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::vector<Interval> parse_intervals(const std::string& key, const std::string& v) {
    std::vector<Interval> out;
    if (v == "none" || v.empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto dash = item.find('-');
        if (dash == std::string::npos)
            throw ConfigError("config key '" + key + "': interval '" + item + "' is not begin-end");
        out.push_back({parse_u64(key, trim(item.substr(0, dash))), parse_u64(key, trim(item.substr(dash + 1)))});
    }
    return out;
}

std::string format_intervals(const std::vector<Interval>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i].begin) + "-" + std::to_string(v[i].end);
    return out;
}

struct Field {
    const char* key;
    const char* doc;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

#define SIZE_FIELD(obj, name, doc)                                                             \
    Field {                                                                                    \
        #name, doc, [](const RunConfig& c) { return std::to_string(c.obj.name); },             \
            [](RunConfig& c, const std::string& v) { c.obj.name = parse_u64(#name, v); }       \
    }
#define DOUBLE_FIELD(obj, name, doc)                                                           \
    Field {                                                                                    \
        #name, doc, [](const RunConfig& c) { return format_double(c.obj.name); },              \
            [](RunConfig& c, const std::string& v) { c.obj.name = parse_double(#name, v); }    \
    }
#define BOOL_FIELD(obj, name, doc)                                                             \
    Field {                                                                                    \
        #name, doc, [](const RunConfig& c) { return std::string(c.obj.name ? "true" : "false"); }, \
            [](RunConfig& c, const std::string& v) { c.obj.name = parse_bool(#name, v); }      \
    }

const std::vector<Field>& train_fields() {
    static const std::vector<Field> fields = {
        Field{"profile", "preset applied before the other keys: default, ped2-like, avenue-like, shanghaitech-like, synth, gradcheck",
              [](const RunConfig& c) { return c.train.profile; },
              [](RunConfig& c, const std::string& v) { c.train.profile = v; }},
        SIZE_FIELD(train, clip_length, "frames per clip (T), stacked on channels"),
        SIZE_FIELD(train, frame_height, "input frame height"),
        SIZE_FIELD(train, frame_width, "input frame width"),
        SIZE_FIELD(train, input_channels, "channels per input frame"),
        Field{"encoder_channels", "output channels of the first four extractor layers",
              [](const RunConfig& c) { return format_list(c.train.encoder_channels); },
              [](RunConfig& c, const std::string& v) { c.train.encoder_channels = parse_list("encoder_channels", v); }},
        SIZE_FIELD(train, feature_channels, "feature channels C (fifth extractor layer)"),
        SIZE_FIELD(train, encoder_downsample, "number of stride-2 extractor layers (of 5)"),
        SIZE_FIELD(train, cic_width, "characterizer channel width"),
        SIZE_FIELD(train, factors, "causal factor count n"),
        SIZE_FIELD(train, memory_entries, "memory entries N"),
        SIZE_FIELD(train, clusters, "cluster count k"),
        SIZE_FIELD(train, batch_size, "clips per batch b (also the scoring window)"),
        DOUBLE_FIELD(train, learning_rate, "Adam learning rate"),
        DOUBLE_FIELD(train, lambda, "weight of the R->R~ correlation term"),
        DOUBLE_FIELD(train, mu_compact, "memory compactness loss weight"),
        DOUBLE_FIELD(train, mu_separate, "memory separateness loss weight"),
        DOUBLE_FIELD(train, mu_cluster, "clustering loss weight (phase 2)"),
        DOUBLE_FIELD(train, separate_margin, "separateness hinge margin"),
        SIZE_FIELD(train, phase1_epochs, "epochs before clustering is switched on"),
        SIZE_FIELD(train, total_epochs, "total training epochs"),
        SIZE_FIELD(train, kmeans_iterations, "Lloyd iteration cap"),
        SIZE_FIELD(train, seed, "training seed (CRC_SEED and --seed override)"),
        BOOL_FIELD(train, standardize_clips, "standardize each input clip to zero mean and unit variance"),
        BOOL_FIELD(train, center_factors, "center causal factors over the batch before correlating"),
        BOOL_FIELD(train, use_clustering, "ablation: clustering term and distance D"),
        BOOL_FIELD(train, use_c1, "ablation: R->R~ term"),
        BOOL_FIELD(train, use_c2, "ablation: R->R term"),
        BOOL_FIELD(train, use_c3, "ablation: R~->R~ term"),
        BOOL_FIELD(train, use_avg_pool, "ablation: average-pooled difference score"),
        BOOL_FIELD(train, use_max_pool, "ablation: max-pooled difference score"),
    };
    return fields;
}

#define SYNTH_SIZE(name, doc)                                                                   \
    Field {                                                                                     \
        "synth." #name, doc, [](const RunConfig& c) { return std::to_string(c.synth.name); },   \
            [](RunConfig& c, const std::string& v) { c.synth.name = parse_u64("synth." #name, v); } \
    }
#define SYNTH_DOUBLE(name, doc)                                                                 \
    Field {                                                                                     \
        "synth." #name, doc, [](const RunConfig& c) { return format_double(c.synth.name); },    \
            [](RunConfig& c, const std::string& v) { c.synth.name = parse_double("synth." #name, v); } \
    }

const std::vector<Field>& synth_fields() {
    static const std::vector<Field> fields = {
        SYNTH_SIZE(frame_size, "square frame side in pixels"),
        SYNTH_SIZE(channels, "channels per frame"),
        SYNTH_SIZE(train_videos, "number of training videos"),
        SYNTH_SIZE(train_frames_per_video, "frames per training video"),
        SYNTH_SIZE(test_frames, "frames in the test video"),
        Field{"synth.anomaly_intervals", "anomalous frame ranges begin-end (end exclusive), comma separated, or none",
              [](const RunConfig& c) { return format_intervals(c.synth.anomaly_intervals); },
              [](RunConfig& c, const std::string& v) {
                  c.synth.anomaly_intervals = parse_intervals("synth.anomaly_intervals", v);
              }},
        SYNTH_DOUBLE(blob_sigma, "blob Gaussian radius in pixels"),
        SYNTH_DOUBLE(speed, "normal blob speed in pixels per frame"),
        SYNTH_SIZE(directions, "number of allowed headings"),
        SYNTH_DOUBLE(intensity_min, "lowest blob intensity"),
        SYNTH_DOUBLE(intensity_max, "highest blob intensity"),
        SYNTH_DOUBLE(noise_min, "lowest per-segment noise std"),
        SYNTH_DOUBLE(noise_max, "highest per-segment noise std"),
        SYNTH_DOUBLE(background, "background level"),
        SYNTH_SIZE(segment_length, "frames between redraws of heading, intensity and noise"),
        SYNTH_DOUBLE(anomaly_speed_multiplier, "speed factor inside anomaly intervals"),
        SYNTH_DOUBLE(anomaly_sigma_scale, "blob width factor inside anomaly intervals"),
        SYNTH_DOUBLE(anomaly_heading_offset, "heading offset in radians inside anomaly intervals"),
        SYNTH_SIZE(seed, "generator seed"),
    };
    return fields;
}

const Field* find_field(const std::string& key) {
    for (const auto* table : {&train_fields(), &synth_fields()})
        for (const auto& f : *table)
            if (key == f.key) return &f;
    return nullptr;
}

}  // namespace

std::size_t TrainConfig::feature_height() const { return frame_height >> encoder_downsample; }
std::size_t TrainConfig::feature_width() const { return frame_width >> encoder_downsample; }

void TrainConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (clip_length == 0 || input_channels == 0) fail("clip_length and input_channels must be positive");
    if (encoder_channels.size() != 4) fail("encoder_channels must list exactly 4 widths");
    for (auto c : encoder_channels)
        if (c == 0) fail("encoder_channels must be positive");
    if (feature_channels == 0 || cic_width == 0) fail("feature_channels and cic_width must be positive");
    if (encoder_downsample > 5) fail("encoder_downsample must be at most 5");
    const std::size_t div = std::size_t{1} << encoder_downsample;
    if (frame_height == 0 || frame_width == 0 || frame_height % div != 0 || frame_width % div != 0)
        fail("frame size " + std::to_string(frame_height) + "x" + std::to_string(frame_width) +
             " is not divisible by " + std::to_string(div));
    if (feature_height() < 2 || feature_width() < 2) fail("feature map must be at least 2x2");
    if (factors < 2) fail("factors must be >= 2");
    if (4 * factors > feature_height() * feature_width() * feature_channels)
        fail("factors must not exceed H*W*C/4 of the feature map");
    if (memory_entries < 2) fail("memory_entries must be >= 2 (separateness loss)");
    if (clusters == 0) fail("clusters must be positive");
    if (batch_size < 2) fail("batch_size must be >= 2");
    if (!(learning_rate > 0.0) || !(lambda > 0.0)) fail("learning_rate and lambda must be positive");
    if (mu_compact < 0.0 || mu_separate < 0.0 || mu_cluster < 0.0 || separate_margin < 0.0)
        fail("loss weights and margin must be non-negative");
    if (phase1_epochs > total_epochs) fail("phase1_epochs must not exceed total_epochs");
    if (!use_avg_pool && !use_max_pool) fail("at least one pooling route must stay enabled");
}

void SyntheticSpec::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("synthetic spec: " + m); };
    if (frame_size < 8) fail("frame_size must be >= 8");
    if (channels == 0) fail("channels must be positive");
    if (train_videos == 0 || train_frames_per_video == 0) fail("training set is empty");
    if (test_frames == 0) fail("test_frames must be positive");
    if (directions == 0) fail("directions must be positive");
    if (!(blob_sigma > 0.0) || speed < 0.0 || anomaly_speed_multiplier < 0.0 ||
        !(anomaly_sigma_scale > 0.0) || !std::isfinite(anomaly_heading_offset))
        fail("bad motion parameters");
    if (intensity_min < 0.0 || intensity_max < intensity_min) fail("bad intensity range");
    if (noise_min < 0.0 || noise_max < noise_min) fail("bad noise range");
    if (segment_length == 0) fail("segment_length must be positive");
    std::size_t last_end = 0;
    for (const auto& iv : anomaly_intervals) {
        if (iv.begin >= iv.end) fail("empty anomaly interval");
        if (iv.end > test_frames) fail("anomaly interval exceeds the test sequence");
        if (iv.begin < last_end) fail("anomaly intervals must be sorted and disjoint");
        last_end = iv.end;
    }
}

TrainConfig profile_config(const std::string& name) {
    TrainConfig c;
    c.profile = name;
    if (name == "default" || name == "ped2-like") {
        c.lambda = 10.0;
    } else if (name == "avenue-like") {
        c.lambda = 18.0;
    } else if (name == "shanghaitech-like") {
        c.lambda = 20.0;
    } else if (name == "synth") {
        c.frame_height = 32;
        c.frame_width = 32;
        c.encoder_channels = {8, 16, 16, 32};
        c.feature_channels = 32;
        c.encoder_downsample = 4;
        c.cic_width = 32;
        c.factors = 8;
        c.memory_entries = 16;
        c.clusters = 4;
        c.learning_rate = 1e-3;
        c.lambda = 10.0;
        c.phase1_epochs = 20;
        c.total_epochs = 40;
    } else if (name == "gradcheck") {
        // Smallest network that still exercises every layer.
        c.clip_length = 2;
        c.frame_height = c.frame_width = 16;
        c.encoder_channels = {4, 4, 8, 8};
        c.feature_channels = 8;
        c.encoder_downsample = 3;
        c.cic_width = 4;
        c.factors = 4;
        c.memory_entries = 4;
        c.clusters = 2;
        c.batch_size = 2;
        c.phase1_epochs = 0;
        c.total_epochs = 1;
    } else {
        throw ConfigError("unknown profile '" + name + "'");
    }
    return c;
}

RunConfig RunConfig::parse(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::vector<std::string> order;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!find_field(key)) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (entries.count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        entries[key] = value;
        order.push_back(key);
    }
    RunConfig cfg;
    if (auto it = entries.find("profile"); it != entries.end()) cfg.train = profile_config(it->second);
    for (const auto& key : order)
        if (key != "profile") find_field(key)->set(cfg, entries[key]);
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::serialize() const {
    std::string out;
    for (const auto* table : {&train_fields(), &synth_fields()})
        for (const auto& f : *table) out += std::string(f.key) + "=" + f.get(*this) + "\n";
    return out;
}

std::vector<std::pair<std::string, std::string>> documented_keys() {
    const RunConfig defaults;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto* table : {&train_fields(), &synth_fields()})
        for (const auto& f : *table) out.emplace_back(std::string(f.key) + "=" + f.get(defaults), f.doc);
    return out;
}

}  // namespace crc
