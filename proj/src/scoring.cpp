#include "crc/scoring.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "crc/error.hpp"

namespace crc {

std::vector<ClipRepresentation> clip_representations(const Model& model, const TrainConfig& config,
                                                     const Video& video) {
    std::vector<ClipRepresentation> out;
    const std::size_t clips = clip_count(video, config.clip_length);
    out.reserve(clips);
    for (std::size_t s = 0; s < clips; ++s) {
        Tape tape;
        Binder bind(tape, false);
        const ClipForward f = forward_clip(bind, model, config, clip_at(video, s, config.clip_length));
        out.push_back({f.shared_repr.value(), f.private_repr.value()});
    }
    return out;
}

WindowScore window_score(std::span<const ClipRepresentation> window, const Model& model, const TrainConfig& config) {
    if (window.size() < 2) throw DataError("a scoring window needs at least 2 clips");
    if (config.use_clustering && !model.clusters)
        throw InferenceError("checkpoint has no cluster centers; train into phase 2 before scoring");
    const std::size_t b = window.size(), n = window.front().shared.size();
    Tensor r({b, n}), rt({b, n});
    for (std::size_t i = 0; i < b; ++i) {
        if (window[i].shared.size() != n || window[i].private_.size() != n)
            throw DimensionError("window_score: representation length mismatch");
        std::copy(window[i].shared.values().begin(), window[i].shared.values().end(), r.data() + i * n);
        std::copy(window[i].private_.values().begin(), window[i].private_.values().end(), rt.data() + i * n);
    }
    if (config.center_factors) {
        r = center_rows(r);
        rt = center_rows(rt);
    }
    WindowScore out;
    out.c1 = correlation_matrix(r, rt);
    out.c2 = correlation_matrix(r, r);
    out.c3 = correlation_matrix(rt, rt);
    out.consistency_gap = fro_sq_diff(out.c1, Tensor::identity(n));
    out.distance = 1.0;
    if (config.use_clustering) {
        double d = 0.0;
        for (const auto& w : window) d += nearest_distance(w.shared.values(), *model.clusters).distance;
        out.distance = d / static_cast<double>(b);
    }
    out.raw = out.consistency_gap * out.distance;
    return out;
}

WindowScore window_score(std::span<const Tensor> clips, const Model& model, const TrainConfig& config) {
    std::vector<ClipRepresentation> reps;
    for (const auto& clip : clips) {
        Tape tape;
        Binder bind(tape, false);
        const ClipForward f = forward_clip(bind, model, config, clip);
        reps.push_back({f.shared_repr.value(), f.private_repr.value()});
    }
    return window_score(reps, model, config);
}

ScoreSeries score_video(const Model& model, const TrainConfig& config, const Video& video) {
    const std::size_t b = config.batch_size, t = config.clip_length;
    if (video.num_frames() < t + b - 1)
        throw DataError("video has " + std::to_string(video.num_frames()) + " frames; scoring needs at least " +
                        std::to_string(t + b - 1));
    if (video.height() != config.frame_height || video.width() != config.frame_width ||
        video.channels() != config.input_channels)
        throw DataError("video geometry does not match the checkpoint configuration");
    const auto reps = clip_representations(model, config, video);
    ScoreSeries s;
    s.first_scored_frame = t + b - 2;
    s.raw.assign(video.num_frames(), 0.0);
    for (std::size_t w = 0; w + b <= reps.size(); ++w) {
        s.windows.push_back(window_score(std::span(reps).subspan(w, b), model, config));
        s.raw[s.first_scored_frame + w] = s.windows.back().raw;
    }
    for (std::size_t f = 0; f < s.first_scored_frame; ++f) s.raw[f] = s.windows.front().raw;
    s.normalized = normalize(s.raw);
    return s;
}

std::string score_csv(const ScoreSeries& series) {
    std::string out = series.labels.empty() ? "frame_index,raw,normalized\n" : "frame_index,raw,normalized,label\n";
    char buf[128];
    for (std::size_t i = 0; i < series.raw.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g", i, series.raw[i], series.normalized[i]);
        out += buf;
        if (!series.labels.empty()) out += "," + std::to_string(series.labels.at(i));
        out += '\n';
    }
    return out;
}

void save_scores(const std::string& path, const ScoreSeries& series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write scores '" + path + "'");
    out << score_csv(series);
}

ScoreSeries load_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scores '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("scores '" + path + "' is empty");
    const bool has_label = line == "frame_index,raw,normalized,label";
    if (!has_label && line != "frame_index,raw,normalized")
        throw DataError("scores '" + path + "': unexpected header '" + line + "'");
    ScoreSeries s;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != (has_label ? 4u : 3u))
            throw DataError("scores '" + path + "' line " + std::to_string(lineno) + ": wrong column count");
        try {
            if (std::stoul(cells[0]) != s.raw.size()) throw DataError("frame_index out of sequence");
            s.raw.push_back(std::stod(cells[1]));
            s.normalized.push_back(std::stod(cells[2]));
            if (has_label) s.labels.push_back(std::stoi(cells[3]));
        } catch (const std::logic_error&) {
            throw DataError("scores '" + path + "' line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return s;
}

std::string report_text(const EvalReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "auc=%.12g\neer=%.12g\nroc_points=%zu\n", report.auc, report.eer,
                  report.sweep.size());
    return buf;
}

std::string sweep_csv(const EvalReport& report) {
    std::string out = "threshold,fpr,tpr\n";
    char buf[128];
    for (const auto& p : report.sweep) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
        out += buf;
    }
    return out;
}

}  // namespace crc
