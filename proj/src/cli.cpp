#include "crc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "crc/checkpoint.hpp"
#include "crc/config.hpp"
#include "crc/data.hpp"
#include "crc/error.hpp"
#include "crc/scoring.hpp"
#include "crc/training.hpp"

namespace crc {
namespace fs = std::filesystem;

namespace {

std::vector<Video> load_training_videos(const std::string& dir, const TrainConfig& config) {
    if (!fs::is_directory(dir)) throw DataError("data directory '" + dir + "' does not exist");
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("train_") && name.ends_with(".crcv"))
            paths.push_back(entry.path());
    }
    if (paths.empty()) throw DataError("no train_*.crcv videos in '" + dir + "'");
    std::sort(paths.begin(), paths.end());
    std::vector<Video> videos;
    for (const auto& p : paths) {
        Video v = load_video(p.string());
        if (v.height() != config.frame_height || v.width() != config.frame_width ||
            v.channels() != config.input_channels)
            throw DataError("'" + p.string() + "' does not match the configured frame geometry");
        if (v.num_frames() < config.clip_length + config.batch_size - 1)
            throw DataError("'" + p.string() + "' is too short for one training batch");
        videos.push_back(std::move(v));
    }
    return videos;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << text;
    if (!f) throw DataError("write failed for '" + path + "'");
}

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value, std::uint64_t file_value) {
    if (flag) return *flag;
    if (env_value != nullptr && *env_value != '\0') {
        const std::string s(env_value);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw ConfigError("CRC_SEED='" + s + "' is not an unsigned integer");
        return v;
    }
    return file_value;
}

std::string train_video_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "train_%03zu.crcv", index);
    return buf;
}

int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err) {
    RunConfig rc = opt.spec_path.empty() ? RunConfig{} : RunConfig::load(opt.spec_path);
    rc.synth.seed = resolve_seed(opt.seed, std::getenv("CRC_SEED"), rc.synth.seed);
    rc.synth.validate();
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw DataError("cannot create '" + opt.out_dir + "': " + ec.message());
    err << "synth: generating " << rc.synth.train_videos << " training videos and one test video\n";
    const SyntheticData data = generate(rc.synth);
    const fs::path dir(opt.out_dir);
    for (std::size_t i = 0; i < data.train.size(); ++i) save_video((dir / train_video_name(i)).string(), data.train[i]);
    save_video((dir / kTestVideoName).string(), data.test);
    save_labels((dir / kTestLabelsName).string(), data.test_labels);
    std::size_t anomalous = 0;
    for (int l : data.test_labels) anomalous += static_cast<std::size_t>(l);
    out << "train_videos=" << data.train.size() << "\n"
        << "test_frames=" << data.test.num_frames() << "\n"
        << "anomalous_frames=" << anomalous << "\n"
        << "seed=" << rc.synth.seed << "\n";
    return kExitOk;
}

int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
    RunConfig rc = RunConfig::load(opt.config_path);
    rc.train.seed = resolve_seed(opt.seed, std::getenv("CRC_SEED"), rc.train.seed);
    rc.train.validate();

    TrainState state;
    if (opt.resume.empty()) {
        state = TrainState::initial(rc.train);
    } else {
        state = load_checkpoint(opt.resume);
        TrainConfig saved = state.config, wanted = rc.train;
        saved.total_epochs = wanted.total_epochs;
        saved.seed = wanted.seed;
        if (!(saved == wanted))
            throw ConfigError("--resume: configuration differs from the checkpoint beyond total_epochs");
        if (state.epoch > rc.train.total_epochs)
            throw ConfigError("--resume: checkpoint is already past total_epochs");
        state.config.total_epochs = rc.train.total_epochs;
    }
    const std::vector<Video> videos = load_training_videos(opt.data_dir, state.config);

    TrainObserver observer;
    observer.on_epoch = [&err](const EpochLog& log, const TrainState&) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "epoch=%zu phase=%d total=%.6g consistency=%.6g cluster=%.6g\n", log.epoch,
                      log.phase, log.mean.total, log.mean.consistency, log.mean.cluster);
        err << buf << std::flush;
    };
    const std::vector<EpochLog> logs = train(state, videos, observer);

    save_checkpoint(opt.out, state);
    std::string csv = loss_log_header() + "\n";
    for (const auto& l : logs) csv += loss_log_row(l) + "\n";
    const std::string log_path = opt.log.empty() ? opt.out + ".loss.csv" : opt.log;
    write_text(log_path, csv);

    out << "epochs=" << state.epoch << "\n"
        << "checkpoint=" << opt.out << "\n"
        << "loss_log=" << log_path << "\n";
    if (!logs.empty()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", logs.back().mean.total);
        out << "final_loss=" << buf << "\n";
    }
    return kExitOk;
}

int cmd_score(const ScoreOptions& opt, std::ostream& out, std::ostream& err) {
    const TrainState state = load_checkpoint(opt.checkpoint);
    const Video video = load_video(opt.video);
    err << "score: " << video.num_frames() << " frames\n";
    ScoreSeries series = score_video(state.model, state.config, video);
    if (!opt.labels.empty()) {
        series.labels = load_labels(opt.labels);
        if (series.labels.size() != series.raw.size())
            throw DataError("label file has " + std::to_string(series.labels.size()) + " entries for " +
                            std::to_string(series.raw.size()) + " frames");
    }
    save_scores(opt.out, series);
    out << "frames=" << series.raw.size() << "\n"
        << "windows=" << series.windows.size() << "\n"
        << "first_scored_frame=" << series.first_scored_frame << "\n";
    return kExitOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream&) {
    const ScoreSeries series = load_scores(opt.scores);
    std::vector<int> labels = opt.labels.empty() ? series.labels : load_labels(opt.labels);
    if (labels.empty()) throw DataError("no labels: pass --labels or score with labels");
    if (labels.size() != series.normalized.size())
        throw DataError("label count " + std::to_string(labels.size()) + " does not match score count " +
                        std::to_string(series.normalized.size()));
    const EvalReport report = evaluate(series.normalized, labels);
    out << report_text(report);
    if (opt.roc_out.empty())
        out << sweep_csv(report);
    else
        write_text(opt.roc_out, sweep_csv(report));
    return kExitOk;
}

int cmd_gradcheck(const GradcheckOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.seeds == 0) throw ConfigError("--seeds must be positive");
    if (!(opt.eps > 0.0)) throw ConfigError("--eps must be positive");
    bool ok = true;
    for (std::size_t i = 0; i < opt.seeds; ++i) {
        const std::uint64_t seed = opt.seed + i;
        for (const bool clusters : {false, true}) {
            err << "gradcheck: seed " << seed << (clusters ? " with" : " without") << " clustering\n";
            const GradCheckReport r = check_total_loss(seed, clusters, opt.eps);
            const bool pass = r.max_rel_error < opt.tolerance;
            ok = ok && pass;
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "seed=%llu clustering=%s checked=%zu max_rel_error=%.3e worst_tensor=%zu worst_index=%zu "
                          "status=%s\n",
                          static_cast<unsigned long long>(seed), clusters ? "on" : "off", r.checked,
                          r.max_rel_error, r.worst_input, r.worst_index, pass ? "pass" : "fail");
            out << buf;
        }
    }
    return ok ? kExitOk : kExitNumeric;
}

int cmd_defaults(const std::string& profile, std::ostream& out) {
    RunConfig rc;
    rc.train = profile_config(profile);
    out << rc.serialize();
    return kExitOk;
}

int run_command(const std::function<int()>& command, std::ostream& err) {
    try {
        return command();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DimensionError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const InferenceError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const EvaluationError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace crc
