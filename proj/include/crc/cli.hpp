#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

namespace crc {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitNumeric = 4,
};

// Seed precedence: explicit flag, then the CRC_SEED environment variable,
// then the value from the config file. A malformed CRC_SEED is a config error.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value, std::uint64_t file_value);

struct SynthOptions {
    std::string spec_path;  // empty: built-in defaults
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

struct TrainOptions {
    std::string config_path;
    std::string data_dir;
    std::string out;
    std::string resume;  // checkpoint to continue from
    std::string log;     // loss CSV; defaults to <out>.loss.csv
    std::optional<std::uint64_t> seed;
};

struct ScoreOptions {
    std::string checkpoint;
    std::string video;
    std::string out;
    std::string labels;  // optional, adds the label column
};

struct EvalOptions {
    std::string scores;
    std::string labels;   // optional when the score CSV carries labels
    std::string roc_out;  // optional; the sweep goes to stdout otherwise
};

struct GradcheckOptions {
    std::uint64_t seed = 1;
    std::size_t seeds = 1;
    double eps = 3e-5;
    double tolerance = 1e-4;
};

// Commands write machine-readable results to `out` and progress to `err`.
// They throw crc errors; run_command maps those to exit codes.
int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err);
int cmd_score(const ScoreOptions& opt, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradcheckOptions& opt, std::ostream& out, std::ostream& err);
int cmd_defaults(const std::string& profile, std::ostream& out);

// 2 for ConfigError, 3 for data, format, dimension, inference and
// evaluation errors, 4 for NumericError, 1 for anything else.
int run_command(const std::function<int()>& command, std::ostream& err);

// File names written by cmd_synth.
std::string train_video_name(std::size_t index);
inline constexpr const char* kTestVideoName = "test.crcv";
inline constexpr const char* kTestLabelsName = "test_labels.txt";

}  // namespace crc
