#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"crc: causal representation consistency for video anomaly detection"};
    app.require_subcommand(1);

    crc::SynthOptions synth;
    std::optional<std::uint64_t> synth_seed;
    auto* s = app.add_subcommand("synth", "generate the synthetic train/test videos");
    s->add_option("--spec", synth.spec_path, "key=value file with synth.* keys (defaults when omitted)");
    s->add_option("--out", synth.out_dir, "output directory")->required();
    s->add_option("--seed", synth_seed, "generator seed (overrides CRC_SEED and the file)");

    crc::TrainOptions tr;
    std::optional<std::uint64_t> train_seed;
    auto* t = app.add_subcommand("train", "train a model and write a checkpoint");
    t->add_option("--config", tr.config_path, "key=value configuration")->required();
    t->add_option("--data", tr.data_dir, "directory with train_*.crcv")->required();
    t->add_option("--out", tr.out, "checkpoint path")->required();
    t->add_option("--resume", tr.resume, "continue from this checkpoint");
    t->add_option("--log", tr.log, "loss CSV path (default <out>.loss.csv)");
    t->add_option("--seed", train_seed, "training seed (overrides CRC_SEED and the file)");

    crc::ScoreOptions sc;
    auto* c = app.add_subcommand("score", "score every frame of a video");
    c->add_option("--ckpt", sc.checkpoint, "checkpoint")->required();
    c->add_option("--video", sc.video, "raw video (.crcv)")->required();
    c->add_option("--out", sc.out, "score CSV")->required();
    c->add_option("--labels", sc.labels, "optional per-frame labels to include");

    crc::EvalOptions ev;
    auto* e = app.add_subcommand("eval", "frame-level AUC, EER and ROC sweep");
    e->add_option("--scores", ev.scores, "score CSV")->required();
    e->add_option("--labels", ev.labels, "label file (default: label column of the CSV)");
    e->add_option("--roc-out", ev.roc_out, "write the ROC sweep here instead of stdout");

    crc::GradcheckOptions gc;
    auto* g = app.add_subcommand("gradcheck", "finite-difference check of the full training loss");
    g->add_option("--seed", gc.seed, "first seed")->capture_default_str();
    g->add_option("--seeds", gc.seeds, "number of consecutive seeds")->capture_default_str();
    g->add_option("--eps", gc.eps, "central-difference step")->capture_default_str();

    std::string profile = "default";
    auto* d = app.add_subcommand("defaults", "print the full configuration of a profile");
    d->add_option("--profile", profile, "default, ped2-like, avenue-like, shanghaitech-like, synth or gradcheck")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : crc::kExitConfig;
    }

    auto& out = std::cout;
    auto& log = std::cerr;
    return crc::run_command(
        [&]() -> int {
            if (*s) {
                synth.seed = synth_seed;
                return crc::cmd_synth(synth, out, log);
            }
            if (*t) {
                tr.seed = train_seed;
                return crc::cmd_train(tr, out, log);
            }
            if (*c) return crc::cmd_score(sc, out, log);
            if (*e) return crc::cmd_eval(ev, out, log);
            if (*g) return crc::cmd_gradcheck(gc, out, log);
            return crc::cmd_defaults(profile, out);
        },
        log);
}
