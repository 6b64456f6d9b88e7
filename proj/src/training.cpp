#include "crc/training.hpp"

#include <cmath>
#include <cstdio>

#include "crc/error.hpp"

namespace crc {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamOptions& options) {
    if (params.size() != grads.size()) throw DimensionError("adam_step: parameter and gradient counts differ");
    if (state.first_moment.empty()) {
        for (const Tensor* p : params) {
            state.first_moment.emplace_back(p->shape(), 0.0);
            state.second_moment.emplace_back(p->shape(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) throw DimensionError("adam_step: state does not match parameters");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(options.beta1, t);
    const double c2 = 1.0 - std::pow(options.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = grads[i];
        if (g.shape() != p.shape()) throw DimensionError("adam_step: gradient shape mismatch");
        Tensor& m = state.first_moment[i];
        Tensor& v = state.second_moment[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = options.beta1 * m[j] + (1.0 - options.beta1) * g[j];
            v[j] = options.beta2 * v[j] + (1.0 - options.beta2) * g[j] * g[j];
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            p[j] -= options.learning_rate * mhat / (std::sqrt(vhat) + options.epsilon);
        }
    }
}

BatchLoss total_loss(Binder& bind, const Model& model, const TrainConfig& config, std::span<const Tensor> clips,
                     int phase) {
    if (clips.size() < 2) throw ConfigError("total_loss needs a batch of at least 2 clips");
    Tape& tape = bind.tape();
    const double b = static_cast<double>(clips.size());
    Var memory = tape.constant(model.memory.items);

    BatchLoss out;
    std::vector<Var> shared, priv;
    Var compact = tape.constant(Tensor::scalar(0.0));
    Var separate = tape.constant(Tensor::scalar(0.0));
    for (const auto& clip : clips) {
        ClipForward f = forward_clip(bind, model, config, clip);
        shared.push_back(f.shared_repr);
        priv.push_back(f.private_repr);
        compact = ad::add(compact, compactness_loss(memory, f.features));
        separate = ad::add(separate, separateness_loss(memory, f.features, config.separate_margin));
        out.features.push_back(f.features.value());
        out.alpha.push_back(f.parts.alpha.value());
        out.beta.push_back(f.parts.beta.value());
    }
    compact = ad::scale(compact, 1.0 / b);
    separate = ad::scale(separate, 1.0 / b);

    Var r = ad::stack_rows(shared);
    Var r_tilde = ad::stack_rows(priv);
    const CorrelationSet corr = config.center_factors
                                    ? correlation_matrices(center_rows(r), center_rows(r_tilde))
                                    : correlation_matrices(r, r_tilde);
    const ConsistencyTerms terms{config.use_c1, config.use_c2, config.use_c3};
    Var consistency = consistency_loss(corr, config.lambda, terms);

    Var total = ad::add(consistency, ad::add(ad::scale(compact, config.mu_compact),
                                             ad::scale(separate, config.mu_separate)));
    double cluster_value = 0.0;
    if (phase == 2 && config.use_clustering) {
        if (!model.clusters) throw ConfigError("phase-2 loss needs fitted cluster centers");
        Var cl = clustering_loss(r, *model.clusters);
        cluster_value = cl.value()[0];
        total = ad::add(total, ad::scale(cl, config.mu_cluster));
    }

    out.total = total;
    out.terms = LossTerms{total.value()[0], consistency.value()[0], compact.value()[0], separate.value()[0],
                          cluster_value};
    out.shared_repr = r.value();
    out.private_repr = r_tilde.value();
    out.c1 = corr.c1.value();
    out.c2 = corr.c2.value();
    out.c3 = corr.c3.value();
    return out;
}

Tensor training_representations(const Model& model, const TrainConfig& config, const std::vector<Video>& videos) {
    std::vector<double> rows;
    std::size_t count = 0;
    for (const auto& v : videos)
        for (std::size_t s = 0; s < clip_count(v, config.clip_length); ++s) {
            Tape tape;
            Binder bind(tape, false);
            const ClipForward f = forward_clip(bind, model, config, clip_at(v, s, config.clip_length));
            const Tensor& r = f.shared_repr.value();
            rows.insert(rows.end(), r.values().begin(), r.values().end());
            ++count;
        }
    if (count == 0) throw DataError("no clips in the training set");
    return Tensor({count, config.factors}, std::move(rows));
}

TrainState TrainState::initial(const TrainConfig& config) {
    config.validate();
    TrainState s;
    s.config = config;
    s.rng = Rng(config.seed);
    s.model = Model::init(config, s.rng);
    return s;
}

namespace {

struct Window {
    std::size_t video;
    std::size_t start;  // first clip index
};

// Non-overlapping windows of b consecutive clips from a random offset per
// video, in shuffled order.
std::vector<Window> epoch_windows(const std::vector<Video>& data, const TrainConfig& config, Rng& rng) {
    const std::size_t b = config.batch_size;
    std::vector<Window> out;
    for (std::size_t v = 0; v < data.size(); ++v) {
        const std::size_t clips = clip_count(data[v], config.clip_length);
        if (clips < b) continue;
        const std::size_t offset = rng.below(std::min(b, clips - b + 1));
        for (std::size_t s = offset; s + b <= clips; s += b) out.push_back({v, s});
    }
    for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
    return out;
}

void check_finite(const LossTerms& t) {
    if (!std::isfinite(t.total)) throw NumericError("training loss became non-finite");
}

}  // namespace

std::vector<EpochLog> train(TrainState& state, const std::vector<Video>& data, const TrainObserver& observer) {
    const TrainConfig& config = state.config;
    config.validate();
    if (data.empty()) throw DataError("training set is empty");
    for (const auto& v : data)
        if (v.height() != config.frame_height || v.width() != config.frame_width ||
            v.channels() != config.input_channels)
            throw DataError("training video geometry does not match the configuration");

    std::vector<EpochLog> logs;
    const AdamOptions adam{config.learning_rate};
    auto params = state.model.parameters();
    while (state.epoch < config.total_epochs) {
        const int phase = state.epoch < config.phase1_epochs ? 1 : 2;
        if (phase == 2 && config.use_clustering && !state.model.clusters) {
            const Tensor reps = training_representations(state.model, config, data);
            state.model.clusters = kmeans_fit(reps, config.clusters, state.rng.next_u64(),
                                              KMeansOptions{.max_iter = config.kmeans_iterations});
        }
        const auto windows = epoch_windows(data, config, state.rng);
        if (windows.empty()) throw DataError("no training video holds a full batch of clips");

        LossTerms sum;
        std::vector<Tensor> clips(config.batch_size);
        for (const auto& w : windows) {
            for (std::size_t i = 0; i < config.batch_size; ++i)
                clips[i] = clip_at(data[w.video], w.start + i, config.clip_length);
            Tape tape;
            Binder bind(tape, true);
            BatchLoss loss = total_loss(bind, state.model, config, clips, phase);
            check_finite(loss.terms);
            tape.backward(loss.total);
            std::vector<Tensor> grads;
            grads.reserve(params.size());
            for (const Tensor* p : params) grads.push_back(bind.grad(*p));
            adam_step(params, grads, state.adam, adam);
            state.model.memory = write(state.model.memory, loss.features);
            sum.total += loss.terms.total;
            sum.consistency += loss.terms.consistency;
            sum.compact += loss.terms.compact;
            sum.separate += loss.terms.separate;
            sum.cluster += loss.terms.cluster;
            if (observer.on_batch) observer.on_batch(loss, state);
        }
        if (phase == 2 && config.use_clustering)
            state.model.clusters =
                update_centers(*state.model.clusters, training_representations(state.model, config, data));

        ++state.epoch;
        const double n = static_cast<double>(windows.size());
        EpochLog log{state.epoch, phase,
                     LossTerms{sum.total / n, sum.consistency / n, sum.compact / n, sum.separate / n, sum.cluster / n}};
        logs.push_back(log);
        if (observer.on_epoch) observer.on_epoch(log, state);
    }
    return logs;
}

TrainState train(const std::vector<Video>& data, const TrainConfig& config) {
    TrainState state = TrainState::initial(config);
    train(state, data);
    return state;
}

TrainConfig gradcheck_config(bool with_clusters) {
    TrainConfig c = profile_config("gradcheck");
    c.use_clustering = with_clusters;
    c.validate();
    return c;
}

GradCheckReport check_total_loss(std::uint64_t seed, bool with_clusters, double eps) {
    const TrainConfig config = gradcheck_config(with_clusters);
    Rng rng(seed);
    Model model = Model::init(config, rng);
    // Zero biases make the network positively homogeneous and the
    // correlations saturate, so the check starts from random biases.
    for (Tensor* p : model.parameters())
        if (p->rank() == 1 && p != &model.cic.head.bias)
            for (double& v : p->storage()) v = rng.uniform(0.05, 0.5);
    std::vector<Tensor> clips;
    for (std::size_t i = 0; i < config.batch_size; ++i) {
        Tensor clip({config.frame_height, config.frame_width, config.clip_length * config.input_channels});
        for (double& v : clip.storage()) v = rng.uniform();
        clips.push_back(std::move(clip));
    }
    if (with_clusters) {
        Tensor centers({config.clusters, config.factors});
        for (double& v : centers.storage()) v = rng.normal();
        model.clusters = ClusterModel{std::move(centers)};
    }
    const std::vector<Tensor*> params = model.parameters();
    const int phase = with_clusters ? 2 : 1;
    // A few optimizer steps on the fixture batch move the network off its
    // initialization, where the correlations sit at +-1 and the loss is flat
    // enough for central differences to drown in rounding.
    AdamState adam;
    for (int step = 0; step < 50; ++step) {
        Tape tape;
        Binder bind(tape, true);
        const BatchLoss loss = total_loss(bind, model, config, clips, phase);
        tape.backward(loss.total);
        std::vector<Tensor> grads;
        for (const Tensor* p : params) grads.push_back(bind.grad(*p));
        adam_step(params, grads, adam, AdamOptions{3e-3});
    }
    std::vector<Tensor> inputs;
    for (const Tensor* p : params) inputs.push_back(*p);
    const ScalarFn f = [&](Tape& tape, const std::vector<Var>& leaves) {
        Binder bind(tape, true);
        for (std::size_t i = 0; i < params.size(); ++i) bind.bind(*params[i], leaves[i]);
        return total_loss(bind, model, config, clips, phase).total;
    };
    return grad_check(f, inputs, eps);
}

std::string loss_log_header() { return "epoch,phase,total,consistency,compact,separate,cluster"; }

std::string loss_log_row(const EpochLog& log) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,%.17g,%.17g", log.epoch, log.phase, log.mean.total,
                  log.mean.consistency, log.mean.compact, log.mean.separate, log.mean.cluster);
    return buf;
}

}  // namespace crc
