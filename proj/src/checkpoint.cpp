#include "crc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "crc/error.hpp"

namespace crc {
namespace {

constexpr char kMagic[4] = {'C', 'R', 'C', '1'};

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void bytes(const std::string& s) { buf.insert(buf.end(), s.begin(), s.end()); }
    void tensor(const Tensor& t) {
        u32(static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) u32(static_cast<std::uint32_t>(d));
        for (double v : t.values()) u64(std::bit_cast<std::uint64_t>(v));
    }
    std::vector<std::uint8_t> buf;
};

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size, std::uint64_t base) : data_(data), size_(size), base_(base) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    Tensor tensor() {
        const std::uint64_t at = offset();
        const std::uint32_t rank = u32();
        if (rank == 0 || rank > 8) throw FormatError("checkpoint: implausible tensor rank", at);
        Shape shape(rank);
        std::uint64_t count = 1;
        for (auto& d : shape) {
            d = u32();
            if (d == 0) throw FormatError("checkpoint: zero tensor extent", offset() - 4);
            count *= d;
        }
        if (count * 8 > size_ - pos_) throw FormatError("checkpoint: truncated tensor data", offset());
        std::vector<double> values(count);
        for (auto& v : values) v = std::bit_cast<double>(u64());
        return Tensor(std::move(shape), std::move(values));
    }
    std::vector<Tensor> tensors() {
        const std::uint32_t n = u32();
        std::vector<Tensor> out;
        for (std::uint32_t i = 0; i < n; ++i) out.push_back(tensor());
        return out;
    }
    bool done() const { return pos_ == size_; }
    std::uint64_t offset() const { return base_ + pos_; }
    void expect_done(const std::string& what) const {
        if (!done()) throw FormatError("checkpoint: unexpected bytes at end of " + what, offset());
    }

private:
    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw FormatError("checkpoint: truncated data", offset());
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::uint64_t base_;
};

std::vector<std::uint8_t> tensor_list(const std::vector<const Tensor*>& ts) {
    Writer w;
    w.u32(static_cast<std::uint32_t>(ts.size()));
    for (const Tensor* t : ts) w.tensor(*t);
    return w.buf;
}

std::vector<const Tensor*> const_view(const std::vector<Tensor*>& v) { return {v.begin(), v.end()}; }

void assign(const std::vector<Tensor*>& dst, const std::vector<Tensor>& src, const std::string& section,
            std::uint64_t offset) {
    if (dst.size() != src.size())
        throw FormatError("checkpoint: section '" + section + "' holds " + std::to_string(src.size()) +
                          " tensors, expected " + std::to_string(dst.size()), offset);
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i]->shape() != src[i].shape())
            throw FormatError("checkpoint: tensor " + std::to_string(i) + " of '" + section + "' has shape " +
                              shape_string(src[i].shape()) + ", configuration expects " +
                              shape_string(dst[i]->shape()), offset);
        *dst[i] = src[i];
    }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const TrainState& state) {
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> sections;

    RunConfig rc;
    rc.train = state.config;
    const std::string cfg = rc.serialize();
    sections.emplace_back("config", std::vector<std::uint8_t>(cfg.begin(), cfg.end()));

    Writer st;
    st.u64(state.epoch);
    st.u64(state.adam.step);
    const std::string rng = state.rng.state();
    st.u32(static_cast<std::uint32_t>(rng.size()));
    st.bytes(rng);
    sections.emplace_back("state", st.buf);

    Model& m = const_cast<Model&>(state.model);
    sections.emplace_back("extractor", tensor_list(const_view(m.extractor.tensors())));
    sections.emplace_back("decomposer", tensor_list(const_view(m.decomposer.tensors())));
    sections.emplace_back("cic", tensor_list(const_view(m.cic.tensors())));
    sections.emplace_back("memory", tensor_list({&m.memory.items}));
    std::vector<const Tensor*> am, av;
    for (const auto& t : state.adam.first_moment) am.push_back(&t);
    for (const auto& t : state.adam.second_moment) av.push_back(&t);
    sections.emplace_back("adam_m", tensor_list(am));
    sections.emplace_back("adam_v", tensor_list(av));
    if (m.clusters) sections.emplace_back("clusters", tensor_list({&m.clusters->centers}));

    Writer out;
    out.buf.insert(out.buf.end(), std::begin(kMagic), std::end(kMagic));
    out.u32(static_cast<std::uint32_t>(sections.size()));
    for (const auto& [name, payload] : sections) {
        out.u32(static_cast<std::uint32_t>(name.size()));
        out.bytes(name);
        out.u64(payload.size());
        out.buf.insert(out.buf.end(), payload.begin(), payload.end());
    }
    return out.buf;
}

TrainState decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("checkpoint: bad magic, expected CRC1", 0);
    Reader top(bytes.data() + 4, bytes.size() - 4, 4);
    const std::uint32_t count = top.u32();
    struct Section {
        std::uint64_t offset;
        std::size_t start, size;
    };
    std::map<std::string, Section> sections;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint64_t at = top.offset();
        const std::uint32_t name_len = top.u32();
        if (name_len > 256) throw FormatError("checkpoint: implausible section name length", at);
        const std::string name = top.bytes(name_len);
        const std::uint64_t len = top.u64();
        const std::uint64_t start = top.offset();
        if (len > bytes.size() - start) throw FormatError("checkpoint: section '" + name + "' is truncated", start);
        top.bytes(static_cast<std::size_t>(len));
        if (!sections.emplace(name, Section{start, static_cast<std::size_t>(start), static_cast<std::size_t>(len)}).second)
            throw FormatError("checkpoint: duplicate section '" + name + "'", at);
    }
    top.expect_done("checkpoint");

    auto reader = [&](const std::string& name) {
        auto it = sections.find(name);
        if (it == sections.end()) throw FormatError("checkpoint: missing section '" + name + "'", bytes.size());
        return Reader(bytes.data() + it->second.start, it->second.size, it->second.offset);
    };

    TrainState state;
    {
        auto r = reader("config");
        const auto& sec = sections.at("config");
        try {
            state.config = RunConfig::parse(r.bytes(sec.size)).train;
            state.config.validate();
        } catch (const ConfigError& e) {
            throw FormatError(std::string("checkpoint: bad config section: ") + e.what(), sec.offset);
        }
    }
    Rng scratch(0);
    state.model = Model::init(state.config, scratch);
    {
        auto r = reader("state");
        state.epoch = r.u64();
        state.adam.step = r.u64();
        const std::uint32_t n = r.u32();
        state.rng.restore(r.bytes(n));
        r.expect_done("state");
    }
    auto load_list = [&](const std::string& name, const std::vector<Tensor*>& dst) {
        auto r = reader(name);
        const auto offset = r.offset();
        const auto ts = r.tensors();
        r.expect_done(name);
        assign(dst, ts, name, offset);
    };
    load_list("extractor", state.model.extractor.tensors());
    load_list("decomposer", state.model.decomposer.tensors());
    load_list("cic", state.model.cic.tensors());
    load_list("memory", {&state.model.memory.items});
    for (const char* name : {"adam_m", "adam_v"}) {
        auto r = reader(name);
        auto ts = r.tensors();
        r.expect_done(name);
        (std::string(name) == "adam_m" ? state.adam.first_moment : state.adam.second_moment) = std::move(ts);
    }
    if (state.adam.first_moment.size() != state.adam.second_moment.size())
        throw FormatError("checkpoint: optimizer moment counts differ", sections.at("adam_v").offset);
    if (sections.count("clusters")) {
        auto r = reader("clusters");
        auto ts = r.tensors();
        r.expect_done("clusters");
        if (ts.size() != 1 || ts[0].rank() != 2 || ts[0].dim(1) != state.config.factors)
            throw FormatError("checkpoint: cluster centers do not match the factor count", sections.at("clusters").offset);
        state.model.clusters = ClusterModel{std::move(ts[0])};
    }
    return state;
}

void save_checkpoint(const std::string& path, const TrainState& state) {
    const auto bytes = encode_checkpoint(state);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + path + "'");
}

TrainState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace crc
