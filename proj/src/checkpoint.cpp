#include "bnr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace bnr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("checkpoint: truncated file");
    return value;
}

void put_doubles(std::ostream& out, const double* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void get_doubles(std::istream& in, double* data, std::size_t count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw IoError("checkpoint: truncated file");
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    const ChainState& st = ckpt.state;
    const auto V = static_cast<std::uint32_t>(st.V());
    const auto R = static_cast<std::uint32_t>(st.R());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    put(out, kCheckpointVersion);
    put(out, V);
    put(out, R);
    put<std::uint64_t>(out, ckpt.iteration);
    for (auto word : ckpt.rng) put<std::uint64_t>(out, word);
    put(out, st.tau2);
    put(out, st.mu);
    put(out, st.theta);
    put(out, st.Delta);
    put_doubles(out, st.gamma.data(), st.q());
    put_doubles(out, st.s.data(), st.q());
    put_doubles(out, st.u.data(), static_cast<std::size_t>(st.u.size()));
    for (auto x : st.xi) put<std::uint8_t>(out, x);
    for (int l : st.lambda) put<std::int8_t>(out, static_cast<std::int8_t>(l));
    for (Eigen::Index r = 0; r < st.piTilde.rows(); ++r) {
        for (Eigen::Index j = 0; j < 3; ++j) put(out, st.piTilde(r, j));
    }
    put_doubles(out, st.M.data(), static_cast<std::size_t>(st.M.size()));
    if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw IoError("checkpoint: bad magic header");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw IoError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto V = get<std::uint32_t>(in);
    const auto R = get<std::uint32_t>(in);
    if (V < 2 || R < 1) throw IoError("checkpoint: invalid dimensions");
    const auto q = static_cast<Eigen::Index>(edge_count(V));

    Checkpoint ckpt;
    ckpt.iteration = get<std::uint64_t>(in);
    for (auto& word : ckpt.rng) word = get<std::uint64_t>(in);
    ChainState& st = ckpt.state;
    st.tau2 = get<double>(in);
    st.mu = get<double>(in);
    st.theta = get<double>(in);
    st.Delta = get<double>(in);
    st.gamma.resize(q);
    st.s.resize(q);
    get_doubles(in, st.gamma.data(), static_cast<std::size_t>(q));
    get_doubles(in, st.s.data(), static_cast<std::size_t>(q));
    st.u.resize(R, V);
    get_doubles(in, st.u.data(), static_cast<std::size_t>(st.u.size()));
    st.xi.resize(V);
    for (auto& x : st.xi) x = get<std::uint8_t>(in);
    st.lambda.resize(R);
    for (auto& l : st.lambda) l = get<std::int8_t>(in);
    st.piTilde.resize(R, 3);
    for (Eigen::Index r = 0; r < st.piTilde.rows(); ++r) {
        for (Eigen::Index j = 0; j < 3; ++j) st.piTilde(r, j) = get<double>(in);
    }
    st.M.resize(R, R);
    get_doubles(in, st.M.data(), static_cast<std::size_t>(st.M.size()));
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        write_checkpoint(out, ckpt);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace bnr
