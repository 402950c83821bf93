#pragma once

#include "hypocouette/config.hpp"
#include "hypocouette/nonlinear_dynamics.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>

namespace hypocouette {

// Binary layout (host byte order, little-endian on supported targets):
//   char[8] "HYPOCKPT" | u32 version | u32 kind (0 linear mode, 1 full field)
//   i32 k or K | i32 n_y | f64 dealias | f64 t | f64 nu
//   f64[n_y] shear coefficients W(t) | c128[...] vorticity coefficients
// A JSON sidecar `<file>.meta` repeats the header and the FNV-1a hash of the file.

inline constexpr char kCheckpointMagic[8] = {'H', 'Y', 'P', 'O', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
void put(std::string& buf, const T& v)
{
    const auto* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
}

class Cursor {
public:
    explicit Cursor(const std::string& data) : data_(data) {}
    template <class T>
    T take()
    {
        if (pos_ + sizeof(T) > data_.size()) throw CheckpointError("checkpoint: truncated file");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    const std::string& data_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_checkpoint_file(const std::string& path, const std::string& buf, const nlohmann::json& meta_in)
{
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("checkpoint: cannot write '" + path + "'");
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    nlohmann::json meta = meta_in;
    meta["format"] = "HYPOCKPT";
    meta["version"] = kCheckpointVersion;
    meta["fnv1a"] = content_hash(buf);
    meta["bytes"] = buf.size();
    std::ofstream m(path + ".meta", std::ios::trunc);
    m << meta.dump(2) << "\n";
}

inline std::string header(std::uint32_t kind, int k, int ny, real dealias, real t, real nu)
{
    std::string buf(kCheckpointMagic, kCheckpointMagic + 8);
    put(buf, kCheckpointVersion);
    put(buf, kind);
    put(buf, static_cast<std::int32_t>(k));
    put(buf, static_cast<std::int32_t>(ny));
    put(buf, dealias);
    put(buf, t);
    put(buf, nu);
    return buf;
}

struct Header {
    std::uint32_t kind;
    int k;
    int ny;
    real dealias, t, nu;
};

inline Header read_header(Cursor& c)
{
    char magic[8];
    for (char& ch : magic) ch = c.take<char>();
    if (std::memcmp(magic, kCheckpointMagic, 8) != 0) throw CheckpointError("checkpoint: bad magic");
    if (c.take<std::uint32_t>() != kCheckpointVersion) throw CheckpointError("checkpoint: unsupported version");
    Header h{};
    h.kind = c.take<std::uint32_t>();
    h.k = c.take<std::int32_t>();
    h.ny = c.take<std::int32_t>();
    h.dealias = c.take<real>();
    h.t = c.take<real>();
    h.nu = c.take<real>();
    if (h.ny < 1 || h.ny > (1 << 24)) throw CheckpointError("checkpoint: implausible n_y");
    return h;
}

inline void verify_meta(const std::string& path, const std::string& data)
{
    if (!std::filesystem::exists(path + ".meta")) return;
    std::ifstream m(path + ".meta");
    nlohmann::json meta;
    try {
        m >> meta;
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint: unreadable sidecar: ") + e.what());
    }
    if (meta.value("fnv1a", "") != content_hash(data)) throw CheckpointError("checkpoint: hash mismatch with sidecar");
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const LinearModeState& s, real dealias = 2.0 / 3.0)
{
    const int ny = static_cast<int>(s.omega.size());
    std::string buf = detail::header(0, s.k, ny, dealias, s.t, s.nu);
    for (real w : s.profile.w_coeffs()) detail::put(buf, w);
    for (const auto& c : s.omega) detail::put(buf, c);
    detail::write_checkpoint_file(path, buf, {{"kind", "linear"}, {"k", s.k}, {"n_y", ny}, {"t", s.t}, {"nu", s.nu}});
}

inline void save_checkpoint(const std::string& path, const NonlinearState& s)
{
    const auto& g = s.omega.grid();
    std::string buf = detail::header(1, g.kmax(), g.ny(), g.dealias_fraction(), s.t, s.nu);
    for (real w : s.profile.w_coeffs()) detail::put(buf, w);
    for (int k = -g.kmax(); k <= g.kmax(); ++k)
        for (const auto& c : s.omega.mode(k)) detail::put(buf, c);
    detail::write_checkpoint_file(path, buf,
                                  {{"kind", "nonlinear"}, {"n_x", g.kmax()}, {"n_y", g.ny()}, {"t", s.t}, {"nu", s.nu}});
}

inline LinearModeState load_linear_checkpoint(const std::string& path)
{
    const std::string data = detail::read_file(path);
    detail::verify_meta(path, data);
    detail::Cursor c(data);
    const auto h = detail::read_header(c);
    if (h.kind != 0) throw CheckpointError("checkpoint: not a linear-mode checkpoint");
    RealVector w(static_cast<std::size_t>(h.ny));
    for (auto& x : w) x = c.take<real>();
    ComplexVector om(static_cast<std::size_t>(h.ny));
    for (auto& x : om) x = c.take<cplx>();
    if (!c.done()) throw CheckpointError("checkpoint: trailing bytes");
    const ChannelGrid g(std::max(1, std::abs(h.k)), h.ny, h.dealias);
    return LinearModeState{h.k, std::move(om), h.t, h.nu, ShearProfile(g, std::move(w), h.nu, h.t)};
}

inline NonlinearState load_nonlinear_checkpoint(const std::string& path)
{
    const std::string data = detail::read_file(path);
    detail::verify_meta(path, data);
    detail::Cursor c(data);
    const auto h = detail::read_header(c);
    if (h.kind != 1) throw CheckpointError("checkpoint: not a full-field checkpoint");
    if (h.k < 0 || h.k > 4096) throw CheckpointError("checkpoint: implausible n_x");
    RealVector w(static_cast<std::size_t>(h.ny));
    for (auto& x : w) x = c.take<real>();
    auto g = std::make_shared<const ChannelGrid>(h.k, h.ny, h.dealias);
    SpectralField f(g, Basis::Sine);
    for (int k = -h.k; k <= h.k; ++k)
        for (auto& x : f.mode(k)) x = c.take<cplx>();
    if (!c.done()) throw CheckpointError("checkpoint: trailing bytes");
    return NonlinearState{std::move(f), ShearProfile(*g, std::move(w), h.nu, h.t), h.t, h.nu, nullptr};
}

}  // namespace hypocouette
