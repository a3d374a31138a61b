#include "hybridfv/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace hybridfv {

namespace {

constexpr char kMagic[4] = {'X', 'R', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        T r = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            r = static_cast<T>((r << 8) | ((v >> (8 * i)) & 0xffu));
        return r;
    }
    return v;
}

void put_u32(std::ostream& os, std::uint32_t v) {
    v = byteswap_if_big(v);
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return byteswap_if_big(v);
}

void put_f64(std::ostream& os, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    bits = byteswap_if_big(bits);
    os.write(reinterpret_cast<const char*>(&bits), 8);
}

double get_f64(std::istream& is) {
    std::uint64_t bits = 0;
    is.read(reinterpret_cast<char*>(&bits), 8);
    bits = byteswap_if_big(bits);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

void put_field(std::ostream& os, const Field& f) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(f.data()),
                 static_cast<std::streamsize>(f.size() * 8));
    } else {
        for (double x : f) put_f64(os, x);
    }
}

void get_field(std::istream& is, Field& f) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(f.data()),
                static_cast<std::streamsize>(f.size() * 8));
    } else {
        for (double& x : f) x = get_f64(is);
    }
}

struct RosterEntry {
    std::string name;
    std::uint8_t kind;  // 0 cell, 1 face
    std::uint32_t components;
};

std::vector<RosterEntry> roster_for(int axes) {
    return {{"u", 0, static_cast<std::uint32_t>(axes)},
            {"T", 0, 1},
            {"p", 0, 1},
            {"rho", 0, 1},
            {"phi", 1, static_cast<std::uint32_t>(axes)}};
}

}  // namespace

std::string snapshot_filename(long step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%08ld.snap", step);
    return buf;
}

void write_snapshot(const StructuredGrid& g, const FieldState& state, double dt,
                    const std::string& path) {
    if (!state_shape_ok(g, state))
        throw std::invalid_argument("write_snapshot: state does not match grid");
    const std::string tmp = path + ".partial";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("write_snapshot: cannot open " + tmp);
        os.write(kMagic, 4);
        put_u32(os, kVersion);
        put_u32(os, static_cast<std::uint32_t>(g.axes));
        for (int a = 0; a < g.axes; ++a)
            put_u32(os, static_cast<std::uint32_t>(g.dims[a]));
        const auto roster = roster_for(g.axes);
        put_u32(os, static_cast<std::uint32_t>(roster.size()));
        for (const auto& r : roster) {
            put_u32(os, static_cast<std::uint32_t>(r.name.size()));
            os.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
            os.put(static_cast<char>(r.kind));
            put_u32(os, r.components);
        }
        put_f64(os, state.time);
        put_f64(os, dt);
        for (int a = 0; a < g.axes; ++a) put_field(os, state.u[a]);
        put_field(os, state.T);
        put_field(os, state.p);
        put_field(os, state.rho);
        for (int a = 0; a < g.axes; ++a) put_field(os, state.phi.comp[a]);
        if (!os) throw std::runtime_error("write_snapshot: write failed " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

SnapshotData read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_snapshot: bad magic in " + path);
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw std::runtime_error("read_snapshot: unsupported version in " + path);
    SnapshotData snap;
    snap.axes = static_cast<int>(get_u32(is));
    if (snap.axes != 2 && snap.axes != 3)
        throw std::runtime_error("read_snapshot: bad axis count in " + path);
    StructuredGrid g;
    g.axes = snap.axes;
    for (int a = 0; a < snap.axes; ++a) {
        snap.extents[a] = static_cast<int>(get_u32(is));
        g.dims[a] = snap.extents[a];
        if (g.dims[a] < 1)
            throw std::runtime_error("read_snapshot: bad extents in " + path);
    }
    const std::uint32_t n_fields = get_u32(is);
    const auto expected = roster_for(snap.axes);
    if (n_fields != expected.size())
        throw std::runtime_error("read_snapshot: unexpected roster in " + path);
    for (const auto& want : expected) {
        const std::uint32_t len = get_u32(is);
        std::string name(len, '\0');
        is.read(name.data(), len);
        const std::uint8_t kind = static_cast<std::uint8_t>(is.get());
        const std::uint32_t comps = get_u32(is);
        if (!is || name != want.name || kind != want.kind || comps != want.components)
            throw std::runtime_error("read_snapshot: roster mismatch in " + path);
    }
    snap.time = get_f64(is);
    snap.dt = get_f64(is);

    snap.state = make_state(g);
    snap.state.time = snap.time;
    for (int a = 0; a < snap.axes; ++a) get_field(is, snap.state.u[a]);
    get_field(is, snap.state.T);
    get_field(is, snap.state.p);
    get_field(is, snap.state.rho);
    for (int a = 0; a < snap.axes; ++a) get_field(is, snap.state.phi.comp[a]);
    if (!is) throw std::runtime_error("read_snapshot: truncated payload in " + path);
    is.peek();
    if (!is.eof())
        throw std::runtime_error("read_snapshot: trailing bytes in " + path);
    return snap;
}

FieldState read_snapshot_for_grid(const StructuredGrid& g, const std::string& path) {
    SnapshotData snap = read_snapshot(path);
    if (snap.axes != g.axes)
        throw std::runtime_error("read_snapshot: axis mismatch for " + path);
    for (int a = 0; a < g.axes; ++a)
        if (snap.extents[a] != g.dims[a])
            throw std::runtime_error("read_snapshot: extent mismatch for " + path);
    return std::move(snap.state);
}

std::vector<std::pair<long, std::string>> list_snapshots(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::pair<long, std::string>> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        long step = -1;
        if (name.size() > 10 && name.rfind("step_", 0) == 0 &&
            name.substr(name.size() - 5) == ".snap")
            step = std::strtol(name.c_str() + 5, nullptr, 10);
        if (step >= 0) out.emplace_back(step, entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace hybridfv
