#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>

#include "o2hopf/pde/grid.hpp"

namespace o2hopf::pde {

// Field checkpoint: "O2HF", version, {n, N1, K} as u32, {L, dt} as f64,
// then f64 coefficient payload ordered (k, x1-index, component, re/im).
// Little-endian throughout.
inline void write_checkpoint(const std::string& path, const ChannelField& f,
                             const DiscretizationGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const char magic[4] = {'O', '2', 'H', 'F'};
    out.write(magic, 4);
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(1u);
    put_u32(std::uint32_t(f.n));
    put_u32(std::uint32_t(f.N1));
    put_u32(std::uint32_t(f.K));
    put_f64(grid.L);
    put_f64(grid.dt);
    for (int k = 0; k <= f.K; ++k)
        for (int i = 0; i < f.N1; ++i)
            for (int c = 0; c < f.n; ++c) {
                put_f64(f.modes[k](c, i).real());
                put_f64(f.modes[k](c, i).imag());
            }
    if (!out) throw IoError("short write to '" + path + "'");
}

struct Checkpoint {
    ChannelField field;
    DiscretizationGrid grid;
};

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "O2HF", 4) != 0)
        throw ParseError("bad checkpoint magic in '" + path + "'");
    auto get_u32 = [&] {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_f64 = [&] {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const std::uint32_t version = get_u32();
    if (version != 1u) throw ParseError("unsupported checkpoint version");
    Checkpoint cp;
    const int n = int(get_u32());
    cp.grid.N1 = int(get_u32());
    cp.grid.K = int(get_u32());
    cp.grid.L = get_f64();
    cp.grid.dt = get_f64();
    cp.field.n = n;
    cp.field.N1 = cp.grid.N1;
    cp.field.K = cp.grid.K;
    cp.field.modes.assign(cp.grid.K + 1, CMat::Zero(n, cp.grid.N1));
    for (int k = 0; k <= cp.grid.K; ++k)
        for (int i = 0; i < cp.grid.N1; ++i)
            for (int c = 0; c < n; ++c) {
                const double re = get_f64();
                const double im = get_f64();
                cp.field.modes[k](c, i) = Complex(re, im);
            }
    if (!in) throw ParseError("truncated checkpoint '" + path + "'");
    return cp;
}

}  // namespace o2hopf::pde
