#include "tracekit/sketch.hpp"

#include <cmath>

namespace tracekit::sketch {

namespace {

// splitmix64 finalizer; bijective 64-bit mix.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t entry_key(uint64_t seed, Index row, Index col, uint64_t lane) {
    uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<uint64_t>(col));
    h = mix64(h ^ static_cast<uint64_t>(row));
    return mix64(h ^ lane);
}

// Uniform in the open interval (0,1): 53 mantissa bits plus a half-ulp shift.
inline double to_open01(uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double ProbeStream::uniform_entry(uint64_t seed, Index row, Index col) {
    return to_open01(entry_key(seed, row, col, 2));
}

double ProbeStream::entry(uint64_t seed, ProbeKind kind, Index row, Index col) {
    if (kind == ProbeKind::Rademacher) {
        return (entry_key(seed, row, col, 0) & 1ull) ? 1.0 : -1.0;
    }
    // Box-Muller on two per-entry uniforms.
    const double u1 = to_open01(entry_key(seed, row, col, 0));
    const double u2 = to_open01(entry_key(seed, row, col, 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix ProbeStream::draw_block(Index cols) {
    if (cols < 1) throw ParameterError("draw_block: cols must be >= 1");
    Matrix block(n_, cols);
    for (Index j = 0; j < cols; ++j) {
        const Index col = next_col_ + j;
        for (Index i = 0; i < n_; ++i) {
            block(i, j) = entry(seed_, kind_, i, col);
        }
    }
    next_col_ += cols;
    return block;
}

ProbeStream ProbeStream::substream(uint64_t seed, ProbeRole role, Index n,
                                   ProbeKind kind) {
    return ProbeStream(mix64(seed ^ (static_cast<uint64_t>(role) << 32)), n, kind);
}

}  // namespace tracekit::sketch
