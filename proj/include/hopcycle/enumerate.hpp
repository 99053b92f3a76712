#pragma once

// Generators up to rotation and global sign flip, with admissibility and
// prediction verdicts per cycle length.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stability.hpp"
#include "trace.hpp"

namespace hopcycle {

/// Lexicographically smallest sign string ('+' before '-') over all rotations
/// of eta and of -eta.
inline std::string canonical_form(const GeneratorVector& eta) {
    std::string best;
    for (const auto& g : {eta, -eta}) {
        for (std::size_t k = 0; k < g.period(); ++k) {
            auto s = to_sign_string(cyclic_shift(g, static_cast<long long>(k)));
            if (best.empty() || s < best) best = std::move(s);
        }
    }
    return best;
}

inline bool is_canonical(const GeneratorVector& eta) { return canonical_form(eta) == to_sign_string(eta); }

/// One representative per rotation / sign-flip class, in increasing string order.
inline std::vector<GeneratorVector> canonical_generators(std::size_t p) {
    if (p < 2 || p > 24) throw InvalidArgument("canonical_generators: need 2 <= p <= 24");
    std::vector<std::string> reps;
    for (unsigned long mask = 0; mask < (1UL << p); ++mask) {
        std::string s(p, '+');
        for (std::size_t i = 0; i < p; ++i)
            if (mask >> (p - 1 - i) & 1UL) s[i] = '-';
        if (is_canonical(parse_generator(s))) reps.push_back(std::move(s));
    }
    std::sort(reps.begin(), reps.end());
    std::vector<GeneratorVector> out;
    out.reserve(reps.size());
    for (const auto& s : reps) out.push_back(parse_generator(s));
    return out;
}

struct EnumerationRow {
    std::string eta;
    std::size_t n = 0;
    std::size_t rank_sigma = 0;
    std::size_t dim_w = 0;
    bool admissible = false;
    bool adjacent_switches = false;
    std::optional<RationalVector> companion_row;
    CycleType cycle_type = CycleType::none;
};

/// Every canonical generator of period p with every n in [1, p], or only the
/// given n.
inline std::vector<EnumerationRow> enumerate_cycles(std::size_t p, std::optional<std::size_t> n, const ModelParams& params,
                                                    std::size_t workers = 1) {
    if (n && (*n < 1 || *n > p)) throw InvalidDimension("enumerate_cycles: need 1 <= n <= p");
    const auto gens = canonical_generators(p);
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t g = 0; g < gens.size(); ++g) {
        if (n) cells.emplace_back(g, *n);
        else
            for (std::size_t k = 1; k <= p; ++k) cells.emplace_back(g, k);
    }
    std::vector<EnumerationRow> rows(cells.size());
    parallel_for(cells.size(), workers, [&](std::size_t i) {
        const auto& [g, k] = cells[i];
        const auto rep = predict_cycle(gens[g], k, params);
        rows[i] = {to_sign_string(gens[g]), k, rep.rank_sigma, rep.dim_w, rep.admissible,
                   rep.adjacent_switches, rep.companion_row, rep.cycle_type};
    });
    return rows;
}

} // namespace hopcycle
