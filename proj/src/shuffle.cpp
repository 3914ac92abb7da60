#include "confound/shuffle.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "confound/errors.hpp"

namespace confound {

namespace {

/// Stratum position lists keyed by code, ascending positions, sorted codes.
std::map<int, std::vector<int>> stratum_positions(const std::vector<int>& strata) {
    std::map<int, std::vector<int>> groups;
    for (std::size_t i = 0; i < strata.size(); ++i)
        groups[strata[i]].push_back(static_cast<int>(i));
    return groups;
}

void fisher_yates(std::vector<int>& positions, std::vector<int>& perm, RngStream& rng) {
    // perm[pos] gets a uniformly random arrangement of the positions' own
    // current perm entries.
    const int m = static_cast<int>(positions.size());
    for (int i = m - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[positions[i]], perm[positions[j]]);
    }
}

}  // namespace

RestrictedPermutation restricted_permutation(const std::vector<int>& strata, RngStream& rng) {
    RestrictedPermutation rp;
    rp.strata = strata;
    rp.perm.resize(strata.size());
    std::iota(rp.perm.begin(), rp.perm.end(), 0);
    for (auto& [code, positions] : stratum_positions(strata))
        fisher_yates(positions, rp.perm, rng);
    return rp;
}

Eigen::VectorXd restricted_shuffle(const Eigen::VectorXd& y, const std::vector<int>& strata,
                                   RngStream& rng) {
    if (static_cast<std::size_t>(y.size()) != strata.size())
        throw ValidationError("restricted_shuffle: length mismatch");
    Eigen::VectorXd out = y;
    restricted_shuffle_inplace(out, strata, rng);
    return out;
}

void restricted_shuffle_inplace(Eigen::VectorXd& y, const std::vector<int>& strata,
                                RngStream& rng) {
    if (static_cast<std::size_t>(y.size()) != strata.size())
        throw ValidationError("restricted_shuffle: length mismatch");
    for (auto& [code, positions] : stratum_positions(strata)) {
        const int m = static_cast<int>(positions.size());
        for (int i = m - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
            std::swap(y[positions[i]], y[positions[j]]);
        }
    }
}

Eigen::VectorXd standard_shuffle(const Eigen::VectorXd& y, RngStream& rng) {
    Eigen::VectorXd out = y;
    standard_shuffle_inplace(out, rng);
    return out;
}

void standard_shuffle_inplace(Eigen::VectorXd& y, RngStream& rng) {
    for (Eigen::Index i = y.size() - 1; i > 0; --i) {
        const auto j =
            static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(y[i], y[j]);
    }
}

void standard_shuffle_inplace(std::vector<int>& values, RngStream& rng) {
    for (std::size_t i = values.size(); i-- > 1;) {
        const auto j = static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(values[i], values[j]);
    }
}

std::uint64_t count_restricted(const std::vector<int>& strata, std::uint64_t cap) {
    std::uint64_t total = 1;
    for (const auto& [code, positions] : stratum_positions(strata)) {
        for (std::size_t k = 2; k <= positions.size(); ++k) {
            if (total > (cap + 1) / k) return cap + 1;
            total *= k;
            if (total > cap) return cap + 1;
        }
    }
    return total;
}

std::vector<std::vector<int>> enumerate_restricted_permutations(const std::vector<int>& strata,
                                                                std::uint64_t cap) {
    const std::uint64_t count = count_restricted(strata, cap);
    if (count > cap)
        throw ValidationError("enumerate_restricted: permutation count exceeds cap of " +
                              std::to_string(cap));
    auto groups = stratum_positions(strata);
    std::vector<std::vector<int>> per_stratum_orders;  // local arrangements per stratum
    std::vector<std::vector<int>> positions_list;
    for (auto& [code, positions] : groups) positions_list.push_back(positions);

    std::vector<std::vector<int>> out;
    out.reserve(count);
    std::vector<int> base(strata.size());
    std::iota(base.begin(), base.end(), 0);

    // Odometer over per-stratum permutations via std::next_permutation on
    // local index arrays (indices are distinct, so every arrangement is
    // distinct as an index permutation).
    std::vector<std::vector<int>> locals;
    for (const auto& positions : positions_list) {
        std::vector<int> l(positions.size());
        std::iota(l.begin(), l.end(), 0);
        locals.push_back(l);
    }
    for (;;) {
        std::vector<int> perm = base;
        for (std::size_t s = 0; s < positions_list.size(); ++s) {
            const auto& positions = positions_list[s];
            for (std::size_t k = 0; k < positions.size(); ++k)
                perm[positions[k]] = positions[locals[s][k]];
        }
        out.push_back(std::move(perm));
        // advance the odometer
        std::size_t s = 0;
        for (; s < locals.size(); ++s) {
            if (std::next_permutation(locals[s].begin(), locals[s].end())) break;
            // wrapped to identity, carry to the next stratum
        }
        if (s == locals.size()) break;
    }
    return out;
}

std::vector<Eigen::VectorXd> enumerate_restricted(const Eigen::VectorXd& y,
                                                  const std::vector<int>& strata,
                                                  std::uint64_t cap) {
    if (static_cast<std::size_t>(y.size()) != strata.size())
        throw ValidationError("enumerate_restricted: length mismatch");
    std::vector<Eigen::VectorXd> out;
    for (const auto& perm : enumerate_restricted_permutations(strata, cap)) {
        Eigen::VectorXd v(y.size());
        for (std::size_t i = 0; i < perm.size(); ++i) v[static_cast<Eigen::Index>(i)] = y[perm[i]];
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace confound
