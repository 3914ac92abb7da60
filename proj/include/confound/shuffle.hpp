#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "confound/rng.hpp"

namespace confound {

/// Index permutation that maps every stratum onto itself. perm[i] = j means
/// the output takes position i's value from source position j.
struct RestrictedPermutation {
    std::vector<int> perm;
    std::vector<int> strata;
};

/// Uniformly random permutation restricted to the given strata (Fisher-Yates
/// within each stratum; strata processed in sorted code order).
RestrictedPermutation restricted_permutation(const std::vector<int>& strata, RngStream& rng);

/// y permuted by a uniformly random restricted permutation; the multiset of
/// y within every stratum is preserved.
Eigen::VectorXd restricted_shuffle(const Eigen::VectorXd& y, const std::vector<int>& strata,
                                   RngStream& rng);

/// Unrestricted uniform shuffle of y.
Eigen::VectorXd standard_shuffle(const Eigen::VectorXd& y, RngStream& rng);

/// In-place variants used by the permutation engines.
void restricted_shuffle_inplace(Eigen::VectorXd& y, const std::vector<int>& strata, RngStream& rng);
void standard_shuffle_inplace(Eigen::VectorXd& y, RngStream& rng);
void standard_shuffle_inplace(std::vector<int>& values, RngStream& rng);

/// Number of restricted permutations (product of per-stratum factorials);
/// saturates at cap+1 when it exceeds cap.
std::uint64_t count_restricted(const std::vector<int>& strata, std::uint64_t cap);

/// All distinct restricted index permutations; throws when the count
/// exceeds cap.
std::vector<std::vector<int>> enumerate_restricted_permutations(const std::vector<int>& strata,
                                                                std::uint64_t cap);

/// All distinct restricted rearrangements of y (one per index permutation).
std::vector<Eigen::VectorXd> enumerate_restricted(const Eigen::VectorXd& y,
                                                  const std::vector<int>& strata,
                                                  std::uint64_t cap);

}  // namespace confound
