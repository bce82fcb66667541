#ifndef BNR_KERNELS_HPP
#define BNR_KERNELS_HPP

#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <vector>

#include "bnr/core_types.hpp"

namespace bnr {

/// Serial is the reference path; Parallel distributes independent work
/// items over OpenMP threads and must produce bit-identical results.
enum class Execution { Serial, Parallel };

namespace kernels {

/// Calls fn(i) for every i in [0, n). If any call throws, the exception
/// from the smallest failing index is rethrown after all work finishes.
void for_each_index(std::size_t n, Execution mode, const std::function<void(std::size_t)>& fn);

/// Column j of each per-chain matrix (rows = iterations) gathered into one
/// iterations x chains matrix.
Matrix gather_column(const std::vector<Matrix>& per_chain, Eigen::Index j);

/// Max of rank-normalized and folded split R-hat for every column.
Vector rhat_columns(const std::vector<Matrix>& per_chain, Execution mode);

/// Type-7 (linear interpolation) quantiles of each column, pooled over
/// chains. Result is probs.size() x columns.
Matrix column_quantiles(const std::vector<Matrix>& per_chain, std::span<const double> probs,
                        Execution mode);

/// Pooled mean of each column.
Vector column_means(const std::vector<Matrix>& per_chain, Execution mode);

}  // namespace kernels
}  // namespace bnr

#endif
